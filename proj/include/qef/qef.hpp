#ifndef QEF_QEF_HPP
#define QEF_QEF_HPP

#include "qef/config.hpp"
#include "qef/errors.hpp"
#include "qef/homotopy.hpp"
#include "qef/horizon.hpp"
#include "qef/io.hpp"
#include "qef/linalg.hpp"
#include "qef/model.hpp"
#include "qef/onemode.hpp"
#include "qef/rate.hpp"
#include "qef/spectral.hpp"
#include "qef/two_mode_example.hpp"

#endif  // QEF_QEF_HPP
