#ifndef QEF_LINALG_HPP
#define QEF_LINALG_HPP

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <thread>
#include <vector>

#include "qef/errors.hpp"

namespace qef {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using Complex = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;

namespace linalg {

inline Mat kron(const Mat& x, const Mat& y) {
  Mat out(x.rows() * y.rows(), x.cols() * y.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
  return out;
}

inline Mat sym_part(const Mat& x) { return 0.5 * (x + x.transpose()); }
inline Mat antisym_part(const Mat& x) { return 0.5 * (x - x.transpose()); }
inline CMat herm_part(const CMat& x) { return 0.5 * (x + x.adjoint()); }
inline CMat skew_herm_part(const CMat& x) { return 0.5 * (x - x.adjoint()); }

/// Spectral norm (largest singular value).
template <class Derived>
double op_norm(const Eigen::MatrixBase<Derived>& x) {
  if (x.size() == 0) return 0.0;
  return Eigen::JacobiSVD<typename Derived::PlainObject>(x).singularValues()(0);
}

/// Solves A X + X A^T + Q = 0 by vectorization:
/// (I kron A + A kron I) vec(X) = -vec(Q).
inline Mat solve_lyapunov(const Mat& a, const Mat& q) {
  const Eigen::Index n = a.rows();
  const Mat eye = Mat::Identity(n, n);
  const Mat op = kron(eye, a) + kron(a, eye);
  const Vec rhs = -Eigen::Map<const Vec>(q.data(), n * n);
  Eigen::PartialPivLU<Mat> lu(op);
  Vec x = lu.solve(rhs);
  if (!x.allFinite()) throw NumericalError("Lyapunov solve produced non-finite values");
  return Eigen::Map<Mat>(x.data(), n, n);
}

inline double lyapunov_residual(const Mat& a, const Mat& x, const Mat& q) {
  return (a * x + x * a.transpose() + q).norm();
}

/// Symmetric positive definite square root; rejects when
/// lambda_min <= floor * ||x||.
inline Mat sqrt_spd(const Mat& x, double floor = 1e-12) {
  Eigen::SelfAdjointEigenSolver<Mat> es(sym_part(x));
  const Vec& w = es.eigenvalues();
  const double scale = std::max(std::abs(w.minCoeff()), std::abs(w.maxCoeff()));
  if (!(w.minCoeff() > floor * scale))
    throw ValidationError(Check::parameter, "matrix is not positive definite");
  Mat r = es.eigenvectors() * w.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  return sym_part(r);
}

/// Matrix exponential (Pade-13 scaling and squaring).
inline Mat expm(const Mat& x) { return x.exp(); }

/// Max real part of the spectrum.
inline double spectral_abscissa(const Mat& a) {
  Eigen::EigenSolver<Mat> es(a, false);
  return es.eigenvalues().real().maxCoeff();
}

inline CVec eigenvalues(const Mat& a) {
  Eigen::EigenSolver<Mat> es(a, false);
  return es.eigenvalues();
}

/// f(H) for Hermitian H given its eigendecomposition.
template <class Fn>
CMat hermitian_apply(const Eigen::SelfAdjointEigenSolver<CMat>& es, Fn&& f) {
  const Vec& w = es.eigenvalues();
  Vec fw(w.size());
  for (Eigen::Index k = 0; k < w.size(); ++k) fw(k) = f(w(k));
  const CMat& v = es.eigenvectors();
  return herm_part(v * fw.asDiagonal() * v.adjoint());
}

/// Compensated (Kahan-Babuska) summation.
class KahanSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Evaluates fn(i) for i in [0, count) on up to `threads` workers and returns
/// the results in index order, so reductions over them stay deterministic.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t count, unsigned threads, Fn&& fn) {
  std::vector<T> out(count);
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t i = t; i < count; i += threads) out[i] = fn(i);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace linalg
}  // namespace qef

#endif  // QEF_LINALG_HPP
