#ifndef QEF_IO_HPP
#define QEF_IO_HPP

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qef/errors.hpp"
#include "qef/linalg.hpp"
#include "qef/model.hpp"

namespace qef::io {

using json = nlohmann::json;

inline constexpr const char* library_version = "1.0.0";

/// Model given directly as a realization; Theta optional.
struct StateSpaceInput {
  Mat a;
  Mat b;
  Mat weight;
  std::optional<Mat> theta_ccr;
};

using ModelSpec = std::variant<OqhoParams, StateSpaceInput>;

/// Shortest decimal string that round-trips to the same double.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline Mat matrix_from_json(const json& j, const char* name) {
  if (!j.is_array() || j.empty() || !j.front().is_array())
    throw ValidationError(Check::dimension, std::string(name) + " must be a non-empty 2-D array");
  const std::size_t rows = j.size(), cols = j.front().size();
  Mat out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      throw ValidationError(Check::dimension, std::string(name) + " is not rectangular");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number())
        throw ValidationError(Check::parameter, std::string(name) + " has a non-numeric entry");
      const double v = j[r][c].get<double>();
      if (!std::isfinite(v)) throw ValidationError(Check::parameter, std::string(name) + " has a non-finite entry");
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
  }
  return out;
}

inline json matrix_to_json(const Mat& x) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < x.cols(); ++c) row.push_back(x(r, c));
    rows.push_back(row);
  }
  return rows;
}

/// Accepts {"theta", "R", "M", "Pi"} or {"A", "B", "Pi", "theta"?}.
inline ModelSpec parse_model(const json& j) {
  if (!j.is_object()) throw ValidationError(Check::parameter, "model file must hold a JSON object");
  ModelSpec spec;
  if (j.contains("A") || j.contains("B")) {
    if (!j.contains("A") || !j.contains("B") || !j.contains("Pi"))
      throw ValidationError(Check::parameter, "state-space model needs A, B and Pi");
    StateSpaceInput in;
    in.a = matrix_from_json(j.at("A"), "A");
    in.b = matrix_from_json(j.at("B"), "B");
    in.weight = matrix_from_json(j.at("Pi"), "Pi");
    if (j.contains("theta") && !j.at("theta").is_null()) in.theta_ccr = matrix_from_json(j.at("theta"), "theta");
    spec = std::move(in);
  } else {
    for (const char* key : {"theta", "R", "M", "Pi"})
      if (!j.contains(key)) throw ValidationError(Check::parameter, std::string("model file is missing ") + key);
    OqhoParams p;
    p.theta_ccr = matrix_from_json(j.at("theta"), "theta");
    p.energy = matrix_from_json(j.at("R"), "R");
    p.coupling = matrix_from_json(j.at("M"), "M");
    p.weight = matrix_from_json(j.at("Pi"), "Pi");
    spec = std::move(p);
  }
  return spec;
}

inline ModelSpec load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ValidationError(Check::parameter, std::string("model file is not valid JSON: ") + e.what());
  }
  return parse_model(j);
}

inline StateSpace build(const ModelSpec& spec, const ModelTolerances& tol = {}) {
  if (const auto* p = std::get_if<OqhoParams>(&spec)) return realize(*p, tol);
  const auto& s = std::get<StateSpaceInput>(spec);
  return from_state_space(s.a, s.b, s.weight, s.theta_ccr, tol);
}

inline json model_to_json(const StateSpace& ss) {
  return json{{"A", matrix_to_json(ss.a())},
              {"B", matrix_to_json(ss.b())},
              {"Pi", matrix_to_json(ss.weight())},
              {"theta", matrix_to_json(ss.theta_ccr())}};
}

/// Minimal CSV writer: header row first, numbers in shortest round-trip form.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
    write_row_strings(header);
  }

  void row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_number(v));
    write_row_strings(cells);
  }

  void row_strings(const std::vector<std::string>& cells) { write_row_strings(cells); }

  std::string str() const { return out_.str(); }

  void save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path);
    f << out_.str();
  }

 private:
  void write_row_strings(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw Error("CSV row has the wrong number of cells");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  std::size_t columns_;
  std::ostringstream out_;
};

inline void save_json(const json& j, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  f << j.dump(2) << '\n';
}

}  // namespace qef::io

#endif  // QEF_IO_HPP
