// Command-line front end for the qef library.
//
//   qef validate      --model M.json
//   qef rate          --model M.json --theta X | --theta-rel F
//   qef sweep         --model M.json --theta-max X --dtheta X
//   qef homotopy      --model M.json --theta-max X --dtheta X
//   qef horizon       --model M.json --theta X --horizons 10,20,40 --dt 0.025
//   qef bounds        --model M.json --alphas 20,30 --eps 0.1 --theta-max X
//   qef onemode-check --seed 7
//   qef paper-example --out DIR
//
// Exit codes: 0 success, 2 validation failure, 3 infeasible theta,
// 4 numerical failure.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "qef/qef.hpp"

namespace {

using qef::io::json;
namespace fs = std::filesystem;

constexpr int kExitValidation = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNumerical = 4;

struct Options {
  std::string command;
  std::string model_path;
  std::string out_dir;
  double theta = -1.0;
  double theta_rel = -1.0;
  double theta_max = -1.0;
  double theta_max_rel = -1.0;
  double dtheta = -1.0;
  double cutoff = -1.0;
  double step = -1.0;
  double dt = 0.025;
  std::vector<double> horizons{10.0, 20.0, 40.0};
  std::vector<double> thetas;
  std::vector<double> alphas;
  std::vector<double> eps;
  std::string tail = "matched";
  unsigned threads = 1;
  unsigned seed = 1;
};

json manifest_echo(const Options& o) {
  json m{{"command", o.command}, {"model", o.model_path}, {"out", o.out_dir}, {"threads", o.threads},
         {"seed", o.seed}, {"tail_rule", o.tail}};
  auto opt = [&](const char* key, double v) {
    if (v >= 0.0) m[key] = v;
  };
  opt("theta", o.theta);
  opt("theta_rel", o.theta_rel);
  opt("theta_max", o.theta_max);
  opt("theta_max_rel", o.theta_max_rel);
  opt("dtheta", o.dtheta);
  opt("cutoff", o.cutoff);
  opt("step", o.step);
  if (o.command == "horizon") {
    m["dt"] = o.dt;
    m["horizons"] = o.horizons;
  }
  if (!o.thetas.empty()) m["thetas"] = o.thetas;
  if (!o.alphas.empty()) m["alphas"] = o.alphas;
  if (!o.eps.empty()) m["eps"] = o.eps;
  return m;
}

json summary_base(const Options& o) {
  return json{{"command", o.command}, {"version", qef::io::library_version}, {"manifest", manifest_echo(o)}};
}

qef::StateSpace load(const Options& o) {
  if (o.model_path.empty()) throw qef::ValidationError(qef::Check::parameter, "--model is required");
  return qef::io::build(qef::io::load_model(o.model_path));
}

qef::QuadratureConfig make_config(const qef::StateSpace& ss, const Options& o) {
  auto cfg = qef::QuadratureConfig::for_model(ss);
  if (o.cutoff > 0.0) {
    cfg.cutoff = o.cutoff;
    if (o.step <= 0.0) cfg.step = 5e-5 * cfg.cutoff;
  }
  if (o.step > 0.0) cfg.step = o.step;
  cfg.tail_rule = o.tail == "truncate"    ? qef::TailRule::truncate
                  : o.tail == "asymptote" ? qef::TailRule::asymptote
                                          : qef::TailRule::matched;
  cfg.threads = std::max(1u, o.threads);
  cfg.validate();
  return cfg;
}

double resolve(double absolute, double relative, double theta0, const char* name) {
  if (absolute >= 0.0) return absolute;
  if (relative >= 0.0) return relative * theta0;
  throw qef::ValidationError(qef::Check::parameter, std::string("--") + name + " or --" + name + "-rel is required");
}

std::vector<double> theta_grid(double theta_max, double dtheta) {
  std::vector<double> grid;
  if (theta_max <= 0.0) return {0.0};
  const long steps = std::max(1L, static_cast<long>(std::ceil(theta_max / dtheta - 1e-9)));
  for (long k = 0; k <= steps; ++k) grid.push_back(theta_max * static_cast<double>(k) / static_cast<double>(steps));
  return grid;
}

void emit(const Options& o, const json& summary, const std::string& name) {
  std::cout << summary.dump(2) << '\n';
  if (!o.out_dir.empty()) qef::io::save_json(summary, (fs::path(o.out_dir) / name).string());
}

void save_csv(const Options& o, const qef::io::CsvWriter& csv, const std::string& name) {
  if (!o.out_dir.empty()) csv.save((fs::path(o.out_dir) / name).string());
}

int cmd_validate(const Options& o) {
  json report = summary_base(o);
  try {
    const auto ss = load(o);
    const auto cfg = make_config(ss, o);
    report["ok"] = true;
    report["checks"] = json{{"pr_residual", ss.pr_residual()},
                            {"hurwitz_margin", ss.hurwitz_margin()},
                            {"det_bjb", ss.det_bjb()},
                            {"sigma_residual", ss.sigma_residual()},
                            {"theta0", qef::theta_threshold(ss, cfg)}};
    emit(o, report, "validate.json");
    return 0;
  } catch (const qef::ValidationError& e) {
    report["ok"] = false;
    report["failed_check"] = qef::to_string(e.check());
    report["message"] = e.what();
    emit(o, report, "validate.json");
    std::cerr << "validation failed: " << e.what() << '\n';
    return kExitValidation;
  }
}

int cmd_rate(const Options& o) {
  const auto ss = load(o);
  const auto cfg = make_config(ss, o);
  const double theta0 = qef::theta_threshold(ss, cfg);
  const double theta = resolve(o.theta, o.theta_rel, theta0, "theta");
  const auto rows = qef::rate_profile(ss, theta, cfg);
  const auto r = qef::upsilon_from_profile(ss, theta, cfg, rows);

  qef::io::CsvWriter csv({"lambda", "neg_log_det_D", "classical_integrand"});
  for (const auto& row : rows) csv.row({row.lambda, row.neg_log_det_d, row.classical_integrand});
  save_csv(o, csv, "rate_profile.csv");

  json s = summary_base(o);
  s["theta"] = r.theta;
  s["upsilon"] = r.upsilon;
  s["V"] = qef::io::number_or_null(r.classical_v);
  s["theta0"] = theta0;
  s["margin"] = r.margin;
  s["tail_contrib"] = r.tail_contrib;
  s["n_freq"] = r.n_freq;
  s["accuracy_warning"] = r.accuracy_warning;
  emit(o, s, "rate_summary.json");
  return 0;
}

int cmd_sweep(const Options& o) {
  const auto ss = load(o);
  const auto cfg = make_config(ss, o);
  const double theta0 = qef::theta_threshold(ss, cfg);
  std::vector<double> grid = o.thetas;
  if (grid.empty()) {
    const double tmax = resolve(o.theta_max, o.theta_max_rel, theta0, "theta-max");
    grid = theta_grid(tmax, o.dtheta > 0.0 ? o.dtheta : 0.1 * theta0);
  }
  qef::io::CsvWriter csv({"theta", "upsilon", "V", "margin", "status"});
  std::size_t infeasible = 0;
  for (double t : grid) {
    try {
      const auto r = qef::upsilon(ss, t, cfg);
      csv.row_strings({qef::io::format_number(t), qef::io::format_number(r.upsilon),
                       qef::io::format_number(r.classical_v), qef::io::format_number(r.margin), "ok"});
    } catch (const qef::InfeasibleError& e) {
      ++infeasible;
      csv.row_strings({qef::io::format_number(t), "nan", "nan", qef::io::format_number(e.value()), "infeasible"});
    }
  }
  save_csv(o, csv, "sweep.csv");
  json s = summary_base(o);
  s["theta0"] = theta0;
  s["points"] = grid.size();
  s["infeasible_points"] = infeasible;
  emit(o, s, "sweep_summary.json");
  return 0;
}

int cmd_homotopy(const Options& o) {
  const auto ss = load(o);
  const auto cfg = make_config(ss, o);
  const double theta0 = qef::theta_threshold(ss, cfg);
  const double tmax = resolve(o.theta_max, o.theta_max_rel, theta0, "theta-max");
  const double dtheta = o.dtheta > 0.0 ? o.dtheta : 0.01 * theta0;
  const auto trace = qef::rate_by_homotopy(ss, tmax, dtheta, cfg);
  qef::io::CsvWriter csv({"theta", "upsilon_prime", "upsilon"});
  for (std::size_t i = 0; i < trace.theta_grid.size(); ++i)
    csv.row({trace.theta_grid[i], trace.rate_derivative[i], trace.rate[i]});
  save_csv(o, csv, "homotopy.csv");
  json s = summary_base(o);
  s["theta0"] = theta0;
  s["theta_max"] = tmax;
  s["dtheta"] = dtheta;
  s["upsilon"] = trace.rate.back();
  s["lqg_rate"] = qef::lqg_rate(ss);
  s["upsilon_prime_0"] = trace.rate_derivative.front();
  emit(o, s, "homotopy_summary.json");
  return 0;
}

int cmd_horizon(const Options& o) {
  const auto ss = load(o);
  const auto cfg = make_config(ss, o);
  const double theta0 = qef::theta_threshold(ss, cfg);
  const double theta = resolve(o.theta, o.theta_rel, theta0, "theta");
  if (!(o.dt > 0.0)) throw qef::ValidationError(qef::Check::parameter, "--dt must be positive");
  const long per_unit = std::lround(1.0 / o.dt);
  const auto study = qef::convergence_study(ss, theta, o.horizons, per_unit);
  const double rate = qef::upsilon(ss, theta, cfg).upsilon;
  qef::io::CsvWriter csv({"T", "N", "ln_xi", "rate", "spec_value", "extrapolated_rate"});
  for (const auto& e : study.estimates)
    csv.row({e.horizon, static_cast<double>(e.n_grid), e.ln_xi, e.per_time_rate, e.spec_value,
             study.extrapolated_rate});
  save_csv(o, csv, "horizon.csv");
  json s = summary_base(o);
  s["theta"] = theta;
  s["theta0"] = theta0;
  s["upsilon"] = rate;
  s["extrapolated_rate"] = study.extrapolated_rate;
  s["relative_gap"] = std::abs(study.extrapolated_rate - rate) / rate;
  emit(o, s, "horizon_summary.json");
  return 0;
}

int cmd_bounds(const Options& o) {
  const auto ss = load(o);
  const auto cfg = make_config(ss, o);
  const double theta0 = qef::theta_threshold(ss, cfg);
  const double tmax = o.theta_max >= 0.0 || o.theta_max_rel >= 0.0
                          ? resolve(o.theta_max, o.theta_max_rel, theta0, "theta-max")
                          : 0.9 * theta0;
  const auto grid = theta_grid(tmax, o.dtheta > 0.0 ? o.dtheta : 0.05 * theta0);
  qef::io::CsvWriter csv({"kind", "parameter", "value", "theta_argmin", "status"});
  auto record = [&](const char* kind, double param, auto&& fn) {
    try {
      const qef::BoundResult b = fn();
      csv.row_strings({kind, qef::io::format_number(param), qef::io::format_number(b.value),
                       qef::io::format_number(b.theta), "ok"});
    } catch (const qef::ValidationError&) {
      csv.row_strings({kind, qef::io::format_number(param), "nan", "nan", "infeasible"});
    }
  };
  for (double a : o.alphas) record("tail", a, [&] { return qef::tail_bound(ss, a, grid, cfg); });
  for (double e : o.eps) record("worst_case", e, [&] { return qef::worst_case_lqg_bound(ss, e, grid, cfg); });
  save_csv(o, csv, "bounds.csv");
  json s = summary_base(o);
  s["theta0"] = theta0;
  s["lqg_rate"] = qef::lqg_rate(ss);
  s["rows"] = o.alphas.size() + o.eps.size();
  emit(o, s, "bounds_summary.json");
  return 0;
}

int cmd_onemode_check(const Options& o) {
  using namespace qef;
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> g(0.0, 1.0);
  // Random PD R and a coupling with M^T J M = mu bJ, mu > 0.
  Mat l(2, 2);
  l << 1.0 + std::abs(g(rng)), 0.0, 0.5 * g(rng), 1.0 + std::abs(g(rng));
  const Mat r = l * l.transpose();
  Mat m_mat(2, 2);
  m_mat << 0.5 + 0.5 * std::abs(g(rng)), 0.3 * g(rng), 0.0, 0.5 + 0.5 * std::abs(g(rng));
  const auto p = onemode::make_params(r, m_mat);
  const StateSpace ss = realize(onemode::to_oqho(p));
  const double theta = 0.5 / hinf_norm_squared(ss, QuadratureConfig::for_model(ss));

  double max_gap = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double lambda = -20.0 + 40.0 * k / 99.0;
    const SpectralSample s = spectral_sample(ss, lambda);
    const Complex sv(0.0, lambda);
    const CMat f_closed = onemode::transfer(p, ss.b(), sv);
    max_gap = std::max(max_gap, (f_closed - s.f_val).norm());
    max_gap = std::max(max_gap, (onemode::mho(p.mu, p.nu, sv) - s.psi).norm());
    const auto [c, sn] = onemode::onemode_trig(p.mu, p.nu, sv, theta);
    const TrigBundle t = trig_bundle(s, theta);
    max_gap = std::max(max_gap, (c - t.cos_tp).norm());
    max_gap = std::max(max_gap, (sn - theta * s.psi * t.sinc_tp).norm());
  }
  double max_det = 0.0;
  for (const Complex& pole : onemode::poles(p.mu, p.nu))
    max_det = std::max(max_det, std::abs(onemode::residue_mho(p.mu, p.nu, pole).determinant()));

  json s = summary_base(o);
  s["mu"] = p.mu;
  s["nu"] = p.nu;
  s["max_closed_form_gap"] = max_gap;
  s["max_residue_det"] = max_det;
  const bool ok = max_gap < 1e-10 && max_det < 1e-6;
  s["ok"] = ok;
  emit(o, s, "onemode_check.json");
  return ok ? 0 : kExitNumerical;
}

int cmd_paper_example(const Options& o) {
  using namespace qef;
  const StateSpace ss = example::two_mode();
  const auto cfg = make_config(ss, o);
  const double theta0 = theta_threshold(ss, cfg);
  const double theta_fig2 = 0.9 * theta0;
  const double dtheta = 0.01 * theta0;

  io::CsvWriter fig2({"lambda", "neg_log_det_D", "asymptote"});
  auto fig2_row = [&](double lambda) {
    const double v = -log_det_d(spectral_sample(ss, lambda), theta_fig2, cfg.tol_imag);
    const double asym = lambda > 0.0 ? theta_fig2 * ss.tail_coefficient() / (lambda * lambda) : std::nan("");
    fig2.row({lambda, v, asym});
  };
  for (int k = 0; k <= 2000; ++k) fig2_row(0.05 * k);
  for (int k = 101; k <= 1000; ++k) fig2_row(static_cast<double>(k));
  save_csv(o, fig2, "fig2.csv");

  const auto trace = rate_by_homotopy(ss, 0.9 * theta0, dtheta, cfg);
  io::CsvWriter fig3({"theta", "upsilon_homotopy", "upsilon_direct", "relative_gap"});
  double max_gap = 0.0;
  for (std::size_t i = 0; i < trace.theta_grid.size(); ++i) {
    const double t = trace.theta_grid[i];
    const double direct = upsilon(ss, t, cfg).upsilon;
    const double gap = t > 0.0 ? std::abs(trace.rate[i] - direct) / direct : 0.0;
    max_gap = std::max(max_gap, gap);
    fig3.row({t, trace.rate[i], direct, gap});
  }
  save_csv(o, fig3, "fig3.csv");

  json eig = json::array();
  for (Eigen::Index k = 0; k < ss.a_eigenvalues().size(); ++k)
    eig.push_back(json{{"re", ss.a_eigenvalues()(k).real()}, {"im", ss.a_eigenvalues()(k).imag()}});
  json s = summary_base(o);
  s["theta0"] = theta0;
  s["eig_a"] = eig;
  s["a_norm"] = ss.a_norm();
  s["lqg_rate"] = lqg_rate(ss);
  s["dtheta"] = dtheta;
  s["mesh_step"] = FrequencyMesh(cfg).h;
  s["cutoff"] = cfg.cutoff;
  s["upsilon_at_0.9_theta0"] = trace.rate.back();
  s["cross_method_max_relative_gap"] = max_gap;
  emit(o, s, "summary.json");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Growth rate of quadratic-exponential functionals for linear quantum stochastic systems"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub, bool needs_model) {
    if (needs_model) sub->add_option("--model", o.model_path, "model JSON file")->required();
    sub->add_option("--out", o.out_dir, "output directory");
    sub->add_option("--cutoff", o.cutoff, "frequency cutoff");
    sub->add_option("--step", o.step, "frequency mesh step");
    sub->add_option("--tail", o.tail, "tail rule")->check(CLI::IsMember({"matched", "asymptote", "truncate"}));
    sub->add_option("--threads", o.threads, "worker threads");
  };
  auto add_theta = [&](CLI::App* sub) {
    sub->add_option("--theta", o.theta, "risk-sensitivity parameter");
    sub->add_option("--theta-rel", o.theta_rel, "theta as a multiple of theta0");
  };
  auto add_theta_max = [&](CLI::App* sub) {
    sub->add_option("--theta-max", o.theta_max, "largest theta");
    sub->add_option("--theta-max-rel", o.theta_max_rel, "largest theta as a multiple of theta0");
    sub->add_option("--dtheta", o.dtheta, "theta step");
  };

  auto* validate = app.add_subcommand("validate", "check model invariants");
  add_common(validate, true);
  auto* rate = app.add_subcommand("rate", "growth rate at one theta by frequency quadrature");
  add_common(rate, true);
  add_theta(rate);
  auto* sweep = app.add_subcommand("sweep", "growth rate over a theta grid");
  add_common(sweep, true);
  add_theta_max(sweep);
  sweep->add_option("--thetas", o.thetas, "explicit theta list")->delimiter(',');
  auto* homotopy = app.add_subcommand("homotopy", "growth rate by the Riccati homotopy");
  add_common(homotopy, true);
  add_theta_max(homotopy);
  auto* horizon = app.add_subcommand("horizon", "finite-horizon oracle convergence study");
  add_common(horizon, true);
  add_theta(horizon);
  horizon->add_option("--horizons", o.horizons, "horizon list")->delimiter(',');
  horizon->add_option("--dt", o.dt, "time step");
  auto* bounds = app.add_subcommand("bounds", "tail-probability and worst-case cost bounds");
  add_common(bounds, true);
  add_theta_max(bounds);
  bounds->add_option("--alphas", o.alphas, "alpha list")->delimiter(',');
  bounds->add_option("--eps", o.eps, "relative entropy budgets")->delimiter(',');
  auto* onemode = app.add_subcommand("onemode-check", "closed-form one-mode oracle");
  add_common(onemode, false);
  onemode->add_option("--seed", o.seed, "random seed");
  auto* paper = app.add_subcommand("paper-example", "reproduce the two-mode example");
  add_common(paper, false);

  CLI11_PARSE(app, argc, argv);
  o.command = app.get_subcommands().front()->get_name();

  try {
    if (!o.out_dir.empty()) fs::create_directories(o.out_dir);
    if (o.command == "validate") return cmd_validate(o);
    if (o.command == "rate") return cmd_rate(o);
    if (o.command == "sweep") return cmd_sweep(o);
    if (o.command == "homotopy") return cmd_homotopy(o);
    if (o.command == "horizon") return cmd_horizon(o);
    if (o.command == "bounds") return cmd_bounds(o);
    if (o.command == "onemode-check") return cmd_onemode_check(o);
    if (o.command == "paper-example") return cmd_paper_example(o);
  } catch (const qef::ValidationError& e) {
    std::cerr << "validation failed: " << e.what() << '\n';
    return kExitValidation;
  } catch (const qef::InfeasibleError& e) {
    std::cerr << "infeasible theta: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitNumerical;
}
