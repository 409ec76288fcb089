#include <gtest/gtest.h>

#include "support.hpp"

using namespace qef;
using namespace qef::onemode;

namespace {

OneModeParams random_params(std::mt19937_64& rng, Eigen::Index m) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat x(2, 2);
  x << g(rng), g(rng), g(rng), g(rng);
  const Mat r = x * x.transpose() + 0.5 * Mat::Identity(2, 2);
  for (;;) {
    Mat mm(m, 2);
    for (Eigen::Index i = 0; i < m; ++i) mm.row(i) << g(rng), g(rng);
    // M^T J M is always a multiple of bJ for two columns; keep mu > 0.
    if ((mm.transpose() * build_j_matrix(m) * mm)(0, 1) > 0.1) return make_params(r, mm);
  }
}

}  // namespace

TEST(ExtractMu, Examples) {
  EXPECT_DOUBLE_EQ(extract_mu(Mat::Identity(2, 2), bj()), 1.0);
  EXPECT_DOUBLE_EQ(extract_mu(1.5 * Mat::Identity(2, 2), bj()), 2.25);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 1.0);
  Mat m(6, 2);
  for (int i = 0; i < 6; ++i) m.row(i) << g(rng), g(rng);
  const Mat j = build_j_matrix(6);
  const Mat mjm = m.transpose() * j * m;
  const double projection = 0.5 * (bj().transpose() * mjm).trace();
  if (projection > 0.0) {
    EXPECT_NEAR(extract_mu(m, j), projection, 1e-14);
  } else {
    EXPECT_THROW(extract_mu(m, j), ValidationError);
  }
}

TEST(ExtractMu, Errors) {
  Mat swap(2, 2);
  swap << 0.0, 1.0, 1.0, 0.0;  // M^T bJ M = -bJ
  try {
    extract_mu(swap, bj());
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.check(), Check::structure);
  }
  EXPECT_THROW(extract_mu(Mat::Identity(3, 3), build_j_matrix(2)), ValidationError);
}

TEST(Drift, EigenvaluesAndRealizeConsistency) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const OneModeParams p = random_params(rng, 4);
    const Mat a = onemode_drift(p.r, p.mu);
    const CVec eig = linalg::eigenvalues(a);
    for (Eigen::Index k = 0; k < 2; ++k) {
      EXPECT_NEAR(eig(k).real(), -p.mu, 1e-10);
      EXPECT_NEAR(std::abs(eig(k).imag()), p.nu, 1e-10);
    }
    const StateSpace ss = realize(to_oqho(p));
    EXPECT_LT((ss.a() - a).norm(), 1e-10 * (1.0 + a.norm()));
    // BJB^T = mu bJ.
    EXPECT_LT((ss.b() * ss.j() * ss.b().transpose() - p.mu * bj()).norm(), 1e-12 * (1.0 + p.mu));
  }
  Mat unit_drift(2, 2);
  unit_drift << -0.5, 1.0, -1.0, -0.5;
  EXPECT_LT((onemode_drift(Mat::Identity(2, 2), 0.5) - unit_drift).norm(), 1e-15);
}

TEST(AbFunctions, ValuesAndParity) {
  const double mu = 0.7, nu = 1.3;
  const auto [a0, b0] = ab_functions(mu, nu, 0.0);
  EXPECT_EQ(a0, Complex(0.0, 0.0));
  EXPECT_NEAR(std::abs(b0 - mu * nu / (mu * mu + nu * nu)), 0.0, 1e-15);
  for (Complex s : {Complex(0.3, 0.9), Complex(-1.1, 2.0), Complex(0.0, 5.0)}) {
    const auto [ap, bp] = ab_functions(mu, nu, s);
    const auto [am, bm] = ab_functions(mu, nu, -s);
    EXPECT_LT(std::abs(am + ap), 1e-15);
    EXPECT_LT(std::abs(bm - bp), 1e-15);
  }
  EXPECT_THROW(ab_functions(mu, nu, Complex(mu, nu)), NumericalError);
  const auto [at, bt] = onemode_trig(mu, nu, Complex(0.0, 1.0), 0.0);
  EXPECT_LT((at - CMat::Identity(2, 2)).norm(), 1e-15);
  EXPECT_LT(bt.norm(), 1e-15);
}

TEST(ClosedForms, MatchGenericPipeline) {
  std::mt19937_64 rng(4);
  for (Eigen::Index m : {2, 4, 6}) {
    const OneModeParams p = random_params(rng, m);
    const StateSpace ss = realize(to_oqho(p));
    const double theta = 0.5 / hinf_norm_squared(ss, QuadratureConfig::for_model(ss));
    for (int k = 0; k < 100; ++k) {
      const double lambda = -20.0 + 40.0 * k / 99.0;
      const Complex s(0.0, lambda);
      const SpectralSample gen = spectral_sample(ss, lambda);
      EXPECT_LT((transfer(p, ss.b(), s) - gen.f_val).norm(), 1e-10);
      EXPECT_LT((mho(p.mu, p.nu, s) - gen.psi).norm(), 1e-10);
      const auto [c, sn] = onemode_trig(p.mu, p.nu, s, theta);
      const TrigBundle t = trig_bundle(gen, theta);
      EXPECT_LT((c - t.cos_tp).norm(), 1e-10);
      EXPECT_LT((sn - theta * gen.psi * t.sinc_tp).norm(), 1e-10);
      // D assembled from the closed forms, Gamma = F F^*.
      const CMat f = transfer(p, ss.b(), s);
      const CMat gamma = f * f.adjoint();
      Eigen::SelfAdjointEigenSolver<CMat> es(Complex(0.0, 1.0) * mho(p.mu, p.nu, s));
      const CMat sinc = linalg::hermitian_apply(es, [theta](double w) { return scalar::sinhc(theta * w); });
      EXPECT_LT((c - theta * gamma * sinc - d_matrix(gen, theta)).norm(), 1e-10);
    }
  }
}

TEST(Residues, SingularAtAllPoles) {
  for (auto [mu, nu] : {std::pair{0.5, 1.0}, std::pair{1.3, 0.4}}) {
    for (const Complex& pole : poles(mu, nu)) {
      const CMat res = residue_mho(mu, nu, pole);
      EXPECT_GT(res.norm(), 1e-3);
      EXPECT_LT(std::abs(res.determinant()), 1e-6);
    }
  }
}
