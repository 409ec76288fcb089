#include <gtest/gtest.h>

#include "support.hpp"

using namespace qef;

namespace {

CMat random_hermitian(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMat x(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) x(i, j) = Complex(g(rng), g(rng));
  return linalg::herm_part(x);
}

}  // namespace

TEST(Transfer, DcGainAgainstCofactorInverse) {
  const StateSpace ss = example::two_mode();
  const CMat f0 = transfer(ss, Complex(0.0, 0.0));
  const CMat inv = fixtures::adjugate_inverse4(ss.a().cast<Complex>());
  const CMat want = -(ss.s_half().cast<Complex>() * inv * ss.b().cast<Complex>());
  EXPECT_LT((f0 - want).norm(), 1e-12 * want.norm());
}

TEST(Transfer, ResolventIdentity) {
  const StateSpace ss = example::two_mode();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  const CMat a = ss.a().cast<Complex>();
  const CMat eye = CMat::Identity(4, 4);
  for (int k = 0; k < 20; ++k) {
    const Complex v1(u(rng), u(rng)), v2(u(rng), u(rng));
    const CMat lhs = transfer(ss, v1) - transfer(ss, v2);
    const CMat rhs = (v2 - v1) * ss.s_half().cast<Complex>() * (v1 * eye - a).inverse() * (v2 * eye - a).inverse() *
                     ss.b().cast<Complex>();
    EXPECT_LT((lhs - rhs).norm(), 1e-10 * (1.0 + rhs.norm()));
  }
}

TEST(Transfer, StrictlyProperDecay) {
  const StateSpace ss = example::two_mode();
  const double bound_num = linalg::op_norm(ss.s_half()) * linalg::op_norm(ss.b());
  for (double lambda : {20.0, 100.0, 1000.0}) {
    const CMat f = transfer(ss, Complex(0.0, lambda));
    Eigen::JacobiSVD<CMat> svd(f);
    EXPECT_LE(svd.singularValues()(0), bound_num / (lambda - ss.a_norm()));
  }
}

TEST(Transfer, RejectsEigenvalue) {
  const StateSpace ss = example::two_mode();
  EXPECT_THROW(transfer(ss, ss.a_eigenvalues()(0)), NumericalError);
}

TEST(SpectralSample, StructureAndDeterminant) {
  const StateSpace ss = example::two_mode();
  const double det_pi = ss.weight().determinant();
  const double det_bjb = (ss.b() * ss.j() * ss.b().transpose()).determinant();
  for (double lambda : {0.01, 0.1, 1.0, 10.0, 100.0}) {
    const SpectralSample s = spectral_sample(ss, lambda);
    EXPECT_TRUE((s.phi - s.phi.adjoint()).isZero(0.0));
    EXPECT_TRUE((s.psi + s.psi.adjoint()).isZero(0.0));
    EXPECT_TRUE((s.h - s.h.adjoint()).isZero(0.0));
    const double lmin = Eigen::SelfAdjointEigenSolver<CMat>(s.phi).eigenvalues().minCoeff();
    EXPECT_GE(lmin, -1e-12 * s.phi.norm());
    const Complex char_poly = (Complex(0.0, lambda) * CMat::Identity(4, 4) - ss.a().cast<Complex>()).determinant();
    const double want = det_pi * det_bjb / std::norm(char_poly);
    EXPECT_LT(std::abs(s.psi.determinant() - want), 1e-8 * std::abs(want)) << lambda;
  }
}

TEST(SpectralSample, MirrorIsConjugate) {
  const StateSpace ss = example::two_mode();
  for (double lambda : {0.3, 2.0, 7.5}) {
    const SpectralSample p = spectral_sample(ss, lambda), m = spectral_sample(ss, -lambda);
    EXPECT_LT((m.phi - p.phi.conjugate()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((m.psi - p.psi.conjugate()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(SpectralSample, ClassicalModeZeroesPsi) {
  const StateSpace ss = example::two_mode();
  const SpectralSample s = spectral_sample(ss, 1.0, SpectralMode::classical);
  EXPECT_EQ(s.psi.norm(), 0.0);
  const TrigBundle t = trig_bundle(s, 0.07);
  const CMat eye = CMat::Identity(4, 4);
  EXPECT_LT((t.cos_tp - eye).norm(), 1e-15);
  EXPECT_LT((t.sinc_tp - eye).norm(), 1e-15);
  EXPECT_LT((t.tanc_tp - eye).norm(), 1e-15);
}

TEST(TrigBundle, ZeroThetaIsIdentity) {
  const StateSpace ss = example::two_mode();
  const TrigBundle t = trig_bundle(spectral_sample(ss, 2.0), 0.0);
  const CMat eye = CMat::Identity(4, 4);
  EXPECT_LT((t.cos_tp - eye).norm(), 1e-15);
  EXPECT_LT((t.sinc_tp - eye).norm(), 1e-15);
  EXPECT_LT((t.tanc_tp - eye).norm(), 1e-15);
}

TEST(TrigBundle, IdentitiesOnRandomHermitian) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    SpectralSample s;
    s.h = random_hermitian(rng, 4);
    s.psi = Complex(0.0, -1.0) * s.h;  // H = i Psi
    s.phi = CMat::Zero(4, 4);
    const double theta = 0.3;
    const TrigBundle t = trig_bundle(s, theta);
    EXPECT_LT((t.tanc_tp * t.cos_tp - t.sinc_tp).norm(), 1e-12);
    // cosh^2 - sinh^2 = 1 on the eigenbasis: cos^2 - (theta H sinc)^2 = I.
    const CMat sinh_part = theta * s.h * t.sinc_tp;
    EXPECT_LT((t.cos_tp * t.cos_tp - sinh_part * sinh_part - CMat::Identity(4, 4)).norm(), 1e-12);
    const Vec kt = Eigen::SelfAdjointEigenSolver<CMat>(t.tanc_tp).eigenvalues();
    EXPECT_GT(kt.minCoeff(), 0.0);
    EXPECT_LE(kt.maxCoeff(), 1.0 + 1e-15);
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<CMat>(t.cos_tp).eigenvalues().minCoeff(), 1.0 - 1e-14);
  }
}

TEST(Scalar, SeriesBranchesMatchClosedForms) {
  for (double x : {1e-5, 9e-5, 1.1e-4, 1e-3}) {
    EXPECT_NEAR(scalar::sinhc(x), std::sinh(x) / x, 1e-15);
    EXPECT_NEAR(scalar::tanhc(x), std::tanh(x) / x, 1e-15);
  }
  EXPECT_EQ(scalar::sinhc(0.0), 1.0);
  EXPECT_EQ(scalar::tanhc(0.0), 1.0);
  EXPECT_NEAR(scalar::log_cosh(800.0), 800.0 - std::log(2.0), 1e-12);
  EXPECT_NEAR(scalar::log_cosh(3.0), std::log(std::cosh(3.0)), 1e-15);
}

TEST(Feasibility, ZeroAndClassicalBound) {
  const StateSpace ss = example::two_mode();
  const auto cfg = QuadratureConfig::for_model(ss);
  EXPECT_EQ(feasibility_margin(ss, 0.0, cfg), 0.0);
  const double theta0 = theta_threshold(ss, cfg);
  for (double lambda : {0.0, 1.0, 3.0, 5.0, 40.0}) {
    const SpectralSample s = spectral_sample(ss, lambda);
    const double lmax = Eigen::SelfAdjointEigenSolver<CMat>(s.phi).eigenvalues().maxCoeff();
    EXPECT_LE(feasibility_value(s, 0.05), 0.05 * lmax * (1.0 + 1e-12));
  }
  const auto rep = feasibility_report(ss, 0.9 * theta0, cfg);
  EXPECT_LT(rep.margin(), 1.0);
  EXPECT_TRUE(rep.certified);
  EXPECT_LT(rep.grid_sup, 0.9 + 1e-9);
}
