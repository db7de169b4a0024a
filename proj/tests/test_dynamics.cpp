#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "tsolve/dynamics.hpp"
#include "tsolve/f1.hpp"

using namespace tsolve;
using oracle::MatrixXd;
using oracle::VectorXd;

namespace {

Matrix diag(std::initializer_list<double> v) {
  std::vector<Triplet> t;
  std::size_t i = 0;
  for (double d : v) {
    t.push_back({i, i, d});
    ++i;
  }
  return Matrix(Matrix(CsrMatrix::from_triplets(v.size(), v.size(), t)).to_dense());
}

/// Angle between the lines spanned by a and b.
double line_angle(const Vector& a, const Vector& b) {
  const double c = std::abs(dot(a, b)) / (norm2(a) * norm2(b));
  return std::acos(std::min(1.0, c));
}

Vector column(const MatrixXd& m, Eigen::Index j) { return oracle::from_eigen(m.col(j)); }

} // namespace

TEST(Orbit, EigenvectorConvergesInOneStep) {
  const Matrix h = diag({1, 3});
  const Orbit o = f1_orbit(HOperator<Matrix>(h, HMode::SymmetricA), Vector{0, 2}, 5);
  ASSERT_EQ(o.norms.size(), 2u);
  EXPECT_EQ(o.norms[1], 0.0);
}

TEST(Orbit, CriticalLineHalvesEachStep) {
  const Matrix h = diag({1, 3});
  const CriticalPair cp = critical_pair(1, 3, Vector{1, 0}, Vector{0, 1});
  const Orbit o = f1_orbit(HOperator<Matrix>(h, HMode::SymmetricA), cp.r_plus, 30);
  ASSERT_EQ(o.norms.size(), 31u);
  for (std::size_t k = 0; k < o.norms.size(); ++k)
    EXPECT_NEAR(o.norms[k], std::ldexp(o.norms[0], -static_cast<int>(k)), 1e-14 * std::ldexp(1.0, -static_cast<int>(k)));
}

TEST(Orbit, Homogeneous) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> scale(-10.0, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = static_cast<Eigen::Index>(2 + rng() % 8);
    const Matrix h = oracle::as_matrix(oracle::random_spd(rng, m));
    const HOperator<Matrix> op(h, HMode::SymmetricA);
    const VectorXd r0 = oracle::random_vector(rng, m);
    const double s = scale(rng);
    const Orbit a = f1_orbit(op, oracle::from_eigen(r0), 6);
    const Orbit b = f1_orbit(op, oracle::from_eigen(s * r0), 6);
    ASSERT_EQ(a.points.size(), b.points.size());
    for (std::size_t k = 0; k < a.points.size(); ++k) {
      const VectorXd pa = oracle::to_eigen(a.points[k]), pb = oracle::to_eigen(b.points[k]);
      EXPECT_LE((s * pa - pb).norm(), 1e-12 * std::abs(s) * r0.norm());
    }
  }
}

TEST(Orbit, NormsStrictlyDecrease) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix h = oracle::as_matrix(oracle::random_spd(rng, 6));
    const Orbit o = f1_orbit(HOperator<Matrix>(h, HMode::SymmetricA), oracle::from_eigen(oracle::random_vector(rng, 6)), 20);
    for (std::size_t k = 1; k < o.norms.size(); ++k)
      if (o.norms[k - 1] > 1e-12 * o.norms[0]) EXPECT_LT(o.norms[k], o.norms[k - 1]);
  }
}

TEST(CriticalPair, Coefficients) {
  const CriticalPair cp = critical_pair(1, 3, Vector{1, 0}, Vector{0, 1});
  EXPECT_DOUBLE_EQ(cp.alpha_i, std::sqrt(0.75));
  EXPECT_DOUBLE_EQ(cp.alpha_j, std::sqrt(0.25));
  EXPECT_DOUBLE_EQ(cp.rho_ij, 0.5);
  EXPECT_NEAR(norm2(cp.r_plus), 1.0, 1e-15);
  EXPECT_NEAR(norm2(cp.r_minus), 1.0, 1e-15);
}

TEST(CriticalPair, RatioVanishesNearEqualEigenvalues) {
  EXPECT_LT(critical_pair(1.0, 1.0 + 1e-9, Vector{1, 0}, Vector{0, 1}).rho_ij, 1e-9);
  EXPECT_THROW(critical_pair(2, 2, Vector{1, 0}, Vector{0, 1}), ContractViolation);
  EXPECT_THROW(critical_pair(3, 1, Vector{1, 0}, Vector{0, 1}), ContractViolation);
}

TEST(CriticalPair, MapsPlusToScaledMinus) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const MatrixXd hm = oracle::random_spd(rng, 5);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(hm);
    const Matrix h = oracle::as_matrix(hm);
    const HOperator<Matrix> op(h, HMode::SymmetricA);
    const auto i = static_cast<Eigen::Index>(rng() % 4);
    const Eigen::Index j = i + 1 + static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(4 - i));
    const CriticalPair cp =
        critical_pair(es.eigenvalues()(i), es.eigenvalues()(j), column(es.eigenvectors(), i), column(es.eigenvectors(), j));
    const VectorXd f_plus = oracle::to_eigen(f1_step(op, cp.r_plus).r);
    const VectorXd f_minus = oracle::to_eigen(f1_step(op, cp.r_minus).r);
    EXPECT_LE((f_plus - cp.rho_ij * oracle::to_eigen(cp.r_minus)).norm(), 1e-12);
    EXPECT_LE((f_minus - cp.rho_ij * oracle::to_eigen(cp.r_plus)).norm(), 1e-12);
  }
}

TEST(CriticalPair, ZigZag) {
  std::mt19937_64 rng(4);
  const MatrixXd hm = oracle::random_spd(rng, 4);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(hm);
  const Matrix h = oracle::as_matrix(hm);
  const CriticalPair cp =
      critical_pair(es.eigenvalues()(0), es.eigenvalues()(2), column(es.eigenvectors(), 0), column(es.eigenvectors(), 2));
  const Orbit o = f1_orbit(HOperator<Matrix>(h, HMode::SymmetricA), cp.r_plus, 12);
  ASSERT_EQ(o.points.size(), 13u);
  for (std::size_t k = 0; k < o.points.size(); ++k) {
    const Vector& line = k % 2 == 0 ? cp.r_plus : cp.r_minus;
    EXPECT_LE(line_angle(o.points[k], line), 1e-8) << "k=" << k;
    const double want = std::pow(cp.rho_ij, static_cast<double>(k));
    EXPECT_NEAR(o.norms[k] / o.norms[0], want, 1e-10 * want);
  }
}

TEST(CriticalPair, WorstCaseLineIsSlowest) {
  std::mt19937_64 rng(5);
  const MatrixXd hm = oracle::random_spd(rng, 6, 1.0, 20.0);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(hm);
  const Matrix h = oracle::as_matrix(hm);
  const HOperator<Matrix> op(h, HMode::SymmetricA);
  const double l1 = es.eigenvalues()(0), lm = es.eigenvalues()(5);
  const double kappa = lm / l1;
  const CriticalPair cp = critical_pair(l1, lm, column(es.eigenvectors(), 0), column(es.eigenvectors(), 5));
  const double worst = norm2(f1_step(op, cp.r_plus).r) / norm2(cp.r_plus);
  EXPECT_NEAR(worst, (kappa - 1) / (kappa + 1), 1e-12);
  for (int s = 0; s < 1000; ++s) {
    const Vector r = oracle::from_eigen(oracle::random_vector(rng, 6));
    EXPECT_LE(norm2(f1_step(op, r).r) / norm2(r), worst * (1 + 1e-12));
  }
}

TEST(CriticalPair, NearEigenvectorBound) {
  std::mt19937_64 rng(6);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const MatrixXd hm = oracle::random_spd(rng, 5, 1.0, 10.0);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(hm);
    const double kappa = es.eigenvalues()(4) / es.eigenvalues()(0);
    const auto i = static_cast<Eigen::Index>(rng() % 5);
    const double delta = std::pow(10.0, -1.0 - static_cast<double>(rng() % 8));
    VectorXd r0 = es.eigenvectors().col(i) + delta * oracle::random_vector(rng, 5);
    r0.normalize();
    const double lambda = es.eigenvalues()(i);
    const double eps = (hm * r0 - lambda * r0).norm();
    if (eps > lambda * lambda / (4 * kappa)) continue;
    ++checked;
    const Matrix h = oracle::as_matrix(hm);
    const double r1 = norm2(f1_step(HOperator<Matrix>(h, HMode::SymmetricA), oracle::from_eigen(r0)).r);
    EXPECT_LE(r1, 2 * std::sqrt(kappa * eps / lambda));
  }
  EXPECT_GT(checked, 100);
}

TEST(Accelerate, CriticalLineAnnihilates) {
  const Matrix h = diag({1, 3});
  const HOperator<Matrix> op(h, HMode::SymmetricA);
  const CriticalPair cp = critical_pair(1, 3, Vector{1, 0}, Vector{0, 1});
  const Vector r1 = f1_step(op, cp.r_plus).r;
  const Acceleration acc = accelerate(op, cp.r_plus, r1);
  EXPECT_NEAR(acc.alpha, 1.0 / 3.0, 1e-15);
  EXPECT_LE(norm2(acc.f1_r_bar), 1e-12);
}

TEST(Accelerate, EigenvectorReturnsNextResidual) {
  const Matrix h = diag({1, 3});
  const HOperator<Matrix> op(h, HMode::SymmetricA);
  const Vector r1 = f1_step(op, Vector{1, 0}).r;
  ASSERT_EQ(norm2(r1), 0.0);
  const Acceleration acc = accelerate(op, Vector{1, 0}, r1);
  EXPECT_EQ(acc.r_bar, r1);
  EXPECT_EQ(norm2(acc.f1_r_bar), 0.0);
}

TEST(Accelerate, NoWorseThanEndpoints) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = static_cast<Eigen::Index>(2 + rng() % 6);
    const Matrix h = oracle::as_matrix(oracle::random_spd(rng, m));
    const HOperator<Matrix> op(h, HMode::SymmetricA);
    const Vector rk = oracle::from_eigen(oracle::random_vector(rng, m));
    const Vector rk1 = f1_step(op, rk).r;
    const Acceleration acc = accelerate(op, rk, rk1);
    const double ends = std::min(norm2(f1_step(op, rk).r), norm2(f1_step(op, rk1).r));
    EXPECT_LE(norm2(acc.f1_r_bar), ends);
    EXPECT_GE(acc.alpha, 0.0);
    EXPECT_LE(acc.alpha, 1.0);
  }
}

TEST(Equivalence, RandomSpd) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = static_cast<Eigen::Index>(2 + rng() % 19);
    const MatrixXd hm = oracle::random_spd(rng, m);
    const VectorXd r0 = oracle::random_vector(rng, m);
    const EquivalenceReport rep = eigenbasis_equivalence_check(oracle::dense_from_eigen(hm), oracle::from_eigen(r0), 25);
    EXPECT_LE(rep.max_deviation, 1e-10 * r0.norm());
    EXPECT_LE(rep.eigen_residual, 1e-10);
  }
}

TEST(Equivalence, DiagonalIsBitExact) {
  const Matrix h = diag({1, 2, 5});
  const EquivalenceReport rep = eigenbasis_equivalence_check(h.dense(), Vector{0.3, -1.2, 0.7}, 10);
  EXPECT_EQ(rep.max_deviation, 0.0);
  ASSERT_EQ(rep.orbit_h.points.size(), rep.orbit_lambda.points.size());
  for (std::size_t k = 0; k < rep.orbit_h.points.size(); ++k)
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(std::abs(rep.orbit_h.points[k][i]), std::abs(rep.orbit_lambda.points[k][i]));
}

TEST(Equivalence, EigenvectorStartZeroAfterOneStep) {
  std::mt19937_64 rng(9);
  const MatrixXd hm = oracle::random_spd(rng, 6);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(hm);
  const EquivalenceReport rep = eigenbasis_equivalence_check(oracle::dense_from_eigen(hm), column(es.eigenvectors(), 0), 3);
  ASSERT_GE(rep.orbit_h.norms.size(), 2u);
  ASSERT_GE(rep.orbit_lambda.norms.size(), 2u);
  EXPECT_LE(rep.orbit_h.norms[1], 1e-12);
  EXPECT_LE(rep.orbit_lambda.norms[1], 1e-12);
}

TEST(Equivalence, RejectsNonsymmetric) {
  DenseMatrix h(2, 2);
  h(0, 0) = 1;
  h(0, 1) = 2;
  h(1, 1) = 1;
  EXPECT_THROW(eigenbasis_equivalence_check(h, Vector{1, 0}, 3), ContractViolation);
}

TEST(Portrait, EqualEigenvaluesNoCriticalLines) {
  const PhasePortrait p = phase_portrait(diag({1, 1}).dense(), 16, 10);
  EXPECT_TRUE(p.critical_directions.empty());
  for (const Orbit& o : p.orbits) {
    ASSERT_GE(o.norms.size(), 2u);
    EXPECT_LE(o.norms[1], 1e-15);
  }
  std::ostringstream svg;
  write_portrait_svg(p, svg);
  EXPECT_EQ(svg.str().find("critical"), std::string::npos);
}

TEST(Portrait, CriticalLinesInOutput) {
  const PhasePortrait p = phase_portrait(diag({1, 3}).dense(), 24, 15);
  ASSERT_EQ(p.critical_directions.size(), 2u);
  const CriticalPair cp = critical_pair(1, 3, Vector{1, 0}, Vector{0, 1});
  EXPECT_LE(line_angle(p.critical_directions[0], cp.r_plus), 1e-12);
  EXPECT_LE(line_angle(p.critical_directions[1], cp.r_minus), 1e-12);
  std::ostringstream svg;
  write_portrait_svg(p, svg);
  EXPECT_NE(svg.str().find("id=\"critical-0\""), std::string::npos);
  EXPECT_NE(svg.str().find("id=\"critical-1\""), std::string::npos);
  EXPECT_EQ(svg.str().rfind("<?xml", 0), 0u);
}

TEST(Portrait, Deterministic) {
  DenseMatrix h(2, 2);
  h(0, 0) = 2;
  h(0, 1) = h(1, 0) = 0.5;
  h(1, 1) = 1;
  std::ostringstream a_csv, b_csv, a_svg, b_svg;
  write_portrait_csv(phase_portrait(h, 32, 20), a_csv);
  write_portrait_csv(phase_portrait(h, 32, 20), b_csv);
  write_portrait_svg(phase_portrait(h, 32, 20), a_svg);
  write_portrait_svg(phase_portrait(h, 32, 20), b_svg);
  EXPECT_EQ(a_csv.str(), b_csv.str());
  EXPECT_EQ(a_svg.str(), b_svg.str());
  EXPECT_EQ(a_csv.str().substr(0, a_csv.str().find('\n')), "start_id,step,x,y,norm");
}

TEST(Portrait, RequiresTwoByTwo) {
  EXPECT_THROW(phase_portrait(diag({1, 2, 3}).dense(), 4, 4), ContractViolation);
}
