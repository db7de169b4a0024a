#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "tsolve/linalg.hpp"
#include "tsolve/symmetric_eigen.hpp"

using namespace tsolve;

namespace {

DenseMatrix dense(std::size_t m, std::size_t n, std::initializer_list<double> v) {
  DenseMatrix d(m, n);
  auto it = v.begin();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) d(i, j) = *it++;
  return d;
}

Matrix random_sparse(std::mt19937_64& rng, std::size_t m, std::size_t n, double density) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g;
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (u(rng) < density) t.push_back({i, j, g(rng)});
  return CsrMatrix::from_triplets(m, n, std::move(t));
}

} // namespace

TEST(Matvec, RowSums) {
  const Matrix a = dense(2, 2, {1, 2, 3, 4});
  EXPECT_EQ(matvec(a, Vector{1, 1}), (Vector{3, 7}));
}

TEST(Matvec, Identity) {
  const Matrix a = DenseMatrix::identity(3);
  EXPECT_EQ(matvec(a, Vector{5, -2, 0}), (Vector{5, -2, 0}));
}

TEST(Matvec, SparseSingleEntry) {
  const Matrix a = CsrMatrix::from_triplets(2, 3, {{1, 2, 7.0}});
  EXPECT_TRUE(a.is_sparse());
  EXPECT_EQ(matvec(a, Vector{0, 0, 2}), (Vector{0, 14}));
}

TEST(Matvec, DimensionMismatchThrows) {
  const Matrix a = dense(2, 2, {1, 2, 3, 4});
  EXPECT_THROW(matvec(a, Vector{1, 1, 1}), ContractViolation);
  EXPECT_THROW(matvec_transpose(a, Vector{1}), ContractViolation);
}

TEST(MatvecTranspose, PicksFirstRow) {
  const Matrix a = dense(2, 2, {1, 2, 3, 4});
  EXPECT_EQ(matvec_transpose(a, Vector{1, 0}), (Vector{1, 2}));
}

TEST(MatvecTranspose, ZeroMatrix) {
  const Matrix a = DenseMatrix(3, 4);
  EXPECT_EQ(matvec_transpose(a, Vector{1, 2, 3}), Vector(4, 0.0));
}

TEST(MatvecTranspose, ColumnSum) {
  const Matrix a = dense(3, 1, {1, 1, 1});
  EXPECT_EQ(matvec_transpose(a, Vector{1, 2, 3}), (Vector{6}));
}

TEST(MatvecTranspose, BasisVectorsReadRows) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 1 + rng() % 30, n = 1 + rng() % 30;
    for (const Matrix& a : {Matrix(random_sparse(rng, m, n, 0.3)), Matrix(random_sparse(rng, m, n, 0.5).to_dense())}) {
      for (std::size_t i = 0; i < m; ++i) {
        Vector e(m, 0.0);
        e[i] = 1.0;
        const Vector row = matvec_transpose(a, e);
        for (std::size_t j = 0; j < n; ++j) ASSERT_EQ(row[j], a.at(i, j));
      }
    }
  }
}

TEST(ApplyH, GramHandExpansion) {
  const Matrix a = dense(2, 2, {2, 0, 0, 0});
  const HOperator<Matrix> h(a, HMode::GramAAT);
  EXPECT_EQ(apply_H(h, Vector{1, 1}), (Vector{4, 0}));
}

TEST(ApplyH, SymmetricDiagonal) {
  const Matrix a = dense(2, 2, {1, 0, 0, 3});
  const HOperator<Matrix> h(a, HMode::SymmetricA);
  EXPECT_EQ(apply_H(h, Vector{1, 1}), (Vector{1, 3}));
}

TEST(ApplyH, GramIdentity) {
  const Matrix a = DenseMatrix::identity(2);
  const HOperator<Matrix> h(a, HMode::GramAAT);
  EXPECT_EQ(apply_H(h, Vector{0.25, -7.5}), (Vector{0.25, -7.5}));
}

TEST(ApplyH, SymmetricModeRejectsRectangular) {
  const Matrix a = DenseMatrix(2, 3);
  EXPECT_THROW(HOperator<Matrix>(a, HMode::SymmetricA), ContractViolation);
}

TEST(ApplyH, GramIsPositiveSemidefinite) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 150; ++trial) {
    const auto m = static_cast<Eigen::Index>(1 + rng() % 20), n = static_cast<Eigen::Index>(1 + rng() % 20);
    const Matrix a = oracle::as_matrix(oracle::random_matrix(rng, m, n));
    const Vector r = oracle::from_eigen(oracle::random_vector(rng, m));
    const HOperator<Matrix> h(a, HMode::GramAAT);
    EXPECT_GE(dot(r, apply_H(h, r)), 0.0);
  }
}

TEST(ApplyH, GramMatchesDenseProduct) {
  std::mt19937_64 rng(6);
  const oracle::MatrixXd e = oracle::random_matrix(rng, 7, 4);
  const Matrix a = oracle::as_matrix(e);
  const oracle::VectorXd r = oracle::random_vector(rng, 7);
  const Vector got = apply_H(HOperator<Matrix>(a, HMode::GramAAT), oracle::from_eigen(r));
  const oracle::VectorXd want = e * (e.transpose() * r);
  for (int i = 0; i < 7; ++i) EXPECT_NEAR(got[static_cast<std::size_t>(i)], want(i), 1e-12 * want.norm());
}

TEST(Norm2, Examples) {
  EXPECT_EQ(norm2(Vector{3, 4}), 5.0);
  EXPECT_EQ(norm2(Vector(7, 0.0)), 0.0);
  EXPECT_EQ(norm2(Vector{1, 1, 1, 1}), 2.0);
}

TEST(Dot, CompensatedSummation) {
  // 1 + 1e-16 * 1e4 - 1: naive left-to-right loses every small term
  Vector a{1.0};
  for (int i = 0; i < 10000; ++i) a.push_back(1e-16);
  a.push_back(-1.0);
  const Vector ones(a.size(), 1.0);
  EXPECT_NEAR(dot(a, ones), 1e-12, 1e-20);
}

TEST(SparseDense, PathsAgree) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 1 + rng() % 40, n = 1 + rng() % 40;
    const Matrix s = random_sparse(rng, m, n, 0.25);
    const Matrix d = s.to_dense();
    const Vector x = oracle::from_eigen(oracle::random_vector(rng, static_cast<Eigen::Index>(n)));
    const Vector y = oracle::from_eigen(oracle::random_vector(rng, static_cast<Eigen::Index>(m)));
    const Vector sx = matvec(s, x), dx = matvec(d, x);
    const Vector sy = matvec_transpose(s, y), dy = matvec_transpose(d, y);
    const double ref = s.frobenius_norm() * (norm2(x) + norm2(y)) + 1e-300;
    EXPECT_LE(norm2(subtract(sx, dx)), 1e-13 * ref);
    EXPECT_LE(norm2(subtract(sy, dy)), 1e-13 * ref);
  }
}

TEST(Csr, DuplicatesAreSummed) {
  std::size_t dup = 0;
  const CsrMatrix c = CsrMatrix::from_triplets(2, 2, {{0, 1, 1.5}, {1, 0, 2.0}, {0, 1, 0.5}}, &dup);
  EXPECT_EQ(dup, 1u);
  EXPECT_EQ(c.nnz(), 2u);
  EXPECT_EQ(Matrix(c).at(0, 1), 2.0);
}

TEST(Csr, InvariantsChecked) {
  EXPECT_THROW(CsrMatrix::from_triplets(2, 2, {{0, 2, 1.0}}), ContractViolation);
  EXPECT_THROW(CsrMatrix(2, 2, {0, 1, 1}, {5}, {1.0}), ContractViolation);
  EXPECT_THROW(CsrMatrix(2, 2, {0, 2, 1}, {0, 1}, {1.0, 2.0}), ContractViolation);
  EXPECT_THROW(CsrMatrix(1, 2, {0, 2}, {1, 1}, {1.0, 2.0}), ContractViolation);
}

TEST(Dense, StorageLength) {
  const DenseMatrix d(3, 5);
  EXPECT_EQ(d.rows() * d.cols(), 15u);
}

TEST(NormalOperator, MatchesDense) {
  std::mt19937_64 rng(8);
  const oracle::MatrixXd e = oracle::random_matrix(rng, 6, 3);
  const Matrix a = oracle::as_matrix(e);
  const NormalOperator<Matrix> n(a);
  const oracle::VectorXd x = oracle::random_vector(rng, 3);
  const Vector got = matvec(n, oracle::from_eigen(x));
  const oracle::VectorXd want = e.transpose() * e * x;
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(got[static_cast<std::size_t>(i)], want(i), 1e-12 * want.norm());
}

TEST(Symmetry, Check) {
  EXPECT_TRUE(is_symmetric(Matrix(dense(2, 2, {1, 2, 2, 1}))));
  EXPECT_FALSE(is_symmetric(Matrix(dense(2, 2, {1, 2, 3, 1}))));
}

TEST(KernelChoice, SwitchesAboveThreshold) {
  // below the threshold the storage type decides
  EXPECT_TRUE(with_kernel_for_size(Matrix(CsrMatrix::from_triplets(3, 3, {{0, 0, 1.0}}))).is_sparse());
  EXPECT_FALSE(with_kernel_for_size(Matrix(DenseMatrix::identity(3))).is_sparse());
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < 1001; ++i) t.push_back({i, i, 1.0});
  EXPECT_TRUE(with_kernel_for_size(Matrix(Matrix(CsrMatrix::from_triplets(1001, 1001, t)).to_dense())).is_sparse());
}

TEST(JacobiEigen, MatchesEigen) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const oracle::MatrixXd h = oracle::random_spd(rng, 12, -3.0, 5.0);
    const SymmetricEigen eig = jacobi_eigen(oracle::dense_from_eigen(h));
    Eigen::SelfAdjointEigenSolver<oracle::MatrixXd> ref(h);
    std::vector<double> got = eig.values;
    std::sort(got.begin(), got.end());
    for (int i = 0; i < 12; ++i) EXPECT_NEAR(got[static_cast<std::size_t>(i)], ref.eigenvalues()(i), 1e-12 * 5);
  }
}

TEST(SymmetricPinv, MatchesSvdOracle) {
  std::mt19937_64 rng(10);
  const oracle::MatrixXd u = oracle::random_matrix(rng, 8, 3);
  const oracle::MatrixXd s = u * u.transpose();  // rank 3
  const oracle::VectorXd rhs = oracle::random_vector(rng, 8);
  const PinvSolve p = symmetric_pinv_solve(oracle::dense_from_eigen(s), oracle::from_eigen(rhs), 1e-12);
  EXPECT_EQ(p.rank, 3u);
  const oracle::VectorXd want = oracle::pinv_solve(s, rhs);
  EXPECT_LE((oracle::to_eigen(p.x) - want).norm(), 1e-9 * want.norm());
}
