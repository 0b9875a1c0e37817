#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "gaecausal/tensor.hpp"
#include "oracles.hpp"

using namespace gaecausal;

namespace {

void expect_near(const Matrix& got, const Matrix& want, double tol) {
  ASSERT_EQ(got.rows(), want.rows());
  ASSERT_EQ(got.cols(), want.cols());
  for (std::size_t i = 0; i < got.rows(); ++i)
    for (std::size_t j = 0; j < got.cols(); ++j)
      EXPECT_NEAR(got(i, j), want(i, j), tol) << "at (" << i << ", " << j << ")";
}

}  // namespace

TEST(Matmul, IdentityLeft) {
  std::mt19937_64 rng(1);
  const Matrix m = oracle::random_matrix(3, 4, rng);
  EXPECT_EQ(matmul(Matrix::identity(3), m), m);
}

TEST(Matmul, HandComputed) {
  const Matrix a{{1, 2}, {3, 4}};
  const Matrix b{{0}, {1}};
  EXPECT_EQ(matmul(a, b), (Matrix{{2}, {4}}));
}

TEST(Matmul, IdentityRightRandom) {
  std::mt19937_64 rng(2);
  const Matrix a = oracle::random_matrix(5, 5, rng);
  expect_near(matmul(a, Matrix::identity(5)), a, 0.0);
}

TEST(Matmul, AgreesWithTripleLoop) {
  std::mt19937_64 rng(3);
  const Matrix a = oracle::random_matrix(4, 7, rng);
  const Matrix b = oracle::random_matrix(7, 3, rng);
  expect_near(matmul(a, b), oracle::naive_matmul(a, b), 1e-14);
}

TEST(Matmul, DimensionMismatchThrows) {
  EXPECT_THROW(matmul(Matrix(2, 3), Matrix(2, 3)), PreconditionError);
}

TEST(Hadamard, Zero) {
  const Matrix a{{1, -2}, {3, 4}};
  EXPECT_EQ(hadamard(a, Matrix(2, 2)), Matrix(2, 2));
}

TEST(Hadamard, ElementwiseSquare) {
  const Matrix a{{0, 2}, {3, 0}};
  EXPECT_EQ(hadamard(a, a), (Matrix{{0, 4}, {9, 0}}));
}

TEST(Hadamard, AllOnes) {
  const Matrix a{{1.5, -2}, {3, 4}};
  EXPECT_EQ(hadamard(a, Matrix(2, 2, 1.0)), a);
}

TEST(Hadamard, ShapeMismatchThrows) {
  EXPECT_THROW(hadamard(Matrix(2, 2), Matrix(2, 3)), PreconditionError);
}

TEST(Transpose, Basic) {
  EXPECT_EQ(transpose(Matrix{{1, 2, 3}}), (Matrix{{1}, {2}, {3}}));
}

TEST(Matrix, RaggedInitializerThrows) {
  EXPECT_THROW((Matrix{{1, 2}, {3}}), PreconditionError);
}

TEST(Tensor3, LayoutIsSampleVariableDim) {
  Tensor3 t(2, 3, 2);
  t(1, 2, 1) = 7.0;
  EXPECT_EQ(t.data()[(1 * 3 + 2) * 2 + 1], 7.0);
  EXPECT_EQ(t.data().size(), 12u);
}

TEST(Matexp, ZeroIsIdentity) {
  EXPECT_EQ(matexp(Matrix(4, 4)), Matrix::identity(4));
}

TEST(Matexp, Nilpotent2x2) {
  expect_near(matexp(Matrix{{0, 1}, {0, 0}}), Matrix{{1, 1}, {0, 1}}, 1e-15);
}

TEST(Matexp, Diagonal) {
  const Matrix e = matexp(Matrix::diagonal(std::vector<double>{1.0, 2.0}));
  EXPECT_NEAR(e(0, 0), std::exp(1.0), 1e-15 * std::exp(1.0));
  EXPECT_NEAR(e(1, 1), std::exp(2.0), 1e-15 * std::exp(2.0));
  EXPECT_EQ(e(0, 1), 0.0);
  EXPECT_EQ(e(1, 0), 0.0);
}

TEST(Matexp, NonSquareThrows) {
  EXPECT_THROW(matexp(Matrix(2, 3)), PreconditionError);
}

TEST(Matexp, NonFiniteThrows) {
  Matrix m(2, 2);
  m(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(matexp(m), PreconditionError);
}

TEST(Matexp, ExtremeNormOverflows) {
  EXPECT_THROW(matexp(Matrix::diagonal(std::vector<double>{1000.0, 1.0})), OverflowError);
  EXPECT_THROW(matexp(Matrix{{0, 1e7}, {1e7, 0}}), OverflowError);
}

// Relative error ≤ 1e-12 against the extended-precision series for ‖M‖ ≤ 10.
TEST(Matexp, MatchesSeriesOracleUpToNormTen) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + trial % 6;
    Matrix m = oracle::random_matrix(n, n, rng);
    const double target = 0.5 + 9.5 * (trial / 39.0);
    m *= target / norm_1(m);
    EXPECT_LE(oracle::rel_error(matexp(m), oracle::exp_series_scaled(m)), 1e-12)
        << "trial " << trial << " norm " << target;
  }
}

TEST(Matexp, NilpotentMatchesFiniteSum) {
  std::mt19937_64 rng(6);
  for (std::size_t d = 2; d <= 7; ++d) {
    Matrix m(d, d);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i + 1; j < d; ++j) m(i, j) = u(rng);
    Matrix sum = Matrix::identity(d), power = Matrix::identity(d);
    double fact = 1.0;
    for (std::size_t k = 1; k < d; ++k) {
      power = oracle::naive_matmul(power, m);
      fact *= static_cast<double>(k);
      sum += (1.0 / fact) * power;
    }
    EXPECT_LE(oracle::rel_error(matexp(m), sum), 1e-13) << "d=" << d;
  }
}

TEST(Matexp, CommutesWithTranspose) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix m = oracle::random_matrix(5, 5, rng, -1.5, 1.5);
    EXPECT_LE(oracle::rel_error(matexp(transpose(m)), transpose(matexp(m))), 1e-12);
  }
}

TEST(Matexp, TraceOfAcyclicZeroDiagonalIsD) {
  std::mt19937_64 rng(8);
  for (std::size_t d = 2; d <= 8; ++d) {
    Matrix m(d, d);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i + 1; j < d; ++j) m(i, j) = u(rng);
    EXPECT_NEAR(trace(matexp(m)), static_cast<double>(d), 1e-12 * static_cast<double>(d));
  }
}

TEST(Solve, RecoversKnownSolution) {
  std::mt19937_64 rng(9);
  Matrix a = oracle::random_matrix(6, 6, rng);
  for (std::size_t i = 0; i < 6; ++i) a(i, i) += 3.0;
  const Matrix x = oracle::random_matrix(6, 2, rng);
  expect_near(solve(a, matmul(a, x)), x, 1e-12);
}

TEST(Solve, NeedsPivoting) {
  const Matrix a{{0, 1}, {1, 0}};
  expect_near(solve(a, Matrix{{2}, {3}}), Matrix{{3}, {2}}, 0.0);
}
