#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "schl/numkit.hpp"

using fixtures::kind_of;
using schl::ComplexMatrix;
using schl::cplx;
using schl::ErrorKind;

namespace {

ComplexMatrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c) {
  std::normal_distribution<double> n;
  ComplexMatrix out(r, c);
  for (auto& z : out.data()) z = {n(rng), n(rng)};
  return out;
}

}  // namespace

TEST(LuSolve, IdentityReturnsRhs) {
  std::mt19937_64 rng(1);
  const auto M = random_matrix(rng, 3, 2);
  EXPECT_EQ(schl::lu_solve(ComplexMatrix::identity(3), M), M);
}

TEST(LuSolve, Diagonal) {
  const ComplexMatrix A{{2.0, 0.0}, {0.0, 4.0}};
  const auto X = schl::lu_solve(A, ComplexMatrix::identity(2));
  EXPECT_LT(schl::max_diff(X, ComplexMatrix{{0.5, 0.0}, {0.0, 0.25}}), 1e-15);
}

TEST(LuSolve, Permutation) {
  const ComplexMatrix A{{0.0, 1.0}, {1.0, 0.0}};
  const auto X = schl::lu_solve(A, ComplexMatrix{{1.0}, {2.0}});
  EXPECT_LT(schl::max_diff(X, ComplexMatrix{{2.0}, {1.0}}), 1e-15);
}

TEST(LuSolve, SingularRaises) {
  const ComplexMatrix A{{1.0, 2.0}, {2.0, 4.0}};
  EXPECT_EQ(kind_of([&] { schl::lu_solve(A, ComplexMatrix::identity(2)); }), ErrorKind::SingularMatrix);
}

TEST(LuSolve, ResidualBoundAndRecovery) {
  std::mt19937_64 rng(2);
  for (std::size_t n = 1; n <= 8; ++n) {
    const auto A = random_matrix(rng, n, n) + 4.0 * ComplexMatrix::identity(n);
    const auto X = random_matrix(rng, n, 3);
    const auto B = A * X;
    const auto Xs = schl::lu_solve(A, B);
    EXPECT_LE((A * Xs - B).max_norm(), 1e-12 * std::max(1.0, A.max_norm() * Xs.max_norm()));
    EXPECT_LT(schl::max_diff(Xs, X) / X.max_norm(), 1e-10);
  }
}

TEST(Det, Examples) {
  EXPECT_EQ(schl::det(ComplexMatrix{{2.0, 0.0}, {0.0, 3.0}}), cplx(6.0));
  EXPECT_EQ(schl::det(ComplexMatrix{{0.0, 1.0}, {1.0, 0.0}}), cplx(-1.0));
  const cplx z(0.3, -1.7);
  EXPECT_EQ(schl::det(ComplexMatrix{{z}}), z);
}

TEST(Det, Multiplicative) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto A = random_matrix(rng, 4, 4), B = random_matrix(rng, 4, 4);
    const cplx lhs = schl::det(A * B), rhs = schl::det(A) * schl::det(B);
    EXPECT_LT(std::abs(lhs - rhs) / std::abs(rhs), 1e-10);
  }
}

TEST(Rank1Factor, Examples) {
  const ComplexMatrix a{{-1.0, 0.0}, {0.0, 0.0}};
  const auto fa = schl::rank1_factor(a);
  EXPECT_LT(schl::max_diff(fa.col * fa.row, a), 1e-15);
  EXPECT_EQ(fa.col, (ComplexMatrix{{-1.0}, {0.0}}));
  EXPECT_EQ(fa.row, (ComplexMatrix{{1.0, 0.0}}));

  const ComplexMatrix b{{1.0, 2.0}, {2.0, 4.0}};
  const auto fb = schl::rank1_factor(b);
  EXPECT_LT(schl::max_diff(fb.col * fb.row, b), 1e-15);
  // Pivot column is the second (largest norm); its largest entry is kept in col.
  EXPECT_EQ(fb.col, (ComplexMatrix{{2.0}, {4.0}}));
}

TEST(Rank1Factor, Errors) {
  EXPECT_EQ(kind_of([] { schl::rank1_factor(ComplexMatrix::identity(2)); }), ErrorKind::NotRankOne);
  EXPECT_EQ(kind_of([] { schl::rank1_factor(ComplexMatrix(2, 3)); }), ErrorKind::ZeroMatrix);
}

TEST(Rank1Factor, ReassemblesRandomOuterProducts) {
  std::mt19937_64 rng(4);
  for (std::size_t m = 1; m <= 6; ++m)
    for (std::size_t n = 1; n <= 6; ++n) {
      const auto M = random_matrix(rng, m, 1) * random_matrix(rng, 1, n);
      const auto f = schl::rank1_factor(M);
      EXPECT_LE(schl::max_diff(f.col * f.row, M), 1e-10 * M.max_norm());
    }
}

TEST(ContourIntegral, Examples) {
  const schl::QuadratureCircle c(0.0, 1.0, 16);
  auto scalar = [&](auto f) { return schl::contour_integral(c, [&](cplx x) { return ComplexMatrix{{f(x)}}; })(0, 0); };
  EXPECT_LT(std::abs(scalar([](cplx x) { return 1.0 / x; }) - 1.0), 1e-12);
  EXPECT_LT(std::abs(scalar([](cplx) { return cplx(1.0); })), 1e-12);
  EXPECT_LT(std::abs(scalar([](cplx x) { return 1.0 / (x * x); })), 1e-12);
}

TEST(ContourIntegral, MonomialsOnShiftedRadii) {
  for (const double r : {0.5, 1.0, 3.0}) {
    const schl::QuadratureCircle c(0.0, r, 32);
    for (int k = -14; k <= 14; ++k) {
      const cplx v = schl::contour_integral(c, [&](cplx x) { return ComplexMatrix{{std::pow(x, k)}}; })(0, 0);
      // Rounding scales with the integrand, |x^{k+1}| = r^{k+1} on the circle.
      const double scale = std::max(1.0, std::pow(r, k + 1));
      EXPECT_LT(std::abs(v - (k == -1 ? 1.0 : 0.0)), 1e-13 * scale) << "k=" << k << " r=" << r;
    }
  }
}

TEST(ContourIntegral, SampleCountMismatch) {
  const schl::QuadratureCircle c(0.0, 1.0, 8);
  std::vector<ComplexMatrix> samples(7, ComplexMatrix::identity(1));
  EXPECT_EQ(kind_of([&] { schl::contour_integral(samples, c); }), ErrorKind::DimensionMismatch);
}

TEST(QuadratureCircle, RejectsBadParameters) {
  EXPECT_EQ(kind_of([] { schl::QuadratureCircle(0.0, 0.0, 16); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { schl::QuadratureCircle(0.0, 1.0, 15); }), ErrorKind::InvalidArgument);
}

TEST(SelectorMatrix, Dense) {
  const auto I2 = schl::SelectorMatrix{3, 1}.dense();
  EXPECT_EQ(I2, (ComplexMatrix{{0.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 0.0}}));
}
