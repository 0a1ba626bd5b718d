#pragma once

// Fuchsian systems dY/dx = sum_j Q_j / (x - t_j) Y: residues of a realization,
// the general-position relations, principal factors and local factor series.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "schl/eigen_bridge.hpp"
#include "schl/numkit.hpp"
#include "schl/realization.hpp"

namespace schl {

inline constexpr double kResonanceTol = 1e-8;
inline constexpr double kSolvabilityTol = 1e-8;
inline constexpr double kNormalizedSumTol = 1e-10;

struct FuchsianSystem {
  std::size_t m = 0;
  std::vector<cplx> points;
  std::vector<ComplexMatrix> residues;
  bool normalized = false;

  FuchsianSystem() = default;

  FuchsianSystem(std::vector<cplx> pts, std::vector<ComplexMatrix> res, bool normalized_at_infinity = false)
      : points(std::move(pts)), residues(std::move(res)), normalized(normalized_at_infinity) {
    if (points.empty() || points.size() != residues.size())
      fail(ErrorKind::DimensionMismatch, "need one residue per singular point");
    m = residues.front().rows();
    for (const auto& q : residues)
      if (q.rows() != m || q.cols() != m) fail(ErrorKind::DimensionMismatch, "residues must all be m x m");
    if (!points_distinct(points)) fail(ErrorKind::InvalidPoints, "singular points are not pairwise distinct");
    if (normalized && residue_sum().max_norm() >= kNormalizedSumTol)
      fail(ErrorKind::InvalidArgument, "residues of a system normalized at infinity must sum to zero");
  }

  std::size_t n() const noexcept { return points.size(); }

  ComplexMatrix residue_sum() const {
    ComplexMatrix out(m, m);
    for (const auto& q : residues) out += q;
    return out;
  }

  /// sum_j Q_j / (x - t_j)
  ComplexMatrix coefficient(cplx x) const {
    ComplexMatrix out(m, m);
    for (std::size_t j = 0; j < n(); ++j) out += residues[j] / (x - points[j]);
    return out;
  }

  double min_separation() const {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < n(); ++a)
      for (std::size_t b = a + 1; b < n(); ++b) d = std::min(d, std::abs(points[a] - points[b]));
    return d;
  }

  /// Distance from t_j to the nearest other singular point.
  double isolation(std::size_t j) const {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n(); ++k)
      if (k != j) d = std::min(d, std::abs(points[k] - points[j]));
    return d;
  }
};

/// Residues of Y'Y^{-1} for Y in general position; indices 0..s-1 are the
/// poles and s..2s-1 the zeros.
inline FuchsianSystem residues_from_realization(const Realization& r) {
  const std::size_t s = r.s();
  const auto& P = r.pz.poles();
  const auto& Z = r.pz.zeros();
  std::vector<ComplexMatrix> Q;
  Q.reserve(2 * s);
  for (std::size_t j = 0; j < s; ++j) {
    ComplexMatrix row(1, r.m);
    for (std::size_t b = 0; b < s; ++b) {
      const cplx w = r.S_PZ(j, b) / (P[j] - Z[b]);
      for (std::size_t c = 0; c < r.m; ++c) row(0, c) += w * r.B_Z(b, c);
    }
    Q.push_back(r.C_P.col(j) * row);
  }
  for (std::size_t k = 0; k < s; ++k) {
    ComplexMatrix col(r.m, 1);
    for (std::size_t a = 0; a < s; ++a) {
      const cplx w = r.S_PZ(a, k) / (Z[k] - P[a]);
      for (std::size_t c = 0; c < r.m; ++c) col(c, 0) += r.C_P(c, a) * w;
    }
    Q.push_back(col * r.B_Z.row(k));
  }
  FuchsianSystem F;
  F.m = r.m;
  F.points = r.pz.points();
  F.residues = std::move(Q);
  F.normalized = true;
  return F;
}

/// Y'(x) Y(x)^{-1} = C_P (x - A_P)^{-1} S_PZ (x - A_Z)^{-1} B_Z.
inline ComplexMatrix log_derivative(const Realization& r, cplx x) {
  const std::size_t s = r.s();
  for (const auto& p : r.pz.poles())
    if (std::abs(x - p) <= kSingularDistance) fail(ErrorKind::AtPole, "log_derivative at a pole");
  for (const auto& z : r.pz.zeros())
    if (std::abs(x - z) <= kSingularDistance) fail(ErrorKind::AtZeroPoint, "log_derivative at a zero");
  ComplexMatrix mid(s, s);
  for (std::size_t a = 0; a < s; ++a)
    for (std::size_t b = 0; b < s; ++b)
      mid(a, b) = r.S_PZ(a, b) / ((x - r.pz.poles()[a]) * (x - r.pz.zeros()[b]));
  return r.C_P * mid * r.B_Z;
}

/// R_j = sum_{j' != j} Q_{j'} / (t_j - t_{j'}).
inline ComplexMatrix compatibility_matrix(const FuchsianSystem& F, std::size_t j) {
  ComplexMatrix out(F.m, F.m);
  for (std::size_t k = 0; k < F.n(); ++k)
    if (k != j) out += F.residues[k] / (F.points[j] - F.points[k]);
  return out;
}

/// Relative distance of M from its best rank-one fit; 1 for a zero matrix.
inline double rank_one_defect(const ComplexMatrix& q) {
  const double scale = q.max_norm();
  if (scale < kZeroMatrixTol) return 1.0;
  return rank1_fit(q).residual / scale;
}

using CheckReport = ResidualReport;

/// Residuals of the relations characterizing residues of a function in
/// general position with s poles: zero residue sum, rank one,
/// Q_j^2 = -Q_j at poles and Q_j^2 = Q_j at zeros, and the compatibility
/// relations Q_j R_j Q_j = -R_j Q_j (poles), Q_j R_j Q_j = Q_j R_j (zeros).
/// Per-point names carry a 1-based index, e.g. "rank_one[1]".
inline CheckReport check_general_position(const FuchsianSystem& F, std::size_t s) {
  if (F.n() != 2 * s) fail(ErrorKind::DimensionMismatch, "system must have exactly 2s singular points");
  CheckReport rep;
  rep.add("residue_sum", F.residue_sum().max_norm());
  auto tag = [](const char* name, std::size_t j) { return std::string(name) + "[" + std::to_string(j + 1) + "]"; };
  for (std::size_t j = 0; j < F.n(); ++j) rep.add(tag("rank_one", j), rank_one_defect(F.residues[j]));
  for (std::size_t j = 0; j < F.n(); ++j) {
    const auto& q = F.residues[j];
    rep.add(tag("idempotent", j), j < s ? (q * q + q).max_norm() : (q * q - q).max_norm());
  }
  for (std::size_t j = 0; j < F.n(); ++j) {
    const auto& q = F.residues[j];
    const ComplexMatrix R = compatibility_matrix(F, j);
    const ComplexMatrix qrq = q * R * q;
    rep.add(tag("compatibility", j), j < s ? (qrq + R * q).max_norm() : (qrq - q * R).max_norm());
  }
  return rep;
}

/// Human-readable relation name for a failing general-position residual.
inline std::string describe_relation(const std::string& residual_name) {
  auto index = [&] {
    const auto open = residual_name.find('[');
    return open == std::string::npos ? std::string{}
                                     : " at j=" + residual_name.substr(open + 1, residual_name.size() - open - 2);
  };
  if (residual_name == "residue_sum") return "residue sum violated";
  if (residual_name.starts_with("rank_one")) return "rank-one violated" + index();
  if (residual_name.starts_with("idempotent")) return "idempotency violated" + index();
  if (residual_name.starts_with("compatibility")) return "compatibility violated" + index();
  return residual_name + " violated";
}

/// M_j(x) = x^{sign I_1} K, sign = -1 at poles and +1 at zeros.
struct PrincipalFactor {
  std::size_t j = 0;
  int sign = -1;
  ComplexMatrix K;
  ComplexMatrix K_inv;
};

namespace detail {

inline std::size_t argmax_abs(const ComplexMatrix& v) {
  std::size_t p = 0;
  for (std::size_t k = 1; k < v.data().size(); ++k)
    if (std::abs(v.data()[k]) > std::abs(v.data()[p])) p = k;
  return p;
}

// Square matrix whose first row (or column) is v and whose remaining rows
// (columns) are the standard basis vectors other than v's pivot coordinate.
inline ComplexMatrix complete_with_basis(const ComplexMatrix& v, bool as_row) {
  const std::size_t m = v.data().size();
  const std::size_t p = argmax_abs(v);
  ComplexMatrix out(m, m);
  for (std::size_t k = 0; k < m; ++k) {
    if (as_row) out(0, k) = v.data()[k];
    else out(k, 0) = v.data()[k];
  }
  std::size_t slot = 1;
  for (std::size_t i = 0; i < m; ++i) {
    if (i == p) continue;
    if (as_row) out(slot, i) = 1.0;
    else out(i, slot) = 1.0;
    ++slot;
  }
  return out;
}

}  // namespace detail

/// Principal factors at every pole and zero. At a pole K_j has first row
/// b_j; at a zero K_j^{-1} has first column c_j.
inline std::vector<PrincipalFactor> principal_factors(const Realization& r) {
  const std::size_t s = r.s();
  std::vector<PrincipalFactor> out;
  out.reserve(2 * s);
  for (std::size_t j = 0; j < 2 * s; ++j) {
    PrincipalFactor pf;
    pf.j = j;
    if (j < s) {
      const ComplexMatrix b = r.B_P.row(j);
      if (b.max_norm() < kZeroMatrixTol)
        fail(ErrorKind::DegenerateSemiResidue, "zero pole semi-residue at j=" + std::to_string(j + 1));
      pf.sign = -1;
      pf.K = detail::complete_with_basis(b, true);
      pf.K_inv = inverse(pf.K);
    } else {
      const ComplexMatrix c = r.C_Z.col(j - s);
      if (c.max_norm() < kZeroMatrixTol)
        fail(ErrorKind::DegenerateSemiResidue, "zero zero-point semi-residue at j=" + std::to_string(j + 1));
      pf.sign = 1;
      pf.K_inv = detail::complete_with_basis(c, false);
      pf.K = inverse(pf.K_inv);
    }
    out.push_back(std::move(pf));
  }
  return out;
}

/// H_j(x) = Y(x) M_j(x - t_j)^{-1} = Y(x) K_j^{-1} (x - t_j)^{-sign I_1}.
inline ComplexMatrix nonsingular_factor(const Realization& r, const PrincipalFactor& pf, cplx x) {
  ComplexMatrix H = eval(r, x) * pf.K_inv;
  const cplx scale = std::pow(x - r.pz.point(pf.j), -static_cast<double>(pf.sign));
  for (std::size_t i = 0; i < H.rows(); ++i) H(i, 0) *= scale;
  return H;
}

/// Circle around t_j of radius `fraction` times the distance to the nearest
/// other singular point.
inline QuadratureCircle isolating_circle(const std::vector<cplx>& points, std::size_t j, double fraction,
                                         std::size_t nodes) {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < points.size(); ++k)
    if (k != j) d = std::min(d, std::abs(points[k] - points[j]));
  return {points[j], fraction * d, nodes};
}

/// max of |contour integral of H_j| and |contour integral of H_j^{-1}| on a
/// small circle around t_j; zero when both are holomorphic there.
inline double nonsingular_factor_defect(const Realization& r, const PrincipalFactor& pf, std::size_t nodes = 64) {
  const auto circle = isolating_circle(r.pz.points(), pf.j, 0.3, nodes);
  std::vector<ComplexMatrix> H, Hinv;
  for (const auto& x : circle.nodes()) {
    H.push_back(nonsingular_factor(r, pf, x));
    Hinv.push_back(inverse(H.back()));
  }
  return std::max(contour_integral(H, circle).max_norm(), contour_integral(Hinv, circle).max_norm());
}

/// Distance of the contour integral of H_j^{-1} Q_j H_j / (x - t_j) around
/// t_j from the exponent sign * I_1.
inline double exponent_identity_check(const Realization& r, std::size_t j, std::size_t nodes = 64) {
  const auto factors = principal_factors(r);
  if (j >= factors.size()) fail(ErrorKind::IndexOutOfRange, "no singular point " + std::to_string(j + 1));
  const auto& pf = factors[j];
  const FuchsianSystem F = residues_from_realization(r);
  const auto circle = isolating_circle(F.points, j, 0.3, nodes);
  const cplx tj = F.points[j];
  const ComplexMatrix integral = contour_integral(circle, [&](cplx x) {
    const ComplexMatrix H = nonsingular_factor(r, pf, x);
    return inverse(H) * F.residues[j] * H / (x - tj);
  });
  ComplexMatrix J(r.m, r.m);
  J(0, 0) = static_cast<double>(pf.sign);
  return max_diff(integral, J);
}

/// Truncated Taylor series H(x) = sum_k H_k (x - center)^k with H_0 = I.
struct LocalFactorSeries {
  cplx center{};
  std::vector<ComplexMatrix> coefficients;

  std::size_t order() const noexcept { return coefficients.empty() ? 0 : coefficients.size() - 1; }

  ComplexMatrix operator()(cplx x) const {
    const cplx u = x - center;
    ComplexMatrix out = coefficients.back();
    for (std::size_t k = coefficients.size() - 1; k-- > 0;) out = out * u + coefficients[k];
    return out;
  }
};

/// Taylor coefficients R_{j,k} = -sum_{j' != j} Q_{j'} / (t_{j'} - t_j)^{k+1}
/// of sum_{j' != j} Q_{j'} / (x - t_{j'}) at t_j, for k = 0..count-1.
inline std::vector<ComplexMatrix> regular_part_taylor(const FuchsianSystem& F, std::size_t j, std::size_t count) {
  std::vector<ComplexMatrix> out(count, ComplexMatrix(F.m, F.m));
  for (std::size_t jp = 0; jp < F.n(); ++jp) {
    if (jp == j) continue;
    const cplx inv = 1.0 / (F.points[jp] - F.points[j]);
    cplx w = -inv;
    for (std::size_t k = 0; k < count; ++k, w *= inv) out[k] += F.residues[jp] * w;
  }
  return out;
}

/// Largest coefficient residual of the local equation
///   H' = [Q_j, H] / (x - t_j) + (sum_{j' != j} Q_{j'} / (x - t_{j'})) H
/// through order N-1, relative to max(1, size of the terms).
inline double local_series_residual(const FuchsianSystem& F, std::size_t j, const LocalFactorSeries& series) {
  const auto& H = series.coefficients;
  const std::size_t N = series.order();
  const auto R = regular_part_taylor(F, j, N);
  const auto& Q = F.residues[j];
  double worst = max_diff(H.front(), ComplexMatrix::identity(F.m));
  for (std::size_t k = 0; k < N; ++k) {
    ComplexMatrix rhs(F.m, F.m);
    for (std::size_t kp = 0; kp <= k; ++kp) rhs += R[kp] * H[k - kp];
    const ComplexMatrix lhs = static_cast<double>(k + 1) * H[k + 1] - commutator(Q, H[k + 1]);
    const double scale = std::max({1.0, lhs.max_norm(), rhs.max_norm()});
    worst = std::max(worst, max_diff(lhs, rhs) / scale);
  }
  return worst;
}

namespace detail {

// Runs the coefficient recurrence (k+1) H_{k+1} - [Q, H_{k+1}] = sum R_l H_{k-l}
// in original coordinates, solving each order in the frame T Q T^{-1} =
// diag(lambda) followed by one refinement step. `is_free(k, a, b, rhs)`
// accepts frame entries whose divisor vanishes; those entries are set to zero.
template <typename FreeEntry>
std::vector<ComplexMatrix> frame_recurrence(const ComplexMatrix& Q, const std::vector<ComplexMatrix>& R,
                                            const ComplexMatrix& T, const ComplexMatrix& Tinv,
                                            const std::vector<cplx>& lambda, std::size_t N, FreeEntry&& is_free) {
  const std::size_t m = lambda.size();
  auto frame_solve = [&](std::size_t k, const ComplexMatrix& rhs, bool check) {
    const ComplexMatrix f = T * rhs * Tinv;
    ComplexMatrix X(m, m);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b) {
        const cplx divisor = static_cast<double>(k + 1) - (lambda[a] - lambda[b]);
        if (std::abs(divisor) < kResonanceTol) {
          if (check && !is_free(k, a, b, f(a, b)))
            fail(ErrorKind::Resonant, "divisor vanishes at order " + std::to_string(k) + " entry (" +
                                          std::to_string(a + 1) + "," + std::to_string(b + 1) + ")");
          continue;
        }
        X(a, b) = f(a, b) / divisor;
      }
    return Tinv * X * T;
  };
  std::vector<ComplexMatrix> H{ComplexMatrix::identity(m)};
  for (std::size_t k = 0; k < N; ++k) {
    ComplexMatrix rhs(m, m);
    for (std::size_t kp = 0; kp <= k; ++kp) rhs += R[kp] * H[k - kp];
    ComplexMatrix X = frame_solve(k, rhs, true);
    const ComplexMatrix defect = rhs - (static_cast<double>(k + 1) * X - commutator(Q, X));
    X += frame_solve(k, defect, false);
    H.push_back(std::move(X));
  }
  return H;
}

}  // namespace detail

/// Local factor at t_j when Q_j is diagonalizable and non-resonant
/// (no eigenvalue difference in {1, ..., N}).
inline LocalFactorSeries local_factor_nonresonant(const FuchsianSystem& F, std::size_t j, std::size_t N) {
  if (j >= F.n()) fail(ErrorKind::IndexOutOfRange, "no singular point " + std::to_string(j + 1));
  const auto& Q = F.residues[j];
  Eigen::ComplexEigenSolver<EigenMatrix> solver(to_eigen(Q));
  if (solver.info() != Eigen::Success) fail(ErrorKind::InvalidArgument, "eigen-decomposition failed");
  const EigenMatrix V = solver.eigenvectors();
  Eigen::FullPivLU<EigenMatrix> vlu(V);
  if (!vlu.isInvertible() || vlu.rcond() < 1e-10)
    fail(ErrorKind::InvalidArgument, "residue at j=" + std::to_string(j + 1) + " is not diagonalizable");
  const ComplexMatrix Tinv = from_eigen(V);
  const ComplexMatrix T = from_eigen(vlu.inverse());
  std::vector<cplx> lambda(solver.eigenvalues().data(), solver.eigenvalues().data() + F.m);

  const auto R = regular_part_taylor(F, j, N);
  auto H = detail::frame_recurrence(Q, R, T, Tinv, lambda, N, [](std::size_t, std::size_t, std::size_t, cplx) {
    return false;
  });
  return LocalFactorSeries{F.points[j], std::move(H)};
}

/// Local factor at t_j for residues in general position (s poles first):
/// Q_j is conjugated to -I_1 (pole) or +I_1 (zero) and the k = 0 step uses
/// the solvability condition in place of the vanishing divisor.
inline LocalFactorSeries local_factor_rational(const FuchsianSystem& F, std::size_t j, std::size_t s, std::size_t N) {
  if (j >= F.n()) fail(ErrorKind::IndexOutOfRange, "no singular point " + std::to_string(j + 1));
  if (F.n() != 2 * s) fail(ErrorKind::DimensionMismatch, "system must have exactly 2s singular points");
  const bool pole = j < s;
  const auto factors = rank1_factor(F.residues[j]);
  const ComplexMatrix& c = factors.col;
  const ComplexMatrix& b = factors.row;
  const std::size_t m = F.m;

  // T^{-1} = [c | basis of ker b], so that T Q_j T^{-1} = (b c) I_1.
  const std::size_t p = detail::argmax_abs(b);
  ComplexMatrix Tinv(m, m);
  Tinv.set_col(0, c);
  std::size_t slot = 1;
  for (std::size_t i = 0; i < m; ++i) {
    if (i == p) continue;
    Tinv(i, slot) = 1.0;
    Tinv(p, slot) = -b(0, i) / b(0, p);
    ++slot;
  }
  const ComplexMatrix T = inverse(Tinv);
  std::vector<cplx> lambda(m, 0.0);
  lambda[0] = pole ? -1.0 : 1.0;

  const auto R = regular_part_taylor(F, j, N);
  const double scale = std::max(1.0, R.empty() ? 0.0 : (T * R.front() * Tinv).max_norm());
  auto H = detail::frame_recurrence(F.residues[j], R, T, Tinv, lambda, N, [&](std::size_t k, std::size_t a, std::size_t bb, cplx rhs) {
    const bool expected = k == 0 && (pole ? (bb == 0 && a != 0) : (a == 0 && bb != 0));
    if (!expected) return false;
    if (std::abs(rhs) > kSolvabilityTol * scale)
      fail(ErrorKind::SolvabilityViolated, "first-order right-hand side leaves the solvable subspace at j=" +
                                               std::to_string(j + 1));
    return true;
  });
  return LocalFactorSeries{F.points[j], std::move(H)};
}

}  // namespace schl
