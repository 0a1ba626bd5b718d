#pragma once

// State-space realizations of rational matrix functions in general position:
//
//   Y(x)      = I + C_P (x - A_P)^{-1} B_P
//   Y(x)^{-1} = I + C_Z (x - A_Z)^{-1} B_Z
//
// with diagonal pole/zero matrices A_P, A_Z and Cauchy-structured core
// matrices S_PZ, S_ZP solving the coupling Sylvester equations.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "schl/numkit.hpp"

namespace schl {

inline constexpr double kDistinctRelTol = 1e-12;
inline constexpr double kCoreSingularRelTol = 1e-12;
inline constexpr double kSingularDistance = 1e-10;
inline constexpr double kValidationTol = 1e-8;

inline double point_scale(std::span<const cplx> points) {
  double scale = 1.0;
  for (const auto& t : points) scale = std::max(scale, std::abs(t));
  return scale;
}

/// True when all points are pairwise separated by more than 1e-12 * scale,
/// scale = max(1, max |t|).
inline bool points_distinct(std::span<const cplx> points) {
  const double tol = kDistinctRelTol * point_scale(points);
  for (std::size_t a = 0; a < points.size(); ++a)
    for (std::size_t b = a + 1; b < points.size(); ++b)
      if (std::abs(points[a] - points[b]) <= tol) return false;
  return true;
}

/// Ordered pole set t_1..t_s followed by zero set t_{s+1}..t_{2s}.
class PoleZeroData {
 public:
  PoleZeroData() = default;

  PoleZeroData(std::vector<cplx> poles, std::vector<cplx> zeros) : poles_(std::move(poles)), zeros_(std::move(zeros)) {
    if (poles_.empty() || poles_.size() != zeros_.size())
      fail(ErrorKind::InvalidPoints, "pole and zero sets must be non-empty and of equal size");
    const auto all = points();
    if (!points_distinct(all)) fail(ErrorKind::InvalidPoints, "pole/zero points are not pairwise distinct");
  }

  /// Splits 2s points into poles (first half) and zeros (second half).
  static PoleZeroData from_points(std::span<const cplx> t) {
    if (t.size() % 2 != 0) fail(ErrorKind::InvalidPoints, "need an even number of points");
    const std::size_t s = t.size() / 2;
    return {std::vector<cplx>(t.begin(), t.begin() + s), std::vector<cplx>(t.begin() + s, t.end())};
  }

  std::size_t s() const noexcept { return poles_.size(); }
  const std::vector<cplx>& poles() const noexcept { return poles_; }
  const std::vector<cplx>& zeros() const noexcept { return zeros_; }

  /// 0-based point index over all 2s points.
  cplx point(std::size_t j) const { return j < s() ? poles_.at(j) : zeros_.at(j - s()); }

  std::vector<cplx> points() const {
    std::vector<cplx> out(poles_);
    out.insert(out.end(), zeros_.begin(), zeros_.end());
    return out;
  }

 private:
  std::vector<cplx> poles_;
  std::vector<cplx> zeros_;
};

/// Semi-residual and core matrices of one rational matrix function.
/// Column j of C_P / row j of B_P are the pole semi-residues c_j, b_j;
/// C_Z, B_Z hold the zero semi-residues.
struct Realization {
  std::size_t m = 0;
  PoleZeroData pz;
  ComplexMatrix C_P, B_P, C_Z, B_Z;
  ComplexMatrix S_PZ, S_ZP;

  std::size_t s() const noexcept { return pz.s(); }
};

inline void check_semi_residual_shapes(std::size_t m, std::size_t s, const ComplexMatrix* cols,
                                       const ComplexMatrix* rows) {
  if (cols && (cols->rows() != m || cols->cols() != s))
    fail(ErrorKind::DimensionMismatch, "left semi-residual matrix must be m x s, got " + cols->shape());
  if (rows && (rows->rows() != s || rows->cols() != m))
    fail(ErrorKind::DimensionMismatch, "right semi-residual matrix must be s x m, got " + rows->shape());
}

/// S_PZ(a, b) = b_a c_{s+b} / (t_a - t_{s+b}).
inline ComplexMatrix core_matrix_pz(const ComplexMatrix& B_P, const ComplexMatrix& C_Z, const PoleZeroData& pz) {
  const std::size_t s = pz.s();
  check_semi_residual_shapes(C_Z.rows(), s, &C_Z, &B_P);
  const ComplexMatrix gram = B_P * C_Z;
  ComplexMatrix S(s, s);
  for (std::size_t a = 0; a < s; ++a)
    for (std::size_t b = 0; b < s; ++b) S(a, b) = gram(a, b) / (pz.poles()[a] - pz.zeros()[b]);
  return S;
}

/// S_ZP(a, b) = b_{s+a} c_b / (t_{s+a} - t_b).
inline ComplexMatrix core_matrix_zp(const ComplexMatrix& B_Z, const ComplexMatrix& C_P, const PoleZeroData& pz) {
  const std::size_t s = pz.s();
  check_semi_residual_shapes(C_P.rows(), s, &C_P, &B_Z);
  const ComplexMatrix gram = B_Z * C_P;
  ComplexMatrix S(s, s);
  for (std::size_t a = 0; a < s; ++a)
    for (std::size_t b = 0; b < s; ++b) S(a, b) = gram(a, b) / (pz.zeros()[a] - pz.poles()[b]);
  return S;
}

/// Inverts a core matrix, raising CoreSingular when
/// |det S| <= 1e-12 * ||S||_inf^s (this also covers S == 0).
inline ComplexMatrix invert_core(const ComplexMatrix& S, const char* name) {
  const double scale = std::pow(S.inf_norm(), static_cast<double>(S.rows()));
  const double d = std::abs(det(S));
  if (!(d > kCoreSingularRelTol * scale))
    fail(ErrorKind::CoreSingular, std::string(name) + " is singular; data is not in general position");
  try {
    return inverse(S);
  } catch (const Error&) {
    fail(ErrorKind::CoreSingular, std::string(name) + " failed to invert");
  }
}

/// Builds a realization from its four semi-residual matrices, computing both
/// core matrices from the explicit Cauchy formulas.
inline Realization realization_from_semi_residues(PoleZeroData pz, ComplexMatrix C_P, ComplexMatrix B_P,
                                                  ComplexMatrix C_Z, ComplexMatrix B_Z) {
  Realization r;
  r.m = C_P.rows();
  r.S_PZ = core_matrix_pz(B_P, C_Z, pz);
  r.S_ZP = core_matrix_zp(B_Z, C_P, pz);
  r.pz = std::move(pz);
  r.C_P = std::move(C_P);
  r.B_P = std::move(B_P);
  r.C_Z = std::move(C_Z);
  r.B_Z = std::move(B_Z);
  return r;
}

/// The unique function in general position with the given left pole and
/// right zero semi-residues: S_PZ = S_ZP^{-1}, C_Z = C_P S_PZ, B_P = -S_PZ B_Z.
inline Realization complete_from_CP_BZ(const ComplexMatrix& C_P, const ComplexMatrix& B_Z, const PoleZeroData& pz) {
  Realization r;
  r.m = C_P.rows();
  r.pz = pz;
  r.S_ZP = core_matrix_zp(B_Z, C_P, pz);
  r.S_PZ = invert_core(r.S_ZP, "S_ZP");
  r.C_P = C_P;
  r.B_Z = B_Z;
  r.C_Z = C_P * r.S_PZ;
  r.B_P = -(r.S_PZ * B_Z);
  return r;
}

/// Mirror of complete_from_CP_BZ: C_P = C_Z S_PZ^{-1}, B_Z = -S_PZ^{-1} B_P.
inline Realization complete_from_CZ_BP(const ComplexMatrix& C_Z, const ComplexMatrix& B_P, const PoleZeroData& pz) {
  Realization r;
  r.m = C_Z.rows();
  r.pz = pz;
  r.S_PZ = core_matrix_pz(B_P, C_Z, pz);
  r.S_ZP = invert_core(r.S_PZ, "S_PZ");
  r.C_Z = C_Z;
  r.B_P = B_P;
  r.C_P = C_Z * r.S_ZP;
  r.B_Z = -(r.S_ZP * B_P);
  return r;
}

namespace detail {

// I + sum_j c_j b_j / (x - t_j)
inline ComplexMatrix resolvent_sum(const ComplexMatrix& C, const ComplexMatrix& B, const std::vector<cplx>& points,
                                   cplx x, ErrorKind near_kind) {
  const std::size_t m = C.rows();
  ComplexMatrix out = ComplexMatrix::identity(m);
  for (std::size_t j = 0; j < points.size(); ++j) {
    const cplx d = x - points[j];
    if (std::abs(d) <= kSingularDistance)
      fail(near_kind, "evaluation point within 1e-10 of singular point " + std::to_string(j + 1));
    const cplx w = 1.0 / d;
    for (std::size_t a = 0; a < m; ++a) {
      const cplx ca = C(a, j) * w;
      if (ca == cplx{}) continue;
      for (std::size_t b = 0; b < m; ++b) out(a, b) += ca * B(j, b);
    }
  }
  return out;
}

}  // namespace detail

/// Y(x) = I + sum_j c_j b_j / (x - t_j).
inline ComplexMatrix eval(const Realization& r, cplx x) {
  return detail::resolvent_sum(r.C_P, r.B_P, r.pz.poles(), x, ErrorKind::AtPole);
}

/// Y(x)^{-1} = I + sum_j c_{s+j} b_{s+j} / (x - t_{s+j}).
inline ComplexMatrix eval_inverse(const Realization& r, cplx x) {
  return detail::resolvent_sum(r.C_Z, r.B_Z, r.pz.zeros(), x, ErrorKind::AtZeroPoint);
}

/// det Y(x) = prod (x - zeros) / prod (x - poles).
inline cplx det_formula(const Realization& r, cplx x) {
  cplx out = 1.0;
  for (std::size_t j = 0; j < r.s(); ++j) {
    const cplx dp = x - r.pz.poles()[j];
    if (std::abs(dp) <= kSingularDistance) fail(ErrorKind::AtPole, "det_formula at a pole");
    out *= (x - r.pz.zeros()[j]) / dp;
  }
  return out;
}

struct NamedResidual {
  std::string name;
  double value = 0.0;
};

/// Named residual norms; a check passes iff every residual is below tolerance.
struct ResidualReport {
  std::vector<NamedResidual> residuals;
  double tolerance = kValidationTol;

  void add(std::string name, double value) { residuals.push_back({std::move(name), value}); }

  bool passed() const {
    return std::all_of(residuals.begin(), residuals.end(),
                       [&](const NamedResidual& r) { return std::isfinite(r.value) && r.value < tolerance; });
  }

  /// Residuals at or above tolerance, in insertion order.
  std::vector<NamedResidual> failures() const {
    std::vector<NamedResidual> out;
    for (const auto& r : residuals)
      if (!(std::isfinite(r.value) && r.value < tolerance)) out.push_back(r);
    return out;
  }

  double value(const std::string& name) const {
    for (const auto& r : residuals)
      if (r.name == name) return r.value;
    fail(ErrorKind::InvalidArgument, "no residual named " + name);
  }

  double max_value() const {
    double out = 0.0;
    for (const auto& r : residuals) out = std::max(out, r.value);
    return out;
  }
};

using ValidationReport = ResidualReport;

/// Probe points for the determinant check: a ring well outside all
/// singular points plus a few off-axis points in between.
inline std::vector<cplx> determinant_probes(const PoleZeroData& pz) {
  const auto pts = pz.points();
  double spread = 0.0;
  cplx centroid{};
  for (const auto& t : pts) centroid += t;
  centroid /= static_cast<double>(pts.size());
  for (const auto& t : pts) spread = std::max(spread, std::abs(t - centroid));
  spread = std::max(spread, 1.0);
  std::vector<cplx> probes;
  for (int k = 0; k < 5; ++k)
    probes.push_back(centroid + 1.7 * spread * std::polar(1.0, 2.0 * std::numbers::pi * (k + 0.31) / 5.0));
  return probes;
}

/// Residuals of the Sylvester equations, the mutual-inverse identity, both
/// exchange identities and agreement of det Y with the pole/zero product.
inline ValidationReport validate(const Realization& r, double tol = kValidationTol) {
  ValidationReport rep;
  rep.tolerance = tol;
  const auto AP = ComplexMatrix::diagonal(r.pz.poles());
  const auto AZ = ComplexMatrix::diagonal(r.pz.zeros());
  const std::size_t s = r.s();
  rep.add("sylvester_pz", max_diff(AP * r.S_PZ - r.S_PZ * AZ, r.B_P * r.C_Z));
  rep.add("sylvester_zp", max_diff(AZ * r.S_ZP - r.S_ZP * AP, r.B_Z * r.C_P));
  rep.add("core_inverse", max_diff(r.S_PZ * r.S_ZP, ComplexMatrix::identity(s)));
  rep.add("exchange_c", max_diff(r.C_P * r.S_PZ, r.C_Z));
  rep.add("exchange_b", (r.S_PZ * r.B_Z + r.B_P).max_norm());
  double det_res = 0.0;
  for (const auto& x : determinant_probes(r.pz)) {
    const cplx expected = det_formula(r, x);
    det_res = std::max(det_res, std::abs(det(eval(r, x)) - expected) / std::max(1.0, std::abs(expected)));
  }
  rep.add("det_formula", det_res);
  return rep;
}

}  // namespace schl
