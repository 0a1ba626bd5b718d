#pragma once

// Rational solutions of the Schlesinger system built from rank-one initial
// residues, plus residual checks of the system and of its pole structure.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "schl/continuation.hpp"
#include "schl/eigen_bridge.hpp"
#include "schl/fuchsian.hpp"
#include "schl/realization.hpp"

namespace schl {

inline constexpr double kMovablePoleRelTol = 1e-12;
inline constexpr double kInitialConditionTol = 1e-9;

struct SchlesingerSeed {
  std::size_t s = 0;
  std::size_t m = 0;
  std::vector<cplx> t0;
  std::vector<ComplexMatrix> Q0;

  FuchsianSystem system() const { return FuchsianSystem(t0, Q0, false); }

  void check_shapes() const {
    if (s == 0 || t0.size() != 2 * s || Q0.size() != 2 * s)
      fail(ErrorKind::InvalidSeed, "seed needs 2s points and 2s residues");
    for (const auto& q : Q0)
      if (q.rows() != m || q.cols() != m) fail(ErrorKind::InvalidSeed, "seed residues must be m x m");
    if (!points_distinct(t0)) fail(ErrorKind::InvalidSeed, "seed points are not pairwise distinct");
  }
};

/// General-position report of the seed's residues.
inline CheckReport check_seed(const SchlesingerSeed& seed) {
  seed.check_shapes();
  return check_general_position(seed.system(), seed.s);
}

struct ExplicitSolution {
  std::size_t s = 0;
  std::size_t m = 0;
  ComplexMatrix B_P0;  // s x m
  ComplexMatrix C_Z0;  // m x s
  SchlesingerSeed seed;
};

/// Builds the solution from given rank-one factors of the seed: column j of
/// C_P0 spans Q0_j for poles and row j of B_Z0 spans Q0_{s+j} for zeros.
inline ExplicitSolution build_explicit_from_factors(const SchlesingerSeed& seed, const ComplexMatrix& C_P0,
                                                    const ComplexMatrix& B_Z0) {
  const auto pz = PoleZeroData::from_points(seed.t0);
  ComplexMatrix S_ZP = core_matrix_zp(B_Z0, C_P0, pz);
  ComplexMatrix S_PZ;
  try {
    S_PZ = invert_core(S_ZP, "S_ZP");
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::CoreSingular) throw;
    fail(ErrorKind::InvalidSeed, std::string("seed is not in general position: ") + e.what());
  }
  ExplicitSolution sol;
  sol.s = seed.s;
  sol.m = seed.m;
  sol.B_P0 = -(S_PZ * B_Z0);
  sol.C_Z0 = C_P0 * S_PZ;
  sol.seed = seed;
  return sol;
}

/// Rank-one factors of the seed residues assembled into C_P0 (poles) and
/// B_Z0 (zeros).
inline std::pair<ComplexMatrix, ComplexMatrix> seed_semi_residues(const SchlesingerSeed& seed) {
  ComplexMatrix C_P0(seed.m, seed.s), B_Z0(seed.s, seed.m);
  for (std::size_t j = 0; j < 2 * seed.s; ++j) {
    RankOneFactors f;
    try {
      f = rank1_factor(seed.Q0[j]);
    } catch (const Error& e) {
      fail(e.kind(), "residue j=" + std::to_string(j + 1) + ": " + e.what());
    }
    if (j < seed.s) C_P0.set_col(j, f.col);
    else B_Z0.set_row(j - seed.s, f.row);
  }
  return {std::move(C_P0), std::move(B_Z0)};
}

/// Factorizes the seed residues, checks the general-position relations and
/// forms the t-independent generators B_P0, C_Z0.
inline ExplicitSolution build_explicit(const SchlesingerSeed& seed) {
  seed.check_shapes();
  auto [C_P0, B_Z0] = seed_semi_residues(seed);
  const auto report = check_general_position(seed.system(), seed.s);
  if (!report.passed()) {
    const auto bad = report.failures().front();
    fail(ErrorKind::InvalidSeed, describe_relation(bad.name) + " (residual " + std::to_string(bad.value) + ")");
  }
  return build_explicit_from_factors(seed, C_P0, B_Z0);
}

/// Everything computed at one parameter point t.
struct SolutionState {
  ComplexMatrix S_PZ, S_ZP, B_Z, C_P;
  cplx det_S_PZ;
  std::vector<ComplexMatrix> Q;
};

inline double movable_pole_threshold(const ComplexMatrix& S) {
  const std::size_t s = S.rows();
  double fact = 1.0;
  for (std::size_t k = 2; k <= s; ++k) fact *= static_cast<double>(k);
  return kMovablePoleRelTol * fact * std::pow(S.max_norm(), static_cast<double>(s));
}

/// det S_PZ(t); its zeros are the movable poles of the solution.
inline cplx det_core(const ExplicitSolution& sol, std::span<const cplx> t) {
  if (t.size() != 2 * sol.s) fail(ErrorKind::DimensionMismatch, "need 2s parameter points");
  return det(core_matrix_pz(sol.B_P0, sol.C_Z0, PoleZeroData::from_points(t)));
}

inline SolutionState evaluate_state(const ExplicitSolution& sol, std::span<const cplx> t) {
  if (t.size() != 2 * sol.s) fail(ErrorKind::DimensionMismatch, "need 2s parameter points");
  const auto pz = PoleZeroData::from_points(t);
  SolutionState st;
  st.S_PZ = core_matrix_pz(sol.B_P0, sol.C_Z0, pz);
  st.det_S_PZ = det(st.S_PZ);
  if (!(std::abs(st.det_S_PZ) > movable_pole_threshold(st.S_PZ)))
    fail(ErrorKind::MovablePole, "det S_PZ(t) vanishes at this parameter point");
  try {
    st.S_ZP = inverse(st.S_PZ);
  } catch (const Error&) {
    fail(ErrorKind::MovablePole, "S_PZ(t) is not invertible at this parameter point");
  }
  st.B_Z = -(st.S_ZP * sol.B_P0);
  st.C_P = sol.C_Z0 * st.S_ZP;
  Realization r;
  r.m = sol.m;
  r.pz = pz;
  r.C_P = st.C_P;
  r.B_Z = st.B_Z;
  r.S_PZ = st.S_PZ;
  r.S_ZP = st.S_ZP;
  st.Q = residues_from_realization(r).residues;
  return st;
}

/// Q_1(t), ..., Q_2s(t).
inline std::vector<ComplexMatrix> eval_Q(const ExplicitSolution& sol, std::span<const cplx> t) {
  return evaluate_state(sol, t).Q;
}

/// max_j ||Q_j(t0) - Q0_j||.
inline double initial_condition_residual(const ExplicitSolution& sol) {
  const auto Q = eval_Q(sol, sol.seed.t0);
  double out = 0.0;
  for (std::size_t j = 0; j < Q.size(); ++j) out = std::max(out, max_diff(Q[j], sol.seed.Q0[j]));
  return out;
}

namespace detail {

// max_{j,k} |D_k Q_j - rhs_{jk}| where D_k Q_j is supplied by `derivative(k)`.
template <typename Derivative>
double schlesinger_defect(const ExplicitSolution& sol, std::span<const cplx> t, Derivative&& derivative) {
  const std::size_t n = 2 * sol.s;
  const auto Q = eval_Q(sol, t);
  double worst = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const std::vector<ComplexMatrix> dQ = derivative(k);
    for (std::size_t j = 0; j < n; ++j) {
      ComplexMatrix expected(sol.m, sol.m);
      if (k != j) {
        expected = commutator(Q[k], Q[j]) / (t[k] - t[j]);
      } else {
        for (std::size_t i = 0; i < n; ++i)
          if (i != j) expected -= commutator(Q[i], Q[j]) / (t[i] - t[j]);
      }
      worst = std::max(worst, max_diff(dQ[j], expected));
    }
  }
  return worst;
}

// (Q_j(t + h e_k) - Q_j(t - h e_k)) / 2h for all j.
inline std::vector<ComplexMatrix> central_difference(const ExplicitSolution& sol, std::span<const cplx> t,
                                                     std::size_t k, double h) {
  std::vector<cplx> tp(t.begin(), t.end()), tm(t.begin(), t.end());
  tp[k] += h;
  tm[k] -= h;
  auto out = eval_Q(sol, tp);
  const auto Qm = eval_Q(sol, tm);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = (out[j] - Qm[j]) / (2.0 * h);
  return out;
}

}  // namespace detail

/// Central-difference check of
///   dQ_j/dt_k = [Q_k, Q_j] / (t_k - t_j)   (k != j),
///   dQ_j/dt_j = -sum_{k != j} [Q_k, Q_j] / (t_k - t_j).
inline double schlesinger_residual(const ExplicitSolution& sol, std::span<const cplx> t, double h) {
  return detail::schlesinger_defect(sol, t, [&](std::size_t k) { return detail::central_difference(sol, t, k, h); });
}

/// The same check with the Richardson combination (4 D(h/2) - D(h)) / 3,
/// whose truncation error is O(h^4).
inline double schlesinger_residual_extrapolated(const ExplicitSolution& sol, std::span<const cplx> t, double h) {
  return detail::schlesinger_defect(sol, t, [&](std::size_t k) {
    auto fine = detail::central_difference(sol, t, k, 0.5 * h);
    const auto coarse = detail::central_difference(sol, t, k, h);
    for (std::size_t j = 0; j < fine.size(); ++j) fine[j] = (4.0 * fine[j] - coarse[j]) / 3.0;
    return fine;
  });
}

/// Coefficients Q_{j,k}, 0 <= k <= p_j, of a system with higher-order poles.
struct HigherOrderFamily {
  std::vector<cplx> points;
  std::vector<std::vector<ComplexMatrix>> Q;  // Q[j][k]
  bool normalized = false;

  std::size_t order(std::size_t j) const { return Q.at(j).size() - 1; }
};

inline double binomial(std::size_t n, std::size_t k) {
  double out = 1.0;
  for (std::size_t i = 1; i <= k; ++i) out = out * static_cast<double>(n - k + i) / static_cast<double>(i);
  return out;
}

/// Right-hand side of the generalized Schlesinger system for dQ_{j,k} paired
/// with the tangent vector dt:
///   sum_{l=0}^{p_j-k} sum_{j' != j} sum_{k'=0}^{p_j'} (-1)^l C(l+k', l)
///     [Q_{j',k'}, Q_{j,k+l}] (dt_j - dt_j') / (t_j - t_j')^{k'+l+1}.
/// k = 0 is accepted as well as 1..p_j.
inline ComplexMatrix generalized_rhs(const HigherOrderFamily& fam, std::size_t j, std::size_t k,
                                     std::span<const cplx> dt) {
  const std::size_t n = fam.points.size();
  if (j >= n) fail(ErrorKind::IndexOutOfRange, "no singular point " + std::to_string(j + 1));
  if (k > fam.order(j)) fail(ErrorKind::IndexOutOfRange, "coefficient index exceeds the order at this point");
  if (dt.size() != n) fail(ErrorKind::DimensionMismatch, "tangent vector must have one entry per point");
  if (!points_distinct(fam.points)) fail(ErrorKind::InvalidPoints, "points are not pairwise distinct");
  const std::size_t m = fam.Q[j][0].rows();
  ComplexMatrix out(m, m);
  for (std::size_t l = 0; l + k <= fam.order(j); ++l)
    for (std::size_t jp = 0; jp < n; ++jp) {
      if (jp == j) continue;
      const cplx diff = fam.points[j] - fam.points[jp];
      const cplx pairing = dt[j] - dt[jp];
      for (std::size_t kp = 0; kp <= fam.order(jp); ++kp) {
        const double sign = (l % 2 == 0) ? 1.0 : -1.0;
        const cplx w = sign * binomial(l + kp, l) * pairing / std::pow(diff, static_cast<double>(kp + l + 1));
        out += commutator(fam.Q[jp][kp], fam.Q[j][k + l]) * w;
      }
    }
  return out;
}

/// A root of det S_PZ along a segment together with two one-sided residue
/// limits of Q_j there.
struct PoleRoot {
  double tau = 0.0;              // position on the segment, in [0, 1]
  std::vector<cplx> t;           // parameter point
  double det_abs = 0.0;          // |det S_PZ| at the root
  int order = 0;                 // pole order p estimated from the growth of |Q|
  double residue_norm = 0.0;     // max_j norm of the leading coefficient lim (tau - tau_r)^p Q_j
  double limit_mismatch = 0.0;   // max_j difference of that coefficient from the two sides
};

struct PoleLocusOptions {
  double bisect_tol = 1e-14;
  double accept_tol = 1e-8;
  double limit_step = 1e-4;
};

namespace detail {

inline std::vector<cplx> segment_point(std::span<const cplx> a, std::span<const cplx> b, cplx tau) {
  std::vector<cplx> out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] + tau * (b[k] - a[k]);
  return out;
}

inline std::vector<cplx> line_point(std::span<const cplx> t0, std::span<const cplx> dir, cplx tau) {
  std::vector<cplx> out(t0.size());
  for (std::size_t k = 0; k < t0.size(); ++k) out[k] = t0[k] + tau * dir[k];
  return out;
}

// eps^order * Q_j(t(tau + eps)) for all j.
inline std::vector<ComplexMatrix> scaled_residues(const ExplicitSolution& sol, std::span<const cplx> a,
                                                  std::span<const cplx> b, double tau, double eps, int order) {
  auto Q = eval_Q(sol, segment_point(a, b, tau + eps));
  for (auto& q : Q) q *= std::pow(eps, order);
  return Q;
}

inline double max_norm(const std::vector<ComplexMatrix>& Q) {
  double out = 0.0;
  for (const auto& q : Q) out = std::max(out, q.max_norm());
  return out;
}

}  // namespace detail

/// Roots of det S_PZ(t) on the segment t(tau) = a + tau (b - a): sign changes
/// of Re(g(tau) conj(g(tau_k))) between samples are bisected and accepted when
/// |g| < accept_tol. Each root carries the pole order p, read off from the
/// growth of |Q| between distances d and 2d, and Richardson-extrapolated
/// limits of (tau - tau_r)^p Q_j from both sides.
inline std::vector<PoleRoot> pole_locus(const ExplicitSolution& sol, std::span<const cplx> a, std::span<const cplx> b,
                                        std::size_t samples, const PoleLocusOptions& opt = {}) {
  if (a.size() != 2 * sol.s || b.size() != 2 * sol.s) fail(ErrorKind::DimensionMismatch, "need 2s parameter points");
  if (samples < 2) fail(ErrorKind::InvalidArgument, "need at least two samples");
  auto g = [&](double tau) -> std::optional<cplx> {
    const auto t = detail::segment_point(a, b, tau);
    if (!points_distinct(t)) return std::nullopt;
    return det_core(sol, t);
  };
  std::vector<PoleRoot> roots;
  std::optional<cplx> prev = g(0.0);
  for (std::size_t i = 1; i < samples; ++i) {
    const double lo0 = static_cast<double>(i - 1) / static_cast<double>(samples - 1);
    const double hi0 = static_cast<double>(i) / static_cast<double>(samples - 1);
    const std::optional<cplx> cur = g(hi0);
    if (prev && cur && *prev != cplx{} && (*cur * std::conj(*prev)).real() < 0.0) {
      const cplx ref = std::conj(*prev) / std::abs(*prev);
      double lo = lo0, hi = hi0;
      bool ok = true;
      while (hi - lo > opt.bisect_tol) {
        const double mid = 0.5 * (lo + hi);
        const auto gm = g(mid);
        if (!gm) {
          ok = false;
          break;
        }
        if ((*gm * ref).real() > 0.0) lo = mid;
        else hi = mid;
      }
      const double tau = 0.5 * (lo + hi);
      const auto groot = ok ? g(tau) : std::nullopt;
      if (groot && std::abs(*groot) < opt.accept_tol) {
        PoleRoot root;
        root.tau = tau;
        root.t = detail::segment_point(a, b, tau);
        root.det_abs = std::abs(*groot);
        const double d = opt.limit_step;
        try {
          const double growth = detail::max_norm(detail::scaled_residues(sol, a, b, tau, d, 0)) /
                                detail::max_norm(detail::scaled_residues(sol, a, b, tau, 2 * d, 0));
          root.order = static_cast<int>(std::lround(std::log2(growth)));
          const int p = root.order;
          const auto fp1 = detail::scaled_residues(sol, a, b, tau, d, p);
          const auto fp2 = detail::scaled_residues(sol, a, b, tau, 2 * d, p);
          const auto fm1 = detail::scaled_residues(sol, a, b, tau, -d, p);
          const auto fm2 = detail::scaled_residues(sol, a, b, tau, -2 * d, p);
          for (std::size_t j = 0; j < fp1.size(); ++j) {
            const ComplexMatrix plus = 2.0 * fp1[j] - fp2[j];
            const ComplexMatrix minus = 2.0 * fm1[j] - fm2[j];
            root.residue_norm = std::max(root.residue_norm, plus.max_norm());
            root.limit_mismatch = std::max(root.limit_mismatch, max_diff(plus, minus));
          }
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::MovablePole) throw;
          root.limit_mismatch = std::numeric_limits<double>::infinity();
        }
        roots.push_back(std::move(root));
      }
    }
    prev = cur;
  }
  return roots;
}

/// Linearized least-squares rational fit p/q of degree `degree` to values
/// f(tau_k); returns the largest relative misfit at the check points.
inline double rational_fit_residual(std::span<const cplx> taus, std::span<const cplx> values,
                                    std::span<const cplx> check_taus, std::span<const cplx> check_values,
                                    std::size_t degree, double tau_scale = 1.0) {
  const std::size_t n = taus.size(), d1 = degree + 1;
  if (n < 2 * d1) fail(ErrorKind::InvalidArgument, "not enough samples for the requested degree");
  EigenMatrix A(n, 2 * d1);
  double fscale = 1.0;
  for (const auto& v : values) fscale = std::max(fscale, std::abs(v));
  for (std::size_t i = 0; i < n; ++i) {
    cplx pw = 1.0;
    for (std::size_t k = 0; k < d1; ++k, pw *= taus[i] / tau_scale) {
      A(i, k) = pw;
      A(i, d1 + k) = -values[i] / fscale * pw;
    }
  }
  Eigen::JacobiSVD<EigenMatrix> svd(A, Eigen::ComputeFullV);
  const auto v = svd.matrixV().col(2 * d1 - 1);
  double worst = 0.0;
  for (std::size_t i = 0; i < check_taus.size(); ++i) {
    cplx p = 0.0, q = 0.0, pw = 1.0;
    for (std::size_t k = 0; k < d1; ++k, pw *= check_taus[i] / tau_scale) {
      p += v(k) * pw;
      q += v(d1 + k) * pw;
    }
    worst = std::max(worst, std::abs(fscale * p / q - check_values[i]) / fscale);
  }
  return worst;
}

/// Fits every entry of every Q_j along t(tau) = t0 + tau * direction by a
/// rational function of the given degree in tau, using nodes on the circle
/// |tau| = radius and checking at interleaved nodes. Returns the worst misfit.
/// Small radii do not separate degrees: any analytic function fits there.
inline double rationality_residual(const ExplicitSolution& sol, std::span<const cplx> t0,
                                   std::span<const cplx> direction, std::size_t degree, double radius = 1.0) {
  const std::size_t n = std::max<std::size_t>(6 * sol.s + 2, 2 * (2 * degree + 2));
  std::vector<cplx> taus(n), checks(n);
  std::vector<std::vector<ComplexMatrix>> fit_vals, check_vals;
  for (std::size_t k = 0; k < n; ++k) {
    taus[k] = radius * std::polar(1.0, 2.0 * std::numbers::pi * k / static_cast<double>(n));
    checks[k] = radius * std::polar(1.0, 2.0 * std::numbers::pi * (k + 0.5) / static_cast<double>(n));
    fit_vals.push_back(eval_Q(sol, detail::line_point(t0, direction, taus[k])));
    check_vals.push_back(eval_Q(sol, detail::line_point(t0, direction, checks[k])));
  }
  double worst = 0.0;
  std::vector<cplx> f(n), fc(n);
  for (std::size_t j = 0; j < 2 * sol.s; ++j)
    for (std::size_t a = 0; a < sol.m; ++a)
      for (std::size_t b = 0; b < sol.m; ++b) {
        for (std::size_t k = 0; k < n; ++k) {
          f[k] = fit_vals[k][j](a, b);
          fc[k] = check_vals[k][j](a, b);
        }
        worst = std::max(worst, rational_fit_residual(taus, f, checks, fc, degree, radius));
      }
  return worst;
}

struct IsomonodromyReport {
  std::vector<double> max_deviation;  // per sample, max_j ||Phi_j - I||
  std::vector<bool> movable_pole;     // sample skipped because det S_PZ vanishes
  double tolerance = 1e-6;

  bool passed() const {
    for (std::size_t i = 0; i < max_deviation.size(); ++i)
      if (!movable_pole[i] && !(max_deviation[i] < tolerance)) return false;
    return true;
  }
};

/// Monodromy of every singular point of the system at each parameter sample.
inline IsomonodromyReport verify_isomonodromy(const ExplicitSolution& sol,
                                              const std::vector<std::vector<cplx>>& samples,
                                              const MonodromyOptions& opt = {}) {
  IsomonodromyReport rep;
  for (const auto& t : samples) {
    std::vector<ComplexMatrix> Q;
    try {
      Q = eval_Q(sol, t);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::MovablePole) throw;
      rep.max_deviation.push_back(std::numeric_limits<double>::quiet_NaN());
      rep.movable_pole.push_back(true);
      continue;
    }
    FuchsianSystem F;
    F.m = sol.m;
    F.points = t;
    F.residues = std::move(Q);
    F.normalized = true;
    double worst = 0.0;
    for (std::size_t j = 0; j < F.n(); ++j)
      worst = std::max(worst, max_diff(monodromy(F, j, opt), ComplexMatrix::identity(sol.m)));
    rep.max_deviation.push_back(worst);
    rep.movable_pole.push_back(false);
  }
  return rep;
}

}  // namespace schl
