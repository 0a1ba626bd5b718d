#pragma once

// Analytic continuation of a fundamental solution along concrete paths and
// the monodromy of a loop around one singular point.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <variant>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "schl/fuchsian.hpp"
#include "schl/numkit.hpp"

namespace schl {

struct LineLeg {
  cplx from, to;
};

/// Arc of a circle from angle theta0 to theta1 (counterclockwise when
/// theta1 > theta0).
struct ArcLeg {
  cplx center;
  double radius;
  double theta0, theta1;
};

using PathLeg = std::variant<LineLeg, ArcLeg>;

inline cplx leg_point(const PathLeg& leg, double tau) {
  if (const auto* l = std::get_if<LineLeg>(&leg)) return l->from + tau * (l->to - l->from);
  const auto& a = std::get<ArcLeg>(leg);
  return a.center + a.radius * std::polar(1.0, a.theta0 + tau * (a.theta1 - a.theta0));
}

inline cplx leg_velocity(const PathLeg& leg, double tau) {
  if (const auto* l = std::get_if<LineLeg>(&leg)) return l->to - l->from;
  const auto& a = std::get<ArcLeg>(leg);
  const double dtheta = a.theta1 - a.theta0;
  return cplx(0.0, dtheta) * a.radius * std::polar(1.0, a.theta0 + tau * dtheta);
}

inline double leg_length(const PathLeg& leg) {
  if (const auto* l = std::get_if<LineLeg>(&leg)) return std::abs(l->to - l->from);
  const auto& a = std::get<ArcLeg>(leg);
  return a.radius * std::abs(a.theta1 - a.theta0);
}

inline PathLeg reversed(const PathLeg& leg) {
  if (const auto* l = std::get_if<LineLeg>(&leg)) return LineLeg{l->to, l->from};
  const auto& a = std::get<ArcLeg>(leg);
  return ArcLeg{a.center, a.radius, a.theta1, a.theta0};
}

/// Distance from p to a leg.
inline double leg_distance(const PathLeg& leg, cplx p) {
  if (const auto* l = std::get_if<LineLeg>(&leg)) {
    const cplx d = l->to - l->from;
    const double len2 = std::norm(d);
    const double tau = len2 == 0.0 ? 0.0 : std::clamp(((p - l->from) * std::conj(d)).real() / len2, 0.0, 1.0);
    return std::abs(p - (l->from + tau * d));
  }
  const auto& a = std::get<ArcLeg>(leg);
  // Nearest point is either the radial projection (if inside the arc) or an endpoint.
  double best = std::min(std::abs(p - leg_point(leg, 0.0)), std::abs(p - leg_point(leg, 1.0)));
  const double phi = std::arg(p - a.center);
  const double lo = std::min(a.theta0, a.theta1), hi = std::max(a.theta0, a.theta1);
  for (int w = -2; w <= 2; ++w) {
    const double th = phi + 2.0 * std::numbers::pi * w;
    if (th >= lo && th <= hi) best = std::min(best, std::abs(std::abs(p - a.center) - a.radius));
  }
  return best;
}

struct Path {
  std::vector<PathLeg> legs;

  static Path polyline(const std::vector<cplx>& waypoints) {
    Path p;
    for (std::size_t k = 0; k + 1 < waypoints.size(); ++k) p.legs.push_back(LineLeg{waypoints[k], waypoints[k + 1]});
    return p;
  }

  cplx start() const { return leg_point(legs.front(), 0.0); }
  cplx end() const { return leg_point(legs.back(), 1.0); }

  double length() const {
    double out = 0.0;
    for (const auto& l : legs) out += leg_length(l);
    return out;
  }

  double distance_to(cplx p) const {
    double out = std::numeric_limits<double>::infinity();
    for (const auto& l : legs) out = std::min(out, leg_distance(l, p));
    return out;
  }

  Path reversed_path() const {
    Path p;
    for (auto it = legs.rbegin(); it != legs.rend(); ++it) p.legs.push_back(reversed(*it));
    return p;
  }

  Path& append(const Path& other) {
    legs.insert(legs.end(), other.legs.begin(), other.legs.end());
    return *this;
  }
};

struct IntegratorOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double min_step = 1e-12;  // per leg, in units of the leg's parameter
  double clearance = 1e-3;  // relative to max(1, max |t_j|)
};

/// Continues Y0 along `path` as a solution of dY/dx = (sum_j Q_j/(x - t_j)) Y
/// with an adaptive Dormand-Prince 5(4) pair.
inline ComplexMatrix integrate(const FuchsianSystem& F, const Path& path, const ComplexMatrix& Y0,
                               const IntegratorOptions& opt = {}) {
  namespace ode = boost::numeric::odeint;
  using state = std::vector<cplx>;
  const std::size_t m = F.m;
  if (Y0.rows() != m || Y0.cols() != m) fail(ErrorKind::DimensionMismatch, "initial value must be m x m");
  if (path.legs.empty()) return Y0;
  const double guard = opt.clearance * point_scale(F.points);
  for (std::size_t j = 0; j < F.n(); ++j)
    if (path.distance_to(F.points[j]) <= guard)
      fail(ErrorKind::StepUnderflow, "path passes within " + std::to_string(guard) + " of singular point " +
                                         std::to_string(j + 1));

  state y(Y0.data().begin(), Y0.data().end());
  ComplexMatrix A(m, m);
  for (const auto& leg : path.legs) {
    auto rhs = [&](const state& Y, state& dY, double tau) {
      const cplx x = leg_point(leg, tau);
      const cplx v = leg_velocity(leg, tau);
      for (std::size_t a = 0; a < m * m; ++a) A.data()[a] = 0.0;
      for (std::size_t j = 0; j < F.n(); ++j) {
        const cplx w = v / (x - F.points[j]);
        const auto q = F.residues[j].data();
        for (std::size_t a = 0; a < m * m; ++a) A.data()[a] += w * q[a];
      }
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) {
          cplx acc = 0.0;
          for (std::size_t k = 0; k < m; ++k) acc += A(a, k) * Y[k * m + b];
          dY[a * m + b] = acc;
        }
    };
    auto stepper = ode::make_controlled(opt.abs_tol, opt.rel_tol, ode::runge_kutta_dopri5<state>());
    double tau = 0.0, dt = 1e-2;
    while (tau < 1.0) {
      if (tau + dt > 1.0) dt = 1.0 - tau;
      if (stepper.try_step(rhs, y, tau, dt) == ode::fail) {
        if (dt < opt.min_step) fail(ErrorKind::StepUnderflow, "step size fell below the minimum");
      }
    }
  }
  ComplexMatrix out(m, m);
  std::copy(y.begin(), y.end(), out.data().begin());
  return out;
}

struct LoopPath {
  cplx base;
  std::size_t j = 0;
  double radius = 0.0;
  int winding = 1;
  Path approach;  // base -> entry point on the circle

  Path full() const {
    const cplx entry = approach.end();
    const double theta0 = std::arg(entry - center);
    Path loop = approach;
    loop.legs.push_back(ArcLeg{center, radius, theta0, theta0 + 2.0 * std::numbers::pi * winding});
    loop.append(approach.reversed_path());
    return loop;
  }

  cplx center{};
};

/// Anchor standing in for infinity: centroid + 10 * spread along the real axis.
inline cplx default_base_point(const std::vector<cplx>& points) {
  cplx centroid{};
  for (const auto& t : points) centroid += t;
  centroid /= static_cast<double>(points.size());
  double spread = 0.0;
  for (const auto& t : points) spread = std::max(spread, std::abs(t - centroid));
  return centroid + 10.0 * std::max(spread, 1.0);
}

/// Loop from `base` around t_j: an arc of the circle through `base` about
/// the centroid, a ray from there toward t_j, one circuit of the small
/// circle, and the same way back. The ray direction is chosen among 72
/// candidates to maximize clearance from the other singular points.
inline LoopPath make_loop(const FuchsianSystem& F, std::size_t j, double radius, std::optional<cplx> base = {},
                          int winding = 1) {
  if (j >= F.n()) fail(ErrorKind::IndexOutOfRange, "no singular point " + std::to_string(j + 1));
  const double iso = F.isolation(j);
  if (!(radius > 0.0) || radius >= iso)
    fail(ErrorKind::InvalidArgument, "loop radius must isolate the singular point");
  cplx centroid{};
  for (const auto& t : F.points) centroid += t;
  centroid /= static_cast<double>(F.n());
  const cplx xb = base.value_or(default_base_point(F.points));
  const double big = std::abs(xb - centroid);
  const cplx tj = F.points[j];
  for (const auto& t : F.points)
    if (std::abs(t - centroid) >= 0.9 * big) fail(ErrorKind::InvalidArgument, "base point too close to the cluster");

  double best_clear = -1.0, best_phi = 0.0;
  for (int k = 0; k < 72; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / 72.0;
    const cplx u = std::polar(1.0, phi);
    const LineLeg ray{tj + radius * u, tj + 2.0 * big * u};
    double clear = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < F.n(); ++i)
      if (i != j) clear = std::min(clear, leg_distance(ray, F.points[i]));
    if (clear > best_clear + 1e-12) {
      best_clear = clear;
      best_phi = phi;
    }
  }
  const cplx u = std::polar(1.0, best_phi);
  // Intersection of the ray tj + r u (r > 0) with |x - centroid| = big.
  const cplx d = tj - centroid;
  const double bq = (d * std::conj(u)).real();
  const double r_hit = -bq + std::sqrt(bq * bq - std::norm(d) + big * big);
  const cplx far = tj + r_hit * u;

  LoopPath lp;
  lp.base = xb;
  lp.j = j;
  lp.radius = radius;
  lp.winding = winding;
  lp.center = tj;
  const double a0 = std::arg(xb - centroid);
  double a1 = std::arg(far - centroid);
  while (a1 - a0 > std::numbers::pi) a1 -= 2.0 * std::numbers::pi;
  while (a1 - a0 < -std::numbers::pi) a1 += 2.0 * std::numbers::pi;
  if (std::abs(a1 - a0) > 1e-14) lp.approach.legs.push_back(ArcLeg{centroid, big, a0, a1});
  lp.approach.legs.push_back(LineLeg{far, tj + radius * u});
  return lp;
}

/// Y near the anchor from the expansion Y = I - (sum_j t_j Q_j) / x + O(1/x^2)
/// of the solution normalized at infinity.
inline ComplexMatrix asymptotic_seed(const FuchsianSystem& F, cplx x) {
  ComplexMatrix first(F.m, F.m);
  for (std::size_t j = 0; j < F.n(); ++j) first += F.residues[j] * F.points[j];
  return ComplexMatrix::identity(F.m) - first / x;
}

struct MonodromyOptions {
  double radius_fraction = 0.4;  // of the distance to the nearest other point
  std::optional<double> radius;
  std::optional<cplx> base;
  std::optional<ComplexMatrix> Y_base;
  IntegratorOptions integrator;
};

/// Phi = (continued Y)^{-1} (original Y) for one counterclockwise circuit
/// of t_j starting and ending at the base point.
inline ComplexMatrix monodromy(const FuchsianSystem& F, std::size_t j, const MonodromyOptions& opt = {}) {
  if (j >= F.n()) fail(ErrorKind::IndexOutOfRange, "no singular point " + std::to_string(j + 1));
  const double radius = opt.radius.value_or(opt.radius_fraction * F.isolation(j));
  const LoopPath loop = make_loop(F, j, radius, opt.base);
  const ComplexMatrix Y0 = opt.Y_base.value_or(asymptotic_seed(F, loop.base));
  const ComplexMatrix Y1 = integrate(F, loop.full(), Y0, opt.integrator);
  return lu_solve(Y1, Y0);
}

inline ComplexMatrix monodromy(const FuchsianSystem& F, std::size_t j, double radius) {
  MonodromyOptions opt;
  opt.radius = radius;
  return monodromy(F, j, opt);
}

}  // namespace schl
