#pragma once

// Random data in general position for property tests and self-checks.

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "schl/fuchsian.hpp"
#include "schl/realization.hpp"
#include "schl/schlesinger.hpp"

namespace schl {

struct RandomOptions {
  bool real = false;             // real points and semi-residues
  double min_separation = 0.3;   // between any two of the 2s points
  double max_core_condition = 1e6;
  int max_attempts = 1000;
};

namespace detail {

inline cplx draw(std::mt19937_64& rng, bool real) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double re = n(rng);
  return real ? cplx(re, 0.0) : cplx(re, n(rng));
}

inline ComplexMatrix draw_unit_columns(std::mt19937_64& rng, std::size_t rows, std::size_t cols, bool real) {
  ComplexMatrix out(rows, cols);
  for (std::size_t j = 0; j < cols; ++j) {
    double norm = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      out(i, j) = draw(rng, real);
      norm += std::norm(out(i, j));
    }
    for (std::size_t i = 0; i < rows; ++i) out(i, j) /= std::sqrt(norm);
  }
  return out;
}

}  // namespace detail

/// 2s well-separated points drawn from a complex (or real) normal law.
inline std::vector<cplx> random_points(std::mt19937_64& rng, std::size_t count, const RandomOptions& opt = {}) {
  for (int attempt = 0; attempt < opt.max_attempts; ++attempt) {
    std::vector<cplx> pts(count);
    for (auto& p : pts) p = (opt.real ? 2.0 : 1.2) * detail::draw(rng, opt.real);
    bool ok = true;
    for (std::size_t a = 0; a < count && ok; ++a)
      for (std::size_t b = a + 1; b < count && ok; ++b) ok = std::abs(pts[a] - pts[b]) >= opt.min_separation;
    if (ok) return pts;
  }
  fail(ErrorKind::InvalidArgument, "could not draw separated points");
}

/// Completed realization from random unit-norm C_P columns and B_Z rows;
/// draws with a singular or badly conditioned core are rejected.
inline Realization random_realization(std::mt19937_64& rng, std::size_t m, std::size_t s, const RandomOptions& opt = {}) {
  for (int attempt = 0; attempt < opt.max_attempts; ++attempt) {
    const auto pz = PoleZeroData::from_points(random_points(rng, 2 * s, opt));
    const ComplexMatrix C_P = detail::draw_unit_columns(rng, m, s, opt.real);
    const ComplexMatrix B_Z = detail::draw_unit_columns(rng, m, s, opt.real).transpose();
    try {
      Realization r = complete_from_CP_BZ(C_P, B_Z, pz);
      if (r.S_PZ.max_norm() * r.S_ZP.max_norm() > opt.max_core_condition) continue;
      return r;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::CoreSingular) throw;
    }
  }
  fail(ErrorKind::InvalidArgument, "could not draw a well-conditioned realization");
}

/// Seed built from the residues of a random realization, so the
/// general-position relations hold by construction.
inline SchlesingerSeed random_seed(std::mt19937_64& rng, std::size_t m, std::size_t s, const RandomOptions& opt = {}) {
  const Realization r = random_realization(rng, m, s, opt);
  const FuchsianSystem F = residues_from_realization(r);
  return SchlesingerSeed{s, m, F.points, F.residues};
}

/// A point of the same size near t, for sampling paths of parameters.
inline std::vector<cplx> perturbed_points(std::mt19937_64& rng, const std::vector<cplx>& t, double scale,
                                          bool real = false) {
  std::vector<cplx> out(t);
  for (auto& x : out) x += scale * detail::draw(rng, real);
  return out;
}

}  // namespace schl
