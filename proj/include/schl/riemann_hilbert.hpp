#pragma once

// Regular Riemann-Hilbert factorization X-(x) F(x) = X+(x) on a circle:
// Laurent splitting, scalar factorization, and a Nystrom discretization of
// the Fredholm integral equation for X-.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <future>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "schl/eigen_bridge.hpp"
#include "schl/numkit.hpp"

namespace schl {

inline constexpr double kNoRegularSolutionTol = 1e-10;
inline constexpr double kInvertibleSampleTol = 1e-12;

/// Matrix samples of a function analytic on an annulus around the circle.
struct AnnulusFunction {
  QuadratureCircle circle;
  std::vector<ComplexMatrix> samples;

  AnnulusFunction() = default;
  AnnulusFunction(QuadratureCircle c, std::vector<ComplexMatrix> values) : circle(c), samples(std::move(values)) {
    if (samples.size() != circle.node_count) fail(ErrorKind::DimensionMismatch, "one sample per node required");
    for (const auto& s : samples)
      if (s.rows() != samples.front().rows() || s.cols() != samples.front().cols())
        fail(ErrorKind::DimensionMismatch, "samples must share one shape");
  }

  template <typename F>
  static AnnulusFunction sample(const QuadratureCircle& c, F&& f) {
    std::vector<ComplexMatrix> values;
    values.reserve(c.node_count);
    for (std::size_t k = 0; k < c.node_count; ++k) values.push_back(f(c.node(k)));
    return {c, std::move(values)};
  }

  static AnnulusFunction scalar(const QuadratureCircle& c, const std::vector<cplx>& values) {
    std::vector<ComplexMatrix> out;
    for (const auto& v : values) out.push_back(ComplexMatrix{{v}});
    return {c, std::move(out)};
  }

  std::size_t m() const { return samples.front().rows(); }
  std::size_t size() const { return samples.size(); }
};

/// Discrete Laurent coefficients a_n of F(x) = sum_n a_n u^n, u = (x - c)/r,
/// for n = -N/2 .. N/2 - 1. Index n is stored at position n + N/2.
struct LaurentSeries {
  QuadratureCircle circle;
  std::vector<ComplexMatrix> coeffs;

  long lowest() const { return -static_cast<long>(circle.node_count / 2); }
  const ComplexMatrix& at(long n) const { return coeffs.at(static_cast<std::size_t>(n - lowest())); }

  /// Sum of the terms with lo <= n <= hi.
  ComplexMatrix partial(cplx x, long lo, long hi) const {
    const cplx u = (x - circle.center) / circle.radius;
    ComplexMatrix out(coeffs.front().rows(), coeffs.front().cols());
    for (long n = std::max(lo, lowest()); n <= std::min(hi, lowest() + static_cast<long>(coeffs.size()) - 1); ++n)
      out += at(n) * std::pow(u, static_cast<double>(n));
    return out;
  }

  /// max norm of the coefficients with lo <= n <= hi.
  double mass(long lo, long hi) const {
    double out = 0.0;
    for (long n = std::max(lo, lowest()); n <= std::min(hi, lowest() + static_cast<long>(coeffs.size()) - 1); ++n)
      out = std::max(out, at(n).max_norm());
    return out;
  }
};

inline LaurentSeries laurent_coefficients(const AnnulusFunction& f) {
  const std::size_t N = f.size();
  const long half = static_cast<long>(N / 2);
  LaurentSeries out{f.circle, {}};
  out.coeffs.reserve(N);
  for (long n = -half; n < half; ++n) {
    ComplexMatrix acc(f.samples.front().rows(), f.samples.front().cols());
    for (std::size_t k = 0; k < N; ++k)
      acc += f.samples[k] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(n * static_cast<long>(k)) /
                                                static_cast<double>(N));
    out.coeffs.push_back(acc / static_cast<double>(N));
  }
  return out;
}

/// Z = Z+ - Z-, with Z+ holding the powers n >= 0 and Z- = -(powers n < 0),
/// so that Z-(infinity) = 0. The unresolved Nyquist term goes to Z-.
struct CauchySplit {
  LaurentSeries series;
  std::vector<ComplexMatrix> plus_samples;
  std::vector<ComplexMatrix> minus_samples;

  ComplexMatrix plus(cplx x) const { return series.partial(x, 0, std::numeric_limits<long>::max()); }
  ComplexMatrix minus(cplx x) const { return -series.partial(x, series.lowest(), -1); }
};

inline CauchySplit cauchy_split(const AnnulusFunction& Z) {
  CauchySplit out{laurent_coefficients(Z), {}, {}};
  for (const auto& x : Z.circle.nodes()) {
    out.plus_samples.push_back(out.plus(x));
    out.minus_samples.push_back(out.minus(x));
  }
  return out;
}

/// F'(x_k) by differentiating the trigonometric interpolant; the Nyquist
/// mode is dropped. The first sample is subtracted first so constant data
/// differentiates to exactly zero.
inline std::vector<ComplexMatrix> spectral_derivative(const AnnulusFunction& f) {
  AnnulusFunction shifted = f;
  for (auto& s : shifted.samples) s = s - f.samples.front();
  const auto series = laurent_coefficients(shifted);
  const long half = -series.lowest();
  std::vector<ComplexMatrix> out;
  for (std::size_t k = 0; k < f.size(); ++k) {
    const cplx u = (f.circle.node(k) - f.circle.center) / f.circle.radius;
    ComplexMatrix acc(f.samples.front().rows(), f.samples.front().cols());
    for (long n = -half + 1; n < half; ++n)
      if (n != 0) acc += series.at(n) * (static_cast<double>(n) * std::pow(u, static_cast<double>(n - 1)));
    out.push_back(acc / f.circle.radius);
  }
  return out;
}

/// Winding number of a scalar function around the circle from the total
/// phase increment between consecutive nodes.
inline int winding_index(const AnnulusFunction& f) {
  if (f.m() != 1 || f.samples.front().cols() != 1) fail(ErrorKind::DimensionMismatch, "winding_index needs scalar data");
  double total = 0.0;
  const std::size_t N = f.size();
  for (std::size_t k = 0; k < N; ++k) {
    const cplx a = f.samples[k](0, 0), b = f.samples[(k + 1) % N](0, 0);
    if (a == cplx{} || b == cplx{}) fail(ErrorKind::IndeterminateWinding, "function vanishes at a node");
    const double jump = std::arg(b / a);
    if (std::abs(jump) >= std::numbers::pi / 2) fail(ErrorKind::IndeterminateWinding, "phase jump of pi/2 or more");
    total += jump;
  }
  return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

inline AnnulusFunction determinant_samples(const AnnulusFunction& F) {
  std::vector<cplx> d;
  for (const auto& s : F.samples) d.push_back(det(s));
  return AnnulusFunction::scalar(F.circle, d);
}

struct ScalarFactorization {
  int mu = 0;
  cplx x0{};
  CauchySplit log_split;  // of Z = log(f (x - x0)^{-mu})
  std::vector<cplx> xplus;
  std::vector<cplx> xminus;

  cplx plus(cplx x) const { return std::exp(log_split.plus(x)(0, 0)); }
  cplx minus(cplx x) const { return std::pow(x - x0, -mu) * std::exp(log_split.minus(x)(0, 0)); }
};

/// X- f = X+ with X+ = exp(Z+), X- = (x - x0)^{-mu} exp(Z-), where
/// Z = log(f (x - x0)^{-mu}) = Z+ - Z- and mu is the winding number.
inline ScalarFactorization scalar_factorize(const AnnulusFunction& f, cplx x0) {
  if (!(std::abs(x0 - f.circle.center) < f.circle.radius))
    fail(ErrorKind::InvalidArgument, "x0 must lie strictly inside the circle");
  ScalarFactorization out;
  out.mu = winding_index(f);
  out.x0 = x0;
  const std::size_t N = f.size();
  std::vector<cplx> logs(N);
  double phase = 0.0;
  cplx prev{};
  for (std::size_t k = 0; k < N; ++k) {
    const cplx x = f.circle.node(k);
    const cplx g = f.samples[k](0, 0) * std::pow(x - x0, -out.mu);
    if (k == 0) {
      phase = std::arg(g);
    } else {
      const double jump = std::arg(g / prev);
      if (std::abs(jump) >= std::numbers::pi / 2) fail(ErrorKind::LogBranch, "phase cannot be unwound");
      phase += jump;
    }
    logs[k] = cplx(std::log(std::abs(g)), phase);
    prev = g;
  }
  const cplx first = f.samples[0](0, 0) * std::pow(f.circle.node(0) - x0, -out.mu);
  if (std::abs(std::arg(first / prev)) >= std::numbers::pi / 2 ||
      std::abs(phase + std::arg(first / prev) - std::arg(first)) > 1e-6)
    fail(ErrorKind::LogBranch, "logarithm does not close around the circle");
  out.log_split = cauchy_split(AnnulusFunction::scalar(f.circle, logs));
  for (std::size_t k = 0; k < N; ++k) {
    const cplx x = f.circle.node(k);
    out.xplus.push_back(std::exp(out.log_split.plus_samples[k](0, 0)));
    out.xminus.push_back(std::pow(x - x0, -out.mu) * std::exp(out.log_split.minus_samples[k](0, 0)));
  }
  return out;
}

struct RHOptions {
  double no_solution_tol = kNoRegularSolutionTol;
  bool compute_parity = true;
};

struct RHSolution {
  QuadratureCircle circle;
  std::vector<ComplexMatrix> Xminus_samples;
  std::vector<ComplexMatrix> Xplus_samples;
  LaurentSeries Xminus_laurent;
  cplx fredholm_det;        // det(I - K_h), the f(1) estimate
  cplx fredholm_det_minus;  // det(I + K_h), the f(-1) estimate
  double minus_defect = 0.0;  // positive-power content of X- and |constant - I|
  double plus_defect = 0.0;   // negative-power content of X+

  /// X-(x) for x on or outside the circle from its Laurent series.
  ComplexMatrix minus(cplx x) const { return Xminus_laurent.partial(x, Xminus_laurent.lowest(), 0); }

  /// max_k ||X-(x_k) F(x_k) - X+(x_k)||
  double factorization_residual(const AnnulusFunction& F) const {
    double out = 0.0;
    for (std::size_t k = 0; k < F.size(); ++k)
      out = std::max(out, max_diff(Xminus_samples[k] * F.samples[k], Xplus_samples[k]));
    return out;
  }
};

/// Nystrom matrix of the kernel K(y, x) = (F(y) F(x)^{-1} - I) / (y - x),
/// block (k, i) = w_k K(x_k, x_i), w_k = (x_k - c)/N, with the diagonal
/// limit F'(x) F(x)^{-1}.
inline EigenMatrix nystrom_kernel(const AnnulusFunction& F) {
  const std::size_t N = F.size(), m = F.m();
  std::vector<ComplexMatrix> Finv;
  Finv.reserve(N);
  for (std::size_t k = 0; k < N; ++k) {
    const double scale = std::pow(F.samples[k].max_norm(), static_cast<double>(m));
    if (!(std::abs(det(F.samples[k])) > kInvertibleSampleTol * scale))
      fail(ErrorKind::SingularMatrix, "boundary sample " + std::to_string(k) + " is not invertible");
    Finv.push_back(inverse(F.samples[k]));
  }
  const auto dF = spectral_derivative(F);
  const auto nodes = F.circle.nodes();
  EigenMatrix K(N * m, N * m);
  const ComplexMatrix I = ComplexMatrix::identity(m);
  for (std::size_t k = 0; k < N; ++k) {
    const cplx w = (nodes[k] - F.circle.center) / static_cast<double>(N);
    for (std::size_t i = 0; i < N; ++i) {
      const ComplexMatrix block =
          k == i ? dF[i] * Finv[i] : (F.samples[k] * Finv[i] - I) / (nodes[k] - nodes[i]);
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) K(k * m + a, i * m + b) = w * block(a, b);
    }
  }
  return K;
}

/// (det(I - K_h), det(I + K_h)) for index-0 data.
inline std::pair<cplx, cplx> fredholm_parity_check(const AnnulusFunction& F) {
  if (winding_index(determinant_samples(F)) != 0) fail(ErrorKind::IndexNonzero, "winding of det F is nonzero");
  const EigenMatrix K = nystrom_kernel(F);
  const EigenMatrix I = EigenMatrix::Identity(K.rows(), K.cols());
  return {Eigen::PartialPivLU<EigenMatrix>(I - K).determinant(), Eigen::PartialPivLU<EigenMatrix>(I + K).determinant()};
}

/// Regular factorization X- F = X+ with X-(infinity) = I by solving
/// X- - contour_integral(X-(y) K(y, x)) = I at the nodes.
inline RHSolution rh_solve_regular(const AnnulusFunction& F, const RHOptions& opt = {}) {
  const int mu = winding_index(determinant_samples(F));
  if (mu != 0) fail(ErrorKind::IndexNonzero, "winding of det F is " + std::to_string(mu));
  const std::size_t N = F.size(), m = F.m();
  const EigenMatrix K = nystrom_kernel(F);
  const EigenMatrix I = EigenMatrix::Identity(K.rows(), K.cols());
  // Row system X (I - K) = [I ... I], solved in transposed form.
  const EigenMatrix At = (I - K).transpose();
  Eigen::PartialPivLU<EigenMatrix> lu(At);
  RHSolution sol;
  sol.circle = F.circle;
  sol.fredholm_det = lu.determinant();
  sol.fredholm_det_minus = opt.compute_parity ? Eigen::PartialPivLU<EigenMatrix>(I + K).determinant() : cplx{};
  if (!(std::abs(sol.fredholm_det) > opt.no_solution_tol))
    fail(ErrorKind::NoRegularSolution, "discrete Fredholm determinant is " + std::to_string(std::abs(sol.fredholm_det)));
  EigenMatrix rhs(N * m, m);
  for (std::size_t k = 0; k < N; ++k) rhs.block(k * m, 0, m, m) = EigenMatrix::Identity(m, m);
  const EigenMatrix Xt = lu.solve(rhs);
  for (std::size_t k = 0; k < N; ++k) {
    ComplexMatrix X = from_eigen(Xt.block(k * m, 0, m, m).transpose());
    sol.Xplus_samples.push_back(X * F.samples[k]);
    sol.Xminus_samples.push_back(std::move(X));
  }
  sol.Xminus_laurent = laurent_coefficients(AnnulusFunction(F.circle, sol.Xminus_samples));
  const long half = static_cast<long>(N / 2);
  sol.minus_defect = std::max(sol.Xminus_laurent.mass(1, half), max_diff(sol.Xminus_laurent.at(0), ComplexMatrix::identity(m)));
  const auto plus_series = laurent_coefficients(AnnulusFunction(F.circle, sol.Xplus_samples));
  sol.plus_defect = plus_series.mass(-half + 1, -1);
  return sol;
}

enum class SweepOutcome { Solved, IndexNonzero, NoRegularSolution, Failed };

inline const char* to_string(SweepOutcome o) {
  switch (o) {
    case SweepOutcome::Solved: return "solved";
    case SweepOutcome::IndexNonzero: return "index_nonzero";
    case SweepOutcome::NoRegularSolution: return "no_regular_solution";
    case SweepOutcome::Failed: return "failed";
  }
  return "failed";
}

struct SweepRow {
  double t = 0.0;
  SweepOutcome outcome = SweepOutcome::Failed;
  cplx fredholm_det{};
  double residual = 0.0;
  std::string message;
  std::optional<RHSolution> solution;
};

using MatrixFamily = std::function<ComplexMatrix(cplx x, double t)>;

inline SweepRow solve_sweep_point(const MatrixFamily& family, const QuadratureCircle& circle, double t,
                                  const RHOptions& opt) {
  SweepRow row;
  row.t = t;
  try {
    const auto F = AnnulusFunction::sample(circle, [&](cplx x) { return family(x, t); });
    auto sol = rh_solve_regular(F, opt);
    row.outcome = SweepOutcome::Solved;
    row.fredholm_det = sol.fredholm_det;
    row.residual = std::max({sol.factorization_residual(F), sol.minus_defect, sol.plus_defect});
    row.solution = std::move(sol);
  } catch (const Error& e) {
    row.message = e.what();
    if (e.kind() == ErrorKind::IndexNonzero) row.outcome = SweepOutcome::IndexNonzero;
    else if (e.kind() == ErrorKind::NoRegularSolution) {
      row.outcome = SweepOutcome::NoRegularSolution;
      const auto F = AnnulusFunction::sample(circle, [&](cplx x) { return family(x, t); });
      row.fredholm_det = fredholm_parity_check(F).first;
    } else row.outcome = SweepOutcome::Failed;
  }
  return row;
}

/// Solves the problem for every grid value; failures are recorded per row.
/// Rows keep grid order whether or not they are computed in parallel.
inline std::vector<SweepRow> parameter_sweep(const MatrixFamily& family, const QuadratureCircle& circle,
                                             const std::vector<double>& grid, bool parallel = false,
                                             const RHOptions& opt = {}) {
  std::vector<SweepRow> rows(grid.size());
  if (!parallel) {
    for (std::size_t i = 0; i < grid.size(); ++i) rows[i] = solve_sweep_point(family, circle, grid[i], opt);
    return rows;
  }
  std::vector<std::future<SweepRow>> jobs;
  for (const double t : grid)
    jobs.push_back(std::async(std::launch::async, [&, t] { return solve_sweep_point(family, circle, t, opt); }));
  for (std::size_t i = 0; i < jobs.size(); ++i) rows[i] = jobs[i].get();
  return rows;
}

}  // namespace schl
