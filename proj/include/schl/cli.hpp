#pragma once

// Command implementations behind the `schl` tool. Each command returns its
// process exit code so it can be driven in-process by tests.

#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "schl/io.hpp"
#include "schl/random.hpp"

namespace schl::cli {

enum ExitCode : int {
  kOk = 0,
  kParseError = 1,
  kInvalidSeed = 2,
  kVerificationFailed = 3,
  kIndexObstruction = 4,
  kNoRegularSolution = 5,
};

/// Default tolerances by name; --tol-override NAME=VALUE replaces them.
inline std::map<std::string, double> default_tolerances() {
  return {
      {"initial_condition", kInitialConditionTol},
      {"conservation", 1e-10},
      {"structure", kValidationTol},
      {"schlesinger", 1e-6},
      {"fd_step", 1e-5},
      {"monodromy", 1e-6},
      {"no_regular_solution", kNoRegularSolutionTol},
  };
}

struct RunConfig {
  std::string command;
  std::string input;
  std::string output;
  std::string path;  // verify: parameter samples
  bool monodromy = false;
  std::map<std::string, double> tolerances = default_tolerances();
  std::size_t nodes = 64;
  std::uint64_t rng_seed = 20240601;
  bool parallel = false;

  double tol(const std::string& name) const { return tolerances.at(name); }
};

/// Applies "NAME=VALUE"; returns an error message or nothing.
inline std::optional<std::string> apply_tolerance_override(RunConfig& cfg, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) return "tolerance override must look like NAME=VALUE: " + spec;
  const std::string name = spec.substr(0, eq);
  if (!cfg.tolerances.contains(name)) return "unknown tolerance " + name;
  double value = 0.0;
  try {
    std::size_t used = 0;
    value = std::stod(spec.substr(eq + 1), &used);
    if (used != spec.size() - eq - 1) return "bad tolerance value in " + spec;
  } catch (const std::exception&) {
    return "bad tolerance value in " + spec;
  }
  if (!(value > 0.0)) return "tolerance " + name + " must be positive";
  cfg.tolerances[name] = value;
  return std::nullopt;
}

inline std::optional<std::string> validate_config(const RunConfig& cfg) {
  if (cfg.nodes < 16 || cfg.nodes % 2 != 0) return "--nodes must be even and at least 16";
  for (const auto& [name, v] : cfg.tolerances)
    if (!(v > 0.0)) return "tolerance " + name + " must be positive";
  return std::nullopt;
}

namespace detail {

inline void emit(const RunConfig& cfg, const std::string& contents, std::ostream& out) {
  if (cfg.output.empty()) out << contents << '\n';
  else write_file_atomic(cfg.output, contents + "\n");
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << std::scientific << v;
  return os.str();
}

/// One named check in a report: value against tolerance.
inline json check_entry(const std::string& name, double value, double tol) {
  const bool pass = std::isfinite(value) && value < tol;
  return {{"name", name}, {"value", value}, {"tolerance", tol}, {"pass", pass}};
}

// Parameter samples from {"samples": [[t...], ...]} or
// {"from": [t...], "to": [t...], "count": n}.
inline std::vector<std::vector<cplx>> path_samples(const json& spec, std::size_t n_points) {
  std::vector<std::vector<cplx>> out;
  try {
    if (spec.contains("samples")) {
      for (const auto& s : spec.at("samples")) out.push_back(complex_list_from_json(s));
    } else {
      const auto a = complex_list_from_json(spec.at("from"));
      const auto b = complex_list_from_json(spec.at("to"));
      const auto count = spec.at("count").get<std::size_t>();
      if (a.size() != b.size() || count < 1) throw ParseError("path endpoints differ in size or count < 1");
      for (std::size_t i = 0; i < count; ++i) {
        const double tau = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
        std::vector<cplx> t(a.size());
        for (std::size_t k = 0; k < a.size(); ++k) t[k] = a[k] + tau * (b[k] - a[k]);
        out.push_back(std::move(t));
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("path file: ") + e.what());
  }
  for (const auto& t : out)
    if (t.size() != n_points) throw ParseError("every path sample needs 2s points");
  return out;
}

}  // namespace detail

/// construct: seed JSON -> explicit solution JSON with a summary.
inline int cmd_construct(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  SchlesingerSeed seed;
  try {
    seed = seed_from_json(read_json_file(cfg.input));
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kParseError;
  }
  if (!points_distinct(seed.t0)) {
    err << "invalid seed: points are not pairwise distinct\n";
    return kInvalidSeed;
  }
  const auto report = check_seed(seed);
  if (!report.passed()) {
    for (const auto& bad : report.failures())
      err << "invalid seed: " << describe_relation(bad.name) << " (residual " << detail::fmt(bad.value) << ")\n";
    return kInvalidSeed;
  }
  ExplicitSolution sol;
  try {
    sol = build_explicit(seed);
  } catch (const Error& e) {
    err << "invalid seed: " << e.what() << '\n';
    return kInvalidSeed;
  }
  const double ic = initial_condition_residual(sol);
  json doc = to_json(sol);
  doc["summary"] = {{"initial_condition_residual", ic},
                    {"general_position_residual", report.max_value()},
                    {"det_S_PZ_at_t0", to_json(det_core(sol, seed.t0))}};
  detail::emit(cfg, doc.dump(2), out);
  err << "initial-condition residual " << detail::fmt(ic) << '\n';
  if (!(ic < cfg.tol("initial_condition"))) return kVerificationFailed;
  return kOk;
}

/// verify: solution JSON (+ optional path JSON) -> per-check report.
inline int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  ExplicitSolution sol;
  std::vector<std::vector<cplx>> samples;
  try {
    sol = solution_from_json(read_json_file(cfg.input));
    if (!cfg.path.empty()) samples = detail::path_samples(read_json_file(cfg.path), 2 * sol.s);
    else samples.push_back(sol.seed.t0);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kParseError;
  }

  bool all_pass = true;
  json global = json::array();
  auto record = [&](json& list, const std::string& name, double value, double tol) {
    json e = detail::check_entry(name, value, tol);
    all_pass = all_pass && e["pass"].get<bool>();
    list.push_back(std::move(e));
  };

  try {
    record(global, "seed_general_position", check_seed(sol.seed).max_value(), cfg.tol("structure"));
  } catch (const Error& e) {
    err << "seed echo is unusable: " << e.what() << '\n';
    record(global, "seed_general_position", std::numeric_limits<double>::infinity(), cfg.tol("structure"));
  }
  try {
    record(global, "initial_condition", initial_condition_residual(sol), cfg.tol("initial_condition"));
  } catch (const Error& e) {
    err << "initial condition: " << e.what() << '\n';
    record(global, "initial_condition", std::numeric_limits<double>::infinity(), cfg.tol("initial_condition"));
  }

  json rows = json::array();
  MonodromyOptions mono;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& t = samples[i];
    json row = {{"index", i}, {"t", to_json(t)}};
    json checks = json::array();
    try {
      if (!points_distinct(t)) {
        row["status"] = "invalid_configuration";
        rows.push_back(std::move(row));
        continue;
      }
      const auto Q = eval_Q(sol, t);
      FuchsianSystem F;
      F.m = sol.m;
      F.points = t;
      F.residues = Q;
      record(checks, "conservation", F.residue_sum().max_norm(), cfg.tol("conservation"));
      record(checks, "structure", check_general_position(F, sol.s).max_value(), cfg.tol("structure"));
      record(checks, "schlesinger_residual", schlesinger_residual(sol, t, cfg.tol("fd_step")), cfg.tol("schlesinger"));
      if (cfg.monodromy) {
        double worst = 0.0;
        for (std::size_t j = 0; j < F.n(); ++j)
          worst = std::max(worst, max_diff(monodromy(F, j, mono), ComplexMatrix::identity(sol.m)));
        record(checks, "monodromy", worst, cfg.tol("monodromy"));
      }
      row["status"] = "evaluated";
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::MovablePole) throw;
      row["status"] = "movable_pole";
      row["note"] = e.what();
    }
    row["checks"] = std::move(checks);
    rows.push_back(std::move(row));
  }

  json doc = {{"pass", all_pass}, {"global", global}, {"samples", rows}};
  detail::emit(cfg, doc.dump(2), out);
  for (const auto& g : global)
    if (!g["pass"].get<bool>())
      err << "FAIL " << g["name"].get<std::string>() << " = " << detail::fmt(g["value"].get<double>()) << '\n';
  for (const auto& r : rows) {
    if (r["status"] == "movable_pole") err << "sample " << r["index"] << ": movable pole\n";
    if (!r.contains("checks")) continue;
    for (const auto& c : r["checks"])
      if (!c["pass"].get<bool>())
        err << "sample " << r["index"] << ": FAIL " << c["name"].get<std::string>() << " = "
            << detail::fmt(c["value"].get<double>()) << '\n';
  }
  return all_pass ? kOk : kVerificationFailed;
}

inline json rh_solution_json(const RHSolution& sol) {
  return {{"outcome", "solved"},
          {"f_plus_one", to_json(sol.fredholm_det)},
          {"f_minus_one", to_json(sol.fredholm_det_minus)},
          {"minus_defect", sol.minus_defect},
          {"plus_defect", sol.plus_defect},
          {"Xminus", to_json(sol.Xminus_samples)},
          {"Xplus", to_json(sol.Xplus_samples)}};
}

/// rh: boundary data JSON -> factorization or obstruction.
inline int cmd_rh(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  AnnulusFunction F;
  try {
    F = boundary_from_json(read_json_file(cfg.input));
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kParseError;
  }
  RHOptions opt;
  opt.no_solution_tol = cfg.tol("no_regular_solution");
  json doc;
  int code = kOk;
  try {
    const RHSolution sol = rh_solve_regular(F, opt);
    doc = rh_solution_json(sol);
    doc["factorization_residual"] = sol.factorization_residual(F);
  } catch (const Error& e) {
    switch (e.kind()) {
      case ErrorKind::IndexNonzero:
        doc = {{"outcome", "index_nonzero"}, {"message", e.what()}};
        code = kIndexObstruction;
        break;
      case ErrorKind::NoRegularSolution: {
        const auto [f1, fm1] = fredholm_parity_check(F);
        doc = {{"outcome", "no_regular_solution"},
               {"message", e.what()},
               {"f_plus_one", to_json(f1)},
               {"f_minus_one", to_json(fm1)}};
        code = kNoRegularSolution;
        break;
      }
      case ErrorKind::SingularMatrix:
      case ErrorKind::IndeterminateWinding:
        err << "unusable boundary data: " << e.what() << '\n';
        return kParseError;
      default:
        throw;
    }
  }
  detail::emit(cfg, doc.dump(2), out);
  err << "outcome: " << doc["outcome"].get<std::string>() << '\n';
  return code;
}

/// Built-in one-parameter families of boundary data.
inline MatrixFamily builtin_family(const std::string& name) {
  if (name == "triangular")
    return [](cplx x, double t) { return ComplexMatrix{{1.0, t / x}, {0.0, 1.0}}; };
  if (name == "pole_crossing")
    return [](cplx x, double t) {
      const cplx x0 = 2.0 - 4.0 * t;
      return ComplexMatrix{{x - x0, 0.0}, {0.0, 1.0 / (x - x0)}};
    };
  throw ParseError("unknown family " + name + " (expected triangular or pole_crossing)");
}

inline std::vector<double> grid_from_json(const json& g) {
  try {
    if (g.contains("values")) return g.at("values").get<std::vector<double>>();
    const double a = g.at("from").get<double>(), b = g.at("to").get<double>();
    const auto count = g.at("count").get<std::size_t>();
    if (count < 1) throw ParseError("grid count must be positive");
    std::vector<double> out;
    for (std::size_t i = 0; i < count; ++i)
      out.push_back(count == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
    return out;
  } catch (const json::exception& e) {
    throw ParseError(std::string("grid: ") + e.what());
  }
}

namespace detail {

inline std::string csv_number(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline int sweep_rh(const RunConfig& cfg, const json& spec, std::ostream& out, std::ostream& err) {
  MatrixFamily family;
  QuadratureCircle circle;
  std::vector<double> grid;
  try {
    family = builtin_family(spec.at("family").get<std::string>());
    circle = spec.contains("circle") ? circle_from_json(spec.at("circle")) : QuadratureCircle(0.0, 1.0, cfg.nodes);
    grid = grid_from_json(spec.at("grid"));
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  }
  RHOptions opt;
  opt.no_solution_tol = cfg.tol("no_regular_solution");
  const auto rows = parameter_sweep(family, circle, grid, cfg.parallel, opt);
  std::ostringstream csv;
  csv << "index,t,outcome,abs_fredholm_det,residual\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    csv << i << ',' << csv_number(r.t) << ',' << to_string(r.outcome) << ','
        << csv_number(std::abs(r.fredholm_det)) << ',' << csv_number(r.residual) << '\n';
    if (r.outcome == SweepOutcome::Failed) err << "row " << i << ": " << r.message << '\n';
  }
  std::string text = csv.str();
  text.pop_back();
  emit(cfg, text, out);
  return kOk;
}

struct SchlesingerRow {
  std::vector<cplx> t;
  std::string tag;
  double det_abs = 0.0, conservation = 0.0, structure = 0.0, residual = 0.0;
  std::vector<ComplexMatrix> Q;
};

inline SchlesingerRow schlesinger_row(const ExplicitSolution& sol, std::vector<cplx> t, double h) {
  SchlesingerRow row;
  row.t = std::move(t);
  if (!points_distinct(row.t)) {
    row.tag = "invalid_configuration";
    return row;
  }
  try {
    const auto st = evaluate_state(sol, row.t);
    row.det_abs = std::abs(st.det_S_PZ);
    row.Q = st.Q;
    FuchsianSystem F;
    F.m = sol.m;
    F.points = row.t;
    F.residues = st.Q;
    row.conservation = F.residue_sum().max_norm();
    row.structure = check_general_position(F, sol.s).max_value();
    row.residual = schlesinger_residual(sol, row.t, h);
    row.tag = "ok";
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::MovablePole) row.tag = "movable_pole";
    else if (e.kind() == ErrorKind::InvalidPoints) row.tag = "invalid_configuration";
    else throw;
  }
  return row;
}

inline int sweep_schlesinger(const RunConfig& cfg, const json& spec, std::ostream& out, std::ostream& err) {
  ExplicitSolution sol;
  std::vector<cplx> base;
  std::size_t coordinate = 0;
  std::vector<double> grid;
  bool entries = false;
  try {
    if (spec.contains("solution")) {
      sol = solution_from_json(spec.at("solution"));
    } else {
      const auto seed = seed_from_json(spec.at("seed"));
      try {
        sol = build_explicit(seed);
      } catch (const Error& e) {
        err << "invalid seed: " << e.what() << '\n';
        return kInvalidSeed;
      }
    }
    const json& g = spec.at("grid");
    base = g.contains("base") ? complex_list_from_json(g.at("base")) : sol.seed.t0;
    coordinate = g.at("coordinate").get<std::size_t>();
    grid = grid_from_json(g);
    entries = spec.value("entries", false);
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  }
  const std::size_t n = 2 * sol.s;
  if (base.size() != n) throw ParseError("grid base needs 2s points");
  if (coordinate >= n) throw ParseError("grid coordinate out of range");

  std::vector<SchlesingerRow> rows(grid.size());
  auto work = [&](std::size_t i) {
    std::vector<cplx> t = base;
    t[coordinate] = grid[i];
    return schlesinger_row(sol, std::move(t), cfg.tol("fd_step"));
  };
  if (cfg.parallel) {
    std::vector<std::future<SchlesingerRow>> jobs;
    for (std::size_t i = 0; i < grid.size(); ++i) jobs.push_back(std::async(std::launch::async, work, i));
    for (std::size_t i = 0; i < grid.size(); ++i) rows[i] = jobs[i].get();
  } else {
    for (std::size_t i = 0; i < grid.size(); ++i) rows[i] = work(i);
  }

  std::ostringstream csv;
  csv << "index";
  for (std::size_t k = 0; k < n; ++k) csv << ",t" << k + 1 << "_re,t" << k + 1 << "_im";
  csv << ",abs_det_S_PZ,conservation,structure,schlesinger_residual,tag";
  if (entries)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t a = 0; a < sol.m; ++a)
        for (std::size_t b = 0; b < sol.m; ++b)
          csv << ",Q" << j + 1 << "_" << a + 1 << b + 1 << "_re,Q" << j + 1 << "_" << a + 1 << b + 1 << "_im";
  csv << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    csv << i;
    for (const auto& z : r.t) csv << ',' << csv_number(z.real()) << ',' << csv_number(z.imag());
    const bool ok = r.tag == "ok";
    auto num = [&](double v) { return ok ? csv_number(v) : std::string(); };
    csv << ',' << num(r.det_abs) << ',' << num(r.conservation) << ',' << num(r.structure) << ',' << num(r.residual)
        << ',' << r.tag;
    if (entries)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t a = 0; a < sol.m; ++a)
          for (std::size_t b = 0; b < sol.m; ++b)
            csv << ',' << (ok ? csv_number(r.Q[j](a, b).real()) : "") << ','
                << (ok ? csv_number(r.Q[j](a, b).imag()) : "");
    csv << '\n';
  }
  std::string text = csv.str();
  text.pop_back();
  emit(cfg, text, out);
  return kOk;
}

}  // namespace detail

/// sweep: family description JSON -> CSV. {"kind": "schlesinger", "seed" | "solution",
/// "grid": {"coordinate", "from", "to", "count"}} or {"kind": "rh", "family",
/// "grid": {"from", "to", "count"}}.
inline int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const json spec = read_json_file(cfg.input);
    const std::string kind = spec.value("kind", "");
    if (kind == "rh") return detail::sweep_rh(cfg, spec, out, err);
    if (kind == "schlesinger") return detail::sweep_schlesinger(cfg, spec, out, err);
    throw ParseError("sweep kind must be \"schlesinger\" or \"rh\"");
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kParseError;
  }
}

/// report: summarizes an artifact, or with no input runs a seeded
/// self-check over random realizations and seeds.
inline int cmd_report(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (!cfg.input.empty()) {
    json doc;
    try {
      doc = read_json_file(cfg.input);
    } catch (const ParseError& e) {
      err << "parse error: " << e.what() << '\n';
      return kParseError;
    }
    std::ostringstream os;
    if (doc.contains("B_P0")) {
      os << "explicit solution: s=" << doc.value("s", 0) << " m=" << doc.value("m", 0) << '\n';
      if (doc.contains("summary"))
        os << "initial-condition residual: " << doc["summary"].value("initial_condition_residual", -1.0) << '\n';
    } else if (doc.contains("global")) {
      os << "verification: " << (doc.value("pass", false) ? "PASS" : "FAIL") << '\n';
      for (const auto& g : doc["global"])
        os << "  " << g["name"].get<std::string>() << " = " << g["value"] << (g["pass"].get<bool>() ? " ok" : " FAIL") << '\n';
      for (const auto& r : doc["samples"]) {
        os << "  sample " << r["index"] << " [" << r["status"].get<std::string>() << "]";
        if (r.contains("checks"))
          for (const auto& c : r["checks"]) os << ' ' << c["name"].get<std::string>() << '=' << c["value"];
        os << '\n';
      }
    } else if (doc.contains("outcome")) {
      os << "riemann-hilbert: " << doc["outcome"].get<std::string>() << '\n';
      if (doc.contains("f_plus_one")) os << "  f(1) = " << doc["f_plus_one"] << ", f(-1) = " << doc["f_minus_one"] << '\n';
    } else {
      err << "parse error: unrecognized artifact\n";
      return kParseError;
    }
    std::string text = os.str();
    text.pop_back();
    detail::emit(cfg, text, out);
    return kOk;
  }

  std::mt19937_64 rng(cfg.rng_seed);
  json checks = json::array();
  bool all_pass = true;
  double worst_identity = 0.0, worst_ic = 0.0, worst_pde = 0.0;
  for (int i = 0; i < 20; ++i) {
    const std::size_t m = 2 + i % 2, s = 1 + i % 3;
    worst_identity = std::max(worst_identity, validate(random_realization(rng, m, s)).max_value());
    const auto sol = build_explicit(random_seed(rng, m, s));
    worst_ic = std::max(worst_ic, initial_condition_residual(sol));
    worst_pde = std::max(worst_pde, schlesinger_residual_extrapolated(sol, sol.seed.t0, 3e-5));
  }
  for (auto [name, v, tol] : {std::tuple{"realization_identities", worst_identity, 1e-10},
                              std::tuple{"initial_condition", worst_ic, cfg.tol("initial_condition")},
                              std::tuple{"schlesinger_residual_extrapolated", worst_pde, cfg.tol("schlesinger")}}) {
    json e = detail::check_entry(name, v, tol);
    all_pass = all_pass && e["pass"].get<bool>();
    checks.push_back(std::move(e));
  }
  json doc = {{"rng_seed", cfg.rng_seed}, {"pass", all_pass}, {"checks", checks}};
  detail::emit(cfg, doc.dump(2), out);
  return all_pass ? kOk : kVerificationFailed;
}

inline int run(const RunConfig& cfg, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  if (auto msg = validate_config(cfg)) {
    err << "configuration error: " << *msg << '\n';
    return kParseError;
  }
  try {
    if (cfg.command == "construct") return cmd_construct(cfg, out, err);
    if (cfg.command == "verify") return cmd_verify(cfg, out, err);
    if (cfg.command == "rh") return cmd_rh(cfg, out, err);
    if (cfg.command == "sweep") return cmd_sweep(cfg, out, err);
    if (cfg.command == "report") return cmd_report(cfg, out, err);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kParseError;
  }
  err << "unknown command " << cfg.command << '\n';
  return kParseError;
}

}  // namespace schl::cli
