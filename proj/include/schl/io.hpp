#pragma once

// JSON forms of the library's data. Complex scalars are [re, im] pairs;
// matrices are {"rows", "cols", "data": [[re, im], ...]} in row-major order.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "schl/fuchsian.hpp"
#include "schl/realization.hpp"
#include "schl/riemann_hilbert.hpp"
#include "schl/schlesinger.hpp"

namespace schl {

using json = nlohmann::json;

/// Malformed input: bad JSON, missing fields, wrong shapes.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline cplx complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ParseError("complex value must be [re, im], got " + j.dump());
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json to_json(const std::vector<cplx>& v) {
  json out = json::array();
  for (const auto& z : v) out.push_back(to_json(z));
  return out;
}

inline std::vector<cplx> complex_list_from_json(const json& j) {
  if (!j.is_array()) throw ParseError("expected a list of complex values");
  std::vector<cplx> out;
  for (const auto& e : j) out.push_back(complex_from_json(e));
  return out;
}

inline json to_json(const ComplexMatrix& a) {
  json data = json::array();
  for (const auto& z : a.data()) data.push_back(to_json(z));
  return {{"rows", a.rows()}, {"cols", a.cols()}, {"data", data}};
}

inline ComplexMatrix matrix_from_json(const json& j) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data"))
    throw ParseError("matrix needs rows, cols and data");
  const auto rows = j.at("rows").get<long>(), cols = j.at("cols").get<long>();
  if (rows <= 0 || cols <= 0) throw ParseError("matrix dimensions must be positive");
  const auto& data = j.at("data");
  if (!data.is_array() || data.size() != static_cast<std::size_t>(rows * cols))
    throw ParseError("matrix data must hold rows*cols entries");
  ComplexMatrix out(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
  for (std::size_t k = 0; k < data.size(); ++k) out.data()[k] = complex_from_json(data[k]);
  if (!out.is_finite()) throw ParseError("matrix entries must be finite");
  return out;
}

inline json to_json(const std::vector<ComplexMatrix>& v) {
  json out = json::array();
  for (const auto& a : v) out.push_back(to_json(a));
  return out;
}

inline std::vector<ComplexMatrix> matrix_list_from_json(const json& j) {
  if (!j.is_array()) throw ParseError("expected a list of matrices");
  std::vector<ComplexMatrix> out;
  for (const auto& e : j) out.push_back(matrix_from_json(e));
  return out;
}

inline json to_json(const Realization& r) {
  return {{"m", r.m},
          {"s", r.s()},
          {"poles", to_json(r.pz.poles())},
          {"zeros", to_json(r.pz.zeros())},
          {"C_P", to_json(r.C_P)},
          {"B_P", to_json(r.B_P)},
          {"C_Z", to_json(r.C_Z)},
          {"B_Z", to_json(r.B_Z)}};
}

/// Core matrices are recomputed from the semi-residues, never read.
inline Realization realization_from_json(const json& j) {
  try {
    PoleZeroData pz(complex_list_from_json(j.at("poles")), complex_list_from_json(j.at("zeros")));
    auto r = realization_from_semi_residues(std::move(pz), matrix_from_json(j.at("C_P")), matrix_from_json(j.at("B_P")),
                                            matrix_from_json(j.at("C_Z")), matrix_from_json(j.at("B_Z")));
    if (j.contains("m") && j.at("m").get<std::size_t>() != r.m) throw ParseError("m disagrees with C_P");
    return r;
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  } catch (const Error& e) {
    throw ParseError(e.what());
  }
}

inline json to_json(const FuchsianSystem& F) {
  return {{"m", F.m}, {"points", to_json(F.points)}, {"residues", to_json(F.residues)}, {"normalized", F.normalized}};
}

inline FuchsianSystem fuchsian_from_json(const json& j) {
  try {
    return FuchsianSystem(complex_list_from_json(j.at("points")), matrix_list_from_json(j.at("residues")),
                          j.value("normalized", false));
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  } catch (const Error& e) {
    throw ParseError(e.what());
  }
}

inline json to_json(const SchlesingerSeed& seed) {
  return {{"s", seed.s}, {"m", seed.m}, {"t0", to_json(seed.t0)}, {"Q0", to_json(seed.Q0)}};
}

/// Reads the seed's shape; relations between the residues are not checked.
inline SchlesingerSeed seed_from_json(const json& j) {
  try {
    SchlesingerSeed seed;
    seed.s = j.at("s").get<std::size_t>();
    seed.m = j.at("m").get<std::size_t>();
    seed.t0 = complex_list_from_json(j.at("t0"));
    seed.Q0 = matrix_list_from_json(j.at("Q0"));
    if (seed.s == 0 || seed.m == 0) throw ParseError("s and m must be positive");
    if (seed.t0.size() != 2 * seed.s || seed.Q0.size() != 2 * seed.s)
      throw ParseError("seed needs 2s points and 2s residues");
    for (const auto& q : seed.Q0)
      if (q.rows() != seed.m || q.cols() != seed.m) throw ParseError("seed residues must be m x m");
    return seed;
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  }
}

inline json to_json(const ExplicitSolution& sol) {
  return {{"s", sol.s}, {"m", sol.m}, {"B_P0", to_json(sol.B_P0)}, {"C_Z0", to_json(sol.C_Z0)}, {"seed", to_json(sol.seed)}};
}

inline ExplicitSolution solution_from_json(const json& j) {
  try {
    ExplicitSolution sol;
    sol.s = j.at("s").get<std::size_t>();
    sol.m = j.at("m").get<std::size_t>();
    sol.B_P0 = matrix_from_json(j.at("B_P0"));
    sol.C_Z0 = matrix_from_json(j.at("C_Z0"));
    sol.seed = seed_from_json(j.at("seed"));
    if (sol.B_P0.rows() != sol.s || sol.B_P0.cols() != sol.m) throw ParseError("B_P0 must be s x m");
    if (sol.C_Z0.rows() != sol.m || sol.C_Z0.cols() != sol.s) throw ParseError("C_Z0 must be m x s");
    if (sol.seed.s != sol.s || sol.seed.m != sol.m) throw ParseError("seed echo disagrees with s or m");
    return sol;
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  }
}

inline json to_json(const QuadratureCircle& c) {
  return {{"center", to_json(c.center)}, {"radius", c.radius}, {"nodes", c.node_count}};
}

inline QuadratureCircle circle_from_json(const json& j) {
  try {
    return QuadratureCircle(complex_from_json(j.value("center", json::array({0.0, 0.0}))), j.at("radius").get<double>(),
                            j.at("nodes").get<std::size_t>());
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  } catch (const Error& e) {
    throw ParseError(e.what());
  }
}

/// {"circle": {...}, "samples": [Matrix, ...]}
inline AnnulusFunction boundary_from_json(const json& j) {
  try {
    return AnnulusFunction(circle_from_json(j.at("circle")), matrix_list_from_json(j.at("samples")));
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  } catch (const Error& e) {
    throw ParseError(e.what());
  }
}

inline json to_json(const AnnulusFunction& f) { return {{"circle", to_json(f.circle)}, {"samples", to_json(f.samples)}}; }

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

/// Writes `contents` next to `path` under a temporary name and renames it
/// into place, so a failed run never leaves a partial file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) {
      std::filesystem::remove(tmp);
      throw std::runtime_error("write failed for " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace schl
