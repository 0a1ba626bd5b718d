#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace schl {

/// Outcome categories raised by the numerical routines.
///
/// Several of these are meaningful results rather than bugs: `MovablePole`
/// marks a pole of an explicit Schlesinger solution, `NoRegularSolution` and
/// `IndexNonzero` are the two obstructions of the regular Riemann-Hilbert
/// problem.
enum class ErrorKind {
  DimensionMismatch,
  InvalidArgument,
  SingularMatrix,
  NotRankOne,
  ZeroMatrix,
  InvalidPoints,
  CoreSingular,
  AtPole,
  AtZeroPoint,
  DegenerateSemiResidue,
  Resonant,
  SolvabilityViolated,
  StepUnderflow,
  InvalidSeed,
  MovablePole,
  IndexOutOfRange,
  IndexNonzero,
  NoRegularSolution,
  IndeterminateWinding,
  LogBranch,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::SingularMatrix: return "SingularMatrix";
    case ErrorKind::NotRankOne: return "NotRankOne";
    case ErrorKind::ZeroMatrix: return "ZeroMatrix";
    case ErrorKind::InvalidPoints: return "InvalidPoints";
    case ErrorKind::CoreSingular: return "CoreSingular";
    case ErrorKind::AtPole: return "AtPole";
    case ErrorKind::AtZeroPoint: return "AtZeroPoint";
    case ErrorKind::DegenerateSemiResidue: return "DegenerateSemiResidue";
    case ErrorKind::Resonant: return "Resonant";
    case ErrorKind::SolvabilityViolated: return "SolvabilityViolated";
    case ErrorKind::StepUnderflow: return "StepUnderflow";
    case ErrorKind::InvalidSeed: return "InvalidSeed";
    case ErrorKind::MovablePole: return "MovablePole";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::IndexNonzero: return "IndexNonzero";
    case ErrorKind::NoRegularSolution: return "NoRegularSolution";
    case ErrorKind::IndeterminateWinding: return "IndeterminateWinding";
    case ErrorKind::LogBranch: return "LogBranch";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace schl
