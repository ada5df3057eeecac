#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nugap {

/// Machine-readable failure categories. Each maps onto a CLI exit code.
enum class ErrorCode {
  Parse,
  NotProper,
  CommonRoots,
  NegativeDelay,
  InvalidArgument,
  Uncertain,
  GridLimit,
  NotInvertibleAp,
  NoConvergence,
  AmbiguousWinding,
  ModulusFloor,
  AxisRoot,
  RootFail,
  NoFeasibleQ,
  SolverStall,
  DelaySymbol,
  Aliasing,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Parse: return "PARSE";
    case ErrorCode::NotProper: return "NOT_PROPER";
    case ErrorCode::CommonRoots: return "COMMON_ROOTS";
    case ErrorCode::NegativeDelay: return "NEGATIVE_DELAY";
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::Uncertain: return "UNCERTAIN";
    case ErrorCode::GridLimit: return "GRID_LIMIT";
    case ErrorCode::NotInvertibleAp: return "NOT_INVERTIBLE_AP";
    case ErrorCode::NoConvergence: return "NO_CONVERGENCE";
    case ErrorCode::AmbiguousWinding: return "AMBIGUOUS_WINDING";
    case ErrorCode::ModulusFloor: return "MODULUS_FLOOR";
    case ErrorCode::AxisRoot: return "AXIS_ROOT";
    case ErrorCode::RootFail: return "ROOT_FAIL";
    case ErrorCode::NoFeasibleQ: return "NO_FEASIBLE_Q";
    case ErrorCode::SolverStall: return "SOLVER_STALL";
    case ErrorCode::DelaySymbol: return "DELAY_SYMBOL";
    case ErrorCode::Aliasing: return "ALIASING";
  }
  return "UNKNOWN";
}

/// True for codes that mean "the numerics could not certify a verdict" as
/// opposed to malformed input.
constexpr bool is_certification_failure(ErrorCode code) {
  switch (code) {
    case ErrorCode::Uncertain:
    case ErrorCode::GridLimit:
    case ErrorCode::NoConvergence:
    case ErrorCode::AmbiguousWinding:
    case ErrorCode::ModulusFloor:
    case ErrorCode::NotInvertibleAp:
    case ErrorCode::SolverStall:
    case ErrorCode::Aliasing:
    case ErrorCode::AxisRoot:
    case ErrorCode::RootFail:
    case ErrorCode::NoFeasibleQ:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nugap
