#pragma once

#include <stdexcept>
#include <string>

namespace gcfrft {

enum class ErrorCode {
  invalid_size,
  invalid_k,
  ambiguous_distance,
  invalid_graph,
  numeric_input,
  not_unitary,
  decomposition,
  construction,
  size_mismatch,
  assumption_violated,
  domain,
  config,
  io,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_size: return "invalid-size";
    case ErrorCode::invalid_k: return "invalid-k";
    case ErrorCode::ambiguous_distance: return "ambiguous-distance";
    case ErrorCode::invalid_graph: return "invalid-graph";
    case ErrorCode::numeric_input: return "numeric-input";
    case ErrorCode::not_unitary: return "not-unitary";
    case ErrorCode::decomposition: return "decomposition";
    case ErrorCode::construction: return "construction";
    case ErrorCode::size_mismatch: return "size-mismatch";
    case ErrorCode::assumption_violated: return "assumption-violated";
    case ErrorCode::domain: return "domain";
    case ErrorCode::config: return "config";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised when the coupling operator has an eigenphase too close to +-pi,
/// i.e. its principal logarithm is not well defined.
class AssumptionViolated : public Error {
 public:
  AssumptionViolated(const std::string& what, double margin, long index)
      : Error(ErrorCode::assumption_violated, what), margin_(margin), index_(index) {}

  double margin() const noexcept { return margin_; }
  long index() const noexcept { return index_; }

 private:
  double margin_;
  long index_;
};

}  // namespace gcfrft
