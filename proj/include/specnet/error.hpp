#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace specnet {

enum class Errc {
  NotPositiveDefinite,
  NoConvergence,
  DimensionMismatch,
  TooFewPoints,
  DegenerateScale,
  ZeroDegree,
  RankDeficientBatch,
  NonFiniteLoss,
  LengthMismatch,
  ConstructionInvariantViolated,
  NoSigmaAchieves,
  UnknownKind,
  ParseError,
  RaggedRows,
  UnknownKey,
  TypeError,
  IoError,
  InvalidArgument,
};

std::string_view errc_name(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI, the Python module) can map it without string matching.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace specnet
