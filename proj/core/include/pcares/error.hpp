#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pcares {

enum class ErrorCode {
  // numerical failures
  RankDeficient,
  TooFewRows,
  NotSymmetric,
  NoConvergence,
  LeverageOne,
  WrongKind,
  DegenerateVariance,
  DomainError,
  InternalConsistency,
  // input failures
  Empty,
  TooSmall,
  BadDf,
  InvalidArgument,
  ParseError,
  MissingColumn,
  ConstantColumn,
  IoError,
};

/// Broad class of an error; drives the CLI exit status.
enum class ErrorClass { Input, Numerical };

std::string_view to_string(ErrorCode code);
ErrorClass classify(ErrorCode code);

/// Exception carrying a machine-readable code and, once it has crossed the
/// report pipeline, the name of the stage that raised it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::string stage = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }
  ErrorClass error_class() const noexcept { return classify(code_); }
  const std::string& stage() const noexcept { return stage_; }

  /// Returns a copy tagged with a pipeline stage ("fit", "omega:hc3", ...).
  Error with_stage(std::string stage) const;

 private:
  ErrorCode code_;
  std::string message_;
  std::string stage_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace pcares
