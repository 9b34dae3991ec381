#include "pcares/error.hpp"

namespace pcares {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::LeverageOne: return "LeverageOne";
    case ErrorCode::WrongKind: return "WrongKind";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::InternalConsistency: return "InternalConsistency";
    case ErrorCode::Empty: return "Empty";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::BadDf: return "BadDf";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::ConstantColumn: return "ConstantColumn";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

ErrorClass classify(ErrorCode code) {
  switch (code) {
    case ErrorCode::RankDeficient:
    case ErrorCode::TooFewRows:
    case ErrorCode::NotSymmetric:
    case ErrorCode::NoConvergence:
    case ErrorCode::LeverageOne:
    case ErrorCode::WrongKind:
    case ErrorCode::DegenerateVariance:
    case ErrorCode::DomainError:
    case ErrorCode::InternalConsistency:
      return ErrorClass::Numerical;
    default:
      return ErrorClass::Input;
  }
}

namespace {

std::string format_what(ErrorCode code, const std::string& message, const std::string& stage) {
  std::string out;
  if (!stage.empty()) out += "[" + stage + "] ";
  out += to_string(code);
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, std::string message, std::string stage)
    : std::runtime_error(format_what(code, message, stage)),
      code_(code),
      message_(std::move(message)),
      stage_(std::move(stage)) {}

Error Error::with_stage(std::string stage) const { return Error(code_, message_, std::move(stage)); }

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace pcares
