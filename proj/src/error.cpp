#include "sie/error.hpp"

namespace sie {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::missing_column: return "MissingColumn";
    case ErrorCode::non_binary_treatment: return "NonBinaryTreatment";
    case ErrorCode::non_finite_value: return "NonFiniteValue";
    case ErrorCode::malformed_csv: return "MalformedCsv";
    case ErrorCode::invalid_dataset: return "InvalidDataset";
    case ErrorCode::invalid_spec: return "InvalidSpec";
    case ErrorCode::too_few_units: return "TooFewUnits";
    case ErrorCode::degenerate_fold: return "DegenerateFold";
    case ErrorCode::single_class: return "SingleClass";
    case ErrorCode::empty_arm: return "EmptyArm";
    case ErrorCode::degenerate_design: return "DegenerateDesign";
    case ErrorCode::domain_error: return "DomainError";
    case ErrorCode::no_ground_truth: return "NoGroundTruth";
    case ErrorCode::length_mismatch: return "LengthMismatch";
    case ErrorCode::invalid_config: return "InvalidConfig";
    case ErrorCode::io_error: return "IoError";
    case ErrorCode::model_format: return "ModelFormat";
    case ErrorCode::non_convergence: return "NonConvergence";
    case ErrorCode::non_finite_reward: return "NonFiniteReward";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

ErrorClass Error::error_class() const noexcept {
  switch (code_) {
    case ErrorCode::single_class:
    case ErrorCode::degenerate_design:
    case ErrorCode::non_convergence:
    case ErrorCode::non_finite_reward:
      return ErrorClass::numerical;
    default:
      return ErrorClass::validation;
  }
}

CsvError::CsvError(ErrorCode code, std::size_t row, std::string column, const std::string& what)
    : Error(code, what), row_(row), column_(std::move(column)) {}

}  // namespace sie
