#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sie {

/// Broad failure classes; the CLI maps them to exit codes 2 and 3.
enum class ErrorClass { validation, numerical };

enum class ErrorCode {
  missing_column,
  non_binary_treatment,
  non_finite_value,
  malformed_csv,
  invalid_dataset,
  invalid_spec,
  too_few_units,
  degenerate_fold,
  single_class,
  empty_arm,
  degenerate_design,
  domain_error,
  no_ground_truth,
  length_mismatch,
  invalid_config,
  io_error,
  model_format,
  non_convergence,
  non_finite_reward,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }
  ErrorClass error_class() const noexcept;
  /// Message without the error-code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

/// Row and column carry the offending location for ingestion failures.
/// Rows are 1-based data rows (the header is not counted).
class CsvError : public Error {
 public:
  CsvError(ErrorCode code, std::size_t row, std::string column, const std::string& what);

  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

}  // namespace sie
