#pragma once

#include "sie/dataset.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sie {

/// Column roles. Every column not named here (and not ignored) is a covariate.
/// Ground-truth columns are optional: a named column that is absent from the
/// header is skipped unless `require_truth` is set.
struct CsvSchema {
  std::string t_col = "t";
  std::string y_col = "y";
  std::optional<std::string> mu0_col = "mu0";
  std::optional<std::string> mu1_col = "mu1";
  std::optional<std::string> p_col = "p_true";
  std::vector<std::string> ignore_cols;
  bool require_truth = false;
};

Dataset read_csv(std::istream& in, const CsvSchema& schema = {});
Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema = {});

/// Writes covariates, t, y, then mu0, mu1, p_true when ground truth is
/// present. Values use 17 significant digits.
void write_csv(std::ostream& out, const Dataset& ds);
void write_csv(const std::filesystem::path& path, const Dataset& ds);

/// Shortest "%.17g" rendering used by every text output in the project.
std::string format_double(double v);

}  // namespace sie
