#include "sie/csv_io.hpp"

#include "sie/error.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace sie {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  for (auto& f : fields) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return fields;
}

double parse_number(const std::string& field, std::size_t row, const std::string& col) {
  if (field.empty())
    throw CsvError(ErrorCode::non_finite_value, row, col,
                   "missing value at row " + std::to_string(row) + ", column '" + col + "'");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size() || errno == ERANGE || !std::isfinite(v))
    throw CsvError(ErrorCode::non_finite_value, row, col,
                   "non-finite or non-numeric value '" + field + "' at row " + std::to_string(row) +
                       ", column '" + col + "'");
  return v;
}

}  // namespace

Dataset read_csv(std::istream& in, const CsvSchema& schema) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::malformed_csv, "empty input, header row expected");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_fields(line);

  std::unordered_map<std::string, std::size_t> column;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (!column.emplace(header[j], j).second)
      throw Error(ErrorCode::malformed_csv, "duplicate column '" + header[j] + "'");
  }
  auto require = [&](const std::string& name) {
    auto it = column.find(name);
    if (it == column.end()) throw CsvError(ErrorCode::missing_column, 0, name, "column '" + name + "' not found");
    return it->second;
  };
  auto optional_col = [&](const std::optional<std::string>& name) -> std::optional<std::size_t> {
    if (!name) return std::nullopt;
    auto it = column.find(*name);
    if (it == column.end()) {
      if (schema.require_truth) throw CsvError(ErrorCode::missing_column, 0, *name, "column '" + *name + "' not found");
      return std::nullopt;
    }
    return it->second;
  };

  const std::size_t t_idx = require(schema.t_col);
  const std::size_t y_idx = require(schema.y_col);
  const auto mu0_idx = optional_col(schema.mu0_col);
  const auto mu1_idx = optional_col(schema.mu1_col);
  const auto p_idx = optional_col(schema.p_col);
  for (const auto& name : schema.ignore_cols) require(name);

  std::vector<std::size_t> cov_idx;
  std::vector<std::string> cov_names;
  for (std::size_t j = 0; j < header.size(); ++j) {
    const bool role = j == t_idx || j == y_idx || (mu0_idx && j == *mu0_idx) ||
                      (mu1_idx && j == *mu1_idx) || (p_idx && j == *p_idx) ||
                      std::find(schema.ignore_cols.begin(), schema.ignore_cols.end(), header[j]) !=
                          schema.ignore_cols.end();
    if (!role) {
      cov_idx.push_back(j);
      cov_names.push_back(header[j]);
    }
  }
  if (cov_idx.empty()) throw CsvError(ErrorCode::missing_column, 0, "", "no covariate columns");

  std::vector<double> xs, ys, mu0s, mu1s, ps;
  std::vector<int> ts;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    const auto fields = split_fields(line);
    if (fields.size() != header.size())
      throw CsvError(ErrorCode::malformed_csv, row, "",
                     "row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                         " fields, header has " + std::to_string(header.size()));
    for (std::size_t j : cov_idx) xs.push_back(parse_number(fields[j], row, header[j]));
    const double tv = parse_number(fields[t_idx], row, header[t_idx]);
    if (tv != 0.0 && tv != 1.0)
      throw CsvError(ErrorCode::non_binary_treatment, row, header[t_idx],
                     "treatment '" + fields[t_idx] + "' is not 0/1 at row " + std::to_string(row));
    ts.push_back(static_cast<int>(tv));
    ys.push_back(parse_number(fields[y_idx], row, header[y_idx]));
    if (mu0_idx) mu0s.push_back(parse_number(fields[*mu0_idx], row, header[*mu0_idx]));
    if (mu1_idx) mu1s.push_back(parse_number(fields[*mu1_idx], row, header[*mu1_idx]));
    if (p_idx) ps.push_back(parse_number(fields[*p_idx], row, header[*p_idx]));
  }

  const auto n = static_cast<Index>(row);
  const auto d = static_cast<Index>(cov_idx.size());
  if (n < 2) throw Error(ErrorCode::too_few_units, "dataset needs at least 2 rows, got " + std::to_string(n));
  Eigen::MatrixXd x(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) x(i, j) = xs[static_cast<std::size_t>(i * d + j)];
  Eigen::VectorXi t = Eigen::Map<Eigen::VectorXi>(ts.data(), n);
  Eigen::VectorXd y = Eigen::Map<Eigen::VectorXd>(ys.data(), n);

  std::optional<GroundTruth> truth;
  if (mu0_idx && mu1_idx) {
    GroundTruth g;
    g.mu0 = Eigen::Map<Eigen::VectorXd>(mu0s.data(), n);
    g.mu1 = Eigen::Map<Eigen::VectorXd>(mu1s.data(), n);
    if (p_idx) g.p_true = Eigen::Map<Eigen::VectorXd>(ps.data(), n);
    truth = std::move(g);
  } else if (mu0_idx || mu1_idx) {
    throw CsvError(ErrorCode::missing_column, 0, mu0_idx ? *schema.mu1_col : *schema.mu0_col,
                   "ground truth needs both mu0 and mu1 columns");
  }
  return make_dataset(std::move(x), std::move(t), std::move(y), std::move(cov_names), std::move(truth));
}

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  return read_csv(in, schema);
}

void write_csv(std::ostream& out, const Dataset& ds) {
  for (const auto& name : ds.covariate_names) out << name << ',';
  out << "t,y";
  const bool truth = ds.has_truth();
  const bool p = truth && ds.truth->has_propensity();
  if (truth) out << ",mu0,mu1";
  if (p) out << ",p_true";
  out << '\n';
  for (Index i = 0; i < ds.n(); ++i) {
    for (Index j = 0; j < ds.d(); ++j) out << format_double(ds.x(i, j)) << ',';
    out << ds.t[i] << ',' << format_double(ds.y[i]);
    if (truth) out << ',' << format_double(ds.truth->mu0[i]) << ',' << format_double(ds.truth->mu1[i]);
    if (p) out << ',' << format_double(ds.truth->p_true[i]);
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  write_csv(out, ds);
  if (!out) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

}  // namespace sie
