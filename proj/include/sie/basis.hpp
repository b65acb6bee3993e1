#pragma once

#include "sie/dataset.hpp"

#include <cstdint>
#include <span>
#include <string>

namespace sie {

/// Per-column z-scoring with statistics taken from training rows only.
/// Constant columns keep scale 1.
struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& x, std::span<const Index> rows);
  static Standardizer identity(Index d);

  Eigen::MatrixXd apply_rows(const Eigen::MatrixXd& x) const;
  Eigen::VectorXd apply(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

enum class BasisKind { intercept_only, raw, polynomial2, polynomial2_rbf };

const char* to_string(BasisKind kind);
BasisKind basis_kind_from_string(const std::string& s);

/// Feature map g_1..g_s for the propensity log-odds. Every kind starts
/// with the intercept feature 1.
///   raw:             [1, x_1..x_d]
///   polynomial2:     [1, x_i, x_i x_j (i <= j)]
///   polynomial2_rbf: polynomial2 followed by exp(-|x - c|^2 / (2 h^2))
///                    for each RBF center c with bandwidth h.
struct BasisExpansion {
  BasisKind kind = BasisKind::polynomial2;
  Index d = 0;
  Eigen::MatrixXd centers;  // rows are centers; empty unless polynomial2_rbf
  double bandwidth = 1.0;

  Index size() const;
  Eigen::VectorXd expand(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::MatrixXd expand_rows(const Eigen::MatrixXd& x) const;
};

/// Declared output dimension of a kind for d covariates and r RBF centers.
Index basis_dimension(BasisKind kind, Index d, Index rbf_centers = 0);

/// Builds the expansion from (already standardized) training covariates.
/// RBF centers come from k-means with k = min(10, floor(sqrt(n))), seeded;
/// the bandwidth is the median pairwise distance among training rows.
BasisExpansion make_basis(BasisKind kind, const Eigen::MatrixXd& train_x, std::uint64_t seed);

}  // namespace sie
