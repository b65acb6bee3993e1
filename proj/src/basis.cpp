#include "sie/basis.hpp"

#include "sie/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace sie {

Standardizer Standardizer::fit(const Eigen::MatrixXd& x, std::span<const Index> rows) {
  const Index d = x.cols();
  Standardizer s;
  s.mean = Eigen::RowVectorXd::Zero(d);
  s.scale = Eigen::RowVectorXd::Ones(d);
  if (rows.empty()) return s;
  const auto m = static_cast<double>(rows.size());
  for (Index r : rows) s.mean += x.row(r);
  s.mean /= m;
  Eigen::RowVectorXd var = Eigen::RowVectorXd::Zero(d);
  for (Index r : rows) var += (x.row(r) - s.mean).array().square().matrix();
  var /= m;
  for (Index j = 0; j < d; ++j) {
    const double sd = std::sqrt(var[j]);
    s.scale[j] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

Standardizer Standardizer::identity(Index d) {
  return {Eigen::RowVectorXd::Zero(d), Eigen::RowVectorXd::Ones(d)};
}

Eigen::MatrixXd Standardizer::apply_rows(const Eigen::MatrixXd& x) const {
  return (x.rowwise() - mean).array().rowwise() / scale.array();
}

Eigen::VectorXd Standardizer::apply(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return (x - mean.transpose()).cwiseQuotient(scale.transpose());
}

const char* to_string(BasisKind kind) {
  switch (kind) {
    case BasisKind::intercept_only: return "intercept";
    case BasisKind::raw: return "raw";
    case BasisKind::polynomial2: return "poly2";
    case BasisKind::polynomial2_rbf: return "poly2rbf";
  }
  return "?";
}

BasisKind basis_kind_from_string(const std::string& s) {
  if (s == "intercept") return BasisKind::intercept_only;
  if (s == "raw") return BasisKind::raw;
  if (s == "poly2" || s == "polynomial2") return BasisKind::polynomial2;
  if (s == "poly2rbf" || s == "polynomial2_plus_rbf") return BasisKind::polynomial2_rbf;
  throw Error(ErrorCode::invalid_config, "unknown basis '" + s + "'");
}

Index basis_dimension(BasisKind kind, Index d, Index rbf_centers) {
  switch (kind) {
    case BasisKind::intercept_only: return 1;
    case BasisKind::raw: return 1 + d;
    case BasisKind::polynomial2: return 1 + d + d * (d + 1) / 2;
    case BasisKind::polynomial2_rbf: return 1 + d + d * (d + 1) / 2 + rbf_centers;
  }
  return 0;
}

Index BasisExpansion::size() const { return basis_dimension(kind, d, centers.rows()); }

Eigen::VectorXd BasisExpansion::expand(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  Eigen::VectorXd g(size());
  Index pos = 0;
  g[pos++] = 1.0;
  if (kind == BasisKind::intercept_only) return g;
  for (Index i = 0; i < d; ++i) g[pos++] = x[i];
  if (kind == BasisKind::raw) return g;
  for (Index i = 0; i < d; ++i)
    for (Index j = i; j < d; ++j) g[pos++] = x[i] * x[j];
  if (kind == BasisKind::polynomial2) return g;
  const double denom = 2.0 * bandwidth * bandwidth;
  for (Index c = 0; c < centers.rows(); ++c)
    g[pos++] = std::exp(-(x - centers.row(c).transpose()).squaredNorm() / denom);
  return g;
}

Eigen::MatrixXd BasisExpansion::expand_rows(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd g(x.rows(), size());
  for (Index r = 0; r < x.rows(); ++r) g.row(r) = expand(x.row(r).transpose()).transpose();
  return g;
}

namespace {

Eigen::MatrixXd kmeans_centers(const Eigen::MatrixXd& x, Index k, std::uint64_t seed) {
  const Index n = x.rows();
  std::mt19937_64 rng(seed);
  // k-means++ seeding.
  Eigen::MatrixXd c(k, x.cols());
  std::uniform_int_distribution<Index> pick(0, n - 1);
  c.row(0) = x.row(pick(rng));
  Eigen::VectorXd dist2 = (x.rowwise() - c.row(0)).rowwise().squaredNorm();
  for (Index j = 1; j < k; ++j) {
    const double total = dist2.sum();
    Index chosen = 0;
    if (total > 0.0) {
      double u = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (chosen = 0; chosen < n - 1; ++chosen) {
        u -= dist2[chosen];
        if (u <= 0.0) break;
      }
    }
    c.row(j) = x.row(chosen);
    dist2 = dist2.cwiseMin((x.rowwise() - c.row(j)).rowwise().squaredNorm());
  }
  std::vector<Index> label(static_cast<std::size_t>(n), -1);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      Index best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (Index j = 0; j < k; ++j) {
        const double dd = (x.row(i) - c.row(j)).squaredNorm();
        if (dd < best_d) {
          best_d = dd;
          best = j;
        }
      }
      if (label[static_cast<std::size_t>(i)] != best) {
        label[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    if (!changed) break;
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(k, x.cols());
    Eigen::VectorXd count = Eigen::VectorXd::Zero(k);
    for (Index i = 0; i < n; ++i) {
      sum.row(label[static_cast<std::size_t>(i)]) += x.row(i);
      count[label[static_cast<std::size_t>(i)]] += 1.0;
    }
    for (Index j = 0; j < k; ++j)
      if (count[j] > 0.0) c.row(j) = sum.row(j) / count[j];
  }
  return c;
}

double median_pairwise_distance(const Eigen::MatrixXd& x, std::uint64_t seed) {
  constexpr Index kMaxRows = 500;
  std::vector<Index> rows(static_cast<std::size_t>(x.rows()));
  std::iota(rows.begin(), rows.end(), Index{0});
  if (x.rows() > kMaxRows) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::shuffle(rows.begin(), rows.end(), rng);
    rows.resize(kMaxRows);
  }
  std::vector<double> dist;
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = a + 1; b < rows.size(); ++b) dist.push_back((x.row(rows[a]) - x.row(rows[b])).norm());
  if (dist.empty()) return 1.0;
  auto mid = dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2);
  std::nth_element(dist.begin(), mid, dist.end());
  return *mid > 0.0 ? *mid : 1.0;
}

}  // namespace

BasisExpansion make_basis(BasisKind kind, const Eigen::MatrixXd& train_x, std::uint64_t seed) {
  BasisExpansion b;
  b.kind = kind;
  b.d = train_x.cols();
  if (kind == BasisKind::polynomial2_rbf && train_x.rows() > 0) {
    const auto k = std::min<Index>(10, static_cast<Index>(std::floor(std::sqrt(static_cast<double>(train_x.rows())))));
    b.centers = kmeans_centers(train_x, std::max<Index>(k, 1), seed);
    b.bandwidth = median_pairwise_distance(train_x, seed);
  }
  return b;
}

}  // namespace sie
