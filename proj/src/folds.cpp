#include "sie/folds.hpp"

#include "sie/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace sie {

std::vector<Index> FoldAssignment::members(int fold) const {
  std::vector<Index> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    if (fold_of[i] == fold) out.push_back(static_cast<Index>(i));
  return out;
}

std::vector<Index> FoldAssignment::complement(int fold) const {
  std::vector<Index> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    if (fold_of[i] != fold) out.push_back(static_cast<Index>(i));
  return out;
}

FoldAssignment kfold_split(const Dataset& ds, int k, std::uint64_t seed) {
  const Index n = ds.n();
  if (k < 2) throw Error(ErrorCode::too_few_units, "k must be >= 2, got " + std::to_string(k));
  if (n < 2 * static_cast<Index>(k))
    throw Error(ErrorCode::too_few_units,
                "k-fold split needs n >= 2k (n=" + std::to_string(n) + ", k=" + std::to_string(k) + ")");

  std::mt19937_64 rng(seed);
  std::vector<Index> order(static_cast<std::size_t>(n));
  FoldAssignment fa;
  fa.k = k;
  fa.fold_of.assign(order.size(), 0);
  for (int attempt = 0; attempt < kMaxFoldRedraws; ++attempt) {
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> treated(k, 0), control(k, 0);
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      const int f = static_cast<int>(pos % static_cast<std::size_t>(k));
      fa.fold_of[static_cast<std::size_t>(order[pos])] = f;
      (ds.t[order[pos]] == 1 ? treated : control)[f]++;
    }
    bool ok = true;
    for (int f = 0; f < k; ++f) ok = ok && treated[f] > 0 && control[f] > 0;
    if (ok) return fa;
  }
  throw Error(ErrorCode::degenerate_fold, "no fold assignment with both arms in every fold after " +
                                              std::to_string(kMaxFoldRedraws) + " draws");
}

TrainTestSplit train_test_split(const Dataset& ds, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw Error(ErrorCode::invalid_config, "test fraction must lie in (0,1)");
  const Index n = ds.n();
  const auto n_test = static_cast<Index>(std::llround(static_cast<double>(n) * test_fraction));
  if (n_test < 1 || n - n_test < 2)
    throw Error(ErrorCode::too_few_units, "train/test split leaves an empty side");
  std::mt19937_64 rng(seed);
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (int attempt = 0; attempt < kMaxFoldRedraws; ++attempt) {
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    TrainTestSplit s;
    s.test.assign(order.begin(), order.begin() + n_test);
    s.train.assign(order.begin() + n_test, order.end());
    std::sort(s.test.begin(), s.test.end());
    std::sort(s.train.begin(), s.train.end());
    auto both_arms = [&](const std::vector<Index>& idx) {
      Index tr = 0;
      for (Index i : idx) tr += ds.t[i];
      return tr > 0 && tr < static_cast<Index>(idx.size());
    };
    if (both_arms(s.train) && (n_test < 2 || both_arms(s.test))) return s;
  }
  throw Error(ErrorCode::degenerate_fold, "train/test split could not place both arms on each side");
}

}  // namespace sie
