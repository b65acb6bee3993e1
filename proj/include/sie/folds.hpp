#pragma once

#include "sie/dataset.hpp"

#include <cstdint>
#include <vector>

namespace sie {

struct FoldAssignment {
  std::vector<int> fold_of;
  int k = 0;

  std::vector<Index> members(int fold) const;
  std::vector<Index> complement(int fold) const;
};

inline constexpr int kMaxFoldRedraws = 100;

/// Folds of size n/k or n/k + 1, each holding at least one treated and one
/// control unit. Throws TooFewUnits (k < 2 or n < 2k) or DegenerateFold.
FoldAssignment kfold_split(const Dataset& ds, int k, std::uint64_t seed);

struct TrainTestSplit {
  std::vector<Index> train;
  std::vector<Index> test;
};

/// Shuffled split with round(n * test_fraction) test units, both sides
/// containing both treatment arms when the data allows it.
TrainTestSplit train_test_split(const Dataset& ds, double test_fraction, std::uint64_t seed);

}  // namespace sie
