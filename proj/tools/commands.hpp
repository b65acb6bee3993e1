#pragma once

#include "sie/dataset.hpp"
#include "sie/rs_sio.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sie::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitPartialBench = 4;

struct CommonArgs {
  std::string input;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int k = 5;
  double delta = 1.0;
  std::string basis = "poly2";
  std::string outcome = "gbstumps";
  bool oracle_nuisance = false;
  bool within_fold = false;
  int jobs = 0;  // 0: OpenMP default
};

struct GenerateArgs {
  Index n = 2000;
  std::uint64_t seed = 0;
  std::string out;
  std::string dgp = "default";
  double sigma = 0.5;
  double confounding = 1.0;
};

struct EstimateArgs {
  CommonArgs common;
  std::vector<double> delta_grid;
  std::vector<std::string> baselines{"ols", "ipw", "aipw"};
  bool ipw_normalized = false;
  bool dump_models = false;
};

struct OptimizeArgs {
  CommonArgs common;
  RsConfig rs;
  double test_fraction = 0.2;
  double threshold = 0.5;
  double random_p = 0.5;
};

struct BenchArgs {
  CommonArgs common;
  std::vector<std::string> baselines{"ols", "ipw", "aipw"};
  bool ipw_normalized = false;
};

int run_generate(const GenerateArgs& args);
int run_estimate(const EstimateArgs& args);
int run_optimize(const OptimizeArgs& args);
int run_bench(const BenchArgs& args);

}  // namespace sie::cli
