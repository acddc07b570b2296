#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace dackrr {

/// One row of the verify-lemmas table. `pass` compares value against
/// threshold in the direction noted in `relation` ("<=" or ">=").
struct LemmaCheck {
  std::string name;
  double value = 0.0;
  std::string relation = "<=";
  double threshold = 0.0;
  bool pass = false;
};

struct LemmaSuiteConfig {
  std::uint64_t seed = 2024;

  // m = 1 equivalence
  std::size_t equivalence_configs = 10;

  // second-order decomposition on random SPD pairs
  std::size_t spd_pairs = 100;
  int spd_size = 50;
  double spd_shift = 0.1;

  // difference representation
  std::size_t representation_configs = 20;
  std::size_t representation_n = 60;
  std::vector<std::size_t> representation_m{2, 3, 5};
  int representation_k_max = 30;
  double representation_lambda = 0.1;

  // effective dimension
  int effdim_k_max = 2000;
  std::size_t effdim_n = 2000;
  std::vector<double> effdim_lambdas{1e-1, 1e-2, 1e-3};

  // approximation error on a log grid in [1e-4, 1e-1]
  std::size_t approx_grid = 20;

  // concentration
  int concentration_k_max = 50;
  std::vector<double> concentration_lambdas{1e-2, 1e-1};
  std::vector<std::size_t> concentration_n{100, 500};
  std::size_t concentration_trials = 500;
  double concentration_delta = 0.05;
  std::size_t kx_draws = 100000;
};

/// Throws ConfigError on unknown or malformed fields.
LemmaSuiteConfig lemma_config_from_json(const nlohmann::json& j);

/// Runs the identity, effective-dimension, approximation and concentration
/// checks in a fixed order. Results do not depend on `workers`.
std::vector<LemmaCheck> run_lemma_suite(const LemmaSuiteConfig& config, unsigned workers = 1);

/// CSV with header check,value,relation,threshold,pass.
std::string lemma_csv(const std::vector<LemmaCheck>& checks);

}  // namespace dackrr
