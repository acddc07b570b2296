#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dackrr/distributed.hpp"
#include "dackrr/synthetic.hpp"

namespace dackrr {

/// Regularization schedules tied to (N, m, alpha, r):
///   MOverN             lambda = (m/N)^(2a / (2a max(2r,1) + 1))
///   BatchMinimax       lambda = N^(-2a / (2a max(2r,1) + 1))
///   DistributedMinimax lambda = N^(-2a / (4ar + 1))
///   Fixed              lambda given explicitly
enum class LambdaRule { MOverN, BatchMinimax, DistributedMinimax, Fixed };

LambdaRule parse_lambda_rule(const std::string& name);
std::string to_string(LambdaRule rule);

double lambda_rule(LambdaRule rule, std::size_t n, std::size_t m, double alpha, double r,
                   double fixed_value = 0.0);

/// Upper limits on the number of blocks m:
///   General            N^((1 + 2a max(2r-1,0) + 2a(2r-1)) / (4 + 8a max(2r,1) - 4a + 4ar))
///   RkhsTarget         N^(1 / (4 + 6a))
///   DistributedMinimax N^min((6a(2r-1)+1) / (5(4ar+1)), 2a(2r-1) / (4ar+1))
enum class MRestriction { General, RkhsTarget, DistributedMinimax };

MRestriction parse_m_restriction(const std::string& name);
std::string to_string(MRestriction rule);

struct MLimit {
  std::size_t max_m = 1;
  double exponent = 0.0;
  std::string warning;  // set when the exponent is non-positive
};

MLimit m_restriction(MRestriction rule, std::size_t n, double alpha, double r);

enum class Metric {
  DistVsBatchRho,   // ||fbar_{D,lambda} - f_{D,lambda}||_rho
  DistVsBatchK,     // ||fbar_{D,lambda} - f_{D,lambda}||_K
  BatchVsTargetRho, // ||f_{D,lambda} - f_rho||_rho
  DistVsTargetRho,  // ||fbar_{D,lambda} - f_rho||_rho
};

Metric parse_metric(const std::string& name);
std::string to_string(Metric metric);

/// How m is chosen for each N: an explicit list, m = floor(N^exponent), or
/// the largest m admitted by a restriction.
struct MRule {
  enum class Kind { Values, Exponent, Restriction } kind = Kind::Values;
  std::vector<std::size_t> values{1};
  double exponent = 0.0;
  MRestriction restriction = MRestriction::DistributedMinimax;

  std::vector<std::size_t> blocks_for(std::size_t n, double alpha, double r) const;
  std::string label(std::size_t m) const;
};

struct ExperimentConfig {
  int order = 1;
  int k_max = 2000;
  double r = 0.5;
  double decay = 1.0;
  std::uint64_t target_seed = 7;
  NoiseModel noise = BoundedUniformNoise{1.0};
  std::vector<std::size_t> n_grid;
  MRule m_rule;
  LambdaRule lambda = LambdaRule::BatchMinimax;
  double lambda_value = 0.0;
  std::optional<double> alpha;  // defaults to the kernel order s
  std::size_t trials = 20;
  std::size_t n_test = 4096;
  std::uint64_t seed = 1;
  std::vector<Metric> metrics{Metric::BatchVsTargetRho};
  PartitionStrategy strategy = PartitionStrategy::Contiguous;

  double decay_exponent() const { return alpha.value_or(static_cast<double>(order)); }
  /// Throws ConfigError on an invalid configuration.
  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);

struct RateRow {
  std::size_t n = 0;
  std::size_t m = 0;
  double lambda = 0.0;
  std::string metric;
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t trials = 0;
};

struct SlopeFit {
  double slope = 0.0;
  double std_error = 0.0;
  double intercept = 0.0;
  std::size_t points = 0;
};

struct RateFit {
  std::string metric;
  std::string m_label;
  SlopeFit fit;
};

struct RateResult {
  std::vector<RateRow> rows;
  std::vector<RateFit> fits;
};

/// Ordinary least squares of ln y on ln x. Needs >= 3 points, all positive.
SlopeFit fit_loglog_slope(std::span<const std::pair<double, double>> points);

/// Per-trial metric values, indexed [cell][trial][metric]. Exposed for
/// paired comparisons across cells.
struct TrialTable {
  struct Cell {
    std::size_t n = 0;
    std::size_t m = 0;
    double lambda = 0.0;
    std::vector<std::vector<double>> values;
  };
  std::vector<Cell> cells;
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Runs every (N, m, trial) cell with data regenerated from the sub-seed
/// (seed, N, m, trial), then aggregates in a fixed order. The output does not
/// depend on `workers`.
RateResult run_rate_experiment(const ExperimentConfig& config, unsigned workers = 1,
                               TrialTable* table = nullptr, const ProgressFn& progress = {});

}  // namespace dackrr
