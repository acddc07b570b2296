#include "dackrr/distributed.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dackrr/errors.hpp"
#include "dackrr/parallel.hpp"
#include "dackrr/random.hpp"

namespace dackrr {

std::size_t Partition::total_size() const {
  std::size_t n = 0;
  for (const auto& b : blocks) n += b.size();
  return n;
}

Partition partition(std::size_t n, std::size_t m, PartitionStrategy strategy, std::uint64_t seed) {
  if (m < 1 || m > n) throw ArgumentError("partition: need 1 <= m <= N");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (strategy == PartitionStrategy::Shuffled) {
    CounterRng rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  Partition part;
  part.blocks.resize(m);
  part.weights.resize(m);
  const std::size_t base = n / m;
  const std::size_t extra = n % m;
  std::size_t pos = 0;
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t size = base + (j < extra ? 1 : 0);
    part.blocks[j].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                          order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    part.weights[j] = static_cast<double>(size) / static_cast<double>(n);
    pos += size;
  }
  return part;
}

void validate(const Partition& part, std::size_t n) {
  if (part.blocks.empty() || part.weights.size() != part.blocks.size())
    throw ArgumentError("partition: no blocks or weight count mismatch");
  std::vector<char> seen(n, 0);
  std::size_t covered = 0;
  for (const auto& block : part.blocks) {
    if (block.empty()) throw ArgumentError("partition: empty block");
    for (std::size_t i : block) {
      if (i >= n || seen[i]) throw ArgumentError("partition: blocks overlap or index out of range");
      seen[i] = 1;
      ++covered;
    }
  }
  if (covered != n) throw ArgumentError("partition does not cover the dataset");
}

AveragedModel fit_distributed(const Dataset& data, const Partition& part, double lambda,
                              const KernelSpec& kernel, unsigned workers) {
  validate(part, data.size());
  const std::size_t m = part.block_count();
  AveragedModel out;
  out.partition = part;
  out.local.resize(m);
  parallel_for(m, workers, [&](std::size_t j) {
    try {
      out.local[j] = fit(data.subset(part.blocks[j]), lambda, kernel);
    } catch (const NumericError& e) {
      throw NumericError("block " + std::to_string(j) + ": " + e.what(), e.pivot(), j);
    }
  });
  out.global.kernel = kernel;
  out.global.lambda = lambda;
  out.global.support = data.inputs;
  out.global.coefficients = Vector::Zero(static_cast<Index>(data.size()));
  for (std::size_t j = 0; j < m; ++j) {
    const auto& block = part.blocks[j];
    for (std::size_t k = 0; k < block.size(); ++k)
      out.global.coefficients[static_cast<Index>(block[k])] =
          part.weights[j] * out.local[j].coefficients[static_cast<Index>(k)];
  }
  return out;
}

double predict(const AveragedModel& model, double x) { return predict(model.global, x); }

EstimatorGap compare_estimators(const Dataset& data, const Partition& part, double lambda,
                                const KernelSpec& kernel, std::size_t n_test, std::uint64_t seed) {
  const KrrModel batch = fit(data, lambda, kernel);
  const AveragedModel averaged = fit_distributed(data, part, lambda, kernel);
  // Both estimators share the support D(x), so their difference is a single
  // representer with coefficients alpha_bar - alpha.
  KrrModel diff = batch;
  diff.coefficients = averaged.global.coefficients - batch.coefficients;
  const std::vector<double> t = uniform_points(n_test, seed);
  const MonteCarloNorm rho = rms_with_stderr(predict(diff, t));
  return EstimatorGap{rho.value, rho.std_error, std::sqrt(rkhs_dist_sq(averaged.global, batch))};
}

}  // namespace dackrr
