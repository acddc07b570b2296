#pragma once

#include <cstdint>
#include <vector>

#include "dackrr/krr.hpp"

namespace dackrr {

enum class PartitionStrategy { Contiguous, Shuffled };

/// m disjoint, non-empty index blocks covering 0..N-1, with weights
/// |D_j| / |D|.
struct Partition {
  std::vector<std::vector<std::size_t>> blocks;
  std::vector<double> weights;

  std::size_t block_count() const { return blocks.size(); }
  std::size_t total_size() const;
};

/// Block sizes differ by at most one; the first N mod m blocks get the extra
/// element. The shuffled strategy permutes 0..N-1 by seed before splitting.
Partition partition(std::size_t n, std::size_t m, PartitionStrategy strategy,
                    std::uint64_t seed = 0);

/// Throws ArgumentError unless the blocks are disjoint, non-empty and cover 0..n-1.
void validate(const Partition& part, std::size_t n);

/// Weighted average sum_j w_j f_{D_j, lambda} of local estimators, stored as
/// one representer over the full sample: the coefficient of x_i, i in D_j, is
/// w_j alpha_i^(j). Support order matches the dataset.
struct AveragedModel {
  KrrModel global;
  std::vector<KrrModel> local;
  Partition partition;
};

/// Each block solves (G_j + |D_j| lambda I) alpha^(j) = y_j independently,
/// possibly on several workers; the combine step runs in block order.
AveragedModel fit_distributed(const Dataset& data, const Partition& part, double lambda,
                              const KernelSpec& kernel, unsigned workers = 1);

double predict(const AveragedModel& model, double x);

struct EstimatorGap {
  double rho_dist = 0.0;
  double rho_stderr = 0.0;
  double k_dist = 0.0;
};

/// ||fbar_{D,lambda} - f_{D,lambda}|| in L2(rho_X) (Monte Carlo, n_test points)
/// and in H_K (exact).
EstimatorGap compare_estimators(const Dataset& data, const Partition& part, double lambda,
                                const KernelSpec& kernel, std::size_t n_test, std::uint64_t seed);

}  // namespace dackrr
