#pragma once

#include <span>
#include <string>
#include <variant>

#include <json.hpp>

#include "dackrr/types.hpp"

namespace dackrr {

/// K(x, y) = exp(-(x - y)^2 / (2 bandwidth^2)). Defined on all of R.
struct GaussianKernel {
  double bandwidth = 1.0;
  bool operator==(const GaussianKernel&) const = default;
};

/// Periodic Sobolev kernel of order s on [0, 1), truncated at k_max:
///
///   K(x, y) = 1 + 2 * sum_{k=1}^{k_max} k^(-2s) cos(2 pi k (x - y)).
///
/// The truncated kernel is the exact kernel everywhere in this library, so
/// its integral operator under the uniform measure has finite rank
/// 2 k_max + 1 with eigenvalues 1 and k^(-2s) (each twice).
struct PeriodicSobolevKernel {
  int order = 1;
  int k_max = 2000;
  bool operator==(const PeriodicSobolevKernel&) const = default;
};

using KernelSpec = std::variant<GaussianKernel, PeriodicSobolevKernel>;

KernelSpec gaussian_kernel(double bandwidth);
KernelSpec periodic_sobolev_kernel(int order, int k_max = 2000);

/// Throws ArgumentError on a non-positive bandwidth, order or truncation.
void validate(const KernelSpec& kernel);

double eval(const KernelSpec& kernel, double x, double y);

/// Gram matrix G(i, j) = eval(kernel, X[i], X[j]). The upper triangle is
/// mirrored from the lower one, so G is exactly symmetric.
Matrix gram(const KernelSpec& kernel, std::span<const double> points);

/// Cross-kernel matrix C(i, j) = eval(kernel, rows[i], cols[j]).
Matrix cross_gram(const KernelSpec& kernel, std::span<const double> rows,
                  std::span<const double> cols);

/// sup_x sqrt(K(x, x)).
double kappa(const KernelSpec& kernel);

std::string describe(const KernelSpec& kernel);

/// {"kind":"gaussian","bandwidth":b} or {"kind":"periodic_sobolev","s":s,"k_max":k}
KernelSpec kernel_from_json(const nlohmann::json& j);
nlohmann::json kernel_to_json(const KernelSpec& kernel);

}  // namespace dackrr
