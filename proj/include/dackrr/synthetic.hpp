#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include <json.hpp>

#include "dackrr/kernels.hpp"
#include "dackrr/types.hpp"

namespace dackrr {

enum class BasisKind { Constant, Cosine, Sine };

/// One L2(uniform[0,1))-orthonormal eigenfunction: 1, sqrt2 cos(2 pi k x) or
/// sqrt2 sin(2 pi k x).
struct BasisFunction {
  BasisKind kind = BasisKind::Constant;
  int frequency = 0;

  double operator()(double x) const;
};

/// Finite-rank Mercer eigensystem {mu_l, e_l} of a kernel under the uniform
/// input distribution. Eigenvalues are positive and non-increasing. In the
/// H_K-orthonormal coordinates phi_l = sqrt(mu_l) e_l the integral operator
/// L_K is diag(mu).
struct SpectralModel {
  Vector eigenvalues;
  std::vector<BasisFunction> basis;

  Index dimension() const { return eigenvalues.size(); }
  double trace() const { return eigenvalues.sum(); }

  /// (e_1(x), ..., e_d(x))
  Vector eigenfunctions(double x) const;
  /// (phi_1(x), ..., phi_d(x)) with phi_l = sqrt(mu_l) e_l. This is the
  /// coordinate vector of K_x.
  Vector features(double x) const;
  /// Row i holds features(points[i]).
  Matrix feature_matrix(std::span<const double> points) const;
};

/// Eigensystem of a truncated PeriodicSobolev kernel: mu = 1 for the constant
/// and k^(-2s) for the cos/sin pair at each k <= k_max. Gaussian kernels have
/// no closed-form eigensystem here and are rejected.
SpectralModel make_spectral(const KernelSpec& kernel);

/// Explicit eigensystem; validates positivity, ordering and sizes.
SpectralModel make_spectral(Vector eigenvalues, std::vector<BasisFunction> basis);

/// f_rho = L_K^r g_rho in L2 coordinates: c_l = mu_l^r g_l.
struct TargetFunction {
  Vector coefficients;
  double source_exponent = 0.5;
  double g_norm = 0.0;
};

/// g_l = sign_l * k_l^(-decay), with k_l the frequency of mode l (1 for the
/// constant) and sign_l alternating with l, offset by the seed parity.
TargetFunction make_source_target(const SpectralModel& spec, double r, double decay,
                                  std::uint64_t seed);

/// Target from explicit g coordinates.
TargetFunction make_target(const SpectralModel& spec, double r, const Vector& g);

double f_rho_eval(const TargetFunction& target, const SpectralModel& spec, double x);

/// sqrt(sum c_l^2 / mu_l); equals g_norm when r = 1/2.
double rkhs_norm(const TargetFunction& target, const SpectralModel& spec);

/// sum |c_l| * sqrt2, an upper bound on sup |f_rho|.
double sup_norm_bound(const TargetFunction& target);

struct BoundedUniformNoise {
  double half_width = 0.0;
};

struct GaussianNoise {
  double std_dev = 1.0;
};

/// Gaussian noise with standard deviation base_std * (1 + amplitude cos(2 pi x)),
/// |amplitude| < 1.
struct HeteroscedasticNoise {
  double base_std = 1.0;
  double amplitude = 0.5;
};

using NoiseModel = std::variant<BoundedUniformNoise, GaussianNoise, HeteroscedasticNoise>;

/// Conditional variance sigma^2(x) of the noise model.
double noise_variance(const NoiseModel& noise, double x);

NoiseModel noise_from_json(const nlohmann::json& j);
nlohmann::json noise_to_json(const NoiseModel& noise);

struct Dataset {
  std::vector<double> inputs;
  std::vector<double> outputs;
  std::uint64_t seed = 0;

  std::size_t size() const { return inputs.size(); }
  Dataset subset(std::span<const std::size_t> indices) const;
};

/// x_i iid uniform on [0, 1), y_i = f_rho(x_i) + noise. Fully determined by seed.
Dataset sample_dataset(const TargetFunction& target, const SpectralModel& spec,
                       const NoiseModel& noise, std::size_t n, std::uint64_t seed);

/// Header "x,y", 17 significant digits, LF line endings.
void write_dataset_csv(const Dataset& data, const std::filesystem::path& path);
Dataset read_dataset_csv(const std::filesystem::path& path);

/// n iid uniform points on [0, 1).
std::vector<double> uniform_points(std::size_t n, std::uint64_t seed);

}  // namespace dackrr
