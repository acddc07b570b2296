#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "dackrr/kernels.hpp"
#include "dackrr/synthetic.hpp"
#include "dackrr/types.hpp"

namespace dackrr {

/// Representer form f(x) = sum_i alpha_i K(x_i, x) of the regularized
/// least-squares estimator
///
///   f_{D,lambda} = argmin (1/N) sum (f(x_i) - y_i)^2 + lambda ||f||_K^2.
///
/// With the mean-squared loss the coefficients solve (G + N lambda I) alpha = y,
/// not (G + lambda I) alpha = y.
struct KrrModel {
  std::vector<double> support;
  Vector coefficients;
  double lambda = 0.0;
  KernelSpec kernel;
};

/// Solves (gram + shift I) x = rhs by Cholesky. No jitter is added; a
/// non-positive pivot raises NumericError with its index.
Vector solve_regularized(const Matrix& gram, const Vector& rhs, double shift);

KrrModel fit(const Dataset& data, double lambda, const KernelSpec& kernel);

double predict(const KrrModel& model, double x);
Vector predict(const KrrModel& model, std::span<const double> points);

/// Value of the regularized empirical risk at `coefficients` on `data`.
double objective(const KrrModel& model, const Dataset& data, const Vector& coefficients);

/// alpha^T G alpha.
double rkhs_norm_sq(const KrrModel& model);

/// ||f_a - f_b||_K^2 evaluated on the union of both supports; points that
/// appear in both supports are merged before assembling the Gram matrix.
double rkhs_dist_sq(const KrrModel& a, const KrrModel& b);

using RealFunction = std::function<double(double)>;

struct MonteCarloNorm {
  double value = 0.0;
  double std_error = 0.0;
};

/// sqrt((1/n) sum (f(t_i) - g(t_i))^2) with t_i iid uniform on [0, 1).
/// The standard error is propagated through the square root by the delta
/// method.
MonteCarloNorm l2_dist_mc(const RealFunction& f, const RealFunction& g, std::size_t n_test,
                          std::uint64_t seed);

/// Same estimate from pointwise difference values already evaluated at the
/// Monte-Carlo points.
MonteCarloNorm rms_with_stderr(const Vector& differences);

/// Coordinates of each model in the L2-orthonormal eigenbasis of `spec`:
/// a_l = mu_l * sum_i alpha_i e_l(x_i). Exact for the truncated periodic
/// kernel. All models must share the support of the first one.
Matrix mercer_coefficients(const SpectralModel& spec, std::span<const double> support,
                           std::span<const Vector* const> coefficient_sets);
Vector mercer_coefficients(const KrrModel& model, const SpectralModel& spec);

/// Evaluates a function given by L2 eigen-coordinates.
double eval_expansion(const SpectralModel& spec, const Vector& coordinates, double x);

/// Writes `<stem>.csv` (columns x,alpha) and `<stem>.json` (kernel, lambda, N).
void write_model(const KrrModel& model, const std::filesystem::path& csv_path,
                 const std::filesystem::path& json_path);
KrrModel read_model(const std::filesystem::path& csv_path, const std::filesystem::path& json_path);

}  // namespace dackrr
