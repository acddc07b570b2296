#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "dackrr/distributed.hpp"
#include "dackrr/errors.hpp"
#include "dackrr/synthetic.hpp"
#include "dackrr/types.hpp"

// Operators on H_K are represented in the H_K-orthonormal coordinates
// phi_l = sqrt(mu_l) e_l of a finite-rank SpectralModel. There L_K is
// diag(mu), K_x is the vector (phi_l(x))_l, and the empirical operator
// L_{K,D(x)} is (1/N) sum_i phi(x_i) phi(x_i)^T.

namespace dackrr {

/// Largest singular value.
template <typename Derived>
double operator_norm(const Eigen::MatrixBase<Derived>& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a.derived().template cast<double>());
  return svd.singularValues()[0];
}

/// Hilbert-Schmidt (Frobenius) norm; dominates operator_norm.
template <typename Derived>
double hs_norm(const Eigen::MatrixBase<Derived>& a) {
  return a.norm();
}

/// Operator norm of
///   (A^-1 - B^-1) - [B^-1 (B - A) B^-1 + B^-1 (B - A) A^-1 (B - A) B^-1],
/// which vanishes up to round-off for any invertible A, B.
template <typename DerivedA, typename DerivedB>
double second_order_residual(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
    throw ArgumentError("second_order_residual: A and B must be square and of equal size");
  const Eigen::FullPivLU<Matrix> lu_a(a), lu_b(b);
  if (!lu_a.isInvertible()) throw NumericError("second_order_residual: A is singular");
  if (!lu_b.isInvertible()) throw NumericError("second_order_residual: B is singular");
  const Matrix a_inv = lu_a.inverse();
  const Matrix b_inv = lu_b.inverse();
  const Matrix gap = b - a;
  const Matrix first = b_inv * gap * b_inv;
  const Matrix second = b_inv * gap * a_inv * gap * b_inv;
  return operator_norm((a_inv - b_inv) - (first + second));
}

/// N(lambda) = sum_l mu_l / (mu_l + lambda).
double effective_dimension_spectral(const Vector& eigenvalues, double lambda);
double effective_dimension_spectral(const SpectralModel& spec, double lambda);

/// Tr((G/N) (G/N + lambda I)^-1) for a symmetric PSD Gram matrix.
template <typename Derived>
double effective_dimension_empirical(const Eigen::MatrixBase<Derived>& g, std::size_t n, double lambda) {
  if (!(lambda > 0.0)) throw ArgumentError("effective dimension needs lambda > 0");
  if (g.rows() != g.cols() || n == 0) throw ArgumentError("effective_dimension_empirical: bad Gram shape");
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw ArgumentError("effective_dimension_empirical: Gram matrix is not symmetric");
  const Matrix scaled = g.derived().template cast<double>() / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(scaled, Eigen::EigenvaluesOnly);
  const Eigen::ArrayXd s = eig.eigenvalues().array().max(0.0);
  return (s / (s + lambda)).sum();
}

/// Coefficients of f_lambda = (L_K + lambda)^-1 L_K f_rho in the L2 eigenbasis.
Vector f_lambda(const SpectralModel& spec, const TargetFunction& target, double lambda);

/// ||f_lambda - f_rho||_rho, exact in the truncated basis.
double approximation_error(const SpectralModel& spec, const TargetFunction& target, double lambda);

/// ||f_lambda - f_rho||_K.
double approximation_error_rkhs(const SpectralModel& spec, const TargetFunction& target, double lambda);

/// (1/N) sum_i phi(x_i) phi(x_i)^T.
Matrix empirical_operator(const SpectralModel& spec, std::span<const double> points);

struct RepresentationCheck {
  double first_form = 0.0;   // ||sum_j w_j [A_j^-1 - A_D^-1] Delta_j - (fbar - f)||_K
  double second_form = 0.0;  // same for the Q / Delta' / Delta'' form
  double batch_rkhs_norm = 0.0;

  double discrepancy() const { return std::max(first_form, second_form); }
};

/// Checks both operator representations of fbar_{D,lambda} - f_{D,lambda}
/// against the difference of the fitted estimators. `kernel` must be the
/// periodic kernel whose eigensystem is `spec`.
RepresentationCheck verify_difference_representation(const Dataset& data, const Partition& part,
                                                     double lambda, const KernelSpec& kernel,
                                                     const TargetFunction& target,
                                                     const SpectralModel& spec);

/// sup_x sum_l mu_l e_l(x)^2 bounded frequency by frequency. Exact for the
/// periodic kernel and for cosine-only models.
double kappa_sq_bound(const SpectralModel& spec);

struct MonteCarloMean {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// Monte-Carlo mean of ||(L_K + lambda)^-1/2 K_x||_K^2 over x ~ uniform;
/// its expectation is N(lambda).
MonteCarloMean kx_norm_sq_mc(const SpectralModel& spec, double lambda, std::size_t draws,
                             std::uint64_t seed);

struct ConcentrationReport {
  double lambda = 0.0;
  std::size_t sample_size = 0;
  std::size_t trials = 0;
  double delta = 0.0;
  double effective_dimension = 0.0;
  double kappa_sq = 0.0;

  /// Xi_D = ||(L_K + lambda)^-1/2 (L_K - L_{K,D(x)})|| per trial.
  std::vector<double> xi;
  /// Squared HS norm of the same operator per trial.
  std::vector<double> hs_sq;

  double hs_sq_mean = 0.0;
  double hs_sq_stderr = 0.0;
  double op_sq_mean = 0.0;

  double bound_a = 0.0;       // kappa^2 N(lambda) / |D|
  double b_const = 0.0;       // 2 kappa / sqrt|D| (kappa / sqrt(|D| lambda) + sqrt N(lambda))
  double b_threshold = 0.0;   // b_const log(2 / delta)
  std::size_t b_violations = 0;
  double xi_quantile = 0.0;   // empirical (1 - delta) quantile of Xi_D

  MonteCarloMean kx_norm_sq;  // pooled over every drawn x

  bool a_holds_hs() const { return hs_sq_mean <= bound_a; }
  bool a_holds_op() const { return op_sq_mean <= bound_a; }
  double violation_rate() const { return trials ? static_cast<double>(b_violations) / static_cast<double>(trials) : 0.0; }
  /// Violation rate within delta plus two binomial standard errors.
  bool b_holds() const;
};

ConcentrationReport concentration_check(const SpectralModel& spec, double lambda, std::size_t n,
                                        std::size_t n_trials, double delta, std::uint64_t seed,
                                        unsigned workers = 1);

}  // namespace dackrr
