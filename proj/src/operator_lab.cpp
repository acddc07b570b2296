#include "dackrr/operator_lab.hpp"

#include <cmath>
#include <map>

#include "dackrr/parallel.hpp"
#include "dackrr/random.hpp"

namespace dackrr {

double effective_dimension_spectral(const Vector& eigenvalues, double lambda) {
  if (!(lambda > 0.0)) throw ArgumentError("effective dimension needs lambda > 0");
  return (eigenvalues.array() / (eigenvalues.array() + lambda)).sum();
}

double effective_dimension_spectral(const SpectralModel& spec, double lambda) {
  return effective_dimension_spectral(spec.eigenvalues, lambda);
}

Vector f_lambda(const SpectralModel& spec, const TargetFunction& target, double lambda) {
  if (!(lambda > 0.0)) throw ArgumentError("f_lambda needs lambda > 0");
  const Eigen::ArrayXd mu = spec.eigenvalues.array();
  return (mu / (mu + lambda) * target.coefficients.array()).matrix();
}

double approximation_error(const SpectralModel& spec, const TargetFunction& target, double lambda) {
  if (!(lambda > 0.0)) throw ArgumentError("approximation_error needs lambda > 0");
  const Eigen::ArrayXd mu = spec.eigenvalues.array();
  return (lambda / (mu + lambda) * target.coefficients.array()).matrix().norm();
}

double approximation_error_rkhs(const SpectralModel& spec, const TargetFunction& target, double lambda) {
  if (!(lambda > 0.0)) throw ArgumentError("approximation_error_rkhs needs lambda > 0");
  const Eigen::ArrayXd mu = spec.eigenvalues.array();
  return (lambda / (mu + lambda) * target.coefficients.array() / mu.sqrt()).matrix().norm();
}

Matrix empirical_operator(const SpectralModel& spec, std::span<const double> points) {
  if (points.empty()) throw ArgumentError("empirical_operator: no points");
  const Matrix v = spec.feature_matrix(points);
  Matrix m = Matrix::Zero(spec.dimension(), spec.dimension());
  m.selfadjointView<Eigen::Lower>().rankUpdate(v.transpose(), 1.0 / static_cast<double>(points.size()));
  return m.selfadjointView<Eigen::Lower>();
}

RepresentationCheck verify_difference_representation(const Dataset& data, const Partition& part,
                                                     double lambda, const KernelSpec& kernel,
                                                     const TargetFunction& target,
                                                     const SpectralModel& spec) {
  const auto* pk = std::get_if<PeriodicSobolevKernel>(&kernel);
  if (pk == nullptr || 2 * static_cast<Index>(pk->k_max) + 1 != spec.dimension())
    throw ArgumentError("verify_difference_representation: kernel must be the truncated periodic "
                        "kernel matching the spectral model");
  if (target.coefficients.size() != spec.dimension())
    throw ArgumentError("verify_difference_representation: target dimension mismatch");

  const KrrModel batch = fit(data, lambda, kernel);
  const AveragedModel averaged = fit_distributed(data, part, lambda, kernel);

  const Index d = spec.dimension();
  const Eigen::ArrayXd mu = spec.eigenvalues.array();
  const Eigen::ArrayXd root_mu = mu.sqrt();
  const Matrix v = spec.feature_matrix(data.inputs);  // row i: coordinates of K_{x_i}
  const double n = static_cast<double>(data.size());

  // fbar - f_{D,lambda} in phi-coordinates
  const Vector lhs = v.transpose() * (averaged.global.coefficients - batch.coefficients);

  const Vector rho_phi = (target.coefficients.array() / root_mu).matrix();
  const Vector c_lambda = f_lambda(spec, target, lambda);
  const Vector lambda_phi = (c_lambda.array() / root_mu).matrix();
  const Vector expected_xi = (root_mu * (target.coefficients - c_lambda).array()).matrix();  // E[xi_lambda]

  const Vector y = Eigen::Map<const Vector>(data.outputs.data(), static_cast<Index>(data.size()));
  const Vector f_rho_at_x = v * rho_phi;
  const Vector f_lambda_at_x = v * lambda_phi;

  const Vector b_inv_diag = (1.0 / (mu + lambda)).matrix();

  struct Solver {
    Eigen::LLT<Matrix> llt;
    Vector apply(const Vector& rhs) const { return llt.solve(rhs); }
  };
  auto shifted_solver = [&](const Matrix& rows) {
    Matrix a = Matrix::Zero(d, d);
    a.selfadjointView<Eigen::Lower>().rankUpdate(rows.transpose(), 1.0 / static_cast<double>(rows.rows()));
    a = a.selfadjointView<Eigen::Lower>();
    a.diagonal().array() += lambda;
    Solver s{Eigen::LLT<Matrix>(a)};
    if (s.llt.info() != Eigen::Success) throw NumericError("empirical operator plus lambda is not positive definite");
    return s;
  };
  auto q_apply = [&](const Solver& s, const Vector& x) -> Vector {
    return s.apply(x) - b_inv_diag.cwiseProduct(x);
  };

  const Solver whole = shifted_solver(v);
  const Vector delta_whole = v.transpose() * (y - f_lambda_at_x) / n - expected_xi;

  Vector first = Vector::Zero(d);
  Vector second = Vector::Zero(d);
  for (std::size_t j = 0; j < part.block_count(); ++j) {
    const auto& block = part.blocks[j];
    const double w = part.weights[j];
    const double size = static_cast<double>(block.size());
    Matrix vj(static_cast<Index>(block.size()), d);
    Vector noise_j(vj.rows()), approx_j(vj.rows()), resid_j(vj.rows());
    for (std::size_t k = 0; k < block.size(); ++k) {
      const auto i = static_cast<Index>(block[k]);
      const auto r = static_cast<Index>(k);
      vj.row(r) = v.row(i);
      noise_j[r] = y[i] - f_rho_at_x[i];
      approx_j[r] = f_rho_at_x[i] - f_lambda_at_x[i];
      resid_j[r] = y[i] - f_lambda_at_x[i];
    }
    const Solver local = shifted_solver(vj);
    const Vector delta_j = vj.transpose() * resid_j / size - expected_xi;
    const Vector delta_noise = vj.transpose() * noise_j / size;
    const Vector delta_approx = vj.transpose() * approx_j / size - expected_xi;

    first += w * (local.apply(delta_j) - whole.apply(delta_j));
    second += w * (q_apply(local, delta_noise) + q_apply(local, delta_approx));
  }
  second -= q_apply(whole, delta_whole);

  RepresentationCheck out;
  out.first_form = (first - lhs).norm();
  out.second_form = (second - lhs).norm();
  out.batch_rkhs_norm = (v.transpose() * batch.coefficients).norm();
  return out;
}

double kappa_sq_bound(const SpectralModel& spec) {
  // Per frequency, sup_x 2 (mu_c cos^2 + mu_s sin^2) = 2 max(mu_c, mu_s).
  std::map<int, std::pair<double, double>> pairs;
  double sum = 0.0;
  for (Index l = 0; l < spec.dimension(); ++l) {
    const BasisFunction& b = spec.basis[static_cast<std::size_t>(l)];
    const double mu = spec.eigenvalues[l];
    if (b.kind == BasisKind::Constant) sum += mu;
    else if (b.kind == BasisKind::Cosine) pairs[b.frequency].first += mu;
    else pairs[b.frequency].second += mu;
  }
  for (const auto& [k, p] : pairs) sum += 2.0 * std::max(p.first, p.second);
  return sum;
}

namespace {

MonteCarloMean summarize(const std::vector<double>& samples) {
  MonteCarloMean out;
  out.samples = samples.size();
  if (samples.empty()) return out;
  double sum = 0.0;
  for (double s : samples) sum += s;
  out.mean = sum / static_cast<double>(samples.size());
  if (samples.size() > 1) {
    double ss = 0.0;
    for (double s : samples) ss += (s - out.mean) * (s - out.mean);
    out.std_error = std::sqrt(ss / static_cast<double>(samples.size() - 1) / static_cast<double>(samples.size()));
  }
  return out;
}

// ||(L_K + lambda)^-1/2 K_x||^2 = sum_l phi_l(x)^2 / (mu_l + lambda), one per row.
Vector kx_norms_sq(const Matrix& v, const Vector& inv_shift) {
  return v.array().square().matrix() * inv_shift;
}

}  // namespace

MonteCarloMean kx_norm_sq_mc(const SpectralModel& spec, double lambda, std::size_t draws,
                             std::uint64_t seed) {
  if (!(lambda > 0.0)) throw ArgumentError("kx_norm_sq_mc needs lambda > 0");
  if (draws == 0) throw ArgumentError("kx_norm_sq_mc needs at least one draw");
  const Vector inv_shift = (1.0 / (spec.eigenvalues.array() + lambda)).matrix();
  const std::vector<double> x = uniform_points(draws, seed);
  const Vector norms = kx_norms_sq(spec.feature_matrix(x), inv_shift);
  return summarize(std::vector<double>(norms.data(), norms.data() + norms.size()));
}

bool ConcentrationReport::b_holds() const {
  if (trials == 0) return true;
  const double se = std::sqrt(delta * (1.0 - delta) / static_cast<double>(trials));
  return violation_rate() <= delta + 2.0 * se;
}

ConcentrationReport concentration_check(const SpectralModel& spec, double lambda, std::size_t n,
                                        std::size_t n_trials, double delta, std::uint64_t seed,
                                        unsigned workers) {
  if (!(lambda > 0.0)) throw ArgumentError("concentration_check needs lambda > 0");
  if (n == 0 || n_trials == 0) throw ArgumentError("concentration_check needs N >= 1 and trials >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("concentration_check needs delta in (0, 1)");

  ConcentrationReport rep;
  rep.lambda = lambda;
  rep.sample_size = n;
  rep.trials = n_trials;
  rep.delta = delta;
  rep.effective_dimension = effective_dimension_spectral(spec, lambda);
  rep.kappa_sq = kappa_sq_bound(spec);
  const double nd = static_cast<double>(n);
  rep.bound_a = rep.kappa_sq * rep.effective_dimension / nd;
  const double kappa = std::sqrt(rep.kappa_sq);
  rep.b_const = 2.0 * kappa / std::sqrt(nd) * (kappa / std::sqrt(nd * lambda) + std::sqrt(rep.effective_dimension));
  rep.b_threshold = rep.b_const * std::log(2.0 / delta);

  const Eigen::ArrayXd mu = spec.eigenvalues.array();
  const Vector left = (1.0 / (mu + lambda).sqrt()).matrix();
  const Vector inv_shift = (1.0 / (mu + lambda)).matrix();

  rep.xi.assign(n_trials, 0.0);
  rep.hs_sq.assign(n_trials, 0.0);
  std::vector<double> op_sq(n_trials, 0.0);
  std::vector<Vector> kx(n_trials);
  parallel_for(n_trials, workers, [&](std::size_t t) {
    const std::vector<double> x = uniform_points(n, derive_seed({seed, t}));
    const Matrix v = spec.feature_matrix(x);
    Matrix gap = Matrix::Zero(v.cols(), v.cols());
    gap.selfadjointView<Eigen::Lower>().rankUpdate(v.transpose(), -1.0 / nd);
    gap.triangularView<Eigen::StrictlyUpper>() = gap.transpose();
    gap.diagonal() += spec.eigenvalues;
    const Matrix op = left.asDiagonal() * gap;
    rep.hs_sq[t] = op.squaredNorm();
    // ||op||^2 is the top eigenvalue of op op^T, which is symmetric.
    const Matrix outer = op * op.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(outer, Eigen::EigenvaluesOnly);
    const double xi = std::sqrt(std::max(0.0, eig.eigenvalues()[eig.eigenvalues().size() - 1]));
    rep.xi[t] = xi;
    op_sq[t] = xi * xi;
    kx[t] = kx_norms_sq(v, inv_shift);
  });

  rep.hs_sq_mean = summarize(rep.hs_sq).mean;
  rep.hs_sq_stderr = summarize(rep.hs_sq).std_error;
  rep.op_sq_mean = summarize(op_sq).mean;
  for (double xi : rep.xi)
    if (xi > rep.b_threshold) ++rep.b_violations;
  std::vector<double> sorted = rep.xi;
  std::sort(sorted.begin(), sorted.end());
  const auto q = static_cast<std::size_t>(std::ceil((1.0 - delta) * static_cast<double>(n_trials))) - 1;
  rep.xi_quantile = sorted[std::min(q, sorted.size() - 1)];

  std::vector<double> pooled;
  pooled.reserve(n * n_trials);
  for (const auto& k : kx) pooled.insert(pooled.end(), k.data(), k.data() + k.size());
  rep.kx_norm_sq = summarize(pooled);
  return rep;
}

}  // namespace dackrr
