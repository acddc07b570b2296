#include "dackrr/kernels.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "dackrr/errors.hpp"

namespace dackrr {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void check_finite(double x) {
  if (!std::isfinite(x)) throw DomainError("kernel argument is not finite");
}

void check_unit_interval(double x) {
  check_finite(x);
  if (x < 0.0 || x >= 1.0) throw DomainError("periodic kernel argument outside [0, 1)");
}

// Rows are the H_K-orthonormal features sqrt(mu_l) e_l(x) of the truncated
// periodic kernel: [1, sqrt2 k^-s cos(2 pi k x), sqrt2 k^-s sin(2 pi k x), ...].
Matrix periodic_features(const PeriodicSobolevKernel& k, std::span<const double> points) {
  const Index n = static_cast<Index>(points.size());
  const Index d = 2 * static_cast<Index>(k.k_max) + 1;
  Vector scale(k.k_max);
  for (int f = 1; f <= k.k_max; ++f)
    scale[f - 1] = std::sqrt(2.0) * std::pow(static_cast<double>(f), -static_cast<double>(k.order));
  Matrix w(n, d);
  for (Index i = 0; i < n; ++i) {
    const double x = points[static_cast<std::size_t>(i)];
    check_unit_interval(x);
    w(i, 0) = 1.0;
    for (int f = 1; f <= k.k_max; ++f) {
      const double phase = kTwoPi * std::fmod(f * x, 1.0);
      w(i, 2 * f - 1) = scale[f - 1] * std::cos(phase);
      w(i, 2 * f) = scale[f - 1] * std::sin(phase);
    }
  }
  return w;
}

double periodic_eval(const PeriodicSobolevKernel& k, double x, double y) {
  check_unit_interval(x);
  check_unit_interval(y);
  const double t = std::abs(x - y);
  double sum = 0.0;
  // smallest terms first
  for (int f = k.k_max; f >= 1; --f) {
    const double weight = std::pow(static_cast<double>(f), -2.0 * k.order);
    sum += weight * std::cos(kTwoPi * std::fmod(f * t, 1.0));
  }
  return 1.0 + 2.0 * sum;
}

double gaussian_eval(const GaussianKernel& k, double x, double y) {
  check_finite(x);
  check_finite(y);
  const double diff = x - y;
  return std::exp(-diff * diff / (2.0 * k.bandwidth * k.bandwidth));
}

void mirror_lower(Matrix& g) {
  for (Index j = 1; j < g.cols(); ++j)
    for (Index i = 0; i < j; ++i) g(i, j) = g(j, i);
}

}  // namespace

KernelSpec gaussian_kernel(double bandwidth) {
  KernelSpec k = GaussianKernel{bandwidth};
  validate(k);
  return k;
}

KernelSpec periodic_sobolev_kernel(int order, int k_max) {
  KernelSpec k = PeriodicSobolevKernel{order, k_max};
  validate(k);
  return k;
}

void validate(const KernelSpec& kernel) {
  std::visit(overloaded{
                 [](const GaussianKernel& k) {
                   if (!(k.bandwidth > 0.0) || !std::isfinite(k.bandwidth))
                     throw ArgumentError("gaussian bandwidth must be positive and finite");
                 },
                 [](const PeriodicSobolevKernel& k) {
                   if (k.order < 1) throw ArgumentError("periodic sobolev order s must be >= 1");
                   if (k.k_max < 1) throw ArgumentError("periodic sobolev k_max must be >= 1");
                 },
             },
             kernel);
}

double eval(const KernelSpec& kernel, double x, double y) {
  validate(kernel);
  return std::visit(overloaded{
                        [&](const GaussianKernel& k) { return gaussian_eval(k, x, y); },
                        [&](const PeriodicSobolevKernel& k) { return periodic_eval(k, x, y); },
                    },
                    kernel);
}

Matrix gram(const KernelSpec& kernel, std::span<const double> points) {
  validate(kernel);
  if (points.empty()) throw ArgumentError("gram: empty point set");
  const Index n = static_cast<Index>(points.size());
  Matrix g = Matrix::Zero(n, n);
  if (const auto* k = std::get_if<PeriodicSobolevKernel>(&kernel)) {
    const Matrix w = periodic_features(*k, points);
    g.selfadjointView<Eigen::Lower>().rankUpdate(w);
  } else {
    const auto& gk = std::get<GaussianKernel>(kernel);
    for (Index j = 0; j < n; ++j)
      for (Index i = j; i < n; ++i)
        g(i, j) = gaussian_eval(gk, points[static_cast<std::size_t>(i)],
                                points[static_cast<std::size_t>(j)]);
  }
  mirror_lower(g);
  return g;
}

Matrix cross_gram(const KernelSpec& kernel, std::span<const double> rows,
                  std::span<const double> cols) {
  validate(kernel);
  if (const auto* k = std::get_if<PeriodicSobolevKernel>(&kernel)) {
    if (rows.empty() || cols.empty())
      return Matrix(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
    return periodic_features(*k, rows) * periodic_features(*k, cols).transpose();
  }
  const auto& gk = std::get<GaussianKernel>(kernel);
  Matrix c(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (Index j = 0; j < c.cols(); ++j)
    for (Index i = 0; i < c.rows(); ++i)
      c(i, j) = gaussian_eval(gk, rows[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]);
  return c;
}

double kappa(const KernelSpec& kernel) {
  validate(kernel);
  // Both kernels are stationary, so the supremum is attained at x = y.
  return std::sqrt(eval(kernel, 0.0, 0.0));
}

std::string describe(const KernelSpec& kernel) {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const GaussianKernel& k) { os << "gaussian(bandwidth=" << k.bandwidth << ")"; },
                 [&](const PeriodicSobolevKernel& k) {
                   os << "periodic_sobolev(s=" << k.order << ", k_max=" << k.k_max << ")";
                 },
             },
             kernel);
  return os.str();
}

KernelSpec kernel_from_json(const nlohmann::json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "gaussian") return gaussian_kernel(j.at("bandwidth").get<double>());
    if (kind == "periodic_sobolev")
      return periodic_sobolev_kernel(j.at("s").get<int>(), j.value("k_max", 2000));
    throw ConfigError("unknown kernel kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("kernel spec: ") + e.what());
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("kernel spec: ") + e.what());
  }
}

nlohmann::json kernel_to_json(const KernelSpec& kernel) {
  return std::visit(overloaded{
                        [](const GaussianKernel& k) {
                          return nlohmann::json{{"kind", "gaussian"}, {"bandwidth", k.bandwidth}};
                        },
                        [](const PeriodicSobolevKernel& k) {
                          return nlohmann::json{{"kind", "periodic_sobolev"}, {"s", k.order}, {"k_max", k.k_max}};
                        },
                    },
                    kernel);
}

}  // namespace dackrr
