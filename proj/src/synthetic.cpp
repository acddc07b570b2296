#include "dackrr/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "dackrr/errors.hpp"
#include "dackrr/random.hpp"

namespace dackrr {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

double BasisFunction::operator()(double x) const {
  switch (kind) {
    case BasisKind::Constant:
      return 1.0;
    case BasisKind::Cosine:
      return std::numbers::sqrt2 * std::cos(kTwoPi * std::fmod(frequency * x, 1.0));
    case BasisKind::Sine:
      return std::numbers::sqrt2 * std::sin(kTwoPi * std::fmod(frequency * x, 1.0));
  }
  return 0.0;
}

Vector SpectralModel::eigenfunctions(double x) const {
  Vector e(dimension());
  for (Index l = 0; l < e.size(); ++l) e[l] = basis[static_cast<std::size_t>(l)](x);
  return e;
}

Vector SpectralModel::features(double x) const {
  return eigenvalues.cwiseSqrt().cwiseProduct(eigenfunctions(x));
}

Matrix SpectralModel::feature_matrix(std::span<const double> points) const {
  Matrix v(static_cast<Index>(points.size()), dimension());
  const Vector root = eigenvalues.cwiseSqrt();
  for (Index i = 0; i < v.rows(); ++i) {
    const double x = points[static_cast<std::size_t>(i)];
    for (Index l = 0; l < v.cols(); ++l) v(i, l) = root[l] * basis[static_cast<std::size_t>(l)](x);
  }
  return v;
}

SpectralModel make_spectral(const KernelSpec& kernel) {
  validate(kernel);
  const auto* k = std::get_if<PeriodicSobolevKernel>(&kernel);
  if (k == nullptr)
    throw ArgumentError("make_spectral: no closed-form eigensystem for " + describe(kernel));
  const Index d = 2 * static_cast<Index>(k->k_max) + 1;
  SpectralModel spec;
  spec.eigenvalues.resize(d);
  spec.basis.reserve(static_cast<std::size_t>(d));
  spec.eigenvalues[0] = 1.0;
  spec.basis.push_back({BasisKind::Constant, 0});
  for (int f = 1; f <= k->k_max; ++f) {
    const double mu = std::pow(static_cast<double>(f), -2.0 * k->order);
    spec.eigenvalues[2 * f - 1] = mu;
    spec.eigenvalues[2 * f] = mu;
    spec.basis.push_back({BasisKind::Cosine, f});
    spec.basis.push_back({BasisKind::Sine, f});
  }
  return spec;
}

SpectralModel make_spectral(Vector eigenvalues, std::vector<BasisFunction> basis) {
  if (eigenvalues.size() == 0 || static_cast<std::size_t>(eigenvalues.size()) != basis.size())
    throw ArgumentError("make_spectral: eigenvalue and basis sizes differ or are empty");
  for (Index l = 0; l < eigenvalues.size(); ++l) {
    if (!(eigenvalues[l] > 0.0)) throw ArgumentError("make_spectral: eigenvalues must be positive");
    if (l > 0 && eigenvalues[l] > eigenvalues[l - 1])
      throw ArgumentError("make_spectral: eigenvalues must be non-increasing");
  }
  return SpectralModel{std::move(eigenvalues), std::move(basis)};
}

TargetFunction make_target(const SpectralModel& spec, double r, const Vector& g) {
  if (!(r > 0.0 && r <= 1.0)) throw ArgumentError("source exponent r must lie in (0, 1]");
  if (g.size() != spec.dimension()) throw ArgumentError("make_target: g has wrong dimension");
  TargetFunction t;
  t.source_exponent = r;
  t.coefficients = spec.eigenvalues.array().pow(r).matrix().cwiseProduct(g);
  t.g_norm = g.norm();
  return t;
}

TargetFunction make_source_target(const SpectralModel& spec, double r, double decay,
                                  std::uint64_t seed) {
  if (!(decay > 0.5)) throw ArgumentError("make_source_target: decay must exceed 1/2");
  Vector g(spec.dimension());
  for (Index l = 0; l < g.size(); ++l) {
    const int f = std::max(1, spec.basis[static_cast<std::size_t>(l)].frequency);
    const double sign = ((static_cast<std::uint64_t>(l) + seed) % 2 == 0) ? 1.0 : -1.0;
    g[l] = sign * std::pow(static_cast<double>(f), -decay);
  }
  return make_target(spec, r, g);
}

double f_rho_eval(const TargetFunction& target, const SpectralModel& spec, double x) {
  double sum = 0.0;
  for (Index l = 0; l < target.coefficients.size(); ++l)
    sum += target.coefficients[l] * spec.basis[static_cast<std::size_t>(l)](x);
  return sum;
}

double rkhs_norm(const TargetFunction& target, const SpectralModel& spec) {
  return std::sqrt((target.coefficients.array().square() / spec.eigenvalues.array()).sum());
}

double sup_norm_bound(const TargetFunction& target) {
  return std::numbers::sqrt2 * target.coefficients.cwiseAbs().sum();
}

double noise_variance(const NoiseModel& noise, double x) {
  return std::visit(overloaded{
                        [](const BoundedUniformNoise& n) { return n.half_width * n.half_width / 3.0; },
                        [](const GaussianNoise& n) { return n.std_dev * n.std_dev; },
                        [x](const HeteroscedasticNoise& n) {
                          const double s = n.base_std * (1.0 + n.amplitude * std::cos(kTwoPi * x));
                          return s * s;
                        },
                    },
                    noise);
}

NoiseModel noise_from_json(const nlohmann::json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "bounded_uniform") {
      const double w = j.at("half_width").get<double>();
      if (!(w >= 0.0)) throw ConfigError("bounded_uniform half_width must be >= 0");
      return BoundedUniformNoise{w};
    }
    if (kind == "gaussian") {
      const double s = j.at("std").get<double>();
      if (!(s > 0.0)) throw ConfigError("gaussian noise std must be > 0");
      return GaussianNoise{s};
    }
    if (kind == "heteroscedastic") {
      HeteroscedasticNoise n{j.at("base_std").get<double>(), j.value("amplitude", 0.5)};
      if (!(n.base_std > 0.0) || !(std::abs(n.amplitude) < 1.0))
        throw ConfigError("heteroscedastic noise needs base_std > 0 and |amplitude| < 1");
      return n;
    }
    throw ConfigError("unknown noise kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("noise spec: ") + e.what());
  }
}

nlohmann::json noise_to_json(const NoiseModel& noise) {
  return std::visit(
      overloaded{
          [](const BoundedUniformNoise& n) {
            return nlohmann::json{{"kind", "bounded_uniform"}, {"half_width", n.half_width}};
          },
          [](const GaussianNoise& n) { return nlohmann::json{{"kind", "gaussian"}, {"std", n.std_dev}}; },
          [](const HeteroscedasticNoise& n) {
            return nlohmann::json{{"kind", "heteroscedastic"}, {"base_std", n.base_std}, {"amplitude", n.amplitude}};
          },
      },
      noise);
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.seed = seed;
  out.inputs.reserve(indices.size());
  out.outputs.reserve(indices.size());
  for (std::size_t i : indices) {
    out.inputs.push_back(inputs.at(i));
    out.outputs.push_back(outputs.at(i));
  }
  return out;
}

std::vector<double> uniform_points(std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = rng.uniform01();
  return x;
}

Dataset sample_dataset(const TargetFunction& target, const SpectralModel& spec,
                       const NoiseModel& noise, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ArgumentError("sample_dataset: N must be >= 1");
  if (target.coefficients.size() != spec.dimension())
    throw ArgumentError("sample_dataset: target and spectral model dimensions differ");
  Dataset data;
  data.seed = seed;
  data.inputs = uniform_points(n, derive_seed({seed, 0}));
  data.outputs.resize(n);
  CounterRng rng(derive_seed({seed, 1}));
  for (std::size_t i = 0; i < n; ++i) {
    const double x = data.inputs[i];
    const double f = f_rho_eval(target, spec, x);
    const double eps = std::visit(
        overloaded{
            [&](const BoundedUniformNoise& nm) { return nm.half_width * (2.0 * rng.uniform01() - 1.0); },
            [&](const GaussianNoise& nm) { return std::normal_distribution<double>(0.0, nm.std_dev)(rng); },
            [&](const HeteroscedasticNoise&) {
              return std::normal_distribution<double>(0.0, std::sqrt(noise_variance(noise, x)))(rng);
            },
        },
        noise);
    data.outputs[i] = f + eps;
  }
  return data;
}

void write_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "x,y\n";
  char buf[64];
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", data.inputs[i], data.outputs[i]);
    out << buf;
  }
  if (!out) throw IoError("write failed for " + path.string());
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("x,y", 0) != 0)
    throw IoError(path.string() + ": expected header 'x,y'");
  Dataset data;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw IoError(path.string() + ": malformed line " + std::to_string(lineno));
    try {
      data.inputs.push_back(std::stod(line.substr(0, comma)));
      data.outputs.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw IoError(path.string() + ": bad number on line " + std::to_string(lineno));
    }
  }
  if (data.size() == 0) throw IoError(path.string() + ": no data rows");
  return data;
}

}  // namespace dackrr
