#include "dackrr/krr.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include <json.hpp>

#include "dackrr/errors.hpp"

namespace dackrr {
namespace {

// Unblocked Cholesky, run only to report where the blocked factorization broke.
std::size_t first_bad_pivot(Matrix a) {
  const Index n = a.rows();
  for (Index k = 0; k < n; ++k) {
    const double pivot = a(k, k) - a.row(k).head(k).squaredNorm();
    if (!(pivot > 0.0)) return static_cast<std::size_t>(k);
    const double root = std::sqrt(pivot);
    a(k, k) = root;
    for (Index i = k + 1; i < n; ++i)
      a(i, k) = (a(i, k) - a.row(i).head(k).dot(a.row(k).head(k))) / root;
  }
  return static_cast<std::size_t>(n);
}

}  // namespace

Vector solve_regularized(const Matrix& gram, const Vector& rhs, double shift) {
  if (gram.rows() != gram.cols() || gram.rows() != rhs.size())
    throw ArgumentError("solve_regularized: dimension mismatch");
  if (!gram.allFinite() || !rhs.allFinite() || !std::isfinite(shift))
    throw NumericError("solve_regularized: non-finite input");
  Matrix a = gram;
  a.diagonal().array() += shift;
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    const std::size_t pivot = first_bad_pivot(std::move(a));
    throw NumericError("Cholesky factorization failed at pivot " + std::to_string(pivot) +
                           " (regularized Gram matrix is not positive definite)",
                       pivot);
  }
  return llt.solve(rhs);
}

KrrModel fit(const Dataset& data, double lambda, const KernelSpec& kernel) {
  if (data.size() == 0) throw ArgumentError("fit: empty dataset");
  if (data.outputs.size() != data.inputs.size()) throw ArgumentError("fit: inputs/outputs differ in length");
  const auto n = static_cast<double>(data.size());
  const Matrix g = gram(kernel, data.inputs);
  const Vector y = Eigen::Map<const Vector>(data.outputs.data(), static_cast<Index>(data.size()));
  return KrrModel{data.inputs, solve_regularized(g, y, n * lambda), lambda, kernel};
}

double predict(const KrrModel& model, double x) {
  double sum = 0.0;
  for (std::size_t i = 0; i < model.support.size(); ++i)
    sum += model.coefficients[static_cast<Index>(i)] * eval(model.kernel, model.support[i], x);
  return sum;
}

Vector predict(const KrrModel& model, std::span<const double> points) {
  if (model.support.empty()) return Vector::Zero(static_cast<Index>(points.size()));
  return cross_gram(model.kernel, points, model.support) * model.coefficients;
}

double objective(const KrrModel& model, const Dataset& data, const Vector& coefficients) {
  const Matrix g = gram(model.kernel, model.support);
  const Matrix c = cross_gram(model.kernel, data.inputs, model.support);
  const Vector y = Eigen::Map<const Vector>(data.outputs.data(), static_cast<Index>(data.size()));
  const double loss = (c * coefficients - y).squaredNorm() / static_cast<double>(data.size());
  return loss + model.lambda * coefficients.dot(g * coefficients);
}

double rkhs_norm_sq(const KrrModel& model) {
  if (model.support.empty()) return 0.0;
  const Matrix g = gram(model.kernel, model.support);
  return std::max(0.0, model.coefficients.dot(g * model.coefficients));
}

double rkhs_dist_sq(const KrrModel& a, const KrrModel& b) {
  if (!(a.kernel == b.kernel)) throw ArgumentError("rkhs_dist_sq: kernel mismatch");
  std::map<double, Index> slot;
  std::vector<double> points;
  std::vector<double> beta;
  auto add = [&](const KrrModel& m, double sign) {
    for (std::size_t i = 0; i < m.support.size(); ++i) {
      auto [it, inserted] = slot.try_emplace(m.support[i], static_cast<Index>(points.size()));
      if (inserted) {
        points.push_back(m.support[i]);
        beta.push_back(0.0);
      }
      beta[static_cast<std::size_t>(it->second)] += sign * m.coefficients[static_cast<Index>(i)];
    }
  };
  add(a, 1.0);
  add(b, -1.0);
  if (points.empty()) return 0.0;
  const Matrix g = gram(a.kernel, points);
  const Vector v = Eigen::Map<const Vector>(beta.data(), static_cast<Index>(beta.size()));
  return std::max(0.0, v.dot(g * v));
}

MonteCarloNorm rms_with_stderr(const Vector& differences) {
  const Index n = differences.size();
  if (n == 0) throw ArgumentError("rms_with_stderr: no samples");
  const Eigen::ArrayXd sq = differences.array().square();
  const double mean_sq = sq.mean();
  MonteCarloNorm out;
  out.value = std::sqrt(mean_sq);
  if (n > 1 && out.value > 0.0) {
    const double var = (sq - mean_sq).square().sum() / static_cast<double>(n - 1);
    out.std_error = std::sqrt(var / static_cast<double>(n)) / (2.0 * out.value);
  }
  return out;
}

MonteCarloNorm l2_dist_mc(const RealFunction& f, const RealFunction& g, std::size_t n_test,
                          std::uint64_t seed) {
  if (n_test == 0) throw ArgumentError("l2_dist_mc: n_test must be >= 1");
  const std::vector<double> t = uniform_points(n_test, seed);
  Vector diff(static_cast<Index>(n_test));
  for (std::size_t i = 0; i < n_test; ++i) diff[static_cast<Index>(i)] = f(t[i]) - g(t[i]);
  return rms_with_stderr(diff);
}

Matrix mercer_coefficients(const SpectralModel& spec, std::span<const double> support,
                           std::span<const Vector* const> coefficient_sets) {
  const Index k = static_cast<Index>(coefficient_sets.size());
  Matrix acc = Matrix::Zero(spec.dimension(), k);
  Matrix alphas(static_cast<Index>(support.size()), k);
  for (Index c = 0; c < k; ++c) {
    if (coefficient_sets[static_cast<std::size_t>(c)]->size() != alphas.rows())
      throw ArgumentError("mercer_coefficients: coefficient length differs from support size");
    alphas.col(c) = *coefficient_sets[static_cast<std::size_t>(c)];
  }
  for (std::size_t i = 0; i < support.size(); ++i)
    acc.noalias() += spec.eigenfunctions(support[i]) * alphas.row(static_cast<Index>(i));
  return spec.eigenvalues.asDiagonal() * acc;
}

Vector mercer_coefficients(const KrrModel& model, const SpectralModel& spec) {
  const Vector* sets[] = {&model.coefficients};
  return mercer_coefficients(spec, model.support, sets).col(0);
}

double eval_expansion(const SpectralModel& spec, const Vector& coordinates, double x) {
  return spec.eigenfunctions(x).dot(coordinates);
}

void write_model(const KrrModel& model, const std::filesystem::path& csv_path,
                 const std::filesystem::path& json_path) {
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw IoError("cannot open " + csv_path.string() + " for writing");
  csv << "x,alpha\n";
  char buf[64];
  for (std::size_t i = 0; i < model.support.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", model.support[i],
                  model.coefficients[static_cast<Index>(i)]);
    csv << buf;
  }
  std::ofstream js(json_path, std::ios::binary);
  if (!js) throw IoError("cannot open " + json_path.string() + " for writing");
  const nlohmann::json header{{"kernel", kernel_to_json(model.kernel)},
                              {"lambda", model.lambda},
                              {"N", model.support.size()}};
  js << header.dump(2) << "\n";
  if (!csv || !js) throw IoError("model write failed");
}

KrrModel read_model(const std::filesystem::path& csv_path, const std::filesystem::path& json_path) {
  std::ifstream js(json_path);
  if (!js) throw IoError("cannot open " + json_path.string());
  nlohmann::json header;
  try {
    js >> header;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(json_path.string() + ": " + e.what());
  }
  KrrModel model;
  model.kernel = kernel_from_json(header.at("kernel"));
  model.lambda = header.at("lambda").get<double>();
  std::ifstream csv(csv_path);
  if (!csv) throw IoError("cannot open " + csv_path.string());
  std::string line;
  std::getline(csv, line);
  std::vector<double> alpha;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw IoError(csv_path.string() + ": malformed row");
    model.support.push_back(std::stod(line.substr(0, comma)));
    alpha.push_back(std::stod(line.substr(comma + 1)));
  }
  model.coefficients = Eigen::Map<const Vector>(alpha.data(), static_cast<Index>(alpha.size()));
  if (model.support.size() != header.at("N").get<std::size_t>())
    throw IoError(csv_path.string() + ": row count does not match header N");
  return model;
}

}  // namespace dackrr
