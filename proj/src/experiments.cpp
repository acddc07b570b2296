#include "dackrr/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "dackrr/errors.hpp"
#include "dackrr/krr.hpp"
#include "dackrr/parallel.hpp"
#include "dackrr/random.hpp"

namespace dackrr {

LambdaRule parse_lambda_rule(const std::string& name) {
  if (name == "m_over_n") return LambdaRule::MOverN;
  if (name == "batch_minimax") return LambdaRule::BatchMinimax;
  if (name == "distributed_minimax") return LambdaRule::DistributedMinimax;
  if (name == "fixed") return LambdaRule::Fixed;
  throw ArgumentError("unknown lambda rule '" + name + "'");
}

std::string to_string(LambdaRule rule) {
  switch (rule) {
    case LambdaRule::MOverN: return "m_over_n";
    case LambdaRule::BatchMinimax: return "batch_minimax";
    case LambdaRule::DistributedMinimax: return "distributed_minimax";
    case LambdaRule::Fixed: return "fixed";
  }
  return "?";
}

double lambda_rule(LambdaRule rule, std::size_t n, std::size_t m, double alpha, double r,
                   double fixed_value) {
  if (!(alpha > 0.0)) throw ArgumentError("lambda_rule: alpha must be positive");
  if (!(r > 0.0 && r <= 1.0)) throw ArgumentError("lambda_rule: r must lie in (0, 1]");
  if (m < 1 || m > n) throw ArgumentError("lambda_rule: need 1 <= m <= N");
  const double nd = static_cast<double>(n);
  const double smooth = 2.0 * alpha * std::max(2.0 * r, 1.0) + 1.0;
  switch (rule) {
    case LambdaRule::MOverN:
      return std::pow(static_cast<double>(m) / nd, 2.0 * alpha / smooth);
    case LambdaRule::BatchMinimax:
      return std::pow(nd, -2.0 * alpha / smooth);
    case LambdaRule::DistributedMinimax:
      return std::pow(nd, -2.0 * alpha / (4.0 * alpha * r + 1.0));
    case LambdaRule::Fixed:
      if (!(fixed_value > 0.0)) throw ArgumentError("lambda_rule: fixed lambda must be positive");
      return fixed_value;
  }
  throw ArgumentError("lambda_rule: unknown rule");
}

MRestriction parse_m_restriction(const std::string& name) {
  if (name == "general") return MRestriction::General;
  if (name == "rkhs_target") return MRestriction::RkhsTarget;
  if (name == "distributed_minimax") return MRestriction::DistributedMinimax;
  throw ArgumentError("unknown m restriction '" + name + "'");
}

std::string to_string(MRestriction rule) {
  switch (rule) {
    case MRestriction::General: return "general";
    case MRestriction::RkhsTarget: return "rkhs_target";
    case MRestriction::DistributedMinimax: return "distributed_minimax";
  }
  return "?";
}

MLimit m_restriction(MRestriction rule, std::size_t n, double alpha, double r) {
  if (!(alpha > 0.0)) throw ArgumentError("m_restriction: alpha must be positive");
  if (!(r > 0.0 && r <= 1.0)) throw ArgumentError("m_restriction: r must lie in (0, 1]");
  if (n < 1) throw ArgumentError("m_restriction: N must be >= 1");
  MLimit out;
  switch (rule) {
    case MRestriction::General: {
      const double num = 1.0 + 2.0 * alpha * std::max(2.0 * r - 1.0, 0.0) + 2.0 * alpha * (2.0 * r - 1.0);
      const double den = 4.0 + 8.0 * alpha * std::max(2.0 * r, 1.0) - 4.0 * alpha + 4.0 * alpha * r;
      out.exponent = num / den;
      break;
    }
    case MRestriction::RkhsTarget:
      out.exponent = 1.0 / (4.0 + 6.0 * alpha);
      break;
    case MRestriction::DistributedMinimax: {
      const double den = 4.0 * alpha * r + 1.0;
      out.exponent = std::min((6.0 * alpha * (2.0 * r - 1.0) + 1.0) / (5.0 * den),
                              2.0 * alpha * (2.0 * r - 1.0) / den);
      break;
    }
  }
  if (out.exponent <= 0.0) {
    out.max_m = 1;
    out.warning = "m restriction exponent is non-positive; only m = 1 is admissible";
    return out;
  }
  // Guard against pow landing just below an exact integer.
  const double bound = std::pow(static_cast<double>(n), out.exponent);
  out.max_m = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(bound + 1e-9)));
  return out;
}

Metric parse_metric(const std::string& name) {
  if (name == "dist_vs_batch_rho") return Metric::DistVsBatchRho;
  if (name == "dist_vs_batch_k") return Metric::DistVsBatchK;
  if (name == "batch_vs_target_rho") return Metric::BatchVsTargetRho;
  if (name == "dist_vs_target_rho") return Metric::DistVsTargetRho;
  throw ArgumentError("unknown metric '" + name + "'");
}

std::string to_string(Metric metric) {
  switch (metric) {
    case Metric::DistVsBatchRho: return "dist_vs_batch_rho";
    case Metric::DistVsBatchK: return "dist_vs_batch_k";
    case Metric::BatchVsTargetRho: return "batch_vs_target_rho";
    case Metric::DistVsTargetRho: return "dist_vs_target_rho";
  }
  return "?";
}

std::vector<std::size_t> MRule::blocks_for(std::size_t n, double alpha, double r) const {
  switch (kind) {
    case Kind::Values:
      return values;
    case Kind::Exponent: {
      const double bound = std::pow(static_cast<double>(n), exponent);
      return {std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(bound + 1e-9)))};
    }
    case Kind::Restriction:
      return {m_restriction(restriction, n, alpha, r).max_m};
  }
  return {};
}

std::string MRule::label(std::size_t m) const {
  switch (kind) {
    case Kind::Values: return "m=" + std::to_string(m);
    case Kind::Exponent: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "m=floor(N^%g)", exponent);
      return buf;
    }
    case Kind::Restriction: return "m=" + to_string(restriction);
  }
  return "?";
}

void ExperimentConfig::validate() const {
  if (order < 1 || k_max < 1) throw ConfigError("kernel needs s >= 1 and k_max >= 1");
  if (!(r > 0.0 && r <= 1.0)) throw ConfigError("target r must lie in (0, 1]");
  if (!(decay > 0.5)) throw ConfigError("target decay must exceed 1/2");
  if (n_grid.empty()) throw ConfigError("N grid is empty");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 1) throw ConfigError("N grid entries must be >= 1");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) throw ConfigError("N grid must be strictly increasing");
  }
  if (trials < 3) throw ConfigError("trials R must be >= 3");
  if (n_test < 1) throw ConfigError("n_test must be >= 1");
  if (metrics.empty()) throw ConfigError("no metrics requested");
  if (m_rule.kind == MRule::Kind::Values && m_rule.values.empty()) throw ConfigError("m value list is empty");
  if (lambda == LambdaRule::Fixed && !(lambda_value > 0.0)) throw ConfigError("fixed lambda must be positive");
  if (!(decay_exponent() > 0.0)) throw ConfigError("alpha must be positive");
  for (std::size_t n : n_grid)
    for (std::size_t m : m_rule.blocks_for(n, decay_exponent(), r))
      if (m < 1 || m > n)
        throw ConfigError("m = " + std::to_string(m) + " is not admissible for N = " + std::to_string(n));
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    if (j.contains("kernel")) {
      const KernelSpec k = kernel_from_json(j.at("kernel"));
      const auto* p = std::get_if<PeriodicSobolevKernel>(&k);
      if (p == nullptr) throw ConfigError("rate experiments need a periodic_sobolev kernel");
      c.order = p->order;
      c.k_max = p->k_max;
    }
    if (j.contains("target")) {
      const auto& t = j.at("target");
      c.r = t.value("r", c.r);
      c.decay = t.value("decay", c.decay);
      c.target_seed = t.value("seed", c.target_seed);
    }
    if (j.contains("noise")) c.noise = noise_from_json(j.at("noise"));
    c.n_grid = j.at("N").get<std::vector<std::size_t>>();
    if (j.contains("m")) {
      const auto& m = j.at("m");
      if (m.is_array()) {
        c.m_rule.kind = MRule::Kind::Values;
        c.m_rule.values = m.get<std::vector<std::size_t>>();
      } else if (m.contains("values")) {
        c.m_rule.kind = MRule::Kind::Values;
        c.m_rule.values = m.at("values").get<std::vector<std::size_t>>();
      } else if (m.contains("exponent")) {
        c.m_rule.kind = MRule::Kind::Exponent;
        c.m_rule.exponent = m.at("exponent").get<double>();
      } else if (m.contains("restriction")) {
        c.m_rule.kind = MRule::Kind::Restriction;
        c.m_rule.restriction = parse_m_restriction(m.at("restriction").get<std::string>());
      } else {
        throw ConfigError("m must be a list or contain 'values', 'exponent' or 'restriction'");
      }
    }
    if (j.contains("lambda")) {
      const auto& l = j.at("lambda");
      c.lambda = parse_lambda_rule(l.at("rule").get<std::string>());
      c.lambda_value = l.value("value", 0.0);
      if (l.contains("alpha")) c.alpha = l.at("alpha").get<double>();
    }
    c.trials = j.value("trials", c.trials);
    c.n_test = j.value("n_test", c.n_test);
    c.seed = j.value("seed", c.seed);
    if (j.contains("metrics")) {
      c.metrics.clear();
      for (const auto& m : j.at("metrics")) c.metrics.push_back(parse_metric(m.get<std::string>()));
    }
    if (j.contains("partition")) {
      const std::string s = j.at("partition").get<std::string>();
      if (s == "contiguous") c.strategy = PartitionStrategy::Contiguous;
      else if (s == "shuffled") c.strategy = PartitionStrategy::Shuffled;
      else throw ConfigError("partition must be 'contiguous' or 'shuffled'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["kernel"] = kernel_to_json(PeriodicSobolevKernel{c.order, c.k_max});
  j["target"] = {{"r", c.r}, {"decay", c.decay}, {"seed", c.target_seed}};
  j["noise"] = noise_to_json(c.noise);
  j["N"] = c.n_grid;
  switch (c.m_rule.kind) {
    case MRule::Kind::Values: j["m"] = {{"values", c.m_rule.values}}; break;
    case MRule::Kind::Exponent: j["m"] = {{"exponent", c.m_rule.exponent}}; break;
    case MRule::Kind::Restriction: j["m"] = {{"restriction", to_string(c.m_rule.restriction)}}; break;
  }
  j["lambda"] = {{"rule", to_string(c.lambda)}};
  if (c.lambda == LambdaRule::Fixed) j["lambda"]["value"] = c.lambda_value;
  if (c.alpha) j["lambda"]["alpha"] = *c.alpha;
  j["trials"] = c.trials;
  j["n_test"] = c.n_test;
  j["seed"] = c.seed;
  j["metrics"] = nlohmann::json::array();
  for (Metric m : c.metrics) j["metrics"].push_back(to_string(m));
  j["partition"] = c.strategy == PartitionStrategy::Shuffled ? "shuffled" : "contiguous";
  return j;
}

SlopeFit fit_loglog_slope(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) throw ArgumentError("fit_loglog_slope: need at least 3 points");
  const double n = static_cast<double>(points.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0)) throw ArgumentError("fit_loglog_slope: values must be positive");
    sx += std::log(x);
    sy += std::log(y);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : points) {
    const double dx = std::log(x) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y) - my);
  }
  if (!(sxx > 0.0)) throw ArgumentError("fit_loglog_slope: x values must not all coincide");
  SlopeFit fit;
  fit.points = points.size();
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (const auto& [x, y] : points) {
    const double e = std::log(y) - (fit.intercept + fit.slope * std::log(x));
    sse += e * e;
  }
  fit.std_error = std::sqrt(sse / (n - 2.0) / sxx);
  return fit;
}

namespace {

struct Setup {
  const ExperimentConfig& config;
  KernelSpec kernel;
  SpectralModel spec;
  TargetFunction target;
  bool need_batch = false;
  bool need_dist = false;
  bool need_rho = false;
};

constexpr std::size_t kChunk = 256;

std::vector<double> run_trial(const Setup& s, std::size_t n, std::size_t m, double lambda,
                              std::size_t trial) {
  const ExperimentConfig& cfg = s.config;
  const std::uint64_t cell_seed = derive_seed({cfg.seed, n, m, trial});
  const Dataset data = sample_dataset(s.target, s.spec, cfg.noise, n, derive_seed({cell_seed, 0}));

  KrrModel batch;
  AveragedModel dist;
  std::vector<const Vector*> sets;
  if (s.need_batch) {
    batch = fit(data, lambda, s.kernel);
    sets.push_back(&batch.coefficients);
  }
  if (s.need_dist) {
    const Partition part = partition(n, m, cfg.strategy, derive_seed({cell_seed, 1}));
    dist = fit_distributed(data, part, lambda, s.kernel, 1);
    sets.push_back(&dist.global.coefficients);
  }
  const Matrix coords = mercer_coefficients(s.spec, data.inputs, sets);
  const Index batch_col = 0;
  const Index dist_col = s.need_batch ? 1 : 0;

  // One difference vector (in L2 eigen-coordinates) per requested metric.
  Matrix diffs(s.spec.dimension(), static_cast<Index>(cfg.metrics.size()));
  for (std::size_t k = 0; k < cfg.metrics.size(); ++k) {
    const auto c = static_cast<Index>(k);
    switch (cfg.metrics[k]) {
      case Metric::DistVsBatchRho:
      case Metric::DistVsBatchK:
        diffs.col(c) = coords.col(dist_col) - coords.col(batch_col);
        break;
      case Metric::BatchVsTargetRho:
        diffs.col(c) = coords.col(batch_col) - s.target.coefficients;
        break;
      case Metric::DistVsTargetRho:
        diffs.col(c) = coords.col(dist_col) - s.target.coefficients;
        break;
    }
  }

  std::vector<double> out(cfg.metrics.size(), 0.0);
  if (s.need_rho) {
    const std::vector<double> t = uniform_points(cfg.n_test, derive_seed({cell_seed, 2}));
    Eigen::ArrayXd sum_sq = Eigen::ArrayXd::Zero(diffs.cols());
    Matrix chunk;
    for (std::size_t start = 0; start < t.size(); start += kChunk) {
      const std::size_t rows = std::min(kChunk, t.size() - start);
      chunk.resize(static_cast<Index>(rows), s.spec.dimension());
      for (std::size_t i = 0; i < rows; ++i)
        chunk.row(static_cast<Index>(i)) = s.spec.eigenfunctions(t[start + i]).transpose();
      sum_sq += (chunk * diffs).array().square().colwise().sum().transpose();
    }
    for (std::size_t k = 0; k < cfg.metrics.size(); ++k)
      out[k] = std::sqrt(sum_sq[static_cast<Index>(k)] / static_cast<double>(t.size()));
  }
  for (std::size_t k = 0; k < cfg.metrics.size(); ++k)
    if (cfg.metrics[k] == Metric::DistVsBatchK)
      out[k] = std::sqrt((diffs.col(static_cast<Index>(k)).array().square() / s.spec.eigenvalues.array()).sum());
  return out;
}

}  // namespace

RateResult run_rate_experiment(const ExperimentConfig& config, unsigned workers, TrialTable* table,
                               const ProgressFn& progress) {
  config.validate();
  Setup s{config, periodic_sobolev_kernel(config.order, config.k_max), {}, {}};
  s.spec = make_spectral(s.kernel);
  s.target = make_source_target(s.spec, config.r, config.decay, config.target_seed);
  for (Metric m : config.metrics) {
    s.need_batch |= m != Metric::DistVsTargetRho;
    s.need_dist |= m != Metric::BatchVsTargetRho;
    s.need_rho |= m != Metric::DistVsBatchK;
  }

  const double alpha = config.decay_exponent();
  TrialTable local;
  TrialTable& tab = table ? *table : local;
  tab.cells.clear();
  for (std::size_t n : config.n_grid)
    for (std::size_t m : config.m_rule.blocks_for(n, alpha, config.r)) {
      TrialTable::Cell cell;
      cell.n = n;
      cell.m = m;
      cell.lambda = lambda_rule(config.lambda, n, m, alpha, config.r, config.lambda_value);
      cell.values.resize(config.trials);
      tab.cells.push_back(std::move(cell));
    }

  const std::size_t total = tab.cells.size() * config.trials;
  std::mutex progress_mutex;
  std::size_t done = 0;
  parallel_for(total, workers, [&](std::size_t job) {
    auto& cell = tab.cells[job / config.trials];
    const std::size_t trial = job % config.trials;
    try {
      cell.values[trial] = run_trial(s, cell.n, cell.m, cell.lambda, trial);
    } catch (const NumericError& e) {
      throw NumericError("trial (N=" + std::to_string(cell.n) + ", m=" + std::to_string(cell.m) +
                             ", t=" + std::to_string(trial) + "): " + e.what(),
                         e.pivot(), e.block());
    }
    if (progress) {
      std::lock_guard lock(progress_mutex);
      progress(++done, total);
    }
  });

  RateResult result;
  const double r_count = static_cast<double>(config.trials);
  for (const auto& cell : tab.cells) {
    for (std::size_t k = 0; k < config.metrics.size(); ++k) {
      double sum = 0.0;
      for (const auto& v : cell.values) sum += v[k];
      const double mean = sum / r_count;
      double ss = 0.0;
      for (const auto& v : cell.values) ss += (v[k] - mean) * (v[k] - mean);
      RateRow row;
      row.n = cell.n;
      row.m = cell.m;
      row.lambda = cell.lambda;
      row.metric = to_string(config.metrics[k]);
      row.mean = mean;
      row.std_error = std::sqrt(ss / (r_count - 1.0) / r_count);
      row.trials = config.trials;
      result.rows.push_back(row);
    }
  }

  // Slopes against N, one per (metric, m-rule group).
  std::map<std::pair<std::string, std::string>, std::vector<std::pair<double, double>>> groups;
  std::vector<std::pair<std::string, std::string>> order;
  for (const auto& row : result.rows) {
    const std::size_t m_key = config.m_rule.kind == MRule::Kind::Values ? row.m : 0;
    auto key = std::make_pair(row.metric, config.m_rule.label(m_key == 0 ? row.m : m_key));
    if (!groups.count(key)) order.push_back(key);
    groups[key].emplace_back(static_cast<double>(row.n), row.mean);
  }
  for (const auto& key : order) {
    const auto& pts = groups[key];
    if (pts.size() < 3) continue;
    if (std::any_of(pts.begin(), pts.end(), [](const auto& p) { return !(p.second > 0.0); })) continue;
    result.fits.push_back(RateFit{key.first, key.second, fit_loglog_slope(pts)});
  }
  return result;
}

}  // namespace dackrr
