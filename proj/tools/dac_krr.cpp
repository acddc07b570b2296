// dac-krr: command-line front end for the dackrr library.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dackrr/distributed.hpp"
#include "dackrr/errors.hpp"
#include "dackrr/experiments.hpp"
#include "dackrr/krr.hpp"
#include "dackrr/lemma_suite.hpp"
#include "dackrr/operator_lab.hpp"
#include "dackrr/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dackrr;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitAssertion = 4;

json load_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

/// Accepts inline JSON or a path to a JSON file.
json json_arg(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      return json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("inline JSON: ") + e.what());
    }
  }
  return load_json(text);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

template <typename T>
T get_field(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing config field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

PartitionStrategy parse_strategy(const std::string& s) {
  if (s == "contiguous") return PartitionStrategy::Contiguous;
  if (s == "shuffled") return PartitionStrategy::Shuffled;
  throw ConfigError("strategy must be 'contiguous' or 'shuffled', got '" + s + "'");
}

struct Problem {
  KernelSpec kernel;
  double lambda = 0.0;
  Dataset data;
  bool synthetic = false;
  std::optional<SpectralModel> spec;
  std::optional<TargetFunction> target;
};

/// Reads kernel, lambda and either a data CSV or a synthetic-data block.
Problem load_problem(const json& j, const fs::path& base) {
  Problem p;
  p.kernel = kernel_from_json(get_field<json>(j, "kernel"));
  p.lambda = get_field<double>(j, "lambda");
  if (j.contains("data")) {
    fs::path path = get_field<std::string>(j, "data");
    if (path.is_relative()) path = base / path;
    p.data = read_dataset_csv(path);
  } else if (j.contains("synthetic")) {
    const json& s = j.at("synthetic");
    if (!std::holds_alternative<PeriodicSobolevKernel>(p.kernel))
      throw ConfigError("synthetic data needs a periodic_sobolev kernel");
    p.spec = make_spectral(p.kernel);
    try {
      p.target = make_source_target(*p.spec, s.value("r", 0.5), s.value("decay", 1.0),
                                    s.value<std::uint64_t>("target_seed", 7));
      const NoiseModel noise = s.contains("noise") ? noise_from_json(s.at("noise")) : NoiseModel{GaussianNoise{0.1}};
      p.data = sample_dataset(*p.target, *p.spec, noise, get_field<std::size_t>(s, "N"),
                              s.value<std::uint64_t>("seed", 1));
    } catch (const ArgumentError& e) {
      throw ConfigError(std::string("synthetic block: ") + e.what());
    }
    p.synthetic = true;
  } else {
    throw ConfigError("config needs either 'data' (CSV path) or 'synthetic'");
  }
  return p;
}

json model_summary(const KrrModel& model, const Problem& p) {
  json s;
  s["N"] = model.support.size();
  s["lambda"] = model.lambda;
  s["kernel"] = kernel_to_json(model.kernel);
  s["rkhs_norm"] = std::sqrt(std::max(0.0, rkhs_norm_sq(model)));
  if (p.spec && p.target) {
    const Vector a = mercer_coefficients(model, *p.spec);
    s["rho_error_vs_target"] = (a - p.target->coefficients).norm();
  }
  return s;
}

int cmd_solve(const fs::path& config_path, const fs::path& out) {
  const json j = load_json(config_path);
  const Problem p = load_problem(j, config_path.parent_path());
  ensure_dir(out);
  const KrrModel model = fit(p.data, p.lambda, p.kernel);
  write_model(model, out / "model.csv", out / "model.json");
  if (p.synthetic) write_dataset_csv(p.data, out / "data.csv");
  json s = model_summary(model, p);
  s["objective"] = objective(model, p.data, model.coefficients);
  write_text(out / "summary.json", s.dump(2) + "\n");
  std::cout << s.dump(2) << "\n";
  return kExitOk;
}

int write_distributed(const Problem& p, std::size_t m, PartitionStrategy strategy, std::uint64_t seed,
                      unsigned workers, const fs::path& csv, const fs::path& header, const fs::path* dir) {
  Partition part;
  try {
    part = partition(p.data.size(), m, strategy, seed);
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  const AveragedModel avg = fit_distributed(p.data, part, p.lambda, p.kernel, workers);
  write_model(avg.global, csv, header);

  // Extend the header with the partition description.
  json h = load_json(header);
  h["m"] = m;
  h["strategy"] = strategy == PartitionStrategy::Shuffled ? "shuffled" : "contiguous";
  h["seed"] = seed;
  std::vector<std::size_t> sizes;
  for (const auto& b : part.blocks) sizes.push_back(b.size());
  h["block_sizes"] = sizes;
  write_text(header, h.dump(2) + "\n");

  if (dir != nullptr) {
    const KrrModel batch = fit(p.data, p.lambda, p.kernel);
    json s = model_summary(avg.global, p);
    s["m"] = m;
    s["k_dist_to_batch"] = std::sqrt(std::max(0.0, rkhs_dist_sq(avg.global, batch)));
    if (p.synthetic) write_dataset_csv(p.data, *dir / "data.csv");
    write_text(*dir / "summary.json", s.dump(2) + "\n");
    std::cout << s.dump(2) << "\n";
  }
  return kExitOk;
}

int cmd_distribute_config(const fs::path& config_path, const fs::path& out, unsigned workers) {
  const json j = load_json(config_path);
  const Problem p = load_problem(j, config_path.parent_path());
  ensure_dir(out);
  return write_distributed(p, get_field<std::size_t>(j, "m"),
                           parse_strategy(j.value("strategy", std::string("contiguous"))),
                           j.value<std::uint64_t>("seed", 0), workers, out / "model.csv", out / "model.json", &out);
}

int cmd_distribute_flags(const fs::path& data, std::size_t m, double lambda, const std::string& kernel,
                         const std::string& strategy, std::uint64_t seed, const fs::path& out, unsigned workers) {
  Problem p;
  p.kernel = kernel_from_json(json_arg(kernel));
  p.lambda = lambda;
  p.data = read_dataset_csv(data);
  fs::path header = out;
  header.replace_extension(".json");
  if (out.has_parent_path()) ensure_dir(out.parent_path());
  return write_distributed(p, m, parse_strategy(strategy), seed, workers, out, header, nullptr);
}

int cmd_effdim(const fs::path& config_path, const fs::path& out) {
  const json j = load_json(config_path);
  const KernelSpec kernel = kernel_from_json(get_field<json>(j, "kernel"));
  std::vector<double> lambdas;
  if (j.contains("lambdas")) {
    lambdas = get_field<std::vector<double>>(j, "lambdas");
  } else if (j.contains("lambda_grid")) {
    const json& g = j.at("lambda_grid");
    const double lo = get_field<double>(g, "min"), hi = get_field<double>(g, "max");
    const int points = get_field<int>(g, "points");
    if (!(lo > 0.0 && hi > lo) || points < 2) throw ConfigError("lambda_grid needs 0 < min < max and points >= 2");
    for (int k = 0; k < points; ++k) lambdas.push_back(lo * std::pow(hi / lo, k / double(points - 1)));
  } else {
    throw ConfigError("effdim config needs 'lambdas' or 'lambda_grid'");
  }
  for (double l : lambdas)
    if (!(l > 0.0)) throw ConfigError("lambda values must be positive");

  const bool spectral = std::holds_alternative<PeriodicSobolevKernel>(kernel);
  std::optional<SpectralModel> spec;
  if (spectral) spec = make_spectral(kernel);
  std::optional<Matrix> g;
  std::size_t n = 0;
  if (j.contains("N")) {
    n = get_field<std::size_t>(j, "N");
    if (n < 1) throw ConfigError("N must be >= 1");
    g = gram(kernel, uniform_points(n, j.value<std::uint64_t>("seed", 1)));
  }
  if (!spectral && !g) throw ConfigError("a gaussian kernel has no spectral effective dimension; set N");

  ensure_dir(out);
  std::string csv = "lambda,spectral,empirical\n";
  std::vector<std::pair<double, double>> pts;
  for (double l : lambdas) {
    const double s = spectral ? effective_dimension_spectral(*spec, l) : NAN;
    const double e = g ? effective_dimension_empirical(*g, n, l) : NAN;
    csv += format_double(l) + ',' + (spectral ? format_double(s) : "") + ',' + (g ? format_double(e) : "") + '\n';
    pts.emplace_back(l, spectral ? s : e);
  }
  write_text(out / "effdim.csv", csv);
  json summary;
  summary["kernel"] = kernel_to_json(kernel);
  if (spectral) summary["trace"] = spec->trace();
  summary["kappa"] = kappa(kernel);
  if (pts.size() >= 3) {
    const SlopeFit fit = fit_loglog_slope(pts);
    summary["loglog_slope"] = fit.slope;
    summary["loglog_slope_stderr"] = fit.std_error;
  }
  write_text(out / "summary.json", summary.dump(2) + "\n");
  std::cout << csv;
  return kExitOk;
}

int cmd_verify(const fs::path& config_path, const fs::path& out, unsigned workers) {
  const LemmaSuiteConfig cfg = lemma_config_from_json(load_json(config_path));
  ensure_dir(out);
  const auto checks = run_lemma_suite(cfg, workers);
  const std::string csv = lemma_csv(checks);
  write_text(out / "lemmas.csv", csv);
  bool ok = true;
  for (const auto& c : checks) {
    std::printf("%-4s %-40s %-12.6g %s %.6g\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value,
                c.relation.c_str(), c.threshold);
    ok = ok && c.pass;
  }
  return ok ? kExitOk : kExitAssertion;
}

int cmd_rate(const fs::path& config_path, const fs::path& out, unsigned workers, bool quiet) {
  const ExperimentConfig cfg = config_from_json(load_json(config_path));
  ensure_dir(out);
  ProgressFn progress;
  if (!quiet) {
    progress = [](std::size_t done, std::size_t total) {
      if (done == total || done % std::max<std::size_t>(1, total / 20) == 0)
        std::fprintf(stderr, "\r%zu/%zu trials", done, total);
      if (done == total) std::fprintf(stderr, "\n");
    };
  }
  const RateResult result = run_rate_experiment(cfg, workers, nullptr, progress);
  emit(result, EmitFormat::Csv, out / "rates.csv");
  emit(result, EmitFormat::Svg, out / "rates.svg");
  write_text(out / "slopes.csv", slopes_csv(result));
  write_text(out / "config.json", config_to_json(cfg).dump(2) + "\n");
  std::cout << rate_csv(result) << slopes_csv(result);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Divide-and-conquer kernel ridge regression toolkit"};
  app.require_subcommand(1);

  std::string config, out, data, kernel, strategy = "contiguous";
  unsigned workers = 1;
  std::size_t m = 0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  bool quiet = false;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", config, "JSON config file");
    if (config_required) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory")->required();
    sub->add_option("--workers", workers, "worker threads (results do not depend on it)")
        ->check(CLI::Range(1u, 1024u));
  };

  auto* solve = app.add_subcommand("solve", "fit a single-machine KRR model");
  add_common(solve, true);
  auto* dist = app.add_subcommand("distribute", "fit the averaged divide-and-conquer estimator");
  add_common(dist, false);
  dist->add_option("--data", data, "dataset CSV (x,y)");
  dist->add_option("--m", m, "number of blocks");
  dist->add_option("--lambda", lambda, "regularization parameter");
  dist->add_option("--kernel", kernel, "kernel JSON (inline or file)");
  dist->add_option("--strategy", strategy, "contiguous or shuffled");
  dist->add_option("--seed", seed, "partition seed");
  auto* effdim = app.add_subcommand("effdim", "spectral and empirical effective dimension");
  add_common(effdim, true);
  auto* verify = app.add_subcommand("verify-lemmas", "run the operator identity and concentration checks");
  add_common(verify, true);
  auto* rate = app.add_subcommand("rate-experiment", "run a rate experiment and fit log-log slopes");
  add_common(rate, true);
  rate->add_flag("--quiet", quiet, "no progress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (solve->parsed()) return cmd_solve(config, out);
    if (dist->parsed()) {
      if (!config.empty()) return cmd_distribute_config(config, out, workers);
      if (data.empty() || m == 0 || kernel.empty() || !dist->count("--lambda"))
        throw ConfigError("distribute needs --config, or --data, --m, --lambda and --kernel");
      return cmd_distribute_flags(data, m, lambda, kernel, strategy, seed, out, workers);
    }
    if (effdim->parsed()) return cmd_effdim(config, out);
    if (verify->parsed()) return cmd_verify(config, out, workers);
    if (rate->parsed()) return cmd_rate(config, out, workers, quiet);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ArgumentError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOther;
  }
  return kExitOther;
}
