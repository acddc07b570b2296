// Acceptance checks 1-10. Prints one PASS/FAIL line per criterion and exits
// non-zero when any of them fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "dackrr/distributed.hpp"
#include "dackrr/experiments.hpp"
#include "dackrr/operator_lab.hpp"
#include "dackrr/random.hpp"
#include "dackrr/report.hpp"

using namespace dackrr;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

unsigned g_workers = 1;
std::string g_cli;

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Matrix random_spd(int n, double shift, std::uint64_t seed) {
  CounterRng rng(seed);
  std::normal_distribution<double> normal;
  Matrix x(n, n);
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
  Matrix a = x * x.transpose() / n;
  a.diagonal().array() += shift;
  return a;
}

Outcome m1_equivalence() {
  double worst = 0.0;
  for (std::uint64_t c = 0; c < 10; ++c) {
    CounterRng rng(derive_seed({101, c}));
    const std::size_t n = 50 + static_cast<std::size_t>(rng.uniform01() * 350);
    const double lambda = std::pow(10.0, -5.0 + 4.0 * rng.uniform01());
    const KernelSpec kernel = c % 3 == 2 ? gaussian_kernel(0.05 + 0.3 * rng.uniform01())
                                         : periodic_sobolev_kernel(1 + int(c % 2), 100 + 100 * int(c % 4));
    const SpectralModel spec = make_spectral(periodic_sobolev_kernel(1, 100));
    const TargetFunction target = make_source_target(spec, 0.5, 1.0, c);
    const Dataset data = sample_dataset(target, spec, GaussianNoise{0.5}, n, derive_seed({102, c}));
    const auto strategy = c % 2 ? PartitionStrategy::Shuffled : PartitionStrategy::Contiguous;
    const KrrModel batch = fit(data, lambda, kernel);
    const AveragedModel avg = fit_distributed(data, partition(n, 1, strategy, c), lambda, kernel, g_workers);
    const double dist = std::sqrt(std::max(0.0, rkhs_dist_sq(avg.global, batch)));
    worst = std::max(worst, dist / std::max(1.0, std::sqrt(rkhs_norm_sq(batch))));
  }
  return {worst <= 1e-10, "max ||fbar - f||_K / max(1, ||f||_K) = " + fmt("%.3g", worst) + " (<= 1e-10)"};
}

Outcome second_order() {
  double worst = 0.0;
  for (std::uint64_t p = 0; p < 100; ++p)
    worst = std::max(worst, second_order_residual(random_spd(50, 0.1, derive_seed({201, p, 0})),
                                                  random_spd(50, 0.1, derive_seed({201, p, 1}))));
  return {worst <= 1e-10, "max residual over 100 SPD pairs = " + fmt("%.3g", worst) + " (<= 1e-10)"};
}

Outcome representation() {
  const KernelSpec kernel = periodic_sobolev_kernel(1, 30);
  const SpectralModel spec = make_spectral(kernel);
  const std::size_t ms[] = {2, 3, 5};
  const double lambdas[] = {0.1, 0.01, 0.001};
  double worst = 0.0;
  for (std::uint64_t c = 0; c < 20; ++c) {
    const TargetFunction target = make_source_target(spec, c % 2 ? 1.0 : 0.5, 0.75 + 0.25 * (c % 3), c);
    const Dataset data = sample_dataset(target, spec, BoundedUniformNoise{0.5}, 60, derive_seed({301, c}));
    const auto strategy = c % 2 ? PartitionStrategy::Shuffled : PartitionStrategy::Contiguous;
    const RepresentationCheck r = verify_difference_representation(
        data, partition(60, ms[c % 3], strategy, c), lambdas[(c / 3) % 3], kernel, target, spec);
    worst = std::max(worst, r.discrepancy());
  }
  return {worst <= 1e-8, "max discrepancy over 20 configs = " + fmt("%.3g", worst) + " (<= 1e-8)"};
}

Outcome effective_dimension() {
  const KernelSpec kernel = periodic_sobolev_kernel(1, 2000);
  const SpectralModel spec = make_spectral(kernel);
  const Matrix g = gram(kernel, uniform_points(2000, 401));
  bool ok = true;
  std::string detail = "rel gaps";
  for (double lambda : {1e-1, 1e-2, 1e-3}) {
    const double exact = effective_dimension_spectral(spec, lambda);
    const double gap = std::abs(effective_dimension_empirical(g, 2000, lambda) - exact) / exact;
    ok = ok && gap <= 0.10;
    detail += " " + fmt("%.4f", gap);
  }
  std::vector<std::pair<double, double>> pts;
  for (int k = 0; k <= 20; ++k) {
    const double lambda = std::pow(10.0, -4.0 + 0.1 * k);
    pts.emplace_back(lambda, effective_dimension_spectral(spec, lambda));
  }
  const double slope = fit_loglog_slope(pts).slope;
  ok = ok && std::abs(slope + 0.5) <= 0.05;
  return {ok, detail + " (<= 0.10); slope " + fmt("%.4f", slope) + " (-0.5 +- 0.05)"};
}

Outcome approximation() {
  const SpectralModel spec = make_spectral(periodic_sobolev_kernel(1, 2000));
  double worst_rho = 0.0, worst_k = 0.0;
  for (double r : {0.5, 1.0}) {
    const TargetFunction target = make_source_target(spec, r, 1.0, 7);
    for (int k = 0; k < 20; ++k) {
      const double lambda = std::pow(10.0, -4.0 + 3.0 * k / 19.0);
      worst_rho = std::max(worst_rho, approximation_error(spec, target, lambda) / (std::pow(lambda, r) * target.g_norm));
      worst_k = std::max(worst_k, approximation_error_rkhs(spec, target, lambda) /
                                      (std::pow(lambda, r - 0.5) * target.g_norm));
    }
  }
  return {worst_rho <= 1.0 && worst_k <= 1.0,
          "max error/bound rho " + fmt("%.4f", worst_rho) + ", K " + fmt("%.4f", worst_k) + " (<= 1)"};
}

ExperimentConfig base_config() {
  ExperimentConfig c;
  c.order = 1;
  c.k_max = 2000;
  c.decay = 1.0;
  c.target_seed = 7;
  c.noise = BoundedUniformNoise{1.0};
  c.n_test = 4096;
  c.seed = 1;
  return c;
}

ProgressFn progress_line(const char* tag) {
  return [tag](std::size_t done, std::size_t total) {
    if (done % std::max<std::size_t>(1, total / 10) == 0 || done == total)
      std::fprintf(stderr, "  [%s] %zu/%zu trials\n", tag, done, total);
  };
}

Outcome batch_minimax_rate() {
  ExperimentConfig c = base_config();
  c.r = 0.5;
  c.n_grid = {256, 512, 1024, 2048, 4096};
  c.m_rule.values = {1};
  c.lambda = LambdaRule::BatchMinimax;
  c.trials = 20;
  c.metrics = {Metric::BatchVsTargetRho};
  const RateResult r = run_rate_experiment(c, g_workers, nullptr, progress_line("6"));
  const double slope = r.fits.at(0).fit.slope;
  std::string means;
  for (const auto& row : r.rows) means += " " + fmt("%.4g", row.mean);
  return {std::abs(slope + 1.0 / 3.0) <= 0.08,
          "slope " + fmt("%.4f", slope) + " +- " + fmt("%.3f", r.fits[0].fit.std_error) + " (-1/3 +- 0.08); means" + means};
}

Outcome monotone_in_m() {
  ExperimentConfig c = base_config();
  c.r = 0.5;
  c.n_grid = {2048};
  c.m_rule.values = {2, 4, 8, 16};
  c.lambda = LambdaRule::MOverN;
  c.trials = 30;
  c.metrics = {Metric::DistVsBatchRho, Metric::DistVsBatchK};
  const RateResult r = run_rate_experiment(c, g_workers, nullptr, progress_line("7"));
  std::vector<RateRow> rho, k;
  for (const auto& row : r.rows) (row.metric == "dist_vs_batch_rho" ? rho : k).push_back(row);
  bool strict = true, within = true;
  std::string detail = "rho means";
  for (const auto& row : rho) detail += " " + fmt("%.4g", row.mean);
  detail += "; gaps/pooled-se";
  for (std::size_t i = 1; i < rho.size(); ++i) {
    const double gap = rho[i - 1].mean - rho[i].mean;
    const double pooled = std::hypot(rho[i - 1].std_error, rho[i].std_error);
    strict = strict && gap > 0.0;
    within = within && gap > -2.0 * pooled;
    detail += " " + fmt("%.2f", gap / pooled);
  }
  detail += strict ? " (strictly decreasing)" : " (not strictly decreasing)";
  detail += "; K means (reported only)";
  for (const auto& row : k) detail += " " + fmt("%.4g", row.mean);
  return {strict && within, detail};
}

Outcome distributed_minimax_rate() {
  ExperimentConfig c = base_config();
  c.r = 1.0;
  c.n_grid = {512, 1024, 2048, 4096};
  c.m_rule.kind = MRule::Kind::Restriction;
  c.m_rule.restriction = MRestriction::DistributedMinimax;
  c.lambda = LambdaRule::DistributedMinimax;
  c.trials = 20;
  c.metrics = {Metric::DistVsTargetRho};
  const RateResult r = run_rate_experiment(c, g_workers, nullptr, progress_line("8"));
  const double slope = r.fits.at(0).fit.slope;
  std::string ms;
  for (const auto& row : r.rows) ms += " " + std::to_string(row.m);
  return {std::abs(slope + 0.4) <= 0.10,
          "m =" + ms + "; slope " + fmt("%.4f", slope) + " +- " + fmt("%.3f", r.fits[0].fit.std_error) + " (-0.4 +- 0.10)"};
}

Outcome concentration() {
  const int k_max = 100;
  const SpectralModel spec = make_spectral(periodic_sobolev_kernel(1, k_max));
  Vector mu(k_max + 1);
  std::vector<BasisFunction> basis{{BasisKind::Constant, 0}};
  mu[0] = 1.0;
  for (int k = 1; k <= k_max; ++k) {
    mu[k] = 1.0 / (double(k) * k);
    basis.push_back({BasisKind::Cosine, k});
  }
  const SpectralModel cosines = make_spectral(mu, basis);

  bool ok = true;
  double worst_ratio = 0.0, worst_z = 0.0, worst_exact = 0.0;
  std::uint64_t s = 0;
  for (double lambda : {1e-3, 1e-2, 1e-1}) {
    for (std::size_t n : {100u, 500u, 2000u}) {
      for (const SpectralModel* m : {&spec, &cosines}) {
        const ConcentrationReport rep = concentration_check(*m, lambda, n, 500, 0.05, derive_seed({901, s++}), g_workers);
        ok = ok && rep.a_holds_hs();
        worst_ratio = std::max(worst_ratio, rep.hs_sq_mean / rep.bound_a);
      }
    }
    // The periodic model has a constant integrand, so its mean must be exact
    // up to summation round-off; the cosine model is a genuine MC check.
    const MonteCarloMean per = kx_norm_sq_mc(spec, lambda, 100000, derive_seed({902, s++}));
    const double exact = effective_dimension_spectral(spec, lambda);
    worst_exact = std::max(worst_exact, std::abs(per.mean - exact) / exact);
    ok = ok && std::abs(per.mean - exact) <= std::max(3.0 * per.std_error, 1e-10 * exact);
    const MonteCarloMean cos = kx_norm_sq_mc(cosines, lambda, 100000, derive_seed({902, s++}));
    const double z = std::abs(cos.mean - effective_dimension_spectral(cosines, lambda)) / cos.std_error;
    worst_z = std::max(worst_z, z);
    ok = ok && z <= 3.0;
  }
  return {ok, "max HS^2 mean / bound " + fmt("%.3f", worst_ratio) + " (<= 1); Kx-norm |z| max " + fmt("%.2f", worst_z) +
                  " (<= 3), periodic rel gap " + fmt("%.2g", worst_exact)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  if (g_cli.empty() || !fs::exists(g_cli)) return {false, "dac-krr binary not found (pass --cli)"};
  const fs::path dir = fs::temp_directory_path() / "dackrr_acceptance_10";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path cfg = dir / "config.json";
  std::ofstream(cfg) << R"({
  "kernel": {"kind": "periodic_sobolev", "s": 1, "k_max": 300},
  "target": {"r": 0.5, "decay": 1, "seed": 7},
  "noise": {"kind": "bounded_uniform", "half_width": 1.0},
  "N": [128, 256, 512],
  "m": {"values": [1, 2, 4]},
  "lambda": {"rule": "m_over_n"},
  "trials": 5,
  "n_test": 1024,
  "seed": 3,
  "partition": "shuffled",
  "metrics": ["dist_vs_batch_rho", "dist_vs_batch_k", "batch_vs_target_rho", "dist_vs_target_rho"]
})";
  std::string csv[2];
  const unsigned workers[2] = {1, 4};
  for (int i = 0; i < 2; ++i) {
    const fs::path out = dir / ("run" + std::to_string(i));
    const std::string cmd = "\"" + g_cli + "\" rate-experiment --quiet --config \"" + cfg.string() + "\" --out \"" +
                            out.string() + "\" --workers " + std::to_string(workers[i]) + " > /dev/null";
    const int rc = std::system(cmd.c_str());
    if (rc != 0) return {false, "dac-krr exited with status " + std::to_string(rc)};
    csv[i] = slurp(out / "rates.csv");
  }
  const bool same = !csv[0].empty() && csv[0] == csv[1];
  const std::size_t lines = std::count(csv[0].begin(), csv[0].end(), '\n');
  return {same, std::string(same ? "identical" : "different") + " rates.csv (" + std::to_string(lines) +
                    " lines) for --workers 1 and 4"};
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::set<int> only;
  app.add_option("--cli", g_cli, "path to the dac-krr binary");
  app.add_option("--workers", g_workers, "worker threads")->check(CLI::Range(1u, 256u));
  app.add_option("--only", only, "run only these criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  const Criterion criteria[] = {
      {1, "m=1 equivalence", 10, m1_equivalence},
      {2, "second-order decomposition", 10, second_order},
      {3, "difference representation identity", 60, representation},
      {4, "effective dimension", 60, effective_dimension},
      {5, "approximation error bounds", 10, approximation},
      {6, "single-machine minimax rate", 1800, batch_minimax_rate},
      {7, "distributed-vs-batch gap decreasing in m", 900, monotone_in_m},
      {8, "distributed minimax rate", 1200, distributed_minimax_rate},
      {9, "concentration bounds", 300, concentration},
      {10, "determinism across worker counts", 120, determinism},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.limit_seconds;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::printf("[%s] %2d %s: %s; %.1f s (limit %.0f s)%s\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                secs, c.limit_seconds, in_time ? "" : " TIME LIMIT EXCEEDED");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
