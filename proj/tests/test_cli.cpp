#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + DACKRR_CLI + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch() {
  const fs::path d = fs::temp_directory_path() / "dackrr_cli_test";
  fs::create_directories(d);
  return d;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("solve and distribute succeed on a small synthetic problem") {
  const fs::path d = scratch();
  write(d / "solve.json", R"({"kernel":{"kind":"periodic_sobolev","s":1,"k_max":20},"lambda":0.01,
    "synthetic":{"N":50,"seed":2,"noise":{"kind":"gaussian","std":0.1}}})");
  CHECK(run("solve --config " + (d / "solve.json").string() + " --out " + (d / "solve").string()) == 0);
  CHECK(fs::exists(d / "solve" / "model.csv"));
  CHECK(fs::exists(d / "solve" / "model.json"));
  CHECK(fs::exists(d / "solve" / "data.csv"));

  CHECK(run("distribute --data " + (d / "solve" / "data.csv").string() +
            " --m 3 --lambda 0.01 --kernel '{\"kind\":\"periodic_sobolev\",\"s\":1,\"k_max\":20}'"
            " --strategy shuffled --seed 4 --out " + (d / "avg.csv").string()) == 0);
  CHECK(fs::exists(d / "avg.csv"));
  CHECK(fs::exists(d / "avg.json"));
}

TEST_CASE("config errors exit with 2") {
  const fs::path d = scratch();
  CHECK(run("solve --config /nonexistent.json --out " + d.string()) == 2);
  write(d / "bad.json", "{ not json");
  CHECK(run("rate-experiment --config " + (d / "bad.json").string() + " --out " + d.string()) == 2);
  write(d / "badgrid.json", R"({"N":[100,50,200]})");
  CHECK(run("rate-experiment --config " + (d / "badgrid.json").string() + " --out " + d.string()) == 2);
  CHECK(run("no-such-command") == 2);
  CHECK(run("distribute --out " + (d / "x.csv").string()) == 2);
}

TEST_CASE("numeric failures exit with 3") {
  const fs::path d = scratch();
  write(d / "neg.json", R"({"kernel":{"kind":"periodic_sobolev","s":1,"k_max":20},"lambda":-1,
    "synthetic":{"N":30}})");
  CHECK(run("solve --config " + (d / "neg.json").string() + " --out " + (d / "neg").string()) == 3);
}

TEST_CASE("verify-lemmas exits with 4 on a failed assertion and 0 otherwise") {
  const fs::path d = scratch();
  // An effective-dimension check on 5 points at lambda = 1e-6 cannot match.
  write(d / "fail.json", R"({"equivalence_configs":1,"spd_pairs":2,"representation_configs":1,
    "effdim_k_max":50,"effdim_n":5,"effdim_lambdas":[1e-6],"concentration_lambdas":[0.1],
    "concentration_n":[50],"concentration_trials":100,"kx_draws":1000})");
  CHECK(run("verify-lemmas --config " + (d / "fail.json").string() + " --out " + (d / "vf").string()) == 4);
  write(d / "ok.json", R"({"equivalence_configs":2,"spd_pairs":5,"representation_configs":3,
    "effdim_k_max":2000,"effdim_n":300,"effdim_lambdas":[0.1,0.01],"concentration_lambdas":[0.1],
    "concentration_n":[100],"concentration_trials":200,"kx_draws":20000})");
  CHECK(run("verify-lemmas --config " + (d / "ok.json").string() + " --out " + (d / "vo").string()) == 0);
  CHECK(fs::exists(d / "vo" / "lemmas.csv"));
}

TEST_CASE("effdim writes a table") {
  const fs::path d = scratch();
  write(d / "eff.json", R"({"kernel":{"kind":"periodic_sobolev","s":1,"k_max":100},"lambdas":[0.1,0.01,0.001]})");
  CHECK(run("effdim --config " + (d / "eff.json").string() + " --out " + (d / "eff").string()) == 0);
  CHECK(fs::exists(d / "eff" / "effdim.csv"));
}
