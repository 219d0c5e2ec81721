#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"
#include "wish/generators.hpp"
#include "wish/oracle.hpp"
#include "wish/uai.hpp"

using namespace wish;
using nlohmann::json;

namespace {

struct Cli {
  int code = -1;
  std::string out;
};

Cli run_cli(const std::string& args, const std::string& env_prefix = "") {
  const std::string cmd = env_prefix + WISH_CLI_PATH + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  Cli result;
  char buf[4096];
  std::size_t got = 0;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) result.out.append(buf, got);
  const int status = pclose(pipe);
  result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string temp_model(const std::string& name, const FactorGraph& g) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << write_uai(g);
  return path.string();
}

}  // namespace

TEST_CASE("generate is deterministic and matches the library output byte for byte") {
  const Cli a = run_cli("generate clique 8 --w 0.3 --seed 7");
  const Cli b = run_cli("generate clique 8 --w 0.3 --seed 7");
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out == write_uai(generate_clique_ising(8, 0.3, 3.0, 7)));

  const Cli custom = run_cli("generate clique 8 --w 0.3 --chain-strength 1.5 --seed 7");
  CHECK(custom.out == write_uai(generate_clique_ising(8, 0.3, 1.5, 7)));
  CHECK(custom.out != a.out);
}

TEST_CASE("generated grids round trip through UAI text") {
  const Cli g = run_cli("generate grid 4 5 --w 1.0 --f 1.0 --mode mixed --seed 3");
  REQUIRE(g.code == 0);
  const FactorGraph parsed = parse_uai(g.out);
  const FactorGraph direct = generate_grid_ising(4, 5, 1.0, 1.0, GridMode::kMixed, 3);
  REQUIRE(parsed.factors.size() == direct.factors.size());
  CHECK(parsed.cardinalities == direct.cardinalities);
  for (std::size_t f = 0; f < direct.factors.size(); ++f) {
    CHECK(parsed.factors[f].scope == direct.factors[f].scope);
    REQUIRE(parsed.factors[f].log_table.size() == direct.factors[f].log_table.size());
    for (std::size_t e = 0; e < direct.factors[f].log_table.size(); ++e) {
      CHECK(testref::log_close(parsed.factors[f].log_table[e], direct.factors[f].log_table[e],
                               1e-12));
    }
  }
}

TEST_CASE("oracle reports the exact partition function and tail count") {
  const FactorGraph g = generate_clique_ising(6, 0.5, 5.0, 5);
  const std::string path = temp_model("wish_cli_oracle.uai", g);
  const Cli r = run_cli("oracle " + path + " --tail 2.0");
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);

  const BinaryModel m = binarize(g);
  CHECK(j["schema_version"] == 1);
  CHECK(j["model"]["bits"] == 6);
  CHECK(j["log_z"].get<double>() ==
        doctest::Approx(brute_force_log_z(m)).epsilon(1e-12));
  CHECK(j["log10_z"].get<double>() ==
        doctest::Approx(brute_force_log_z(m) / std::log(10.0)).epsilon(1e-12));
  CHECK(j["b"].size() == 7);
  CHECK(j["tail"]["u"] == 2.0);
  CHECK(j["tail"]["g"] == brute_force_tail(m, 2.0));
}

TEST_CASE("run emits identical bytes regardless of the job count") {
  const std::string path = temp_model("wish_cli_run.uai", generate_clique_ising(6, 0.4, 4.0, 8));
  const std::string base = "run " + path + " --t-override 5 --seed 11";
  const Cli serial = run_cli(base + " --jobs 1");
  const Cli pool = run_cli(base + " --jobs 4");
  REQUIRE(serial.code == 0);
  CHECK(pool.code == 0);
  CHECK(serial.out == pool.out);

  const json j = json::parse(serial.out);
  CHECK(j["schema_version"] == 1);
  CHECK(j["tool"]["name"] == "wish");
  CHECK(j["model"]["bits"] == 6);
  CHECK(j["config"]["t_override"] == 5);
  CHECK(j["result"]["T"] == 5);
  CHECK(j["result"]["medians"].size() == 7);
  CHECK(j["result"]["instances"].size() == 7 * 5);
  CHECK(j["result"]["guarantee"] == "EXACT_16X");
  CHECK(j["result"]["certified"] == false);
  CHECK(j["result"]["instances"][0].contains("wall_time") == false);

  // Opting into timings adds per-instance wall clocks (and gives up byte
  // reproducibility, which is why it is off by default).
  const Cli timed = run_cli(base + " --jobs 1 --timings");
  REQUIRE(timed.code == 0);
  const json tj = json::parse(timed.out);
  CHECK(tj["result"]["instances"][0].contains("wall_time"));
  CHECK(tj["result"]["totals"].contains("wall_time"));
}

TEST_CASE("WISH_SEED is the fallback for --seed") {
  const std::string path = temp_model("wish_cli_seed.uai", generate_clique_ising(5, 0.4, 4.0, 2));
  const std::string base = "run " + path + " --t-override 4";
  const Cli flagged = run_cli(base + " --seed 123");
  const Cli env = run_cli(base, "WISH_SEED=123 ");
  const Cli overridden = run_cli(base + " --seed 123", "WISH_SEED=999 ");
  REQUIRE(flagged.code == 0);
  CHECK(env.out == flagged.out);
  CHECK(overridden.out == flagged.out);

  const Cli other = run_cli(base + " --seed 999");
  CHECK(other.out != flagged.out);

  const Cli bad = run_cli(base, "WISH_SEED=pumpkin ");
  CHECK(bad.code == 2);
}

TEST_CASE("run --epsilon reports the product-construction refinement") {
  const std::string path = temp_model("wish_cli_refine.uai", generate_clique_ising(2, 0.6, 6.0, 5));
  const Cli r = run_cli("run " + path + " --epsilon 3 --t-override 9 --seed 2");
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["refinement"]["epsilon"] == 3.0);
  CHECK(j["refinement"]["copies"] == 2);
  CHECK(j["refinement"]["approx_factor"] == 4.0);
  CHECK(j["refinement"]["power_bits"] == 4);
  CHECK(j["result"]["n"] == 4);  // the reported run is on the product model
  CHECK(j["refinement"]["log_estimate"].is_number());
}

TEST_CASE("exit codes separate input, usage, and degraded-guarantee failures") {
  const std::string model = temp_model("wish_cli_codes.uai", generate_clique_ising(5, 0.4, 4.0, 3));

  CHECK(run_cli("run /nonexistent_model.uai --t-override 3").code == 1);
  const auto bad_path = std::filesystem::temp_directory_path() / "wish_cli_bad.uai";
  std::ofstream(bad_path) << "MARKOV\n2\n2 2\n1\n2 0 1\n4\n1 2 -3 4\n";
  CHECK(run_cli("run " + bad_path.string() + " --t-override 3").code == 1);
  CHECK(run_cli("oracle " + bad_path.string()).code == 1);

  CHECK(run_cli("").code == 2);
  CHECK(run_cli("frobnicate").code == 2);
  CHECK(run_cli("run").code == 2);
  CHECK(run_cli("run " + model + " --no-such-flag").code == 2);
  CHECK(run_cli("run " + model + " --delta 1.5").code == 2);
  CHECK(run_cli("run " + model + " --alpha 0").code == 2);
  CHECK(run_cli("run " + model + " --epsilon -1 --t-override 3").code == 2);
  CHECK(run_cli("tail " + model + " 0 --t-override 3").code == 2);
  CHECK(run_cli("generate clique").code == 2);
  CHECK(run_cli("generate clique 1").code == 2);
  CHECK(run_cli("generate grid 3 3 --mode sideways").code == 2);

  const std::string wide = temp_model("wish_cli_wide.uai", generate_clique_ising(26, 0.2, 2.0, 1));
  CHECK(run_cli("oracle " + wide).code == 2);

  CHECK(run_cli("--help").code == 0);
  CHECK(run_cli("--version").code == 0);

  const std::string hard = temp_model("wish_cli_hard.uai", generate_clique_ising(12, 0.8, 8.0, 99));
  const Cli degraded = run_cli("run " + hard + " --t-override 3 --seed 99 --budget-nodes 30");
  CHECK(degraded.code == 3);
  const json j = json::parse(degraded.out);
  CHECK(j["result"]["guarantee"] != "EXACT_16X");
}

TEST_CASE("tail estimates full levels and carries the oracle count when cheap") {
  const FactorGraph g = generate_clique_ising(6, 0.4, 4.0, 17);
  const std::string path = temp_model("wish_cli_tail.uai", g);
  const Cli r = run_cli("tail " + path + " 2.0 --t-override 5 --seed 1");
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["tail"]["u"] == 2.0);
  CHECK(j["tail"].contains("oracle_g"));
  if (j["tail"]["q"].is_null()) {
    CHECK(j["tail"]["estimate"] == 0.0);
  } else {
    const double q = j["tail"]["q"].get<double>();
    CHECK(j["tail"]["estimate"].get<double>() == std::exp2(q));
  }
}
