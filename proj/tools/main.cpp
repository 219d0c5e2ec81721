#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "wish/executor.hpp"
#include "wish/generators.hpp"
#include "wish/model.hpp"
#include "wish/oracle.hpp"
#include "wish/report.hpp"
#include "wish/uai.hpp"
#include "wish/version.hpp"
#include "wish/wish.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDegraded = 3;

struct CommonFlags {
  std::string model_path;
  double delta = 0.1;
  double alpha = wish::kMaxCertifiedAlpha;
  std::uint32_t t_override = 0;
  std::uint64_t seed = 0;
  bool seed_given = false;
  unsigned jobs = 0;
  std::uint64_t budget_nodes = 0;
  double budget_seconds = 0.0;
  bool timings = false;
};

void add_wish_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("model", flags.model_path, "UAI MARKOV model file")->required();
  cmd->add_option("--delta", flags.delta, "failure probability in (0,1)");
  cmd->add_option("--alpha", flags.alpha, "repetition constant");
  cmd->add_option("--t-override", flags.t_override, "fixed repetition count (voids the certificate when below the formula value)");
  cmd->add_option("--seed", flags.seed, "master seed");
  cmd->add_option("--jobs", flags.jobs, "worker threads (0 = all cores; never affects output)");
  cmd->add_option("--budget-nodes", flags.budget_nodes, "per-instance node budget (0 = unlimited)");
  cmd->add_option("--budget-seconds", flags.budget_seconds, "per-instance time budget (0 = unlimited)");
  cmd->add_flag("--timings", flags.timings, "include wall times in the JSON (breaks byte determinism)");
}

// --seed wins; the WISH_SEED environment variable is the fallback.
int resolve_seed(const CLI::App* cmd, std::uint64_t& seed) {
  if (cmd->count("--seed")) return kExitOk;
  const char* env = std::getenv("WISH_SEED");
  if (!env || !*env) return kExitOk;
  std::uint64_t value = 0;
  const char* end = env + std::string(env).size();
  auto [ptr, ec] = std::from_chars(env, end, value);
  if (ec != std::errc{} || ptr != end) {
    std::cerr << "error: WISH_SEED is not an unsigned integer: '" << env << "'\n";
    return kExitUsage;
  }
  seed = value;
  return kExitOk;
}

int validate_wish_flags(const CommonFlags& flags) {
  if (!(flags.delta > 0.0 && flags.delta < 1.0)) {
    std::cerr << "error: --delta must be in (0,1)\n";
    return kExitUsage;
  }
  if (!(flags.alpha > 0.0)) {
    std::cerr << "error: --alpha must be positive\n";
    return kExitUsage;
  }
  if (flags.budget_seconds < 0.0) {
    std::cerr << "error: --budget-seconds must be nonnegative\n";
    return kExitUsage;
  }
  return kExitOk;
}

wish::WishConfig make_config(const CommonFlags& flags) {
  wish::WishConfig config;
  config.delta = flags.delta;
  config.alpha = flags.alpha;
  config.t_override = flags.t_override;
  config.master_seed = flags.seed;
  config.budget.node_limit = flags.budget_nodes;
  config.budget.time_limit_seconds = flags.budget_seconds;
  return config;
}

std::unique_ptr<wish::Executor> make_executor(unsigned jobs) {
  if (jobs == 1) return std::make_unique<wish::SerialExecutor>();
  return std::make_unique<wish::ThreadPoolExecutor>(jobs);
}

int load_model(const std::string& path, wish::FactorGraph& graph) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot open model file '" << path << "'\n";
    return kExitInput;
  }
  try {
    graph = wish::parse_uai(in);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}

void print_timing_summary(const wish::WishResult& result) {
  std::size_t optimal = 0;
  std::size_t timeout = 0;
  double wall = 0.0;
  std::uint64_t nodes = 0;
  for (const wish::InstanceRecord& rec : result.instances) {
    if (!rec.failed && rec.result.status == wish::MapStatus::kOptimal) ++optimal;
    if (!rec.failed && rec.result.status == wish::MapStatus::kTimeout) ++timeout;
    wall += rec.result.wall_time;
    nodes += rec.result.nodes_expanded;
  }
  std::cerr << "instances=" << result.instances.size() << " optimal=" << optimal
            << " timeout=" << timeout << " nodes=" << nodes << " solve_seconds=" << wall << "\n";
}

int guarantee_exit_code(const wish::WishResult& result) {
  return result.guarantee == wish::Guarantee::kExact16x ? kExitOk : kExitDegraded;
}

int cmd_run(const CommonFlags& flags, bool refine_requested, double epsilon) {
  wish::FactorGraph graph;
  if (int rc = load_model(flags.model_path, graph); rc != kExitOk) return rc;
  wish::BinaryModel model;
  try {
    model = wish::binarize(graph);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }

  const wish::WishConfig config = make_config(flags);
  auto executor = make_executor(flags.jobs);
  wish::ReportOptions report_opt;
  report_opt.include_timings = flags.timings;

  try {
    if (refine_requested) {
      const wish::RefineResult refined = wish::refine(model, epsilon, config, *executor);
      wish::Json report =
          wish::build_run_report(graph, model, config, refined.power_run, report_opt);
      report["refinement"] = wish::Json{{"epsilon", epsilon},
                                        {"copies", refined.copies},
                                        {"approx_factor", refined.approx_factor},
                                        {"power_bits", model.n * refined.copies},
                                        {"log_estimate", wish::json_log(refined.log_estimate)},
                                        {"log10_estimate", wish::json_log10(refined.log_estimate)}};
      print_timing_summary(refined.power_run);
      std::cout << report.dump(2) << "\n";
      return guarantee_exit_code(refined.power_run);
    }
    const wish::WishResult result = wish::run_wish(model, config, *executor);
    const wish::Json report = wish::build_run_report(graph, model, config, result, report_opt);
    print_timing_summary(result);
    std::cout << report.dump(2) << "\n";
    return guarantee_exit_code(result);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

int cmd_oracle(const std::string& path, double tail_u, bool tail_given, std::uint32_t cap) {
  wish::FactorGraph graph;
  if (int rc = load_model(path, graph); rc != kExitOk) return rc;
  wish::BinaryModel model;
  try {
    model = wish::binarize(graph);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  if (model.n > cap) {
    std::cerr << "error: model needs " << model.n << " bits, above the enumeration cap " << cap
              << " (raise --oracle-cap to force)\n";
    return kExitUsage;
  }

  const wish::QuantileProfile profile = wish::brute_force_quantiles(model, cap);
  const double log_z = wish::log_z_from_profile(profile);
  wish::Json j;
  j["schema_version"] = wish::kSchemaVersion;
  j["tool"] = wish::Json{{"name", wish::kToolName}, {"version", wish::kToolVersion}};
  j["model"] = wish::Json{{"digest", wish::model_digest(graph)},
                          {"variables", graph.num_variables()},
                          {"factors", graph.factors.size()},
                          {"bits", model.n}};
  j["log_z"] = wish::json_log(log_z);
  j["log10_z"] = wish::json_log10(log_z);
  wish::Json b = wish::Json::array();
  for (double v : profile.b) b.push_back(wish::json_log(v));
  j["b"] = std::move(b);
  if (tail_given) {
    if (!(tail_u > 0.0)) {
      std::cerr << "error: --tail must be positive\n";
      return kExitUsage;
    }
    j["tail"] = wish::Json{{"u", tail_u}, {"g", wish::brute_force_tail(model, tail_u, cap)}};
  }
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_tail(const CommonFlags& flags, double u, std::uint32_t oracle_cap) {
  if (!(u > 0.0)) {
    std::cerr << "error: u must be positive\n";
    return kExitUsage;
  }
  wish::FactorGraph graph;
  if (int rc = load_model(flags.model_path, graph); rc != kExitOk) return rc;
  wish::BinaryModel model;
  try {
    model = wish::binarize(graph);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }

  const wish::WishConfig config = make_config(flags);
  auto executor = make_executor(flags.jobs);
  wish::ReportOptions report_opt;
  report_opt.include_timings = flags.timings;
  const wish::WishResult result = wish::run_wish(model, config, *executor);
  const wish::TailEstimate tail = wish::estimate_tail(result, u);

  wish::Json report = wish::build_run_report(graph, model, config, result, report_opt);
  wish::Json t;
  t["u"] = u;
  t["q"] = tail.q < 0 ? wish::Json(nullptr) : wish::Json(tail.q);
  t["estimate"] = tail.count;
  if (model.n <= oracle_cap) {
    t["oracle_g"] = wish::brute_force_tail(model, u, oracle_cap);
  }
  report["tail"] = std::move(t);
  print_timing_summary(result);
  std::cout << report.dump(2) << "\n";
  return guarantee_exit_code(result);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partition function estimation by hashing and optimization"};
  app.set_version_flag("--version", std::string(wish::kToolName) + " " + wish::kToolVersion);
  app.require_subcommand(1);

  CommonFlags run_flags;
  double epsilon = 0.0;
  CLI::App* run = app.add_subcommand("run", "Estimate the partition function of a model");
  add_wish_flags(run, run_flags);
  CLI::Option* epsilon_opt =
      run->add_option("--epsilon", epsilon, "refine via the product construction to a (1+eps) factor");

  CommonFlags tail_flags;
  double tail_u = 0.0;
  std::uint32_t tail_oracle_cap = wish::kDefaultOracleCap;
  CLI::App* tail = app.add_subcommand("tail", "Estimate the number of configurations above a weight");
  add_wish_flags(tail, tail_flags);
  tail->add_option("u", tail_u, "weight threshold (> 0)")->required();
  tail->add_option("--oracle-cap", tail_oracle_cap, "bit cap for the exact comparison");

  std::string oracle_path;
  double oracle_tail_u = 0.0;
  std::uint32_t oracle_cap = wish::kDefaultOracleCap;
  CLI::App* oracle = app.add_subcommand("oracle", "Exact partition function and quantiles by enumeration");
  oracle->add_option("model", oracle_path, "UAI MARKOV model file")->required();
  CLI::Option* oracle_tail_opt = oracle->add_option("--tail", oracle_tail_u, "also count configurations with weight >= u");
  oracle->add_option("--oracle-cap", oracle_cap, "bit cap for enumeration");

  CLI::App* generate = app.add_subcommand("generate", "Emit a random benchmark model as UAI text");
  generate->require_subcommand(1);

  std::uint32_t clique_n = 10;
  double clique_w = 1.0;
  double clique_chain = 0.0;
  std::uint64_t clique_seed = 0;
  CLI::App* clique = generate->add_subcommand("clique", "Fully connected Ising model with a repulsive chain");
  clique->add_option("n", clique_n, "number of variables (>= 2)")->required();
  clique->add_option("--w", clique_w, "coupling scale");
  CLI::Option* chain_opt =
      clique->add_option("--chain-strength", clique_chain, "chain coupling scale (default 10*w)");
  clique->add_option("--seed", clique_seed, "generator seed");

  std::uint32_t grid_rows = 0;
  std::uint32_t grid_cols = 0;
  double grid_w = 1.0;
  double grid_f = 0.0;
  std::uint64_t grid_seed = 0;
  wish::GridMode grid_mode = wish::GridMode::kAttractive;
  CLI::App* grid = generate->add_subcommand("grid", "Ising model on a lattice with unary fields");
  grid->add_option("rows", grid_rows, "grid rows (>= 1)")->required();
  grid->add_option("cols", grid_cols, "grid columns (>= 1)")->required();
  grid->add_option("--w", grid_w, "coupling scale");
  grid->add_option("--f", grid_f, "field scale");
  grid->add_option("--mode", grid_mode, "coupling sign mode")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, wish::GridMode>{{"attractive", wish::GridMode::kAttractive},
                                                {"mixed", wish::GridMode::kMixed}},
          CLI::ignore_case));
  grid->add_option("--seed", grid_seed, "generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return kExitUsage;
  }

  if (run->parsed()) {
    if (int rc = resolve_seed(run, run_flags.seed); rc != kExitOk) return rc;
    if (int rc = validate_wish_flags(run_flags); rc != kExitOk) return rc;
    if (epsilon_opt->count() && !(epsilon > 0.0)) {
      std::cerr << "error: --epsilon must be positive\n";
      return kExitUsage;
    }
    return cmd_run(run_flags, epsilon_opt->count() > 0, epsilon);
  }
  if (tail->parsed()) {
    if (int rc = resolve_seed(tail, tail_flags.seed); rc != kExitOk) return rc;
    if (int rc = validate_wish_flags(tail_flags); rc != kExitOk) return rc;
    return cmd_tail(tail_flags, tail_u, tail_oracle_cap);
  }
  if (oracle->parsed()) {
    return cmd_oracle(oracle_path, oracle_tail_u, oracle_tail_opt->count() > 0, oracle_cap);
  }
  if (generate->parsed()) {
    try {
      wish::FactorGraph graph;
      if (clique->parsed()) {
        if (int rc = resolve_seed(clique, clique_seed); rc != kExitOk) return rc;
        const double chain = chain_opt->count() ? clique_chain : 10.0 * clique_w;
        graph = wish::generate_clique_ising(clique_n, clique_w, chain, clique_seed);
      } else {
        if (int rc = resolve_seed(grid, grid_seed); rc != kExitOk) return rc;
        graph = wish::generate_grid_ising(grid_rows, grid_cols, grid_w, grid_f, grid_mode, grid_seed);
      }
      std::cout << wish::write_uai(graph);
      return kExitOk;
    } catch (const std::invalid_argument& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitUsage;
    }
  }
  return kExitUsage;
}
