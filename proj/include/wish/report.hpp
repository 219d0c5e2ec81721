#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"
#include "wish/model.hpp"
#include "wish/solver.hpp"
#include "wish/uai.hpp"
#include "wish/version.hpp"
#include "wish/wish.hpp"

namespace wish {

using Json = nlohmann::ordered_json;

// Natural-log values can be -inf (weight zero); JSON has no infinities, so
// those are emitted as the string "-inf".
inline Json json_log(double v) {
  if (is_log_zero(v)) return Json("-inf");
  return Json(v);
}

inline Json json_log10(double v) {
  constexpr double kLn10 = 2.302585092994046;
  if (is_log_zero(v)) return Json("-inf");
  return Json(v / kLn10);
}

inline const char* status_name(MapStatus s) {
  switch (s) {
    case MapStatus::kOptimal:
      return "OPTIMAL";
    case MapStatus::kTimeout:
      return "TIMEOUT";
    default:
      return "EMPTY";
  }
}

inline const char* guarantee_name(Guarantee g) {
  switch (g) {
    case Guarantee::kExact16x:
      return "EXACT_16X";
    case Guarantee::kFactor16L:
      return "FACTOR_16L";
    default:
      return "LOWER_BOUND";
  }
}

// FNV-1a over the canonical serialization, so the digest identifies the
// parsed content rather than the input file's whitespace.
inline std::string model_digest(const FactorGraph& g) {
  const std::string text = write_uai(g);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int k = 15; k >= 0; --k) {
    out[static_cast<std::size_t>(k)] = hex[h & 0xf];
    h >>= 4;
  }
  return out;
}

struct ReportOptions {
  bool include_timings = false;  // wall times vary run to run; off by default
                                 // so identical inputs give identical bytes
};

inline Json config_json(const WishConfig& config) {
  Json j;
  j["delta"] = config.delta;
  j["alpha"] = config.alpha;
  j["t_override"] = config.t_override ? Json(config.t_override) : Json(nullptr);
  j["c"] = config.c;
  j["seed"] = config.master_seed;
  Json budget;
  budget["node_limit"] = config.budget.node_limit ? Json(config.budget.node_limit) : Json(nullptr);
  budget["time_limit_seconds"] =
      config.budget.time_limit_seconds > 0.0 ? Json(config.budget.time_limit_seconds) : Json(nullptr);
  j["budget"] = budget;
  return j;
}

inline Json build_run_report(const FactorGraph& graph, const BinaryModel& model,
                             const WishConfig& config, const WishResult& result,
                             const ReportOptions& opt = {}) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["tool"] = Json{{"name", kToolName}, {"version", kToolVersion}};
  j["model"] = Json{{"digest", model_digest(graph)},
                    {"variables", graph.num_variables()},
                    {"factors", graph.factors.size()},
                    {"bits", model.n}};
  j["config"] = config_json(config);

  Json r;
  r["n"] = result.n;
  r["T"] = result.T;
  r["t_overridden"] = result.t_overridden;
  Json medians = Json::array();
  for (double m : result.medians) medians.push_back(json_log(m));
  r["medians"] = medians;
  r["log_estimate"] = json_log(result.log_estimate);
  r["log10_estimate"] = json_log10(result.log_estimate);
  r["guarantee"] = guarantee_name(result.guarantee);
  if (result.guarantee == Guarantee::kFactor16L) {
    r["log_suboptimality"] = result.log_suboptimality;
  }
  r["certified"] = result.certified;
  r["degraded"] = result.degraded;
  r["failure_probability"] = result.failure_probability;

  Json instances = Json::array();
  std::size_t optimal = 0;
  std::size_t timeout = 0;
  std::size_t empty = 0;
  double total_wall = 0.0;
  for (const InstanceRecord& rec : result.instances) {
    Json row;
    row["i"] = rec.i;
    row["t"] = rec.t;
    row["seed"] = rec.seed;
    if (rec.failed) {
      row["status"] = "FAILED";
    } else {
      row["status"] = status_name(rec.result.status);
      switch (rec.result.status) {
        case MapStatus::kOptimal:
          ++optimal;
          break;
        case MapStatus::kTimeout:
          ++timeout;
          break;
        default:
          ++empty;
          break;
      }
    }
    row["log_weight"] = json_log(rec.result.best_log_weight);
    row["nodes"] = rec.result.nodes_expanded;
    if (opt.include_timings) row["wall_time"] = rec.result.wall_time;
    total_wall += rec.result.wall_time;
    instances.push_back(std::move(row));
  }
  r["instances"] = std::move(instances);

  Json totals;
  totals["instances"] = result.instances.size();
  totals["optimal"] = optimal;
  totals["timeout"] = timeout;
  totals["empty"] = empty;
  if (opt.include_timings) totals["wall_time"] = total_wall;
  r["totals"] = std::move(totals);
  j["result"] = std::move(r);
  return j;
}

}  // namespace wish
