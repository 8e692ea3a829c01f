#pragma once

#include <iosfwd>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "assort/mnl.hpp"
#include "assort/simulator.hpp"

namespace assort::io {

// Instance document: {"N", "K", "T", "R", "r", "a", "c", "family", "v_star"}
// with "a" as K rows of N binary entries (a[k][i-1] = a(i,k)) and "family"
// one of
//   {"kind": "cardinality", "max_size": B}
//   {"kind": "partition_matroid", "blocks": p, "per_block": b}
//   {"kind": "explicit", "members": [[...], ...]}
// Round-trips are lossless (doubles are emitted with shortest exact form).
nlohmann::json instance_to_json(const Instance& instance);
Instance instance_from_json(const nlohmann::json& j);

nlohmann::json family_to_json(const AssortmentFamily& family);
AssortmentFamily family_from_json(const nlohmann::json& j);

nlohmann::json run_log_to_json(const RunLog& log);
RunLog run_log_from_json(const nlohmann::json& j);

nlohmann::json distribution_to_json(const lp::AssortmentDistribution& d);

// Experiment configuration (schema_version 1):
// {
//   "schema_version": 1,
//   "classes": [{"name", "N", "K", "R", "family"}...],
//   "horizons": [...],
//   "models_per_cell": int, "runs_per_model": int,
//   "policy": {"type": "online_tau"|"ucb"|"static_oracle"|"uniform_random",
//              "tau_rule": "T^{2/3}"|int, "delta": real, ...ucb hooks},
//   "master_seed": int,
//   "generation": {...}, "lp": {...}, "threads": int   (all optional)
// }
// Throws ConfigError naming every offending field.
ExperimentSpec experiment_spec_from_json(const nlohmann::json& j);
ExperimentSpec load_experiment_spec(const std::string& path);

Instance load_instance(const std::string& path);
void save_instance(const Instance& instance, const std::string& path);

// Per-run CSV with fixed column order:
// class,T,model,seed,revenue,benchmark,regret,ratio,t_stop,support_match,cg_iter_max
void write_runs_csv(std::ostream& out, const ExperimentReport& report);
// Plot-ready marginals.
void write_ratio_csv(std::ostream& out, const ExperimentReport& report);
void write_regret_csv(std::ostream& out, const ExperimentReport& report);
nlohmann::json report_to_json(const ExperimentReport& report);

// Re-aggregation of previously written per-run CSVs (cells and slopes only;
// feasibility and LP status totals are recomputed from the rows present).
ExperimentReport read_runs_csv(std::istream& in);

}  // namespace assort::io
