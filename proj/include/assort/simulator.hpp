#pragma once

#include <optional>
#include <string>
#include <vector>

#include "assort/lp.hpp"
#include "assort/mnl.hpp"
#include "assort/policies.hpp"

namespace assort {

struct PeriodRecord {
  long long t = 0;
  Assortment offered;
  int purchased = 0;  // 0 = no purchase
  double revenue = 0.0;
  std::vector<long long> capacity_after;
};

struct RunLog {
  std::uint64_t seed = 0;
  std::vector<PeriodRecord> periods;
  long long t_stop = 0;  // first period some capacity reached zero, else T
  double total_revenue = 0.0;
  std::vector<long long> final_capacity;
};

// Executes the T-period sales horizon: offer, sample the purchase under the
// true utilities, earn, decrement capacities. Deterministic given the seed
// (policy randomness and purchase randomness use disjoint substreams).
// Throws ContractViolation if the policy offers a non-member assortment or
// a capacity would go negative.
RunLog run_episode(const Instance& instance, Policy& policy, std::uint64_t seed);

// Re-derives the capacity ledger and spot-checks every RunLog invariant.
// Returns false and fills `why` on the first violation.
bool audit_run_log(const Instance& instance, const RunLog& log,
                   std::string* why = nullptr);

// Problem class (family, N, K, R) from which random models are drawn.
struct ClassTuple {
  std::string name;
  AssortmentFamily family;
  int num_resources = 0;
  double utility_bound = 1.0;

  int num_products() const { return family.dimension(); }
};

struct GenerationConfig {
  double revenue_lo = 0.0, revenue_hi = 1.0;   // r(i) ~ U[lo, hi]
  double consumption_density = 0.5;            // a(i,k) ~ Bernoulli(density)
  double capacity_lo = 0.25, capacity_hi = 0.75;  // c(k) ~ U[lo, hi], snapped
};

// Random model: uniform revenues, Bernoulli consumption, uniform capacity
// rates snapped so T c(k) is a positive integer, log-uniform utilities in
// [1/R, R]. Deterministic given the seed.
Instance generate_instance(const ClassTuple& klass, long long horizon,
                           std::uint64_t seed, const GenerationConfig& config = {});

// Fluid LP at the true utilities; benchmark = T * objective.
lp::LPResult solve_clairvoyant(const Instance& instance,
                               const lp::SolverOptions& options = {});
double compute_benchmark(const Instance& instance,
                         const lp::SolverOptions& options = {});

// Set equality of supports after dropping weights below the threshold.
bool support_match(const lp::AssortmentDistribution& y_hat,
                   const lp::AssortmentDistribution& y_star,
                   double drop_below = 1e-9);

struct PolicyConfig {
  enum class Type { OnlineTau, Ucb, StaticOracle, UniformRandom };
  Type type = Type::OnlineTau;
  std::string tau_rule = "T^{2/3}";  // OnlineTau: "T^{2/3}" or an integer
  double delta = 0.1;
  UcbOptions ucb;  // Ucb only; delta above takes precedence
};

std::unique_ptr<Policy> build_policy(const PolicyConfig& config,
                                     const Instance& instance);

struct ExperimentSpec {
  std::vector<ClassTuple> classes;
  std::vector<long long> horizons;
  int models_per_cell = 5;
  int runs_per_model = 200;
  PolicyConfig policy;
  std::uint64_t master_seed = 1;
  GenerationConfig generation;
  lp::SolverOptions lp;
  int threads = 0;  // 0 = hardware concurrency
};

struct RunRecord {
  std::string class_name;
  long long horizon = 0;
  int model = 0;
  std::uint64_t seed = 0;
  double revenue = 0.0;
  double benchmark = 0.0;
  double regret = 0.0;
  double ratio = 0.0;
  long long t_stop = 0;
  std::optional<bool> support_matched;  // policies exposing a learned solution
  int cg_iterations_max = 0;
  bool lp_all_optimal = true;
};

struct CellAggregate {
  std::string class_name;
  long long horizon = 0;
  int models = 0;
  long long runs = 0;
  double mean_revenue = 0.0;
  double mean_benchmark = 0.0;
  double mean_regret = 0.0;
  double mean_ratio = 0.0;
  // Both aggregation levels: dispersion of per-model means, and of raw runs.
  double ratio_std_across_models = 0.0;
  double ratio_std_across_runs = 0.0;
  double regret_std_across_models = 0.0;
  double support_match_fraction = -1.0;  // -1 when not applicable
  int benchmark_degenerate_models = 0;   // LP(v*) had alternate optima
  int cg_iterations_max = 0;
  double cg_iterations_mean = 0.0;
};

struct SlopeFit {
  std::string class_name;
  double slope = 0.0;
  double intercept = 0.0;  // natural-log intercept
  int points = 0;
};

struct ExperimentReport {
  std::vector<RunRecord> runs;     // sorted by (class, T, model, run)
  std::vector<CellAggregate> cells;
  std::vector<SlopeFit> slopes;    // log mean-regret vs log T per class
  long long feasibility_violations = 0;
  int cg_iterations_max = 0;       // across policy-side LP solves
  bool all_lp_optimal = true;
  int benchmark_cg_iterations_max = 0;
  // A failed (class, T, model) cell is recorded here instead of aborting the
  // whole experiment.
  std::vector<std::string> failures;
};

// Full cross product (class x horizon x model x run) with per-cell
// aggregation. Episodes run in parallel across models; the report is a
// deterministic function of the spec regardless of thread count.
ExperimentReport run_experiment(const ExperimentSpec& spec);

}  // namespace assort
