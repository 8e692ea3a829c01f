#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string_view>

#include "assort/estimation.hpp"
#include "assort/lp.hpp"
#include "assort/mnl.hpp"

namespace assort {

// Per-run diagnostics surfaced by a policy after (or during) a run.
struct PolicyReport {
  std::optional<lp::AssortmentDistribution> learned_distribution;
  long long lp_solves = 0;
  int cg_iterations_max = 0;
  bool all_lp_optimal = true;
  long long mle_failures = 0;
  long long adjusted_tau = -1;
};

// Period-by-period interface. The caller alternates strictly between
// next_assortment and observe; the offered assortment may depend only on
// past observations and the supplied random source, never on the current
// period's outcome.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual Assortment next_assortment(long long period,
                                     std::span<const long long> remaining_capacity,
                                     Rng& rng) = 0;
  virtual void observe(long long period, int purchased) = 0;
  virtual std::string_view name() const = 0;
  virtual PolicyReport report() const { return {}; }
};

// Explore-then-commit: offers each singleton {i} for tau/N consecutive
// periods, fits the per-product closed-form MLE, solves the fluid LP at the
// estimate and samples from its solution for the rest of the horizon. Once
// any capacity reaches zero the policy offers the empty assortment forever.
// tau is rounded down to a multiple of N; throws ConfigError if that leaves
// it below N.
std::unique_ptr<Policy> make_online_tau(const InstanceView& instance,
                                        long long tau, double delta,
                                        const lp::SolverOptions& lp_options = {});

struct UcbOptions {
  double delta = 0.1;
  // Desk-scale hooks: the theoretical psi is hopeless at small T.
  double psi_scale = 1.0;
  bool zero_widening = false;  // eps == 0 and omega == 0 (certainty equivalence)
  double mle_tol = 1e-8;
  int mle_max_iterations = 10000;
  int recompute_stride = 1;  // re-estimate every this many periods
  lp::SolverOptions lp;
};

// Optimism-under-uncertainty policy: N warm-start periods covering every
// product, then per-period full MLE plus the widened LP. Construction throws
// PolicyRefused when omega >= 1.
std::unique_ptr<Policy> make_ucb(const InstanceView& instance,
                                 const UcbOptions& options = {});

// Clairvoyant stationary baseline sampling from the fluid LP solution at the
// true utilities, with the same abort rule.
std::unique_ptr<Policy> make_static_oracle(const Instance& instance,
                                           const lp::SolverOptions& lp_options = {});

// Uniform draw over the whole family each period, with the same abort rule.
// Requires the family to be enumerable under the cap.
std::unique_ptr<Policy> make_uniform_random(const InstanceView& instance,
                                            std::uint64_t enumeration_cap =
                                                kDefaultEnumerationCap);

// Learning-length diagnostic. Condition (i): tau sqrt(log(4NK/delta)) <= T c(k)
// for every k. Condition (ii): C eps(tau) <= c(k)/2 with the constant C read
// both as the maximum assortment size B and as 1 (the source leaves it
// ambiguous); both readings are reported, none is baked into any policy.
struct AssumptionReport {
  struct Resource {
    int k = 0;
    double lhs_i = 0.0, rhs_i = 0.0;
    bool pass_i = false;
    double lhs_ii_times_b = 0.0, lhs_ii_unit = 0.0, rhs_ii = 0.0;
    bool pass_ii_times_b = false, pass_ii_unit = false;
  };
  long long tau = 0;
  double delta = 0.0;
  double eps_tau = 0.0;
  std::vector<Resource> resources;
  bool condition_i = false;
  bool condition_ii_times_b = false;
  bool condition_ii_unit = false;
};

AssumptionReport check_assumption_1(const InstanceView& instance, long long tau,
                                    double delta);

// Resolves "T^{2/3}" or an explicit integer into a learning length.
long long tau_from_rule(std::string_view rule, long long horizon);

}  // namespace assort
