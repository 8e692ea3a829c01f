#pragma once

#include <cstdint>
#include <string>

namespace assort::checks {

struct CheckResult {
  std::string suite;
  long long cases = 0;
  long long violations = 0;
  double worst_slack = 0.0;  // largest observed violation / deviation
  double tolerance = 0.0;
  std::string detail;
  bool passed = false;
};

// Sum of MNL choice probabilities over S and the no-purchase outcome is 1.
CheckResult check_normalization(std::uint64_t seed, long long cases = 10000);

// sum_{i in S} b(i)(phi(i,S|v) - phi(i,S|v')) <= sum_{i in S} |log v(i)/v'(i)|.
CheckResult check_lipschitz(std::uint64_t seed, long long cases = 10000);

// Closed-form single-item MLE against a 1-D numeric minimizer (exhaustive
// over m <= max_m), plus the full-likelihood gradient against central finite
// differences on random histories.
CheckResult check_mle(std::uint64_t seed, int max_m = 50, int gradient_cases = 100);

// Column generation against a dense simplex over the fully enumerated family
// on random small instances; also checks the support-size bound K+1.
CheckResult check_lp_oracle(std::uint64_t seed, int instances = 50, int cap_n = 8,
                            int cap_b = 3, int cap_k = 3);

// Bisection pricing against brute-force maximization over the family, random
// reduced revenues including negatives, both structured family kinds.
CheckResult check_pricing_oracle(std::uint64_t seed, int cases = 200, int cap_n = 10);

// Seeded episodes for all policies on small random instances; audits every
// capacity ledger.
CheckResult check_feasibility(std::uint64_t seed, int runs_per_policy = 30);

// Coverage of the learning-phase confidence interval over simulated learning
// phases with an Assumption-1-satisfying tau.
CheckResult check_coverage(std::uint64_t seed, int runs = 200, double delta = 0.1);

// Dispatch by suite name (normalization | lipschitz | mle | lp-oracle |
// pricing-oracle | feasibility | coverage). Throws ConfigError on an unknown
// name. cap_n <= 0 keeps each suite's default.
CheckResult run_suite(const std::string& name, std::uint64_t seed, int cap_n = 0,
                      long long cap_cases = 0);

}  // namespace assort::checks
