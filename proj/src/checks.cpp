#include "assort/checks.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "assort/estimation.hpp"
#include "assort/lp.hpp"
#include "assort/mnl.hpp"
#include "assort/policies.hpp"
#include "assort/simulator.hpp"

namespace assort::checks {

namespace {

Assortment random_subset(Rng& rng, int n, double keep = 0.5) {
  std::vector<int> items;
  for (int i = 1; i <= n; ++i) {
    if (rng.bernoulli(keep)) items.push_back(i);
  }
  return Assortment::of(std::move(items));
}

UtilityVector random_utilities(Rng& rng, int n, double bound) {
  std::vector<double> values(static_cast<std::size_t>(n));
  const double log_r = std::log(bound);
  for (double& v : values) v = std::exp(rng.uniform(-log_r, log_r));
  return UtilityVector::of(std::move(values), bound);
}

}  // namespace

CheckResult check_normalization(std::uint64_t seed, long long cases) {
  CheckResult result;
  result.suite = "normalization";
  result.tolerance = 1e-12;
  Rng rng(derive_seed(seed, {0x6e6f726dULL}));
  for (long long c = 0; c < cases; ++c) {
    const int n = 1 + static_cast<int>(rng.next_below(8));
    const double bound = rng.uniform(1.0, 5.0);
    const UtilityVector v = random_utilities(rng, n, bound);
    const Assortment s = random_subset(rng, n);
    double total = choice_prob(v, s, 0);
    for (int i : s.items()) total += choice_prob(v, s, i);
    const double slack = std::abs(total - 1.0);
    result.worst_slack = std::max(result.worst_slack, slack);
    if (slack > result.tolerance) ++result.violations;
    ++result.cases;
  }
  result.passed = result.violations == 0;
  return result;
}

CheckResult check_lipschitz(std::uint64_t seed, long long cases) {
  CheckResult result;
  result.suite = "lipschitz";
  result.tolerance = 1e-12;
  Rng rng(derive_seed(seed, {0x6c6970ULL}));
  double worst = -1e300;
  for (long long c = 0; c < cases; ++c) {
    const int n = 1 + static_cast<int>(rng.next_below(8));
    const double bound = rng.uniform(1.0, 6.0);
    const UtilityVector v = random_utilities(rng, n, bound);
    const UtilityVector w = random_utilities(rng, n, bound);
    const Assortment s = random_subset(rng, n);
    double lhs = 0.0, rhs = 0.0;
    for (int i : s.items()) {
      const double b = rng.uniform01();
      lhs += b * (choice_prob(v, s, i) - choice_prob(w, s, i));
      rhs += std::abs(std::log(v(i) / w(i)));
    }
    worst = std::max(worst, lhs - rhs);
    if (lhs - rhs > result.tolerance) ++result.violations;
    ++result.cases;
  }
  result.worst_slack = worst;
  result.passed = result.violations == 0;
  return result;
}

namespace {

// Numeric minimizer of the single-item negative log-likelihood on [1/R, R]:
// sign bisection on the derivative
//   d/dv [ n log(1 + 1/v) + (m - n) log(1 + v) ]
//     = -n / (v(1+v)) + (m-n) / (1+v).
double numeric_single_item_minimizer(long long n, long long m, double bound) {
  auto derivative = [&](double v) {
    return -static_cast<double>(n) / (v * (1.0 + v)) +
           static_cast<double>(m - n) / (1.0 + v);
  };
  double lo = 1.0 / bound, hi = bound;
  if (derivative(lo) >= 0.0) return lo;
  if (derivative(hi) <= 0.0) return hi;
  for (int step = 0; step < 200; ++step) {
    const double mid = 0.5 * (lo + hi);
    (derivative(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double full_likelihood_at_theta(std::span<const double> theta,
                                const SalesHistory& history) {
  std::vector<double> values(theta.size());
  double max_abs = 1.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    values[i] = std::exp(theta[i]);
    max_abs = std::max(max_abs, std::abs(theta[i]));
  }
  const UtilityVector v =
      UtilityVector::of(std::move(values), std::exp(max_abs) + 1.0);
  return neg_log_likelihood_full(v, history);
}

}  // namespace

CheckResult check_mle(std::uint64_t seed, int max_m, int gradient_cases) {
  CheckResult result;
  result.suite = "mle";
  result.tolerance = 1e-8;
  for (double bound : {5.0, 3.0}) {
    for (long long m = 1; m <= max_m; ++m) {
      for (long long n = 0; n <= m; ++n) {
        const double closed = mle_single_item({1, m, n}, bound);
        const double numeric = numeric_single_item_minimizer(n, m, bound);
        const double dev = std::abs(closed - numeric);
        result.worst_slack = std::max(result.worst_slack, dev);
        if (dev > 1e-8) ++result.violations;
        ++result.cases;
      }
    }
  }

  // Gradient against central finite differences, step 1e-6, tolerance 1e-5.
  Rng rng(derive_seed(seed, {0x6d6c65ULL}));
  double worst_grad = 0.0;
  for (int c = 0; c < gradient_cases; ++c) {
    const int n = 2 + static_cast<int>(rng.next_below(5));
    const UtilityVector truth = random_utilities(rng, n, 3.0);
    SalesHistory history(n);
    const int records = 1 + static_cast<int>(rng.next_below(30));
    for (int r = 0; r < records; ++r) {
      const Assortment s = random_subset(rng, n, 0.6);
      history.append(s, sample_purchase(truth, s, rng));
    }
    std::vector<double> theta(static_cast<std::size_t>(n));
    for (double& x : theta) x = rng.uniform(-std::log(3.0), std::log(3.0));
    const std::vector<double> grad = likelihood_gradient(theta, history);
    const double h = 1e-6;
    for (int i = 0; i < n; ++i) {
      std::vector<double> plus = theta, minus = theta;
      plus[static_cast<std::size_t>(i)] += h;
      minus[static_cast<std::size_t>(i)] -= h;
      const double fd = (full_likelihood_at_theta(plus, history) -
                         full_likelihood_at_theta(minus, history)) /
                        (2.0 * h);
      const double dev = std::abs(fd - grad[static_cast<std::size_t>(i)]);
      worst_grad = std::max(worst_grad, dev);
      if (dev > 1e-5) ++result.violations;
    }
    ++result.cases;
  }
  std::ostringstream detail;
  detail << "worst closed-form deviation " << result.worst_slack
         << " (tol 1e-8), worst gradient deviation " << worst_grad
         << " (tol 1e-5)";
  result.detail = detail.str();
  result.worst_slack = std::max(result.worst_slack, worst_grad);
  result.tolerance = 1e-5;  // the looser of the two per-check gates
  result.passed = result.violations == 0;
  return result;
}

CheckResult check_lp_oracle(std::uint64_t seed, int instances, int cap_n, int cap_b,
                            int cap_k) {
  CheckResult result;
  result.suite = "lp-oracle";
  result.tolerance = 1e-7;
  Rng rng(derive_seed(seed, {0x6c70ULL}));
  for (int c = 0; c < instances; ++c) {
    const int n = 2 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(cap_n - 1)));
    const int b = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(
                          std::min(cap_b, n))));
    const int k = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(cap_k)));
    ClassTuple klass{"oracle", AssortmentFamily::cardinality(n, b), k,
                     rng.uniform(1.2, 4.0)};
    const Instance instance =
        generate_instance(klass, 1000, derive_seed(seed, {0x6c70ULL, static_cast<std::uint64_t>(c)}));
    const lp::LPResult cg = lp::solve_lp(instance.view(), instance.true_utilities);

    // Dense oracle: one simplex over every enumerated column.
    std::vector<lp::MasterColumn> columns;
    for (const Assortment& s : instance.family.enumerate()) {
      lp::MasterColumn col;
      col.objective = expected_revenue(instance.true_utilities, s, instance.revenues);
      for (int res = 0; res < k; ++res) {
        col.consumption.push_back(
            expected_consumption(instance.true_utilities, s, instance.consumption, res));
      }
      columns.push_back(std::move(col));
    }
    const lp::MasterSolution dense = lp::simplex_solve(columns, instance.capacity_rates);

    const double gap = std::abs(cg.objective - dense.objective);
    result.worst_slack = std::max(result.worst_slack, gap);
    bool bad = gap > result.tolerance || cg.status != lp::SolveStatus::Optimal;
    if (static_cast<int>(cg.distribution.support_set(1e-9).size()) > k + 1) bad = true;
    // Feasibility and normalization of the returned distribution.
    double total = 0.0;
    std::vector<double> used(static_cast<std::size_t>(k), 0.0);
    for (const auto& [s, w] : cg.distribution.support) {
      total += w;
      for (int res = 0; res < k; ++res) {
        used[static_cast<std::size_t>(res)] +=
            w * expected_consumption(instance.true_utilities, s, instance.consumption, res);
      }
    }
    if (std::abs(total - 1.0) > 1e-9) bad = true;
    for (int res = 0; res < k; ++res) {
      if (used[static_cast<std::size_t>(res)] >
          instance.capacity_rates[static_cast<std::size_t>(res)] + 1e-9) {
        bad = true;
      }
    }
    if (bad) ++result.violations;
    ++result.cases;
  }
  result.passed = result.violations == 0;
  return result;
}

CheckResult check_pricing_oracle(std::uint64_t seed, int cases, int cap_n) {
  CheckResult result;
  result.suite = "pricing-oracle";
  result.tolerance = 1e-9;
  Rng rng(derive_seed(seed, {0x7072ULL}));
  for (int c = 0; c < cases; ++c) {
    AssortmentFamily family = AssortmentFamily::cardinality(1, 1);
    int n;
    if (c % 2 == 0) {
      n = 2 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(cap_n - 1)));
      family = AssortmentFamily::cardinality(
          n, 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n))));
    } else {
      const int blocks = rng.bernoulli(0.5) ? 2 : 5;
      const int per = 1 + static_cast<int>(rng.next_below(3));
      n = blocks * std::max<int>(1, cap_n / blocks);
      family = AssortmentFamily::partition_matroid(n, blocks, per);
    }
    const UtilityVector v = random_utilities(rng, n, 3.0);
    std::vector<double> rr(static_cast<std::size_t>(n));
    for (double& x : rr) x = rng.uniform(-1.0, 1.0);

    const lp::PricedColumn fast = lp::price_column(v, rr, family, 1e-9);
    double brute = 0.0;  // the empty assortment scores 0
    family.for_each_member([&](const Assortment& s) {
      double num = 0.0, denom = 1.0;
      for (int i : s.items()) {
        num += rr[static_cast<std::size_t>(i) - 1] * v(i);
        denom += v(i);
      }
      brute = std::max(brute, num / denom);
    });
    const double gap = std::abs(fast.value - brute);
    result.worst_slack = std::max(result.worst_slack, gap);
    if (gap > result.tolerance || !family.contains(fast.assortment)) {
      ++result.violations;
    }
    ++result.cases;
  }
  result.passed = result.violations == 0;
  return result;
}

CheckResult check_feasibility(std::uint64_t seed, int runs_per_policy) {
  CheckResult result;
  result.suite = "feasibility";
  result.tolerance = 0.0;
  Rng rng(derive_seed(seed, {0x666561ULL}));
  GenerationConfig tight;
  tight.capacity_lo = 0.05;  // tight capacities exercise the abort path
  tight.capacity_hi = 0.30;
  std::string first_failure;
  for (int r = 0; r < runs_per_policy; ++r) {
    const int n = 4 + static_cast<int>(rng.next_below(3));
    const int k = 1 + static_cast<int>(rng.next_below(2));
    ClassTuple klass{"feas", AssortmentFamily::cardinality(n, 2), k, 2.0};
    const Instance instance = generate_instance(
        klass, 300, derive_seed(seed, {0x666561ULL, static_cast<std::uint64_t>(r)}),
        tight);
    UcbOptions ucb;
    ucb.psi_scale = 1e-6;
    std::unique_ptr<Policy> policies[] = {
        make_online_tau(instance.view(), tau_from_rule("T^{2/3}", 300), 0.1),
        make_static_oracle(instance),
        make_uniform_random(instance.view()),
        make_ucb(instance.view(), ucb),
    };
    for (std::unique_ptr<Policy>& policy : policies) {
      const RunLog log = run_episode(
          instance, *policy,
          derive_seed(seed, {0x666562ULL, static_cast<std::uint64_t>(r)}));
      std::string why;
      if (!audit_run_log(instance, log, &why)) {
        ++result.violations;
        if (first_failure.empty()) first_failure = why;
      }
      ++result.cases;
    }
  }
  result.detail = first_failure;
  result.passed = result.violations == 0;
  return result;
}

CheckResult check_coverage(std::uint64_t seed, int runs, double delta) {
  CheckResult result;
  result.suite = "coverage";
  // Instance sized so the learning length below satisfies both readings of
  // the learning-phase assumption.
  const int n = 5;
  const int k = 2;
  const double bound = 1.5;
  const double c = 0.5;
  Instance instance;
  instance.num_products = n;
  instance.num_resources = k;
  instance.horizon = 800000;
  instance.utility_bound = bound;
  instance.revenues.assign(n, 0.5);
  instance.consumption = BinaryMatrix(k, n);
  for (int res = 0; res < k; ++res) {
    for (int i = 1; i <= n; ++i) instance.consumption.set(res, i, 1);
  }
  instance.capacity_rates.assign(k, c);
  instance.family = AssortmentFamily::cardinality(n, 2);
  instance.true_utilities = UtilityVector::of(std::vector<double>(n, 1.0), bound);
  instance.validate();

  long long tau = n;
  AssumptionReport assumption;
  for (;;) {
    assumption = check_assumption_1(instance.view(), tau, delta);
    if (assumption.condition_i && assumption.condition_ii_times_b) break;
    if (!assumption.condition_i) {
      throw ConfigError("coverage suite misconfigured: horizon too short");
    }
    tau *= 2;
  }
  const double eps = confidence_radius_learning(tau, n, bound, delta);
  const long long per_product = tau / n;

  Rng rng(derive_seed(seed, {0x636f76ULL}));
  long long successes = 0;
  for (int r = 0; r < runs; ++r) {
    const UtilityVector truth = random_utilities(rng, n, bound);
    bool covered = true;
    for (int i = 1; i <= n; ++i) {
      const double p = truth(i) / (1.0 + truth(i));
      long long purchases = 0;
      for (long long s = 0; s < per_product; ++s) {
        if (rng.bernoulli(p)) ++purchases;
      }
      const double estimate = mle_single_item({i, per_product, purchases}, bound);
      if (std::abs(std::log(estimate / truth(i))) > eps) {
        covered = false;
        break;
      }
    }
    if (covered) ++successes;
    ++result.cases;
  }
  const double d = static_cast<double>(runs);
  const double threshold =
      (1.0 - delta) * d - 3.0 * std::sqrt(d * delta * (1.0 - delta));
  result.violations = runs - successes;
  result.tolerance = d - threshold;  // allowed failures
  result.worst_slack = static_cast<double>(result.violations);
  std::ostringstream detail;
  detail << "tau=" << tau << " eps=" << eps << " covered " << successes << "/"
         << runs << " (need >= " << threshold << ")";
  result.detail = detail.str();
  result.passed = static_cast<double>(successes) >= threshold;
  return result;
}

CheckResult run_suite(const std::string& name, std::uint64_t seed, int cap_n,
                      long long cap_cases) {
  if (name == "normalization") {
    return check_normalization(seed, cap_cases > 0 ? cap_cases : 10000);
  }
  if (name == "lipschitz") {
    return check_lipschitz(seed, cap_cases > 0 ? cap_cases : 10000);
  }
  if (name == "mle") {
    return check_mle(seed, cap_cases > 0 ? static_cast<int>(cap_cases) : 50);
  }
  if (name == "lp-oracle") {
    return check_lp_oracle(seed, cap_cases > 0 ? static_cast<int>(cap_cases) : 50,
                           cap_n > 0 ? cap_n : 8);
  }
  if (name == "pricing-oracle") {
    return check_pricing_oracle(seed,
                                cap_cases > 0 ? static_cast<int>(cap_cases) : 200,
                                cap_n > 0 ? cap_n : 10);
  }
  if (name == "feasibility") {
    return check_feasibility(seed, cap_cases > 0 ? static_cast<int>(cap_cases) : 30);
  }
  if (name == "coverage") {
    return check_coverage(seed, cap_cases > 0 ? static_cast<int>(cap_cases) : 200);
  }
  throw ConfigError("unknown verification suite: " + name);
}

}  // namespace assort::checks
