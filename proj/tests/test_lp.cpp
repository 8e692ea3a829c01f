#include <doctest.h>

#include <cmath>
#include <sstream>

#include "assort/checks.hpp"
#include "assort/lp.hpp"
#include "assort/simulator.hpp"

using namespace assort;

namespace {

Instance small_instance(std::uint64_t seed, int n, int b, int k, double r_bound) {
  ClassTuple klass{"t", AssortmentFamily::cardinality(n, b), k, r_bound};
  return generate_instance(klass, 1000, seed);
}

lp::MasterSolution dense_solve(const Instance& instance, const UtilityVector& v) {
  std::vector<lp::MasterColumn> columns;
  for (const Assortment& s : instance.family.enumerate()) {
    lp::MasterColumn col;
    col.objective = expected_revenue(v, s, instance.revenues);
    for (int k = 0; k < instance.num_resources; ++k) {
      col.consumption.push_back(expected_consumption(v, s, instance.consumption, k));
    }
    columns.push_back(std::move(col));
  }
  return lp::simplex_solve(columns, instance.capacity_rates);
}

}  // namespace

TEST_CASE("simplex on the lone empty column") {
  std::vector<lp::MasterColumn> columns{{0.0, {0.0}}};
  const lp::MasterSolution sol = lp::simplex_solve(columns, std::vector<double>{0.5});
  REQUIRE(sol.weights.size() == 1);
  CHECK(sol.weights[0] == doctest::Approx(1.0));
  CHECK(sol.objective == doctest::Approx(0.0));
}

TEST_CASE("simplex two-column hand instance") {
  // max 0.8 y1  s.t. 0.4 y1 <= 0.2,  y0 + y1 = 1  ->  y1 = 0.5, objective 0.4.
  std::vector<lp::MasterColumn> columns{{0.0, {0.0}}, {0.8, {0.4}}};
  const lp::MasterSolution sol = lp::simplex_solve(columns, std::vector<double>{0.2});
  CHECK(sol.weights[1] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(sol.weights[0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(sol.objective == doctest::Approx(0.4).epsilon(1e-10));
  // Binding resource: dual 0.8/0.4 = 2, convexity dual 0.
  CHECK(sol.duals[0] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(sol.duals[1] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("simplex strong duality and complementary slackness on random masters") {
  Rng rng(17);
  for (int c = 0; c < 200; ++c) {
    const int k = 1 + static_cast<int>(rng.next_below(3));
    const int n = 2 + static_cast<int>(rng.next_below(8));
    std::vector<lp::MasterColumn> columns{{0.0, std::vector<double>(k, 0.0)}};
    for (int j = 1; j < n; ++j) {
      lp::MasterColumn col;
      col.objective = rng.uniform(-0.2, 1.0);
      for (int r = 0; r < k; ++r) col.consumption.push_back(rng.uniform(-0.1, 1.0));
      columns.push_back(std::move(col));
    }
    std::vector<double> rhs(k);
    for (double& r : rhs) r = rng.uniform(0.05, 0.9);
    const lp::MasterSolution sol = lp::simplex_solve(columns, rhs);

    double primal = 0.0, weight = 0.0;
    std::vector<double> used(k, 0.0);
    for (int j = 0; j < n; ++j) {
      CHECK(sol.weights[j] >= -1e-12);
      primal += columns[j].objective * sol.weights[j];
      weight += sol.weights[j];
      for (int r = 0; r < k; ++r) used[r] += columns[j].consumption[r] * sol.weights[j];
    }
    CHECK(weight == doctest::Approx(1.0).epsilon(1e-9));
    double dual = sol.duals[k];
    for (int r = 0; r < k; ++r) {
      CHECK(sol.duals[r] >= -1e-9);
      CHECK(used[r] <= rhs[r] + 1e-9);
      dual += sol.duals[r] * rhs[r];
      // Complementary slackness: positive dual only on binding rows.
      if (sol.duals[r] > 1e-7) CHECK(used[r] == doctest::Approx(rhs[r]).epsilon(1e-8));
    }
    CHECK(primal == doctest::Approx(dual).epsilon(1e-8));
    // No column has positive reduced cost at optimality.
    for (int j = 0; j < n; ++j) {
      double rc = columns[j].objective - sol.duals[k];
      for (int r = 0; r < k; ++r) rc -= sol.duals[r] * columns[j].consumption[r];
      CHECK(rc <= 1e-8);
    }
  }
}

TEST_CASE("pricing oracle basics") {
  const UtilityVector v = UtilityVector::of({1.0}, 2.0);
  const AssortmentFamily family = AssortmentFamily::cardinality(1, 1);
  const lp::PricedColumn single = lp::price_column(v, std::vector<double>{1.0}, family, 1e-9);
  CHECK(single.assortment == Assortment::of({1}));
  CHECK(single.value == doctest::Approx(0.5).epsilon(1e-12));

  // All reduced revenues nonpositive: the empty assortment wins with value 0.
  const UtilityVector v3 = UtilityVector::of({1.0, 2.0, 0.5}, 2.0);
  const AssortmentFamily f3 = AssortmentFamily::cardinality(3, 2);
  const lp::PricedColumn empty =
      lp::price_column(v3, std::vector<double>{-0.5, -0.1, 0.0}, f3, 1e-9);
  CHECK(empty.assortment == Assortment{});
  CHECK(empty.value == 0.0);
}

TEST_CASE("pricing oracle equals brute force (reduced-count unit run)") {
  const checks::CheckResult result = checks::check_pricing_oracle(5150, 60, 10);
  CHECK(result.passed);
  CHECK(result.worst_slack <= 1e-9);
}

TEST_CASE("fluid LP with no resources is a point mass on the best assortment") {
  ClassTuple klass{"k0", AssortmentFamily::cardinality(6, 3), 0, 3.0};
  const Instance instance = generate_instance(klass, 500, 404);
  const lp::LPResult result = lp::solve_lp(instance.view(), instance.true_utilities);
  CHECK(result.status == lp::SolveStatus::Optimal);
  REQUIRE(result.distribution.support.size() == 1);
  CHECK(result.distribution.support[0].second == doctest::Approx(1.0).epsilon(1e-9));

  double best = 0.0;
  instance.family.for_each_member([&](const Assortment& s) {
    best = std::max(best,
                    expected_revenue(instance.true_utilities, s, instance.revenues));
  });
  CHECK(result.objective == doctest::Approx(best).epsilon(1e-9));
}

TEST_CASE("slack resources reduce to the unconstrained case") {
  ClassTuple klass{"slack", AssortmentFamily::cardinality(5, 2), 2, 2.0};
  Instance instance = generate_instance(klass, 100, 11);
  instance.capacity_rates = {1.0, 1.0};  // A(S,k|v) <= 1 always
  instance.validate();
  const lp::LPResult constrained =
      lp::solve_lp(instance.view(), instance.true_utilities);

  Instance free = instance;
  free.num_resources = 0;
  free.consumption = BinaryMatrix(0, 5);
  free.capacity_rates.clear();
  const lp::LPResult unconstrained = lp::solve_lp(free.view(), free.true_utilities);
  CHECK(constrained.objective ==
        doctest::Approx(unconstrained.objective).epsilon(1e-9));
}

TEST_CASE("column generation equals dense enumeration on random instances") {
  Rng rng(2718);
  for (int c = 0; c < 15; ++c) {
    const int n = 3 + static_cast<int>(rng.next_below(6));
    const int b = 1 + static_cast<int>(rng.next_below(3));
    const int k = 1 + static_cast<int>(rng.next_below(3));
    const Instance instance = small_instance(derive_seed(9, {static_cast<std::uint64_t>(c)}),
                                             n, std::min(b, n), k, 3.0);
    const lp::LPResult cg = lp::solve_lp(instance.view(), instance.true_utilities);
    const lp::MasterSolution dense = dense_solve(instance, instance.true_utilities);
    CHECK(cg.status == lp::SolveStatus::Optimal);
    CHECK(cg.objective == doctest::Approx(dense.objective).epsilon(1e-7));
    CHECK(static_cast<int>(cg.distribution.support_set(1e-9).size()) <= k + 1);
    CHECK(cg.distribution.weight_sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(cg.cg_iterations <= 100);
    double from_support = 0.0;
    for (const auto& [s, w] : cg.distribution.support) {
      from_support +=
          w * expected_revenue(instance.true_utilities, s, instance.revenues);
    }
    CHECK(cg.objective == doctest::Approx(from_support).epsilon(1e-9));

    // Termination certificate: pricing at the returned duals finds no column
    // with positive reduced cost.
    std::vector<double> rr(instance.revenues.begin(), instance.revenues.end());
    for (int i = 1; i <= n; ++i) {
      for (int res = 0; res < k; ++res) {
        rr[i - 1] -= cg.duals[res] * instance.consumes(i, res);
      }
    }
    const lp::PricedColumn certificate =
        lp::price_column(instance.true_utilities, rr, instance.family, 1e-9);
    CHECK(certificate.value <= cg.duals[k] + 1e-7);
  }
}

TEST_CASE("lp oracle suite passes (reduced-count unit run)") {
  const checks::CheckResult result = checks::check_lp_oracle(31415, 15, 8, 3, 3);
  CHECK(result.passed);
  CHECK(result.worst_slack <= 1e-7);
}

TEST_CASE("iteration cap is honestly reported") {
  const Instance instance = small_instance(77, 8, 3, 3, 3.0);
  lp::SolverOptions options;
  options.max_iterations = 1;
  const lp::LPResult result =
      lp::solve_lp(instance.view(), instance.true_utilities, options);
  CHECK(result.status == lp::SolveStatus::IterationCapped);
  CHECK(result.cg_iterations == 1);
}

TEST_CASE("ucb lp with zero widening equals the plain lp") {
  const Instance instance = small_instance(123, 6, 2, 2, 2.0);
  const lp::LPResult plain = lp::solve_lp(instance.view(), instance.true_utilities);

  std::vector<long long> exposures(6, 10);
  lp::UcbLpSpec spec;
  spec.utilities = &instance.true_utilities;
  spec.exposure_counts = exposures;
  spec.omega = 0.0;
  spec.eps = [](long long) { return 0.0; };
  const lp::LPResult widened = lp::solve_ucb_lp(instance.view(), spec);
  CHECK(widened.status == lp::SolveStatus::Optimal);
  CHECK(widened.objective == doctest::Approx(plain.objective).epsilon(1e-7));
}

TEST_CASE("ucb lp equals dense enumeration and dominates the plain lp") {
  Rng rng(1618);
  for (int c = 0; c < 10; ++c) {
    const int n = 3 + static_cast<int>(rng.next_below(5));
    const Instance instance =
        small_instance(derive_seed(33, {static_cast<std::uint64_t>(c)}), n, 2, 2, 2.0);
    std::vector<long long> exposures(n);
    for (long long& e : exposures) e = 1 + static_cast<long long>(rng.next_below(50));
    const double psi = 0.02;
    auto eps = [psi, n](long long m) {
      return (std::sqrt(static_cast<double>(n)) + 1.0) * psi /
             std::sqrt(static_cast<double>(m));
    };
    lp::UcbLpSpec spec;
    spec.utilities = &instance.true_utilities;
    spec.exposure_counts = exposures;
    spec.omega = 0.0;
    spec.eps = eps;
    const lp::LPResult ucb = lp::solve_ucb_lp(instance.view(), spec);
    CHECK(ucb.status == lp::SolveStatus::Optimal);

    // Dense oracle with identically widened coefficients.
    std::vector<lp::MasterColumn> columns;
    for (const Assortment& s : instance.family.enumerate()) {
      double widening = 0.0;
      for (int i : s.items()) widening += eps(exposures[i - 1]);
      lp::MasterColumn col;
      col.objective =
          expected_revenue(instance.true_utilities, s, instance.revenues) + widening;
      for (int k = 0; k < instance.num_resources; ++k) {
        col.consumption.push_back(
            expected_consumption(instance.true_utilities, s, instance.consumption, k) -
            widening);
      }
      columns.push_back(std::move(col));
    }
    const lp::MasterSolution dense =
        lp::simplex_solve(columns, instance.capacity_rates);
    CHECK(ucb.objective == doctest::Approx(dense.objective).epsilon(1e-7));

    // Wider objective, same (omega = 0) capacities: never worse.
    const lp::LPResult plain = lp::solve_lp(instance.view(), instance.true_utilities);
    CHECK(ucb.objective >= plain.objective - 1e-7);
  }
}

TEST_CASE("ucb lp rejects bad specs") {
  const Instance instance = small_instance(5, 4, 2, 1, 2.0);
  std::vector<long long> exposures(4, 1);
  lp::UcbLpSpec spec;
  spec.utilities = &instance.true_utilities;
  spec.exposure_counts = exposures;
  spec.eps = [](long long) { return 0.0; };
  spec.omega = 1.0;
  CHECK_THROWS_AS(lp::solve_ucb_lp(instance.view(), spec), std::invalid_argument);
  spec.omega = 0.5;
  exposures[2] = 0;
  CHECK_THROWS_AS(lp::solve_ucb_lp(instance.view(), spec), std::invalid_argument);
}

TEST_CASE("restricted master exports in LP interchange format") {
  const Instance instance = small_instance(8, 5, 2, 2, 2.0);
  lp::SolverOptions options;
  options.keep_master = true;
  const lp::LPResult result =
      lp::solve_lp(instance.view(), instance.true_utilities, options);
  REQUIRE(result.master.has_value());
  std::ostringstream out;
  lp::write_lp_format(out, *result.master);
  const std::string text = out.str();
  CHECK(text.find("Maximize") != std::string::npos);
  CHECK(text.find("Subject To") != std::string::npos);
  CHECK(text.find("convexity:") != std::string::npos);
  CHECK(text.find("End") != std::string::npos);
}
