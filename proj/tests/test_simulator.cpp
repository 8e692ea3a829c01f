#include <doctest.h>

#include <cmath>

#include "assort/simulator.hpp"

using namespace assort;

namespace {

class AlwaysEmptyPolicy final : public Policy {
 public:
  Assortment next_assortment(long long, std::span<const long long>, Rng&) override {
    return Assortment{};
  }
  void observe(long long, int) override {}
  std::string_view name() const override { return "always_empty"; }
};

bool logs_equal(const RunLog& a, const RunLog& b) {
  if (a.seed != b.seed || a.t_stop != b.t_stop ||
      a.total_revenue != b.total_revenue || a.final_capacity != b.final_capacity ||
      a.periods.size() != b.periods.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.periods.size(); ++i) {
    const PeriodRecord& x = a.periods[i];
    const PeriodRecord& y = b.periods[i];
    if (x.t != y.t || !(x.offered == y.offered) || x.purchased != y.purchased ||
        x.revenue != y.revenue || x.capacity_after != y.capacity_after) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("an always-empty policy earns nothing and consumes nothing") {
  ClassTuple klass{"e", AssortmentFamily::cardinality(3, 2), 2, 2.0};
  const Instance instance = generate_instance(klass, 50, 1);
  AlwaysEmptyPolicy policy;
  const RunLog log = run_episode(instance, policy, 123);
  CHECK(log.total_revenue == 0.0);
  CHECK(log.t_stop == 50);
  for (int k = 0; k < 2; ++k) {
    CHECK(log.final_capacity[k] == instance.capacity_units(k));
  }
  CHECK(audit_run_log(instance, log));
}

namespace {

class RoguePolicy final : public Policy {
 public:
  Assortment next_assortment(long long, std::span<const long long>, Rng&) override {
    return Assortment::of({1, 2, 3});  // larger than the family allows
  }
  void observe(long long, int) override {}
  std::string_view name() const override { return "rogue"; }
};

}  // namespace

TEST_CASE("offering outside the family is a contract violation") {
  ClassTuple klass{"r", AssortmentFamily::cardinality(3, 2), 1, 2.0};
  const Instance instance = generate_instance(klass, 20, 4);
  RoguePolicy rogue;
  CHECK_THROWS_AS((void)run_episode(instance, rogue, 1), ContractViolation);
}

TEST_CASE("episodes are reproducible bit for bit") {
  ClassTuple klass{"d", AssortmentFamily::cardinality(4, 2), 1, 2.0};
  const Instance instance = generate_instance(klass, 200, 2);
  std::unique_ptr<Policy> p1 = make_online_tau(instance.view(), 20, 0.1);
  std::unique_ptr<Policy> p2 = make_online_tau(instance.view(), 20, 0.1);
  const RunLog a = run_episode(instance, *p1, 42);
  const RunLog b = run_episode(instance, *p2, 42);
  CHECK(logs_equal(a, b));

  std::unique_ptr<Policy> p3 = make_online_tau(instance.view(), 20, 0.1);
  const RunLog c = run_episode(instance, *p3, 43);
  CHECK_FALSE(logs_equal(a, c));
}

TEST_CASE("instance generation matches the class tuple") {
  ClassTuple gamma1{"g1", AssortmentFamily::cardinality(10, 6), 5, 3.0};
  const Instance instance = generate_instance(gamma1, 1000, 7);
  CHECK(instance.num_products == 10);
  CHECK(instance.num_resources == 5);
  CHECK(instance.family.kind() == FamilyKind::Cardinality);
  CHECK(instance.family.max_assortment_size() == 6);
  for (int i = 1; i <= 10; ++i) {
    CHECK(instance.true_utilities(i) >= 1.0 / 3.0 - 1e-12);
    CHECK(instance.true_utilities(i) <= 3.0 + 1e-12);
  }
  for (int k = 0; k < 5; ++k) {
    const double units = instance.capacity_rates[k] * 1000.0;
    CHECK(std::abs(units - std::llround(units)) < 1e-9);
    CHECK(instance.capacity_units(k) >= 1);
  }

  ClassTuple gamma4{"g4", AssortmentFamily::partition_matroid(10, 2, 3), 5, 3.0};
  const Instance pm = generate_instance(gamma4, 500, 8);
  CHECK(pm.family.kind() == FamilyKind::PartitionMatroid);
  CHECK(pm.family.blocks() == 2);
  CHECK(pm.family.per_block() == 3);

  const Instance again = generate_instance(gamma1, 1000, 7);
  CHECK(again.revenues == instance.revenues);
  CHECK(again.true_utilities.values == instance.true_utilities.values);
  const Instance other = generate_instance(gamma1, 1000, 9);
  CHECK_FALSE(other.true_utilities.values == instance.true_utilities.values);
}

TEST_CASE("benchmark is T times the fluid optimum") {
  ClassTuple k0{"k0", AssortmentFamily::cardinality(5, 2), 0, 2.0};
  const Instance instance = generate_instance(k0, 400, 10);
  double best = 0.0;
  instance.family.for_each_member([&](const Assortment& s) {
    best = std::max(best,
                    expected_revenue(instance.true_utilities, s, instance.revenues));
  });
  CHECK(compute_benchmark(instance) == doctest::Approx(400.0 * best).epsilon(1e-9));
}

TEST_CASE("support match compares weight-bearing assortments") {
  lp::AssortmentDistribution a;
  a.support = {{Assortment{}, 0.25}, {Assortment::of({1}), 0.75}};
  lp::AssortmentDistribution b = a;
  CHECK(support_match(a, b));

  b.support = {{Assortment::of({1}), 1.0}};
  CHECK_FALSE(support_match(a, b));

  // Weights below the threshold are ignored.
  lp::AssortmentDistribution c;
  c.support = {{Assortment{}, 1e-12}, {Assortment::of({1}), 1.0}};
  CHECK(support_match(c, b));

  lp::AssortmentDistribution empty_mass;
  empty_mass.support = {{Assortment{}, 1.0}};
  CHECK_FALSE(support_match(empty_mass, b));
}

TEST_CASE("a one-cell one-run experiment reduces to its single episode") {
  ExperimentSpec spec;
  spec.classes = {{"solo", AssortmentFamily::cardinality(4, 2), 1, 2.0}};
  spec.horizons = {120};
  spec.models_per_cell = 1;
  spec.runs_per_model = 1;
  spec.policy.type = PolicyConfig::Type::OnlineTau;
  spec.policy.tau_rule = "T^{2/3}";
  spec.master_seed = 99;
  spec.threads = 1;
  const ExperimentReport report = run_experiment(spec);
  REQUIRE(report.runs.size() == 1);
  REQUIRE(report.cells.size() == 1);

  const Instance instance = generate_instance(
      spec.classes[0], 120, derive_seed(99, {0xC1A55ULL, 0, 120, 0}));
  std::unique_ptr<Policy> policy =
      make_online_tau(instance.view(), tau_from_rule("T^{2/3}", 120), 0.1);
  const RunLog log =
      run_episode(instance, *policy, derive_seed(99, {0x5EEDULL, 0, 120, 0, 0}));
  CHECK(report.runs[0].revenue == log.total_revenue);
  CHECK(report.runs[0].t_stop == log.t_stop);
  CHECK(report.cells[0].mean_revenue == log.total_revenue);
  const double benchmark = compute_benchmark(instance);
  CHECK(report.runs[0].benchmark == doctest::Approx(benchmark).epsilon(1e-12));
  CHECK(report.runs[0].regret ==
        doctest::Approx(benchmark - log.total_revenue).epsilon(1e-12));
}

TEST_CASE("experiment aggregation identity and thread invariance") {
  ExperimentSpec spec;
  spec.classes = {{"agg", AssortmentFamily::cardinality(5, 2), 2, 2.0}};
  spec.horizons = {80, 160};
  spec.models_per_cell = 2;
  spec.runs_per_model = 10;
  spec.policy.type = PolicyConfig::Type::OnlineTau;
  spec.master_seed = 1234;
  spec.threads = 1;
  const ExperimentReport serial = run_experiment(spec);
  spec.threads = 4;
  const ExperimentReport parallel = run_experiment(spec);

  REQUIRE(serial.runs.size() == 40);
  REQUIRE(serial.runs.size() == parallel.runs.size());
  for (std::size_t i = 0; i < serial.runs.size(); ++i) {
    CHECK(serial.runs[i].seed == parallel.runs[i].seed);
    CHECK(serial.runs[i].revenue == parallel.runs[i].revenue);
    CHECK(serial.runs[i].regret == parallel.runs[i].regret);
  }
  CHECK(serial.feasibility_violations == 0);

  for (const CellAggregate& cell : serial.cells) {
    CHECK(cell.mean_regret ==
          doctest::Approx(cell.mean_benchmark - cell.mean_revenue).epsilon(1e-9));
    CHECK(cell.runs == 20);
    CHECK(cell.support_match_fraction >= 0.0);  // online_tau exposes a solution
  }
  REQUIRE(serial.slopes.size() == 1);
  CHECK(serial.slopes[0].points == 2);
}

TEST_CASE("a failing cell is recorded without aborting the experiment") {
  ExperimentSpec spec;
  spec.classes = {{"refused", AssortmentFamily::cardinality(4, 2), 2, 3.0}};
  spec.horizons = {100};
  spec.models_per_cell = 1;
  spec.runs_per_model = 1;
  spec.policy.type = PolicyConfig::Type::Ucb;  // unscaled constants: omega >= 1
  spec.master_seed = 5;
  spec.threads = 1;
  const ExperimentReport report = run_experiment(spec);
  CHECK(report.runs.empty());
  REQUIRE(report.failures.size() == 1);
  CHECK(report.failures[0].find("refused") != std::string::npos);
  CHECK(report.failures[0].find("omega") != std::string::npos);
}

TEST_CASE("uniform random baseline stays feasible") {
  ClassTuple klass{"u", AssortmentFamily::cardinality(4, 2), 2, 2.0};
  GenerationConfig tight;
  tight.capacity_lo = 0.05;
  tight.capacity_hi = 0.2;
  const Instance instance = generate_instance(klass, 300, 3, tight);
  for (int run = 0; run < 20; ++run) {
    std::unique_ptr<Policy> policy = make_uniform_random(instance.view());
    const RunLog log = run_episode(instance, *policy,
                                   derive_seed(44, {static_cast<std::uint64_t>(run)}));
    std::string why;
    CHECK_MESSAGE(audit_run_log(instance, log, &why), why);
  }
}
