#include "assort/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

namespace assort {

RunLog run_episode(const Instance& instance, Policy& policy, std::uint64_t seed) {
  Rng policy_rng(derive_seed(seed, {0x706f6cULL}));
  Rng purchase_rng(derive_seed(seed, {0x656e76ULL}));

  RunLog log;
  log.seed = seed;
  log.t_stop = instance.horizon;
  log.periods.reserve(static_cast<std::size_t>(instance.horizon));

  std::vector<long long> capacity(static_cast<std::size_t>(instance.num_resources));
  for (int k = 0; k < instance.num_resources; ++k) {
    capacity[static_cast<std::size_t>(k)] = instance.capacity_units(k);
  }

  bool stopped = false;
  for (long long t = 1; t <= instance.horizon; ++t) {
    Assortment offered = policy.next_assortment(t, capacity, policy_rng);
    if (!instance.family.contains(offered)) {
      throw ContractViolation("policy offered an assortment outside the family");
    }
    const int purchased = sample_purchase(instance.true_utilities, offered, purchase_rng);
    const double revenue =
        purchased == 0 ? 0.0 : instance.revenues[static_cast<std::size_t>(purchased) - 1];
    for (int k = 0; k < instance.num_resources; ++k) {
      if (purchased != 0 && instance.consumes(purchased, k)) {
        long long& c = capacity[static_cast<std::size_t>(k)];
        if (c <= 0) {
          throw ContractViolation("purchase would drive a capacity negative");
        }
        --c;
      }
    }
    policy.observe(t, purchased);
    log.total_revenue += revenue;
    PeriodRecord record;
    record.t = t;
    record.offered = std::move(offered);
    record.purchased = purchased;
    record.revenue = revenue;
    record.capacity_after = capacity;
    log.periods.push_back(std::move(record));
    if (!stopped && std::any_of(capacity.begin(), capacity.end(),
                                [](long long c) { return c == 0; })) {
      stopped = true;
      log.t_stop = t;
    }
  }
  log.final_capacity = std::move(capacity);
  return log;
}

bool audit_run_log(const Instance& instance, const RunLog& log, std::string* why) {
  auto fail = [&](const std::string& message) {
    if (why) *why = message;
    return false;
  };
  std::vector<long long> capacity(static_cast<std::size_t>(instance.num_resources));
  for (int k = 0; k < instance.num_resources; ++k) {
    capacity[static_cast<std::size_t>(k)] = instance.capacity_units(k);
  }
  double revenue = 0.0;
  bool seen_zero = false;
  for (const PeriodRecord& record : log.periods) {
    if (record.purchased != 0 && !record.offered.contains(record.purchased)) {
      return fail("purchased product outside offered assortment at t=" +
                  std::to_string(record.t));
    }
    if (!instance.family.contains(record.offered)) {
      return fail("offered assortment outside family at t=" + std::to_string(record.t));
    }
    const double expected_rev =
        record.purchased == 0
            ? 0.0
            : instance.revenues[static_cast<std::size_t>(record.purchased) - 1];
    if (record.revenue != expected_rev) {
      return fail("revenue does not equal r(I_t) at t=" + std::to_string(record.t));
    }
    for (int k = 0; k < instance.num_resources; ++k) {
      if (record.purchased != 0 && instance.consumes(record.purchased, k)) {
        --capacity[static_cast<std::size_t>(k)];
      }
      if (capacity[static_cast<std::size_t>(k)] < 0) {
        return fail("capacity " + std::to_string(k) + " negative at t=" +
                    std::to_string(record.t));
      }
      if (record.capacity_after[static_cast<std::size_t>(k)] !=
          capacity[static_cast<std::size_t>(k)]) {
        return fail("capacity ledger mismatch at t=" + std::to_string(record.t));
      }
    }
    if (seen_zero && !record.offered.empty()) {
      return fail("non-empty offer after a depleted capacity at t=" +
                  std::to_string(record.t));
    }
    seen_zero = seen_zero || std::any_of(capacity.begin(), capacity.end(),
                                         [](long long c) { return c == 0; });
    revenue += record.revenue;
  }
  if (std::abs(revenue - log.total_revenue) > 1e-9) {
    return fail("total revenue does not match the period records");
  }
  if (log.final_capacity != capacity) {
    return fail("final capacities do not match the ledger");
  }
  return true;
}

Instance generate_instance(const ClassTuple& klass, long long horizon,
                           std::uint64_t seed, const GenerationConfig& config) {
  const int n = klass.num_products();
  const int k = klass.num_resources;
  Instance instance;
  instance.num_products = n;
  instance.num_resources = k;
  instance.horizon = horizon;
  instance.utility_bound = klass.utility_bound;
  instance.family = klass.family;

  Rng revenue_rng(derive_seed(seed, {1}));
  Rng consumption_rng(derive_seed(seed, {2}));
  Rng capacity_rng(derive_seed(seed, {3}));
  Rng utility_rng(derive_seed(seed, {4}));

  instance.revenues.resize(static_cast<std::size_t>(n));
  for (double& r : instance.revenues) {
    r = revenue_rng.uniform(config.revenue_lo, config.revenue_hi);
  }
  instance.consumption = BinaryMatrix(k, n);
  for (int res = 0; res < k; ++res) {
    for (int i = 1; i <= n; ++i) {
      instance.consumption.set(res, i,
                               consumption_rng.bernoulli(config.consumption_density));
    }
  }
  instance.capacity_rates.resize(static_cast<std::size_t>(k));
  for (double& c : instance.capacity_rates) {
    const double raw = capacity_rng.uniform(config.capacity_lo, config.capacity_hi);
    // Snap so that T c(k) is a positive integer.
    const long long units = std::max<long long>(1, std::llround(raw * horizon));
    c = static_cast<double>(units) / static_cast<double>(horizon);
  }
  const double log_r = std::log(klass.utility_bound);
  std::vector<double> utilities(static_cast<std::size_t>(n));
  for (double& v : utilities) v = std::exp(utility_rng.uniform(-log_r, log_r));
  instance.true_utilities = UtilityVector::of(std::move(utilities), klass.utility_bound);
  instance.validate();
  return instance;
}

lp::LPResult solve_clairvoyant(const Instance& instance,
                               const lp::SolverOptions& options) {
  return lp::solve_lp(instance.view(), instance.true_utilities, options);
}

double compute_benchmark(const Instance& instance, const lp::SolverOptions& options) {
  return static_cast<double>(instance.horizon) *
         solve_clairvoyant(instance, options).objective;
}

bool support_match(const lp::AssortmentDistribution& y_hat,
                   const lp::AssortmentDistribution& y_star, double drop_below) {
  const std::vector<Assortment> a = y_hat.support_set(drop_below);
  const std::vector<Assortment> b = y_star.support_set(drop_below);
  return a == b;  // both sorted lexicographically
}

std::unique_ptr<Policy> build_policy(const PolicyConfig& config,
                                     const Instance& instance) {
  switch (config.type) {
    case PolicyConfig::Type::OnlineTau:
      return make_online_tau(instance.view(),
                             tau_from_rule(config.tau_rule, instance.horizon),
                             config.delta);
    case PolicyConfig::Type::Ucb: {
      UcbOptions options = config.ucb;
      options.delta = config.delta;
      return make_ucb(instance.view(), options);
    }
    case PolicyConfig::Type::StaticOracle:
      return make_static_oracle(instance);
    case PolicyConfig::Type::UniformRandom:
      return make_uniform_random(instance.view());
  }
  throw ConfigError("unknown policy type");
}

namespace {

double mean(const std::vector<double>& xs) {
  double total = 0.0;
  for (double x : xs) total += x;
  return xs.empty() ? 0.0 : total / static_cast<double>(xs.size());
}

double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

struct ModelTask {
  int class_index = 0;
  long long horizon = 0;
  int model = 0;
};

struct ModelOutcome {
  std::vector<RunRecord> records;
  long long feasibility_violations = 0;
  bool benchmark_degenerate = false;
  int benchmark_cg_iterations = 0;
  std::string error;  // nonempty if this model cell failed
};

ModelOutcome run_model(const ExperimentSpec& spec, const ModelTask& task) {
  const ClassTuple& klass = spec.classes[static_cast<std::size_t>(task.class_index)];
  const std::uint64_t instance_seed =
      derive_seed(spec.master_seed,
                  {0xC1A55ULL, static_cast<std::uint64_t>(task.class_index),
                   static_cast<std::uint64_t>(task.horizon),
                   static_cast<std::uint64_t>(task.model)});
  const Instance instance =
      generate_instance(klass, task.horizon, instance_seed, spec.generation);
  const lp::LPResult clairvoyant = lp::solve_lp(instance.view(),
                                                instance.true_utilities, spec.lp);
  const double benchmark =
      static_cast<double>(task.horizon) * clairvoyant.objective;

  ModelOutcome outcome;
  outcome.benchmark_degenerate = clairvoyant.degenerate;
  outcome.benchmark_cg_iterations = clairvoyant.cg_iterations;
  outcome.records.reserve(static_cast<std::size_t>(spec.runs_per_model));
  for (int run = 0; run < spec.runs_per_model; ++run) {
    const std::uint64_t run_seed =
        derive_seed(spec.master_seed,
                    {0x5EEDULL, static_cast<std::uint64_t>(task.class_index),
                     static_cast<std::uint64_t>(task.horizon),
                     static_cast<std::uint64_t>(task.model),
                     static_cast<std::uint64_t>(run)});
    std::unique_ptr<Policy> policy = build_policy(spec.policy, instance);
    const RunLog log = run_episode(instance, *policy, run_seed);
    if (!audit_run_log(instance, log)) ++outcome.feasibility_violations;

    RunRecord record;
    record.class_name = klass.name;
    record.horizon = task.horizon;
    record.model = task.model;
    record.seed = run_seed;
    record.revenue = log.total_revenue;
    record.benchmark = benchmark;
    record.regret = benchmark - log.total_revenue;
    record.ratio = log.total_revenue / benchmark;
    record.t_stop = log.t_stop;
    const PolicyReport report = policy->report();
    record.cg_iterations_max = report.cg_iterations_max;
    record.lp_all_optimal = report.all_lp_optimal;
    if (report.learned_distribution) {
      record.support_matched =
          support_match(*report.learned_distribution, clairvoyant.distribution);
    }
    outcome.records.push_back(std::move(record));
  }
  return outcome;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  if (spec.classes.empty() || spec.horizons.empty() || spec.models_per_cell < 1 ||
      spec.runs_per_model < 1) {
    throw ConfigError("experiment needs classes, horizons and positive counts");
  }
  std::vector<ModelTask> tasks;
  for (int ci = 0; ci < static_cast<int>(spec.classes.size()); ++ci) {
    for (long long horizon : spec.horizons) {
      for (int model = 0; model < spec.models_per_cell; ++model) {
        tasks.push_back({ci, horizon, model});
      }
    }
  }
  std::vector<ModelOutcome> outcomes(tasks.size());

  auto guarded_run = [&](std::size_t i) {
    try {
      outcomes[i] = run_model(spec, tasks[i]);
    } catch (const std::exception& e) {
      // A failed cell is recorded, not fatal.
      outcomes[i] = ModelOutcome{};
      outcomes[i].error =
          spec.classes[static_cast<std::size_t>(tasks[i].class_index)].name + "/T=" +
          std::to_string(tasks[i].horizon) + "/model=" +
          std::to_string(tasks[i].model) + ": " + e.what();
    }
  };
  unsigned workers = spec.threads > 0 ? static_cast<unsigned>(spec.threads)
                                      : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, tasks.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) guarded_run(i);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= tasks.size()) return;
        guarded_run(i);
      }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  ExperimentReport report;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (!outcomes[i].error.empty()) report.failures.push_back(outcomes[i].error);
    report.feasibility_violations += outcomes[i].feasibility_violations;
    report.benchmark_cg_iterations_max = std::max(
        report.benchmark_cg_iterations_max, outcomes[i].benchmark_cg_iterations);
    for (RunRecord& record : outcomes[i].records) {
      report.cg_iterations_max =
          std::max(report.cg_iterations_max, record.cg_iterations_max);
      report.all_lp_optimal = report.all_lp_optimal && record.lp_all_optimal;
      report.runs.push_back(std::move(record));
    }
  }

  // Cells in (class, horizon) order; runs already arrive sorted by task order.
  for (int ci = 0; ci < static_cast<int>(spec.classes.size()); ++ci) {
    for (long long horizon : spec.horizons) {
      CellAggregate cell;
      cell.class_name = spec.classes[static_cast<std::size_t>(ci)].name;
      cell.horizon = horizon;
      std::vector<double> ratios, regrets, revenues, benchmarks;
      std::vector<double> model_ratio_means, model_regret_means;
      long long matches = 0, match_candidates = 0;
      double cg_total = 0.0;
      for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (tasks[i].class_index != ci || tasks[i].horizon != horizon) continue;
        if (outcomes[i].records.empty()) continue;  // failed cell, recorded above
        if (outcomes[i].benchmark_degenerate) ++cell.benchmark_degenerate_models;
        std::vector<double> model_ratios, model_regrets;
        for (const RunRecord& record : outcomes[i].records) {
          ratios.push_back(record.ratio);
          regrets.push_back(record.regret);
          revenues.push_back(record.revenue);
          benchmarks.push_back(record.benchmark);
          model_ratios.push_back(record.ratio);
          model_regrets.push_back(record.regret);
          cg_total += record.cg_iterations_max;
          cell.cg_iterations_max =
              std::max(cell.cg_iterations_max, record.cg_iterations_max);
          if (record.support_matched.has_value()) {
            ++match_candidates;
            if (*record.support_matched) ++matches;
          }
        }
        model_ratio_means.push_back(mean(model_ratios));
        model_regret_means.push_back(mean(model_regrets));
      }
      cell.models = static_cast<int>(model_ratio_means.size());
      cell.runs = static_cast<long long>(ratios.size());
      cell.mean_ratio = mean(model_ratio_means);
      cell.mean_regret = mean(model_regret_means);
      cell.mean_revenue = mean(revenues);
      cell.mean_benchmark = mean(benchmarks);
      cell.ratio_std_across_models = sample_std(model_ratio_means);
      cell.ratio_std_across_runs = sample_std(ratios);
      cell.regret_std_across_models = sample_std(model_regret_means);
      cell.cg_iterations_mean =
          cell.runs > 0 ? cg_total / static_cast<double>(cell.runs) : 0.0;
      if (match_candidates > 0) {
        cell.support_match_fraction =
            static_cast<double>(matches) / static_cast<double>(match_candidates);
      }
      report.cells.push_back(std::move(cell));
    }
  }

  // Least-squares slope of log mean-regret against log T, per class.
  for (const ClassTuple& klass : spec.classes) {
    SlopeFit fit;
    fit.class_name = klass.name;
    std::vector<double> xs, ys;
    for (const CellAggregate& cell : report.cells) {
      if (cell.class_name != klass.name || cell.mean_regret <= 0.0) continue;
      xs.push_back(std::log(static_cast<double>(cell.horizon)));
      ys.push_back(std::log(cell.mean_regret));
    }
    fit.points = static_cast<int>(xs.size());
    if (fit.points >= 2) {
      const double mx = mean(xs), my = mean(ys);
      double sxx = 0.0, sxy = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
      }
      fit.slope = sxy / sxx;
      fit.intercept = my - fit.slope * mx;
    }
    report.slopes.push_back(std::move(fit));
  }
  return report;
}

}  // namespace assort
