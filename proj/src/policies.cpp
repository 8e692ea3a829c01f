#include "assort/policies.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>

namespace assort {

namespace {

bool any_depleted(std::span<const long long> remaining) {
  return std::any_of(remaining.begin(), remaining.end(),
                     [](long long c) { return c <= 0; });
}

class OnlineTauPolicy final : public Policy {
 public:
  OnlineTauPolicy(const InstanceView& instance, long long tau, double delta,
                  lp::SolverOptions lp_options)
      : instance_(instance), delta_(delta), lp_options_(lp_options),
        offers_(static_cast<std::size_t>(instance.num_products), 0),
        purchases_(static_cast<std::size_t>(instance.num_products), 0) {
    if (tau < 1 || tau > instance.horizon) {
      throw ConfigError("learning length must lie in 1..T");
    }
    tau_ = tau - tau % instance.num_products;  // equal per-product samples
    if (tau_ < instance.num_products) {
      throw ConfigError("learning length below N after rounding to a multiple of N");
    }
    per_product_ = tau_ / instance.num_products;
  }

  Assortment next_assortment(long long period,
                             std::span<const long long> remaining_capacity,
                             Rng& rng) override {
    if (aborted_ || any_depleted(remaining_capacity)) {
      aborted_ = true;
      last_offer_ = Assortment{};
      return last_offer_;
    }
    if (period <= tau_) {
      const int product = static_cast<int>((period - 1) / per_product_) + 1;
      last_offer_ = Assortment::of({product});
      return last_offer_;
    }
    if (!y_hat_) commit(rng);
    last_offer_ = y_hat_->sample(rng);
    return last_offer_;
  }

  void observe(long long period, int purchased) override {
    (void)period;
    if (aborted_ || last_offer_.empty()) return;
    if (purchased != 0 && !last_offer_.contains(purchased)) {
      throw ContractViolation("observation outside the offered assortment");
    }
    if (last_offer_.size() == 1 && !y_hat_) {
      const int product = last_offer_.items().front();
      ++offers_[static_cast<std::size_t>(product) - 1];
      if (purchased == product) ++purchases_[static_cast<std::size_t>(product) - 1];
    }
  }

  std::string_view name() const override { return "online_tau"; }

  PolicyReport report() const override {
    PolicyReport r;
    r.learned_distribution = y_hat_;
    r.lp_solves = y_hat_ ? 1 : 0;
    r.cg_iterations_max = cg_iterations_;
    r.all_lp_optimal = lp_optimal_;
    r.adjusted_tau = tau_;
    return r;
  }

  long long adjusted_tau() const { return tau_; }
  const std::optional<UtilityVector>& estimate() const { return v_hat_; }

 private:
  void commit(Rng&) {
    std::vector<double> values(static_cast<std::size_t>(instance_.num_products));
    for (int i = 1; i <= instance_.num_products; ++i) {
      SingleItemCounts counts{i, offers_[static_cast<std::size_t>(i) - 1],
                              purchases_[static_cast<std::size_t>(i) - 1]};
      values[static_cast<std::size_t>(i) - 1] =
          mle_single_item(counts, instance_.utility_bound);
    }
    v_hat_ = UtilityVector::of(std::move(values), instance_.utility_bound);
    lp::LPResult lp = lp::solve_lp(instance_, *v_hat_, lp_options_);
    cg_iterations_ = lp.cg_iterations;
    lp_optimal_ = lp.status == lp::SolveStatus::Optimal;
    y_hat_ = std::move(lp.distribution);
  }

  InstanceView instance_;
  double delta_;
  lp::SolverOptions lp_options_;
  long long tau_ = 0;
  long long per_product_ = 0;
  std::vector<long long> offers_;
  std::vector<long long> purchases_;
  std::optional<UtilityVector> v_hat_;
  std::optional<lp::AssortmentDistribution> y_hat_;
  Assortment last_offer_;
  bool aborted_ = false;
  int cg_iterations_ = 0;
  bool lp_optimal_ = true;
};

class UcbPolicy final : public Policy {
 public:
  UcbPolicy(const InstanceView& instance, const UcbOptions& options)
      : instance_(instance), options_(options),
        history_(instance.num_products) {
    double c_min = 1.0;
    for (double c : instance.capacity_rates) c_min = std::min(c_min, c);
    constants_ = ucb_constants(instance.horizon, instance.num_products,
                               instance.num_resources,
                               instance.family->max_assortment_size(),
                               instance.utility_bound, c_min, options.delta,
                               options.psi_scale);
    if (!options_.zero_widening && !constants_.omega_ok()) {
      throw PolicyRefused("UCB policy refused: omega = " +
                              std::to_string(constants_.omega) + " >= 1",
                          constants_.omega);
    }
    warm_starts_.reserve(static_cast<std::size_t>(instance.num_products));
    for (int i = 1; i <= instance.num_products; ++i) {
      warm_starts_.push_back(instance.family->smallest_member_containing(i));
    }
  }

  Assortment next_assortment(long long period,
                             std::span<const long long> remaining_capacity,
                             Rng& rng) override {
    if (aborted_ || any_depleted(remaining_capacity)) {
      aborted_ = true;
      last_offer_ = Assortment{};
      return last_offer_;
    }
    if (period <= instance_.num_products) {
      last_offer_ = warm_starts_[static_cast<std::size_t>(period) - 1];
      return last_offer_;
    }
    const long long main_index = period - instance_.num_products - 1;
    if (!y_t_ || main_index % options_.recompute_stride == 0) refresh();
    last_offer_ = y_t_->sample(rng);
    return last_offer_;
  }

  void observe(long long period, int purchased) override {
    (void)period;
    if (purchased != 0 && !last_offer_.contains(purchased)) {
      throw ContractViolation("observation outside the offered assortment");
    }
    history_.append(last_offer_, purchased);
  }

  std::string_view name() const override { return "ucb"; }

  PolicyReport report() const override {
    PolicyReport r;
    r.lp_solves = lp_solves_;
    r.cg_iterations_max = cg_iterations_max_;
    r.all_lp_optimal = all_lp_optimal_;
    r.mle_failures = mle_failures_;
    return r;
  }

  const ConfidenceConstants& constants() const { return constants_; }

 private:
  void refresh() {
    MleOptions mle_options;
    mle_options.tol = options_.mle_tol;
    mle_options.max_iterations = options_.mle_max_iterations;
    if (!theta_warm_.empty()) mle_options.warm_start = theta_warm_;
    MleResult mle = mle_full(history_, instance_.utility_bound, mle_options);
    theta_warm_ = mle.theta;
    if (!mle.converged) {
      ++mle_failures_;
      if (y_t_) return;  // keep the previous period's distribution
    }
    lp::UcbLpSpec spec;
    spec.utilities = &mle.utilities;
    spec.exposure_counts = history_.exposure_counts();
    spec.omega = options_.zero_widening ? 0.0 : constants_.omega;
    if (options_.zero_widening) {
      spec.eps = [](long long) { return 0.0; };
    } else {
      spec.eps = [this](long long n) { return constants_.eps(n); };
    }
    lp::LPResult lp = lp::solve_ucb_lp(instance_, spec, options_.lp);
    ++lp_solves_;
    cg_iterations_max_ = std::max(cg_iterations_max_, lp.cg_iterations);
    if (lp.status == lp::SolveStatus::IterationCapped) all_lp_optimal_ = false;
    y_t_ = std::move(lp.distribution);
  }

  InstanceView instance_;
  UcbOptions options_;
  ConfidenceConstants constants_;
  SalesHistory history_;
  std::vector<Assortment> warm_starts_;
  std::vector<double> theta_warm_;
  std::optional<lp::AssortmentDistribution> y_t_;
  Assortment last_offer_;
  bool aborted_ = false;
  long long lp_solves_ = 0;
  int cg_iterations_max_ = 0;
  bool all_lp_optimal_ = true;
  long long mle_failures_ = 0;
};

class StaticOraclePolicy final : public Policy {
 public:
  StaticOraclePolicy(const Instance& instance, lp::SolverOptions lp_options)
      : instance_(&instance), lp_options_(lp_options) {}

  Assortment next_assortment(long long period,
                             std::span<const long long> remaining_capacity,
                             Rng& rng) override {
    (void)period;
    if (aborted_ || any_depleted(remaining_capacity)) {
      aborted_ = true;
      return Assortment{};
    }
    if (!y_star_) {
      lp::LPResult lp =
          lp::solve_lp(instance_->view(), instance_->true_utilities, lp_options_);
      cg_iterations_ = lp.cg_iterations;
      lp_optimal_ = lp.status == lp::SolveStatus::Optimal;
      y_star_ = std::move(lp.distribution);
    }
    return y_star_->sample(rng);
  }

  void observe(long long, int) override {}

  std::string_view name() const override { return "static_oracle"; }

  PolicyReport report() const override {
    PolicyReport r;
    r.learned_distribution = y_star_;
    r.lp_solves = y_star_ ? 1 : 0;
    r.cg_iterations_max = cg_iterations_;
    r.all_lp_optimal = lp_optimal_;
    return r;
  }

 private:
  const Instance* instance_;
  lp::SolverOptions lp_options_;
  std::optional<lp::AssortmentDistribution> y_star_;
  bool aborted_ = false;
  int cg_iterations_ = 0;
  bool lp_optimal_ = true;
};

class UniformRandomPolicy final : public Policy {
 public:
  UniformRandomPolicy(const InstanceView& instance, std::uint64_t cap)
      : members_(instance.family->enumerate(cap)) {}

  Assortment next_assortment(long long period,
                             std::span<const long long> remaining_capacity,
                             Rng& rng) override {
    (void)period;
    if (aborted_ || any_depleted(remaining_capacity)) {
      aborted_ = true;
      return Assortment{};
    }
    return members_[rng.next_below(members_.size())];
  }

  void observe(long long, int) override {}

  std::string_view name() const override { return "uniform_random"; }

 private:
  std::vector<Assortment> members_;
  bool aborted_ = false;
};

}  // namespace

std::unique_ptr<Policy> make_online_tau(const InstanceView& instance, long long tau,
                                        double delta,
                                        const lp::SolverOptions& lp_options) {
  return std::make_unique<OnlineTauPolicy>(instance, tau, delta, lp_options);
}

std::unique_ptr<Policy> make_ucb(const InstanceView& instance,
                                 const UcbOptions& options) {
  return std::make_unique<UcbPolicy>(instance, options);
}

std::unique_ptr<Policy> make_static_oracle(const Instance& instance,
                                           const lp::SolverOptions& lp_options) {
  return std::make_unique<StaticOraclePolicy>(instance, lp_options);
}

std::unique_ptr<Policy> make_uniform_random(const InstanceView& instance,
                                            std::uint64_t enumeration_cap) {
  return std::make_unique<UniformRandomPolicy>(instance, enumeration_cap);
}

AssumptionReport check_assumption_1(const InstanceView& instance, long long tau,
                                    double delta) {
  AssumptionReport report;
  report.tau = tau;
  report.delta = delta;
  const double n = instance.num_products;
  const double k = instance.num_resources;
  report.eps_tau =
      tau >= instance.num_products
          ? confidence_radius_learning(tau, instance.num_products,
                                       instance.utility_bound, delta)
          : std::numeric_limits<double>::infinity();
  const double b = instance.family->max_assortment_size();
  const double lhs_i =
      static_cast<double>(tau) * std::sqrt(std::log(4.0 * n * std::max(k, 1.0) / delta));
  report.condition_i = true;
  report.condition_ii_times_b = true;
  report.condition_ii_unit = true;
  for (int res = 0; res < instance.num_resources; ++res) {
    AssumptionReport::Resource row;
    row.k = res;
    const double c = instance.capacity_rates[static_cast<std::size_t>(res)];
    row.lhs_i = lhs_i;
    row.rhs_i = static_cast<double>(instance.horizon) * c;
    row.pass_i = row.lhs_i <= row.rhs_i;
    row.rhs_ii = 0.5 * c;
    row.lhs_ii_times_b = b * report.eps_tau;
    row.lhs_ii_unit = report.eps_tau;
    row.pass_ii_times_b = row.lhs_ii_times_b <= row.rhs_ii;
    row.pass_ii_unit = row.lhs_ii_unit <= row.rhs_ii;
    report.condition_i &= row.pass_i;
    report.condition_ii_times_b &= row.pass_ii_times_b;
    report.condition_ii_unit &= row.pass_ii_unit;
    report.resources.push_back(row);
  }
  return report;
}

long long tau_from_rule(std::string_view rule, long long horizon) {
  if (rule == "T^{2/3}" || rule == "T^(2/3)") {
    return static_cast<long long>(
        std::floor(std::pow(static_cast<double>(horizon), 2.0 / 3.0)));
  }
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(rule.data(), rule.data() + rule.size(), value);
  if (ec != std::errc{} || ptr != rule.data() + rule.size() || value < 1) {
    throw ConfigError("tau rule must be \"T^{2/3}\" or a positive integer");
  }
  return value;
}

}  // namespace assort
