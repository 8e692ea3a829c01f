#include <doctest.h>

#include <cmath>
#include <functional>

#include "assort/checks.hpp"
#include "assort/estimation.hpp"
#include "assort/rng.hpp"

using namespace assort;

namespace {

// Golden-section minimizer, used only as an independent oracle here.
double golden_section(double lo, double hi, const std::function<double(double)>& f) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > 1e-11) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

TEST_CASE("single-item negative log-likelihood values") {
  CHECK(neg_log_likelihood_single(1.0, {1, 1, 0}) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));

  // n = m: only the first term remains and the value decreases in v.
  const SingleItemCounts all_sold{1, 5, 5};
  CHECK(neg_log_likelihood_single(1.0, all_sold) ==
        doctest::Approx(5.0 * std::log(2.0)).epsilon(1e-12));
  CHECK(neg_log_likelihood_single(2.0, all_sold) <
        neg_log_likelihood_single(1.0, all_sold));
  CHECK(neg_log_likelihood_single(4.0, all_sold) <
        neg_log_likelihood_single(2.0, all_sold));

  CHECK(neg_log_likelihood_single(0.5, {1, 10, 3}) ==
        doctest::Approx(3.0 * std::log(3.0) + 7.0 * std::log(1.5)).epsilon(1e-12));

  CHECK_THROWS_AS(neg_log_likelihood_single(0.0, {1, 1, 0}), std::domain_error);
  CHECK_THROWS_AS(neg_log_likelihood_single(-1.0, {1, 1, 0}), std::domain_error);
}

TEST_CASE("single-item MLE closed form") {
  CHECK(mle_single_item({1, 10, 5}, 4.0) == 1.0);   // n = m/2
  CHECK(mle_single_item({1, 7, 7}, 3.0) == 3.0);    // all sold
  CHECK(mle_single_item({1, 7, 0}, 3.0) == doctest::Approx(1.0 / 3.0));
  CHECK(mle_single_item({1, 10, 3}, 5.0) == doctest::Approx(3.0 / 7.0).epsilon(1e-12));

  // Golden-section oracle on the likelihood itself.
  const double numeric = golden_section(0.2, 5.0, [](double v) {
    return neg_log_likelihood_single(v, {1, 10, 3});
  });
  CHECK(std::abs(mle_single_item({1, 10, 3}, 5.0) - numeric) < 1e-6);
}

TEST_CASE("single-item MLE matches a numeric minimizer exhaustively") {
  const checks::CheckResult result = checks::check_mle(77, 50, 100);
  CHECK(result.passed);
  CHECK(result.violations == 0);
  CHECK(result.worst_slack <= 1e-5);
}

TEST_CASE("full likelihood basics") {
  SalesHistory empty(3);
  CHECK(neg_log_likelihood_full(UtilityVector::of({1, 1, 1}, 2.0), empty) == 0.0);
  CHECK(likelihood_gradient(std::vector<double>{0, 0, 0}, empty) ==
        std::vector<double>{0, 0, 0});

  SalesHistory one(1);
  one.append(Assortment::of({1}), 0);
  CHECK(neg_log_likelihood_full(UtilityVector::of({1.0}, 2.0), one) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));

  // Single record (S={i}, I=i): gradient is phi - 1 at i, zero elsewhere.
  SalesHistory sold(3);
  sold.append(Assortment::of({2}), 2);
  const std::vector<double> grad =
      likelihood_gradient(std::vector<double>{0.3, 0.1, -0.2}, sold);
  CHECK(grad[0] == 0.0);
  CHECK(grad[2] == 0.0);
  const double phi = std::exp(0.1) / (1.0 + std::exp(0.1));
  CHECK(grad[1] == doctest::Approx(phi - 1.0).epsilon(1e-12));

  CHECK_THROWS_AS(SalesHistory(2).append(Assortment::of({1}), 2), ContractViolation);
}

TEST_CASE("full likelihood matches per-record sum on random histories") {
  Rng rng(31);
  for (int c = 0; c < 100; ++c) {
    const int n = 2 + static_cast<int>(rng.next_below(4));
    std::vector<double> values(n);
    for (double& x : values) x = rng.uniform(0.4, 2.5);
    const UtilityVector v = UtilityVector::of(values, 2.5);
    SalesHistory history(n);
    double expected = 0.0;
    for (int r = 0; r < 20; ++r) {
      std::vector<int> items;
      for (int i = 1; i <= n; ++i) {
        if (rng.bernoulli(0.5)) items.push_back(i);
      }
      const Assortment s = Assortment::of(items);
      const int purchased = sample_purchase(v, s, rng);
      history.append(s, purchased);
      expected -= std::log(choice_prob(v, s, purchased));
    }
    CHECK(neg_log_likelihood_full(v, history) ==
          doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("full likelihood is convex along segments in theta") {
  Rng rng(41);
  const int n = 4;
  const UtilityVector truth = UtilityVector::of({1.0, 0.5, 2.0, 1.5}, 2.0);
  SalesHistory history(n);
  for (int r = 0; r < 40; ++r) {
    std::vector<int> items;
    for (int i = 1; i <= n; ++i) {
      if (rng.bernoulli(0.6)) items.push_back(i);
    }
    const Assortment s = Assortment::of(items);
    history.append(s, sample_purchase(truth, s, rng));
  }
  auto value_at = [&](const std::vector<double>& theta) {
    std::vector<double> values(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) values[i] = std::exp(theta[i]);
    return neg_log_likelihood_full(UtilityVector::of(values, 10.0), history);
  };
  for (int c = 0; c < 1000; ++c) {
    std::vector<double> t1(n), t2(n), mix(n);
    const double lambda = rng.uniform01();
    for (int i = 0; i < n; ++i) {
      t1[i] = rng.uniform(-2.0, 2.0);
      t2[i] = rng.uniform(-2.0, 2.0);
      mix[i] = lambda * t1[i] + (1.0 - lambda) * t2[i];
    }
    CHECK(value_at(mix) <=
          lambda * value_at(t1) + (1.0 - lambda) * value_at(t2) + 1e-9);
  }
}

TEST_CASE("full MLE separates on singleton-only histories") {
  const int n = 3;
  const UtilityVector truth = UtilityVector::of({0.6, 1.0, 1.8}, 2.0);
  Rng rng(53);
  SalesHistory history(n);
  std::vector<long long> offers(n, 0), buys(n, 0);
  for (int r = 0; r < 600; ++r) {
    const int i = 1 + static_cast<int>(rng.next_below(n));
    const Assortment s = Assortment::of({i});
    const int purchased = sample_purchase(truth, s, rng);
    history.append(s, purchased);
    ++offers[i - 1];
    if (purchased == i) ++buys[i - 1];
  }
  MleOptions options;
  options.tol = 1e-10;
  const MleResult result = mle_full(history, 2.0, options);
  CHECK(result.converged);
  for (int i = 1; i <= n; ++i) {
    const double closed = mle_single_item({i, offers[i - 1], buys[i - 1]}, 2.0);
    CHECK(result.utilities(i) == doctest::Approx(closed).epsilon(1e-6));
  }
}

TEST_CASE("full MLE matches a grid search on a tiny fixed history") {
  const int n = 2;
  SalesHistory history(n);
  history.append(Assortment::of({1, 2}), 1);
  history.append(Assortment::of({1, 2}), 0);
  history.append(Assortment::of({1}), 1);
  history.append(Assortment::of({2}), 0);
  const double bound = 2.0;

  double best_v1 = 1.0, best_v2 = 1.0, best = 1e300;
  for (double v1 = 0.5; v1 <= 2.0 + 1e-12; v1 += 1e-3) {
    for (double v2 = 0.5; v2 <= 2.0 + 1e-12; v2 += 1e-3) {
      const double value =
          neg_log_likelihood_full(UtilityVector::of({v1, v2}, bound), history);
      if (value < best) {
        best = value;
        best_v1 = v1;
        best_v2 = v2;
      }
    }
  }
  MleOptions options;
  options.tol = 1e-10;
  const MleResult result = mle_full(history, bound, options);
  CHECK(result.converged);
  CHECK(std::abs(result.utilities(1) - best_v1) < 2e-3);
  CHECK(std::abs(result.utilities(2) - best_v2) < 2e-3);
}

TEST_CASE("full MLE is statistically consistent with heavy exposure") {
  const int n = 3;
  const double bound = 2.0;
  int good = 0;
  for (int seed = 0; seed < 20; ++seed) {
    Rng rng(derive_seed(1000, {static_cast<std::uint64_t>(seed)}));
    std::vector<double> values(n);
    for (double& x : values) x = std::exp(rng.uniform(-std::log(bound), std::log(bound)));
    const UtilityVector truth = UtilityVector::of(values, bound);
    SalesHistory history(n);
    const Assortment full = Assortment::of({1, 2, 3});
    for (int r = 0; r < 10000; ++r) {
      history.append(full, sample_purchase(truth, full, rng));
    }
    MleOptions options;
    options.tol = 1e-9;
    const MleResult result = mle_full(history, bound, options);
    double err = 0.0;
    for (int i = 1; i <= n; ++i) {
      err = std::max(err, std::abs(std::log(result.utilities(i) / truth(i))));
    }
    if (result.converged && err <= 0.1) ++good;
  }
  CHECK(good >= 18);
}

TEST_CASE("full MLE error paths") {
  SalesHistory history(2);
  history.append(Assortment::of({1}), 1);  // product 2 never offered
  CHECK_THROWS_AS(mle_full(history, 2.0), InsufficientData);

  history.append(Assortment::of({2}), 0);
  MleOptions cap;
  cap.max_iterations = 0;
  const MleResult result = mle_full(history, 2.0, cap);
  CHECK_FALSE(result.converged);  // best iterate still returned
  CHECK(result.utilities.dimension() == 2);
}

TEST_CASE("learning-phase confidence radius") {
  const double eps1 = confidence_radius_learning(1000, 10, 3.0, 0.1);
  CHECK(eps1 == doctest::Approx(12.0 * std::sqrt(0.01 * std::log(400.0)))
                    .epsilon(1e-12));
  const double eps2 = confidence_radius_learning(2000, 10, 3.0, 0.1);
  CHECK(eps2 == doctest::Approx(eps1 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(confidence_radius_learning(5, 10, 3.0, 0.1), std::domain_error);
  CHECK_THROWS_AS(confidence_radius_learning(1000, 10, 3.0, 1.0), std::domain_error);
}

TEST_CASE("ucb confidence constants") {
  // B = 0 collapses the (1+BR)^2 factor.
  const ConfidenceConstants flat = ucb_constants(1000, 4, 1, 0, 2.0, 0.5, 0.1);
  CHECK(flat.psi ==
        doctest::Approx(2.0 * std::sqrt(6.0 * std::log(2.0 * 4 * 1000 * 2 / 0.1)))
            .epsilon(1e-12));

  const ConfidenceConstants c = ucb_constants(1000000, 5, 2, 2, 2.0, 0.5, 0.1);
  const double psi_expected =
      2.0 * std::pow(1.0 + 2.0 * 2.0, 2.0) *
      std::sqrt(6.0 * std::log(2.0 * 5.0 * 1e6 * 3.0 / 0.1));
  const double omega_expected = 11.0 * psi_expected * 5.0 / 0.5 *
                                std::sqrt(2.0 / 1e6 * std::log(4.0 * 3.0 / 0.1));
  CHECK(c.psi == doctest::Approx(psi_expected).epsilon(1e-12));
  CHECK(c.omega == doctest::Approx(omega_expected).epsilon(1e-12));

  CHECK(c.eps(4) == doctest::Approx(c.eps(1) / 2.0).epsilon(1e-12));
  CHECK(c.eps(400) == doctest::Approx(c.eps(100) / 2.0).epsilon(1e-12));
  CHECK_THROWS_AS(c.eps(0), std::domain_error);

  const ConfidenceConstants scaled =
      ucb_constants(1000000, 5, 2, 2, 2.0, 0.5, 0.1, 0.25);
  CHECK(scaled.psi == doctest::Approx(0.25 * c.psi).epsilon(1e-12));
  CHECK(scaled.omega == doctest::Approx(0.25 * c.omega).epsilon(1e-12));
}

TEST_CASE("learning-phase confidence coverage (reduced run count)") {
  const checks::CheckResult result = checks::check_coverage(99, 60, 0.1);
  CHECK(result.passed);
}
