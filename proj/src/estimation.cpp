#include "assort/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace assort {

void SalesHistory::append(Assortment offered, int purchased) {
  if (purchased != 0 && !offered.contains(purchased)) {
    throw ContractViolation("purchased product not in the offered assortment");
  }
  if (offered.max_index() > num_products()) {
    throw std::out_of_range("assortment index beyond history dimension");
  }
  for (int i : offered.items()) ++exposures_[static_cast<std::size_t>(i) - 1];
  records_.emplace_back(std::move(offered), purchased);
}

long long SalesHistory::min_exposure() const {
  long long m = std::numeric_limits<long long>::max();
  for (long long n : exposures_) m = std::min(m, n);
  return exposures_.empty() ? 0 : m;
}

double neg_log_likelihood_single(double v, const SingleItemCounts& counts) {
  if (!(v > 0.0)) throw std::domain_error("utility must be positive");
  if (counts.offers < 1 || counts.purchases < 0 || counts.purchases > counts.offers) {
    throw std::invalid_argument("require 0 <= n <= m, m >= 1");
  }
  const double n = static_cast<double>(counts.purchases);
  const double m = static_cast<double>(counts.offers);
  return n * std::log1p(1.0 / v) + (m - n) * std::log1p(v);
}

double mle_single_item(const SingleItemCounts& counts, double utility_bound) {
  if (!(utility_bound >= 1.0)) throw std::invalid_argument("require R >= 1");
  if (counts.offers < 1 || counts.purchases < 0 || counts.purchases > counts.offers) {
    throw std::invalid_argument("require 0 <= n <= m, m >= 1");
  }
  if (counts.purchases == 0) return 1.0 / utility_bound;
  if (counts.purchases == counts.offers) return utility_bound;
  const double raw = static_cast<double>(counts.purchases) /
                     static_cast<double>(counts.offers - counts.purchases);
  return std::clamp(raw, 1.0 / utility_bound, utility_bound);
}

double neg_log_likelihood_full(const UtilityVector& v, const SalesHistory& history) {
  if (v.dimension() != history.num_products()) {
    throw std::out_of_range("utility dimension mismatch");
  }
  double total = 0.0;
  for (const auto& [offered, purchased] : history.records()) {
    total -= std::log(choice_prob(v, offered, purchased));
  }
  return total;
}

std::vector<double> likelihood_gradient(std::span<const double> theta,
                                        const SalesHistory& history) {
  const int n = history.num_products();
  if (static_cast<int>(theta.size()) != n) {
    throw std::out_of_range("theta dimension mismatch");
  }
  std::vector<double> u(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) u[i] = std::exp(theta[i]);
  std::vector<double> grad(theta.size(), 0.0);
  for (const auto& [offered, purchased] : history.records()) {
    double denom = 1.0;
    for (int i : offered.items()) denom += u[static_cast<std::size_t>(i) - 1];
    for (int i : offered.items()) {
      grad[static_cast<std::size_t>(i) - 1] +=
          u[static_cast<std::size_t>(i) - 1] / denom - (purchased == i ? 1.0 : 0.0);
    }
  }
  return grad;
}

namespace {

// Objective, gradient and Hessian diagonal at theta, in one pass.
struct Evaluation {
  double value = 0.0;
  std::vector<double> grad;
  std::vector<double> hess_diag;
};

Evaluation evaluate(std::span<const double> theta, const SalesHistory& history) {
  Evaluation e;
  e.grad.assign(theta.size(), 0.0);
  e.hess_diag.assign(theta.size(), 0.0);
  std::vector<double> u(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) u[i] = std::exp(theta[i]);
  for (const auto& [offered, purchased] : history.records()) {
    double denom = 1.0;
    for (int i : offered.items()) denom += u[static_cast<std::size_t>(i) - 1];
    double log_phi;
    if (purchased == 0) {
      log_phi = -std::log(denom);
    } else {
      log_phi = theta[static_cast<std::size_t>(purchased) - 1] - std::log(denom);
    }
    e.value -= log_phi;
    for (int i : offered.items()) {
      const double phi = u[static_cast<std::size_t>(i) - 1] / denom;
      e.grad[static_cast<std::size_t>(i) - 1] += phi - (purchased == i ? 1.0 : 0.0);
      e.hess_diag[static_cast<std::size_t>(i) - 1] += phi * (1.0 - phi);
    }
  }
  return e;
}

}  // namespace

MleResult mle_full(const SalesHistory& history, double utility_bound,
                   const MleOptions& options) {
  if (!(utility_bound >= 1.0)) throw std::invalid_argument("require R >= 1");
  if (!(options.tol > 0.0)) throw std::invalid_argument("require tol > 0");
  const int n = history.num_products();
  for (int i = 1; i <= n; ++i) {
    if (history.exposures(i) < 1) {
      throw InsufficientData("product " + std::to_string(i) +
                             " was never offered; likelihood is flat in it");
    }
  }
  const double box = std::log(utility_bound);
  auto project = [box](double x) { return std::clamp(x, -box, box); };

  std::vector<double> theta(static_cast<std::size_t>(n), 0.0);
  if (!options.warm_start.empty()) {
    if (static_cast<int>(options.warm_start.size()) != n) {
      throw std::invalid_argument("warm start dimension mismatch");
    }
    for (int i = 0; i < n; ++i) theta[static_cast<std::size_t>(i)] =
        project(options.warm_start[static_cast<std::size_t>(i)]);
  }

  Evaluation cur = evaluate(theta, history);
  std::vector<double> best_theta = theta;
  double best_value = cur.value;

  double step = 1.0;
  int iter = 0;
  double residual = 0.0;
  bool converged = false;
  std::vector<double> trial(theta.size());

  for (; iter < options.max_iterations; ++iter) {
    // Unit-step projected gradient residual is the stationarity measure.
    residual = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      residual = std::max(residual, std::abs(theta[i] - project(theta[i] - cur.grad[i])));
    }
    if (residual <= options.tol) {
      converged = true;
      break;
    }

    // Diagonally preconditioned projected step with Armijo backtracking.
    step = std::min(step * 2.0, 1e6);
    bool accepted = false;
    while (step > 1e-14) {
      double decrease_model = 0.0;
      for (std::size_t i = 0; i < theta.size(); ++i) {
        const double scale = std::max(cur.hess_diag[i], 1e-8);
        trial[i] = project(theta[i] - step * cur.grad[i] / scale);
        decrease_model += cur.grad[i] * (trial[i] - theta[i]);
      }
      if (trial == theta) {
        // Box-saturated in every coordinate the gradient pushes on.
        converged = true;
        break;
      }
      Evaluation next = evaluate(trial, history);
      if (next.value <= cur.value + 0.25 * decrease_model) {
        theta = trial;
        cur = std::move(next);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    if (cur.value < best_value) {
      best_value = cur.value;
      best_theta = theta;
    }
  }

  if (cur.value <= best_value) {
    best_value = cur.value;
    best_theta = theta;
  }
  MleResult result;
  result.theta = best_theta;
  std::vector<double> values(best_theta.size());
  for (std::size_t i = 0; i < best_theta.size(); ++i) values[i] = std::exp(best_theta[i]);
  // Clamp exactly onto the box before constructing the checked vector.
  for (double& v : values) v = std::clamp(v, 1.0 / utility_bound, utility_bound);
  result.utilities = UtilityVector::of(std::move(values), utility_bound);
  result.converged = converged;
  result.iterations = iter;
  result.residual = residual;
  return result;
}

double confidence_radius_learning(long long tau, int num_products,
                                  double utility_bound, double delta) {
  if (tau < num_products) {
    throw std::domain_error("learning length tau must be at least N");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::domain_error("delta must lie in (0,1)");
  }
  const double n = static_cast<double>(num_products);
  return 4.0 * utility_bound *
         std::sqrt(n / static_cast<double>(tau) * std::log(4.0 * n / delta));
}

double ConfidenceConstants::eps(long long n) const {
  if (n < 1) throw std::domain_error("eps(n) requires n >= 1");
  return (std::sqrt(static_cast<double>(num_products)) + 1.0) * psi /
         std::sqrt(static_cast<double>(n));
}

ConfidenceConstants ucb_constants(long long horizon, int num_products,
                                  int num_resources, int max_assortment_size,
                                  double utility_bound, double c_min, double delta,
                                  double psi_scale) {
  if (horizon < 1 || num_products < 1 || max_assortment_size < 0) {
    throw std::invalid_argument("require T >= 1, N >= 1, B >= 0");
  }
  if (!(c_min > 0.0 && c_min <= 1.0)) {
    throw std::invalid_argument("c_min must lie in (0,1]");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("delta must lie in (0,1)");
  }
  if (!(psi_scale > 0.0)) throw std::invalid_argument("psi_scale must be positive");
  const double n = static_cast<double>(num_products);
  const double t = static_cast<double>(horizon);
  const double b = static_cast<double>(max_assortment_size);
  const double kp1 = static_cast<double>(num_resources + 1);
  ConfidenceConstants c;
  c.num_products = num_products;
  c.delta = delta;
  const double br = 1.0 + b * utility_bound;
  c.psi = psi_scale * utility_bound * br * br *
          std::sqrt(6.0 * std::log(2.0 * n * t * kp1 / delta));
  c.omega = 11.0 * c.psi * n / c_min * std::sqrt(b / t * std::log(4.0 * kp1 / delta));
  return c;
}

}  // namespace assort
