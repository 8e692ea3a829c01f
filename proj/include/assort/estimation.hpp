#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "assort/mnl.hpp"

namespace assort {

// Outcome counts from repeatedly offering the single-item assortment {i}.
struct SingleItemCounts {
  int product = 0;        // i
  long long offers = 0;   // m, number of times {i} was offered
  long long purchases = 0;  // n, number of purchases of i among those offers
};

// Stream of (offered assortment, purchased product) pairs with per-product
// exposure counts n(i) = #{s : i in S_s}.
class SalesHistory {
 public:
  explicit SalesHistory(int num_products)
      : exposures_(static_cast<std::size_t>(num_products), 0) {}

  void append(Assortment offered, int purchased);

  const std::vector<std::pair<Assortment, int>>& records() const { return records_; }
  long long size() const { return static_cast<long long>(records_.size()); }
  int num_products() const { return static_cast<int>(exposures_.size()); }
  long long exposures(int i) const { return exposures_[static_cast<std::size_t>(i) - 1]; }
  std::span<const long long> exposure_counts() const { return exposures_; }
  long long min_exposure() const;

 private:
  std::vector<std::pair<Assortment, int>> records_;
  std::vector<long long> exposures_;
};

// Negative log-likelihood of single-item offer counts:
//   n log(1 + 1/v) + (m - n) log(1 + v).
double neg_log_likelihood_single(double v, const SingleItemCounts& counts);

// Box-constrained minimizer of the single-item likelihood on [1/R, R]:
// clip(n / (m - n)), with the boundary values at n = 0 and n = m.
double mle_single_item(const SingleItemCounts& counts, double utility_bound);

// Sum of per-record negative log choice probabilities.
double neg_log_likelihood_full(const UtilityVector& v, const SalesHistory& history);

// Gradient of the full likelihood under the reparameterization
// theta(i) = log v(i):
//   g(i) = sum over records with i in S of (phi(i, S | e^theta) - 1{I = i}).
std::vector<double> likelihood_gradient(std::span<const double> theta,
                                        const SalesHistory& history);

struct MleOptions {
  double tol = 1e-8;         // sup-norm of the projected gradient step
  int max_iterations = 10000;
  std::span<const double> warm_start;  // optional theta warm start
};

struct MleResult {
  UtilityVector utilities;
  std::vector<double> theta;  // log utilities
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;  // projected-gradient sup-norm at the returned point
};

// Box-constrained minimizer of the full likelihood over [1/R, R]^N, computed
// by projected gradient descent in theta-space with a diagonal preconditioner
// and Armijo backtracking. Requires every product to appear in at least one
// record; throws InsufficientData otherwise. On hitting the iteration cap the
// best iterate is returned with converged = false.
MleResult mle_full(const SalesHistory& history, double utility_bound,
                   const MleOptions& options = {});

// Learning-phase confidence radius  4 R sqrt((N / tau) log(4N / delta)).
double confidence_radius_learning(long long tau, int num_products,
                                  double utility_bound, double delta);

// Confidence constants for the adaptive policy. omega >= 1 is reported via
// the flag, not an error; the policy refuses to start on it.
struct ConfidenceConstants {
  int num_products = 0;
  double delta = 0.0;
  double psi = 0.0;
  double omega = 0.0;

  bool omega_ok() const { return omega < 1.0; }
  // eps(n) = (sqrt(N) + 1) Psi / sqrt(n); requires n >= 1.
  double eps(long long n) const;
};

// psi = R (1 + B R)^2 sqrt(6 log(2 N T (K+1) / delta)),
// omega = (11 psi N / c_min) sqrt((B / T) log(4 (K+1) / delta)).
// psi_scale rescales psi (and hence eps and omega); it exists for desk-scale
// experiments where the theoretical constants are far too conservative.
ConfidenceConstants ucb_constants(long long horizon, int num_products,
                                  int num_resources, int max_assortment_size,
                                  double utility_bound, double c_min, double delta,
                                  double psi_scale = 1.0);

}  // namespace assort
