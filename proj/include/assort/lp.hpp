#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "assort/mnl.hpp"
#include "assort/rng.hpp"

namespace assort::lp {

struct SolverOptions {
  double tol = 1e-7;        // reduced-cost certificate tolerance
  int max_iterations = 500; // column-generation cap
  std::uint64_t enumeration_cap = kDefaultEnumerationCap;
  bool keep_master = false; // retain the final restricted master for export
};

enum class SolveStatus { Optimal, IterationCapped, Heuristic };

const char* to_string(SolveStatus status);

// Sparse probability distribution over assortments, support sorted
// lexicographically. Sampling uses inverse CDF in that order.
struct AssortmentDistribution {
  std::vector<std::pair<Assortment, double>> support;

  double weight_sum() const;
  Assortment sample(Rng& rng) const;
  std::vector<Assortment> support_set(double drop_below = 1e-9) const;
};

// One column of the restricted master: objective coefficient and one
// consumption coefficient per resource.
struct MasterColumn {
  double objective = 0.0;
  std::vector<double> consumption;
};

// Final restricted master, exportable in LP interchange format.
struct MasterSnapshot {
  std::vector<Assortment> assortments;
  std::vector<MasterColumn> columns;
  std::vector<double> rhs;
};

struct LPResult {
  AssortmentDistribution distribution;
  double objective = 0.0;
  std::vector<double> duals;  // K resource duals, then the convexity-row dual
  int cg_iterations = 0;
  SolveStatus status = SolveStatus::Optimal;
  // Alternate optima may exist (a nonbasic column priced out at zero reduced
  // cost, or a degenerate basic weight).
  bool degenerate = false;
  std::optional<MasterSnapshot> master;
};

struct MasterSolution {
  std::vector<double> weights;  // one per column
  std::vector<double> duals;    // K resource duals, then the convexity dual
  std::vector<int> basis;       // labels: column index, or #columns + k for slack k
  double objective = 0.0;
};

// Solves  max c'y  s.t.  A y <= rhs (K rows),  sum y = 1,  y >= 0  over the
// given columns with a dense revised simplex, returning a vertex solution and
// the dual vector. Requires rhs >= 0 and a column whose consumption fits
// under rhs (the all-zero empty-assortment column in all callers here).
MasterSolution simplex_solve(const std::vector<MasterColumn>& columns,
                             std::span<const double> rhs);

struct PricedColumn {
  Assortment assortment;
  double value = 0.0;
};

// Maximizes f(S) = sum_{i in S} rr(i) v(i) / (1 + sum_{l in S} v(l)) over the
// family. Structured families are solved by bisection on the objective value
// combined with a greedy feasibility test; explicit lists are scanned.
PricedColumn price_column(const UtilityVector& v,
                          std::span<const double> reduced_revenues,
                          const AssortmentFamily& family, double tol,
                          std::uint64_t enumeration_cap = kDefaultEnumerationCap);

// Fluid assortment LP:
//   max sum_S R(S|v) y(S)
//   s.t. sum_S A(S,k|v) y(S) <= c(k) for all k, sum_S y(S) = 1, y >= 0,
// solved by column generation with exact pricing. The returned vertex
// solution has support of size at most K+1.
LPResult solve_lp(const InstanceView& instance, const UtilityVector& v,
                  const SolverOptions& options = {});

// Optimistic variant: revenue coefficients widened by +sum_{i in S} eps(n(i)),
// consumption coefficients by -sum_{i in S} eps(n(i)), capacities shrunk to
// (1-omega) c(k).
struct UcbLpSpec {
  const UtilityVector* utilities = nullptr;      // v_t
  std::span<const long long> exposure_counts;    // n(i) >= 1
  double omega = 0.0;                            // in [0, 1)
  std::function<double(long long)> eps;          // n -> eps(n)
};

// Pricing for the widened LP has no fractional structure, so optimality is
// certified by brute-force enumeration when the family is under the cap;
// otherwise column generation falls back to local search and the result is
// flagged Heuristic.
LPResult solve_ucb_lp(const InstanceView& instance, const UcbLpSpec& spec,
                      const SolverOptions& options = {});

// Writes the master in CPLEX LP interchange format.
void write_lp_format(std::ostream& out, const MasterSnapshot& master);

}  // namespace assort::lp
