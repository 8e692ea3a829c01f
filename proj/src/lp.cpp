#include "assort/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>

namespace assort::lp {

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::IterationCapped: return "iteration_capped";
    case SolveStatus::Heuristic: return "heuristic";
  }
  return "unknown";
}

double AssortmentDistribution::weight_sum() const {
  double total = 0.0;
  for (const auto& [s, w] : support) total += w;
  return total;
}

Assortment AssortmentDistribution::sample(Rng& rng) const {
  const double u = rng.uniform01() * weight_sum();
  double cumulative = 0.0;
  for (const auto& [s, w] : support) {
    cumulative += w;
    if (u < cumulative) return s;
  }
  return support.empty() ? Assortment{} : support.back().first;
}

std::vector<Assortment> AssortmentDistribution::support_set(double drop_below) const {
  std::vector<Assortment> out;
  for (const auto& [s, w] : support) {
    if (w > drop_below) out.push_back(s);
  }
  return out;
}

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kEnterTol = 1e-9;

// Dense LU with partial pivoting; m stays at K+1 so a fresh factorization
// per simplex iteration is cheaper than maintaining an update form.
class Lu {
 public:
  Lu(std::vector<double> a, int m) : m_(m), a_(std::move(a)), rows_(m) {
    for (int i = 0; i < m_; ++i) rows_[i] = i;
    for (int k = 0; k < m_; ++k) {
      int piv = k;
      double best = std::abs(at(k, k));
      for (int i = k + 1; i < m_; ++i) {
        const double cand = std::abs(at(i, k));
        if (cand > best) {
          best = cand;
          piv = i;
        }
      }
      if (best < kPivotTol) {
        throw DegeneratePivot("basis matrix pivot " + std::to_string(best) +
                              " below stability threshold");
      }
      std::swap(rows_[k], rows_[piv]);
      const double d = at(k, k);
      for (int i = k + 1; i < m_; ++i) {
        const double l = at(i, k) / d;
        at(i, k) = l;
        for (int j = k + 1; j < m_; ++j) at(i, j) -= l * at(k, j);
      }
    }
  }

  // B x = b
  std::vector<double> solve(std::span<const double> b) const {
    std::vector<double> y(m_);
    for (int i = 0; i < m_; ++i) {
      double acc = b[static_cast<std::size_t>(rows_[i])];
      for (int j = 0; j < i; ++j) acc -= at(i, j) * y[static_cast<std::size_t>(j)];
      y[static_cast<std::size_t>(i)] = acc;
    }
    for (int i = m_ - 1; i >= 0; --i) {
      double acc = y[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < m_; ++j) acc -= at(i, j) * y[static_cast<std::size_t>(j)];
      y[static_cast<std::size_t>(i)] = acc / at(i, i);
    }
    return y;
  }

  // B' x = c
  std::vector<double> solve_transposed(std::span<const double> c) const {
    std::vector<double> z(m_);
    for (int i = 0; i < m_; ++i) {  // U' z = c, forward
      double acc = c[static_cast<std::size_t>(i)];
      for (int j = 0; j < i; ++j) acc -= at(j, i) * z[static_cast<std::size_t>(j)];
      z[static_cast<std::size_t>(i)] = acc / at(i, i);
    }
    for (int i = m_ - 1; i >= 0; --i) {  // L' w = z, backward, unit diagonal
      double acc = z[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < m_; ++j) acc -= at(j, i) * z[static_cast<std::size_t>(j)];
      z[static_cast<std::size_t>(i)] = acc;
    }
    std::vector<double> x(m_);
    for (int i = 0; i < m_; ++i) x[static_cast<std::size_t>(rows_[i])] =
        z[static_cast<std::size_t>(i)];
    return x;
  }

 private:
  double& at(int i, int j) { return a_[static_cast<std::size_t>(rows_[i]) * m_ + j]; }
  double at(int i, int j) const {
    return a_[static_cast<std::size_t>(rows_[i]) * m_ + j];
  }

  int m_;
  std::vector<double> a_;
  std::vector<int> rows_;
};

}  // namespace

MasterSolution simplex_solve(const std::vector<MasterColumn>& columns,
                             std::span<const double> rhs) {
  const int n = static_cast<int>(columns.size());
  const int k = static_cast<int>(rhs.size());
  const int m = k + 1;
  if (n == 0) throw std::invalid_argument("master requires at least one column");
  for (const MasterColumn& col : columns) {
    if (static_cast<int>(col.consumption.size()) != k) {
      throw std::invalid_argument("column consumption dimension mismatch");
    }
  }
  for (double r : rhs) {
    if (!(r >= 0.0)) throw std::invalid_argument("master requires rhs >= 0");
  }

  // Labels: 0..n-1 structural, n..n+k-1 slacks.
  auto column_of = [&](int label, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    if (label < n) {
      for (int r = 0; r < k; ++r) out[static_cast<std::size_t>(r)] =
          columns[static_cast<std::size_t>(label)].consumption[static_cast<std::size_t>(r)];
      out[static_cast<std::size_t>(k)] = 1.0;
    } else {
      out[static_cast<std::size_t>(label - n)] = 1.0;
    }
  };
  auto cost_of = [&](int label) {
    return label < n ? columns[static_cast<std::size_t>(label)].objective : 0.0;
  };

  // Initial basis: the K slacks plus a structural column that fits under rhs.
  int start = -1;
  for (int j = 0; j < n && start < 0; ++j) {
    bool fits = true;
    for (int r = 0; r < k; ++r) {
      if (columns[static_cast<std::size_t>(j)].consumption[static_cast<std::size_t>(r)] >
          rhs[static_cast<std::size_t>(r)] + 1e-12) {
        fits = false;
        break;
      }
    }
    if (fits) start = j;
  }
  if (start < 0) {
    throw std::invalid_argument(
        "no starting column fits under rhs; include the empty-assortment column");
  }

  std::vector<int> basis(static_cast<std::size_t>(m));
  for (int r = 0; r < k; ++r) basis[static_cast<std::size_t>(r)] = n + r;
  basis[static_cast<std::size_t>(k)] = start;

  std::vector<double> b(rhs.begin(), rhs.end());
  b.push_back(1.0);

  std::vector<double> col_buf(static_cast<std::size_t>(m));
  std::vector<double> bmat(static_cast<std::size_t>(m) * m);
  std::vector<double> cb(static_cast<std::size_t>(m));
  std::vector<char> in_basis(static_cast<std::size_t>(n + k), 0);

  int degenerate_streak = 0;
  const int bland_after = 2 * m + 10;

  std::vector<double> x, pi;
  for (long iteration = 0;; ++iteration) {
    if (iteration > 200000) {
      throw DegeneratePivot("simplex failed to terminate");
    }
    std::fill(in_basis.begin(), in_basis.end(), 0);
    for (int r = 0; r < m; ++r) {
      column_of(basis[static_cast<std::size_t>(r)], col_buf);
      for (int i = 0; i < m; ++i) {
        bmat[static_cast<std::size_t>(i) * m + r] = col_buf[static_cast<std::size_t>(i)];
      }
      cb[static_cast<std::size_t>(r)] = cost_of(basis[static_cast<std::size_t>(r)]);
      in_basis[static_cast<std::size_t>(basis[static_cast<std::size_t>(r)])] = 1;
    }
    Lu lu(bmat, m);
    x = lu.solve(b);
    for (double& xi : x) {
      if (xi < 0.0 && xi > -1e-9) xi = 0.0;
    }
    pi = lu.solve_transposed(cb);

    // Entering variable: Dantzig rule, Bland after a degenerate streak.
    const bool bland = degenerate_streak > bland_after;
    int enter = -1;
    double best = kEnterTol;
    for (int label = 0; label < n + k; ++label) {
      if (in_basis[static_cast<std::size_t>(label)]) continue;
      double d;
      if (label < n) {
        const MasterColumn& col = columns[static_cast<std::size_t>(label)];
        double dot = pi[static_cast<std::size_t>(k)];
        for (int r = 0; r < k; ++r) {
          dot += pi[static_cast<std::size_t>(r)] * col.consumption[static_cast<std::size_t>(r)];
        }
        d = col.objective - dot;
      } else {
        d = -pi[static_cast<std::size_t>(label - n)];
      }
      if (d > best) {
        enter = label;
        best = d;
        if (bland) break;
      }
    }
    if (enter < 0) break;  // optimal

    column_of(enter, col_buf);
    std::vector<double> w = lu.solve(col_buf);
    int leave = -1;
    double min_ratio = std::numeric_limits<double>::infinity();
    for (int r = 0; r < m; ++r) {
      if (w[static_cast<std::size_t>(r)] > kPivotTol) {
        const double ratio =
            std::max(x[static_cast<std::size_t>(r)], 0.0) / w[static_cast<std::size_t>(r)];
        if (ratio < min_ratio - 1e-12 ||
            (ratio < min_ratio + 1e-12 &&
             (leave < 0 || basis[static_cast<std::size_t>(r)] <
                               basis[static_cast<std::size_t>(leave)]))) {
          min_ratio = ratio;
          leave = r;
        }
      }
    }
    if (leave < 0) {
      throw DegeneratePivot("unbounded improving direction in a bounded master");
    }
    degenerate_streak = min_ratio < 1e-12 ? degenerate_streak + 1 : 0;
    basis[static_cast<std::size_t>(leave)] = enter;
  }

  MasterSolution solution;
  solution.weights.assign(static_cast<std::size_t>(n), 0.0);
  for (int r = 0; r < m; ++r) {
    const int label = basis[static_cast<std::size_t>(r)];
    if (label < n) {
      solution.weights[static_cast<std::size_t>(label)] =
          std::max(x[static_cast<std::size_t>(r)], 0.0);
    }
  }
  solution.duals = pi;
  solution.basis = basis;
  solution.objective = 0.0;
  for (int j = 0; j < n; ++j) {
    solution.objective +=
        columns[static_cast<std::size_t>(j)].objective * solution.weights[static_cast<std::size_t>(j)];
  }
  return solution;
}

namespace {

// Greedy maximizer of sum_{i in S} (rr(i) - z) v(i) subject to the family
// constraint; valid for the two structured kinds.
struct GreedyResult {
  std::vector<int> items;  // ascending
  double value = 0.0;
};

GreedyResult greedy_threshold_set(const UtilityVector& v,
                                  std::span<const double> rr,
                                  const AssortmentFamily& family, double z) {
  const int n = v.dimension();
  std::vector<std::pair<double, int>> scored;  // (-score, index) for stable order
  scored.reserve(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) {
    const double score = (rr[static_cast<std::size_t>(i) - 1] - z) * v(i);
    if (score > 0.0) scored.emplace_back(-score, i);
  }
  std::sort(scored.begin(), scored.end());
  GreedyResult out;
  if (family.kind() == FamilyKind::Cardinality) {
    const int limit = family.max_assortment_size();
    for (const auto& [neg, i] : scored) {
      if (static_cast<int>(out.items.size()) >= limit) break;
      out.items.push_back(i);
      out.value -= neg;
    }
  } else {
    std::vector<int> used(static_cast<std::size_t>(family.blocks()), 0);
    for (const auto& [neg, i] : scored) {
      int& u = used[static_cast<std::size_t>(family.block_of(i))];
      if (u >= family.per_block()) continue;
      ++u;
      out.items.push_back(i);
      out.value -= neg;
    }
  }
  std::sort(out.items.begin(), out.items.end());
  return out;
}

double fractional_objective(const UtilityVector& v, std::span<const double> rr,
                            const Assortment& s) {
  double num = 0.0, denom = 1.0;
  for (int i : s.items()) {
    num += rr[static_cast<std::size_t>(i) - 1] * v(i);
    denom += v(i);
  }
  return num / denom;
}

}  // namespace

PricedColumn price_column(const UtilityVector& v,
                          std::span<const double> reduced_revenues,
                          const AssortmentFamily& family, double tol,
                          std::uint64_t enumeration_cap) {
  (void)tol;  // bisection below is accurate to ~1e-18 relative, beyond any tol
  const int n = v.dimension();
  if (static_cast<int>(reduced_revenues.size()) != n || family.dimension() != n) {
    throw std::out_of_range("pricing dimension mismatch");
  }

  if (family.kind() == FamilyKind::ExplicitList) {
    PricedColumn best;  // the empty assortment scores 0
    family.for_each_member(
        [&](const Assortment& s) {
          const double value = fractional_objective(v, reduced_revenues, s);
          if (value > best.value + 1e-15) {
            best.assortment = s;
            best.value = value;
          }
        },
        enumeration_cap);
    return best;
  }

  double lo = 0.0, hi = 0.0;
  for (double r : reduced_revenues) {
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  // Invariant: a member with objective >= lo exists (the empty set when
  // lo <= 0), and every member scores < hi + tiny.
  for (int step = 0; step < 60; ++step) {
    const double mid = 0.5 * (lo + hi);
    if (greedy_threshold_set(v, reduced_revenues, family, mid).value >= mid) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  GreedyResult g = greedy_threshold_set(v, reduced_revenues, family, lo);
  PricedColumn out;
  out.assortment = Assortment::of(g.items);
  out.value = fractional_objective(v, reduced_revenues, out.assortment);
  if (out.value <= 0.0) {
    out.assortment = Assortment{};
    out.value = 0.0;
  }
  return out;
}

namespace {

struct CgProblem {
  std::vector<double> rhs;
  std::function<MasterColumn(const Assortment&)> make_column;
  // Best column against the given resource duals, and whether the value is
  // an exact maximum (certifying optimality at termination).
  std::function<std::pair<PricedColumn, bool>(std::span<const double>)> price;
};

LPResult run_column_generation(const CgProblem& problem,
                               const SolverOptions& options) {
  if (options.max_iterations < 1) {
    throw std::invalid_argument("column generation needs at least one iteration");
  }
  std::vector<Assortment> assortments{Assortment{}};
  std::vector<MasterColumn> columns{problem.make_column(Assortment{})};
  std::map<Assortment, int> index{{Assortment{}, 0}};

  LPResult result;
  result.status = SolveStatus::IterationCapped;
  MasterSolution master;
  for (int iteration = 1; iteration <= options.max_iterations; ++iteration) {
    master = simplex_solve(columns, problem.rhs);
    result.cg_iterations = iteration;
    const double mu = master.duals.back();
    auto [priced, exact] =
        problem.price(std::span<const double>(master.duals.data(), problem.rhs.size()));
    if (priced.value <= mu + options.tol) {
      result.status = exact ? SolveStatus::Optimal : SolveStatus::Heuristic;
      break;
    }
    auto [it, inserted] = index.emplace(priced.assortment,
                                        static_cast<int>(columns.size()));
    if (!inserted) {
      // The master already carries this column; its reduced cost can only be
      // positive through roundoff.
      if (priced.value <= mu + 100.0 * options.tol) {
        result.status = exact ? SolveStatus::Optimal : SolveStatus::Heuristic;
        break;
      }
      throw DegeneratePivot("pricing re-proposed an existing column "
                            "with positive reduced cost");
    }
    assortments.push_back(priced.assortment);
    columns.push_back(problem.make_column(priced.assortment));
  }

  const int k = static_cast<int>(problem.rhs.size());
  result.duals = master.duals;
  result.objective = master.objective;
  bool any_zero_basic = false;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const double w = master.weights[j];
    if (w > 1e-12) {
      result.distribution.support.emplace_back(assortments[j], w);
    }
  }
  std::sort(result.distribution.support.begin(), result.distribution.support.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  // Alternate-optimum detection: a nonbasic column with (near) zero reduced
  // cost, or a degenerate basic weight.
  std::vector<char> basic(columns.size(), 0);
  for (int label : master.basis) {
    if (label < static_cast<int>(columns.size())) {
      basic[static_cast<std::size_t>(label)] = 1;
      if (master.weights[static_cast<std::size_t>(label)] <= 1e-9) any_zero_basic = true;
    }
  }
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (basic[j]) continue;
    double dot = master.duals[static_cast<std::size_t>(k)];
    for (int r = 0; r < k; ++r) {
      dot += master.duals[static_cast<std::size_t>(r)] *
             columns[j].consumption[static_cast<std::size_t>(r)];
    }
    if (std::abs(columns[j].objective - dot) <= 10.0 * options.tol) {
      result.degenerate = true;
    }
  }
  if (any_zero_basic) result.degenerate = true;

  if (options.keep_master) {
    result.master = MasterSnapshot{assortments, columns, problem.rhs};
  }
  return result;
}

std::vector<double> reduced_revenues(const InstanceView& instance,
                                     std::span<const double> lambda) {
  std::vector<double> rr(instance.revenues.begin(), instance.revenues.end());
  for (int i = 1; i <= instance.num_products; ++i) {
    for (int k = 0; k < instance.num_resources; ++k) {
      rr[static_cast<std::size_t>(i) - 1] -=
          lambda[static_cast<std::size_t>(k)] * instance.consumes(i, k);
    }
  }
  return rr;
}

}  // namespace

LPResult solve_lp(const InstanceView& instance, const UtilityVector& v,
                  const SolverOptions& options) {
  if (v.dimension() != instance.num_products) {
    throw std::out_of_range("utility dimension mismatch");
  }
  CgProblem problem;
  problem.rhs.assign(instance.capacity_rates.begin(), instance.capacity_rates.end());
  problem.make_column = [&](const Assortment& s) {
    MasterColumn col;
    col.objective = expected_revenue(v, s, instance.revenues);
    col.consumption.resize(static_cast<std::size_t>(instance.num_resources));
    for (int k = 0; k < instance.num_resources; ++k) {
      col.consumption[static_cast<std::size_t>(k)] =
          expected_consumption(v, s, *instance.consumption, k);
    }
    return col;
  };
  problem.price = [&](std::span<const double> lambda) {
    const std::vector<double> rr = reduced_revenues(instance, lambda);
    return std::make_pair(
        price_column(v, rr, *instance.family, options.tol * 0.01,
                     options.enumeration_cap),
        true);
  };
  return run_column_generation(problem, options);
}

LPResult solve_ucb_lp(const InstanceView& instance, const UcbLpSpec& spec,
                      const SolverOptions& options) {
  const UtilityVector& v = *spec.utilities;
  if (v.dimension() != instance.num_products) {
    throw std::out_of_range("utility dimension mismatch");
  }
  if (!(spec.omega >= 0.0 && spec.omega < 1.0)) {
    throw std::invalid_argument("solve_ucb_lp requires omega in [0,1)");
  }
  if (static_cast<int>(spec.exposure_counts.size()) != instance.num_products) {
    throw std::out_of_range("exposure count dimension mismatch");
  }
  std::vector<double> eps(static_cast<std::size_t>(instance.num_products));
  for (int i = 0; i < instance.num_products; ++i) {
    const long long n = spec.exposure_counts[static_cast<std::size_t>(i)];
    if (n < 1) throw std::invalid_argument("UCB-LP requires every n(i) >= 1");
    eps[static_cast<std::size_t>(i)] = spec.eps(n);
  }
  auto widening = [&](const Assortment& s) {
    double total = 0.0;
    for (int i : s.items()) total += eps[static_cast<std::size_t>(i) - 1];
    return total;
  };

  CgProblem problem;
  problem.rhs.resize(static_cast<std::size_t>(instance.num_resources));
  for (int k = 0; k < instance.num_resources; ++k) {
    problem.rhs[static_cast<std::size_t>(k)] =
        (1.0 - spec.omega) * instance.capacity_rates[static_cast<std::size_t>(k)];
  }
  problem.make_column = [&](const Assortment& s) {
    const double e = widening(s);
    MasterColumn col;
    col.objective = expected_revenue(v, s, instance.revenues) + e;
    col.consumption.resize(static_cast<std::size_t>(instance.num_resources));
    for (int k = 0; k < instance.num_resources; ++k) {
      col.consumption[static_cast<std::size_t>(k)] =
          expected_consumption(v, s, *instance.consumption, k) - e;
    }
    return col;
  };

  const bool enumerable = instance.family->member_count() <= options.enumeration_cap;
  auto raw_value = [&](const Assortment& s, std::span<const double> lambda) {
    const MasterColumn col = problem.make_column(s);
    double dot = 0.0;
    for (int k = 0; k < instance.num_resources; ++k) {
      dot += lambda[static_cast<std::size_t>(k)] *
             col.consumption[static_cast<std::size_t>(k)];
    }
    return col.objective - dot;
  };

  problem.price = [&](std::span<const double> lambda) {
    if (enumerable) {
      PricedColumn best;  // empty assortment scores 0
      best.value = raw_value(Assortment{}, lambda);
      instance.family->for_each_member(
          [&](const Assortment& s) {
            const double value = raw_value(s, lambda);
            if (value > best.value + 1e-15) {
              best.assortment = s;
              best.value = value;
            }
          },
          options.enumeration_cap);
      return std::make_pair(best, true);
    }
    // The additive widening breaks the fractional structure, so fall back to
    // the plain fractional pricer followed by local add/drop/swap moves.
    const std::vector<double> rr = reduced_revenues(instance, lambda);
    PricedColumn seed = price_column(v, rr, *instance.family, options.tol * 0.01,
                                     options.enumeration_cap);
    std::vector<int> current = seed.assortment.items();
    double value = raw_value(seed.assortment, lambda);
    for (int moves = 0; moves < 200; ++moves) {
      double best_value = value;
      std::vector<int> best_items = current;
      for (int i = 1; i <= instance.num_products; ++i) {
        const bool inside =
            std::binary_search(current.begin(), current.end(), i);
        std::vector<int> cand = current;
        if (inside) {
          cand.erase(std::find(cand.begin(), cand.end(), i));
        } else {
          cand.push_back(i);
        }
        Assortment s = Assortment::of(cand);
        if (!instance.family->contains(s)) continue;
        const double cand_value = raw_value(s, lambda);
        if (cand_value > best_value + 1e-12) {
          best_value = cand_value;
          best_items = s.items();
        }
      }
      if (best_items == current) break;
      current = best_items;
      value = best_value;
    }
    PricedColumn out;
    out.assortment = Assortment::of(current);
    out.value = value;
    return std::make_pair(out, false);
  };
  return run_column_generation(problem, options);
}

void write_lp_format(std::ostream& out, const MasterSnapshot& master) {
  out.precision(17);
  out << "\\ Restricted master: " << master.columns.size() << " columns, "
      << master.rhs.size() << " resource rows\n";
  for (std::size_t j = 0; j < master.assortments.size(); ++j) {
    out << "\\ y" << j << " = {";
    const auto& items = master.assortments[j].items();
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i) out << ",";
      out << items[i];
    }
    out << "}\n";
  }
  out << "Maximize\n obj:";
  for (std::size_t j = 0; j < master.columns.size(); ++j) {
    const double c = master.columns[j].objective;
    out << (c < 0 ? " - " : " + ") << std::abs(c) << " y" << j;
  }
  out << "\nSubject To\n";
  for (std::size_t k = 0; k < master.rhs.size(); ++k) {
    out << " cap" << k << ":";
    for (std::size_t j = 0; j < master.columns.size(); ++j) {
      const double a = master.columns[j].consumption[k];
      out << (a < 0 ? " - " : " + ") << std::abs(a) << " y" << j;
    }
    out << " <= " << master.rhs[k] << "\n";
  }
  out << " convexity:";
  for (std::size_t j = 0; j < master.columns.size(); ++j) out << " + y" << j;
  out << " = 1\nBounds\nEnd\n";
}

}  // namespace assort::lp
