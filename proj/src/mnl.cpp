#include "assort/mnl.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace assort {

Assortment Assortment::of(std::vector<int> items) {
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
  if (!items.empty() && items.front() < 1) {
    throw std::out_of_range("assortment items must be product indices >= 1");
  }
  Assortment s;
  s.items_ = std::move(items);
  return s;
}

bool Assortment::contains(int i) const {
  return std::binary_search(items_.begin(), items_.end(), i);
}

UtilityVector UtilityVector::of(std::vector<double> values, double bound) {
  if (values.empty()) throw ConfigError("utility vector must have N >= 1");
  if (!(bound >= 1.0)) throw ConfigError("utility bound R must be >= 1");
  for (double v : values) {
    if (!(v >= 1.0 / bound - 1e-12) || !(v <= bound + 1e-12)) {
      throw ConfigError("utility value " + std::to_string(v) +
                        " outside [1/R, R] with R=" + std::to_string(bound));
    }
  }
  UtilityVector u;
  u.values = std::move(values);
  u.bound = bound;
  return u;
}

AssortmentFamily AssortmentFamily::cardinality(int num_products, int max_size) {
  if (num_products < 1) throw ConfigError("family requires N >= 1");
  if (max_size < 0 || max_size > num_products) {
    throw ConfigError("cardinality bound must lie in 0..N");
  }
  AssortmentFamily f;
  f.kind_ = FamilyKind::Cardinality;
  f.num_products_ = num_products;
  f.max_size_ = max_size;
  return f;
}

AssortmentFamily AssortmentFamily::partition_matroid(int num_products, int blocks,
                                                     int per_block) {
  if (num_products < 1) throw ConfigError("family requires N >= 1");
  if (blocks < 1 || num_products % blocks != 0) {
    throw ConfigError("partition matroid requires N divisible by the block count");
  }
  if (per_block < 0) throw ConfigError("per-block bound must be >= 0");
  AssortmentFamily f;
  f.kind_ = FamilyKind::PartitionMatroid;
  f.num_products_ = num_products;
  f.blocks_ = blocks;
  f.per_block_ = per_block;
  return f;
}

AssortmentFamily AssortmentFamily::explicit_list(int num_products,
                                                 std::vector<Assortment> members) {
  if (num_products < 1) throw ConfigError("family requires N >= 1");
  for (const Assortment& s : members) {
    if (s.max_index() > num_products) {
      throw std::out_of_range("explicit member contains an index beyond N");
    }
  }
  members.push_back(Assortment{});  // the empty assortment is always a member
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  AssortmentFamily f;
  f.kind_ = FamilyKind::ExplicitList;
  f.num_products_ = num_products;
  f.members_ = std::move(members);
  return f;
}

int AssortmentFamily::max_assortment_size() const {
  switch (kind_) {
    case FamilyKind::Cardinality:
      return max_size_;
    case FamilyKind::PartitionMatroid:
      return std::min(per_block_, num_products_ / blocks_) * blocks_;
    case FamilyKind::ExplicitList: {
      int b = 0;
      for (const Assortment& s : members_) b = std::max(b, s.size());
      return b;
    }
  }
  return 0;
}

int AssortmentFamily::block_of(int item) const {
  return (item - 1) / (num_products_ / blocks_);
}

bool AssortmentFamily::contains(const Assortment& s) const {
  if (s.max_index() > num_products_) {
    throw std::out_of_range("assortment contains an index beyond N");
  }
  switch (kind_) {
    case FamilyKind::Cardinality:
      return s.size() <= max_size_;
    case FamilyKind::PartitionMatroid: {
      std::vector<int> used(static_cast<std::size_t>(blocks_), 0);
      for (int i : s.items()) {
        if (++used[block_of(i)] > per_block_) return false;
      }
      return true;
    }
    case FamilyKind::ExplicitList:
      return std::binary_search(members_.begin(), members_.end(), s);
  }
  return false;
}

namespace {

// Saturating arithmetic keeps counts usable as cap checks for huge families.
std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  return a > UINT64_MAX - b ? UINT64_MAX : a + b;
}

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  if (a > UINT64_MAX / b) return UINT64_MAX;
  return a * b;
}

// sum_{j=0..b} C(n, j), saturating.
std::uint64_t subsets_up_to(int n, int b) {
  std::uint64_t total = 0;
  std::uint64_t binom = 1;  // C(n, 0)
  for (int j = 0; j <= std::min(b, n); ++j) {
    if (j > 0) {
      binom = sat_mul(binom, static_cast<std::uint64_t>(n - j + 1));
      if (binom != UINT64_MAX) binom /= static_cast<std::uint64_t>(j);
    }
    total = sat_add(total, binom);
    if (total == UINT64_MAX) return total;
  }
  return total;
}

}  // namespace

std::uint64_t AssortmentFamily::member_count() const {
  switch (kind_) {
    case FamilyKind::Cardinality:
      return subsets_up_to(num_products_, max_size_);
    case FamilyKind::PartitionMatroid: {
      const std::uint64_t per = subsets_up_to(num_products_ / blocks_, per_block_);
      std::uint64_t total = 1;
      for (int j = 0; j < blocks_; ++j) total = sat_mul(total, per);
      return total;
    }
    case FamilyKind::ExplicitList:
      return members_.size();
  }
  return 0;
}

void AssortmentFamily::for_each_member(
    const std::function<void(const Assortment&)>& fn, std::uint64_t cap) const {
  if (member_count() > cap) {
    throw EnumerationTooLarge("family has " + std::to_string(member_count()) +
                              " members, enumeration cap is " + std::to_string(cap));
  }
  if (kind_ == FamilyKind::ExplicitList) {
    for (const Assortment& s : members_) fn(s);
    return;
  }
  // Depth-first extension by the next-larger item yields lexicographic order.
  std::vector<int> current;
  std::vector<int> block_used(kind_ == FamilyKind::PartitionMatroid
                                  ? static_cast<std::size_t>(blocks_)
                                  : 0,
                              0);
  auto emit = [&] { fn(Assortment::of(current)); };
  std::function<void(int)> extend = [&](int first) {
    emit();
    if (kind_ == FamilyKind::Cardinality &&
        static_cast<int>(current.size()) >= max_size_) {
      return;
    }
    for (int i = first; i <= num_products_; ++i) {
      if (kind_ == FamilyKind::PartitionMatroid) {
        int blk = block_of(i);
        if (block_used[blk] >= per_block_) continue;
        ++block_used[blk];
        current.push_back(i);
        extend(i + 1);
        current.pop_back();
        --block_used[blk];
      } else {
        current.push_back(i);
        extend(i + 1);
        current.pop_back();
      }
    }
  };
  // emit() inside extend would re-sort; current is built in ascending order
  // already, so Assortment::of is a validation-only pass here.
  extend(1);
}

std::vector<Assortment> AssortmentFamily::enumerate(std::uint64_t cap) const {
  std::vector<Assortment> out;
  const std::uint64_t count = member_count();
  if (count <= cap) out.reserve(count);
  for_each_member([&](const Assortment& s) { out.push_back(s); }, cap);
  return out;
}

Assortment AssortmentFamily::smallest_member_containing(int i) const {
  if (i < 1 || i > num_products_) {
    throw std::out_of_range("product index out of range");
  }
  Assortment singleton = Assortment::of({i});
  if (kind_ != FamilyKind::ExplicitList) {
    if (contains(singleton)) return singleton;
    throw ConfigError("family admits no assortment containing product " +
                      std::to_string(i));
  }
  for (const Assortment& s : members_) {
    if (s.contains(i)) return s;
  }
  throw ConfigError("family admits no assortment containing product " +
                    std::to_string(i));
}

long long Instance::capacity_units(int k) const {
  return std::llround(capacity_rates[static_cast<std::size_t>(k)] *
                      static_cast<double>(horizon));
}

void Instance::validate() const {
  if (num_products < 1 || num_resources < 0 || horizon < 1) {
    throw ConfigError("instance requires N >= 1, K >= 0, T >= 1");
  }
  if (family.dimension() != num_products ||
      true_utilities.dimension() != num_products ||
      static_cast<int>(revenues.size()) != num_products) {
    throw ConfigError("instance dimensions disagree");
  }
  if (consumption.rows() != num_resources || consumption.cols() != num_products) {
    throw ConfigError("consumption matrix must be K x N");
  }
  if (static_cast<int>(capacity_rates.size()) != num_resources) {
    throw ConfigError("capacity rate vector must have K entries");
  }
  for (double r : revenues) {
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("revenues must lie in [0,1]");
  }
  for (int k = 0; k < num_resources; ++k) {
    const double c = capacity_rates[static_cast<std::size_t>(k)];
    if (!(c > 0.0 && c <= 1.0)) throw ConfigError("capacity rates must lie in (0,1]");
    const double units = c * static_cast<double>(horizon);
    if (std::abs(units - std::llround(units)) > 1e-6 || std::llround(units) < 1) {
      throw ConfigError("T*c(k) must be a positive integer");
    }
  }
  // Re-validates the utility box.
  (void)UtilityVector::of(true_utilities.values, true_utilities.bound);
}

InstanceView Instance::view() const {
  InstanceView v;
  v.num_products = num_products;
  v.num_resources = num_resources;
  v.horizon = horizon;
  v.utility_bound = utility_bound;
  v.revenues = revenues;
  v.consumption = &consumption;
  v.capacity_rates = capacity_rates;
  v.family = &family;
  return v;
}

namespace {

double weight_sum(const UtilityVector& v, const Assortment& s) {
  double total = 0.0;
  for (int i : s.items()) total += v(i);
  return total;
}

void check_indices(const UtilityVector& v, const Assortment& s, int i) {
  if (i < 0 || i > v.dimension()) {
    throw std::out_of_range("product index out of range");
  }
  if (s.max_index() > v.dimension()) {
    throw std::out_of_range("assortment index beyond utility dimension");
  }
}

}  // namespace

double choice_prob(const UtilityVector& v, const Assortment& s, int i) {
  check_indices(v, s, i);
  const double denom = 1.0 + weight_sum(v, s);
  if (i == 0) return 1.0 / denom;
  if (!s.contains(i)) return 0.0;
  return v(i) / denom;
}

double expected_revenue(const UtilityVector& v, const Assortment& s,
                        std::span<const double> revenues) {
  check_indices(v, s, 0);
  if (static_cast<int>(revenues.size()) != v.dimension()) {
    throw std::out_of_range("revenue vector dimension mismatch");
  }
  const double denom = 1.0 + weight_sum(v, s);
  double total = 0.0;
  for (int i : s.items()) total += revenues[static_cast<std::size_t>(i) - 1] * v(i);
  return total / denom;
}

double expected_consumption(const UtilityVector& v, const Assortment& s,
                            const BinaryMatrix& consumption, int k) {
  check_indices(v, s, 0);
  if (k < 0 || k >= consumption.rows() || consumption.cols() != v.dimension()) {
    throw std::out_of_range("resource index or matrix dimension mismatch");
  }
  const double denom = 1.0 + weight_sum(v, s);
  double total = 0.0;
  for (int i : s.items()) {
    if (consumption(k, i)) total += v(i);
  }
  return total / denom;
}

int sample_purchase(const UtilityVector& v, const Assortment& s, Rng& rng) {
  check_indices(v, s, 0);
  const double denom = 1.0 + weight_sum(v, s);
  const double u = rng.uniform01();
  double cumulative = 0.0;
  for (int i : s.items()) {
    cumulative += v(i) / denom;
    if (u < cumulative) return i;
  }
  return 0;
}

}  // namespace assort
