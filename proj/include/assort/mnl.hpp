#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "assort/errors.hpp"
#include "assort/rng.hpp"

namespace assort {

inline constexpr std::uint64_t kDefaultEnumerationCap = 1'000'000;

// A sorted, duplicate-free set of product indices in 1..N. Index 0 is
// reserved for the no-purchase outcome and never appears in an assortment.
class Assortment {
 public:
  Assortment() = default;

  // Sorts, deduplicates and validates (indices must be >= 1).
  static Assortment of(std::vector<int> items);

  const std::vector<int>& items() const { return items_; }
  bool empty() const { return items_.empty(); }
  int size() const { return static_cast<int>(items_.size()); }
  bool contains(int i) const;
  int max_index() const { return items_.empty() ? 0 : items_.back(); }

  bool operator==(const Assortment&) const = default;
  // Lexicographic order on the item sequence; the empty assortment first.
  bool operator<(const Assortment& other) const { return items_ < other.items_; }

 private:
  std::vector<int> items_;
};

// A point v in [1/R, R]^N parameterizing the MNL model.
struct UtilityVector {
  std::vector<double> values;  // values[i-1] = v(i)
  double bound = 1.0;          // R >= 1

  static UtilityVector of(std::vector<double> values, double bound);

  int dimension() const { return static_cast<int>(values.size()); }
  double operator()(int i) const { return values[static_cast<std::size_t>(i) - 1]; }
};

enum class FamilyKind { Cardinality, PartitionMatroid, ExplicitList };

// A family of allowed assortments over products 1..N. The empty assortment
// is a member of every family.
class AssortmentFamily {
 public:
  static AssortmentFamily cardinality(int num_products, int max_size);
  // Partition of 1..N into `blocks` equal blocks {N(j-1)/p+1, ..., Nj/p},
  // at most `per_block` items from each. N must be divisible by `blocks`.
  static AssortmentFamily partition_matroid(int num_products, int blocks,
                                            int per_block);
  // Explicit member list (the empty assortment is added if absent).
  static AssortmentFamily explicit_list(int num_products,
                                        std::vector<Assortment> members);

  FamilyKind kind() const { return kind_; }
  int dimension() const { return num_products_; }
  // Largest member size B.
  int max_assortment_size() const;
  int blocks() const { return blocks_; }
  int per_block() const { return per_block_; }
  int block_of(int item) const;  // 0-based block index
  const std::vector<Assortment>& explicit_members() const { return members_; }

  bool contains(const Assortment& s) const;

  // Number of members including the empty assortment; saturates at
  // UINT64_MAX on overflow.
  std::uint64_t member_count() const;

  // Visits every member exactly once in lexicographic order (empty set
  // first). Throws EnumerationTooLarge if member_count() exceeds `cap`.
  void for_each_member(const std::function<void(const Assortment&)>& fn,
                       std::uint64_t cap = kDefaultEnumerationCap) const;
  std::vector<Assortment> enumerate(std::uint64_t cap = kDefaultEnumerationCap) const;

  // Lexicographically smallest member containing item i ({i} for the two
  // structured kinds). Throws ConfigError if no member contains i.
  Assortment smallest_member_containing(int i) const;

 private:
  FamilyKind kind_ = FamilyKind::Cardinality;
  int num_products_ = 0;
  int max_size_ = 0;    // Cardinality
  int blocks_ = 0;      // PartitionMatroid
  int per_block_ = 0;   // PartitionMatroid
  std::vector<Assortment> members_;  // ExplicitList, sorted
};

// Binary consumption matrix, K resources by N products.
class BinaryMatrix {
 public:
  BinaryMatrix() = default;
  BinaryMatrix(int rows, int cols)
      : rows_(rows), cols_(cols),
        data_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  // k is a 0-based resource, i a 1-based product.
  int operator()(int k, int i) const {
    return data_[static_cast<std::size_t>(k) * cols_ + (i - 1)];
  }
  void set(int k, int i, int value) {
    data_[static_cast<std::size_t>(k) * cols_ + (i - 1)] =
        static_cast<std::uint8_t>(value);
  }

  bool operator==(const BinaryMatrix&) const = default;

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<std::uint8_t> data_;
};

// Read-only slice of an instance visible to a policy: everything except the
// true utility vector. Borrows from the owning Instance.
struct InstanceView {
  int num_products = 0;
  int num_resources = 0;
  long long horizon = 0;
  double utility_bound = 1.0;
  std::span<const double> revenues;
  const BinaryMatrix* consumption = nullptr;
  std::span<const double> capacity_rates;
  const AssortmentFamily* family = nullptr;

  int consumes(int i, int k) const { return (*consumption)(k, i); }
};

// Complete ground-truth problem.
struct Instance {
  int num_products = 0;            // N
  int num_resources = 0;           // K
  long long horizon = 0;           // T
  double utility_bound = 1.0;      // R
  std::vector<double> revenues;    // r(i) in [0,1]
  BinaryMatrix consumption;        // a, K x N
  std::vector<double> capacity_rates;  // c(k) in (0,1], T*c(k) integral
  AssortmentFamily family;
  UtilityVector true_utilities;    // v*

  int consumes(int i, int k) const { return consumption(k, i); }
  long long capacity_units(int k) const;  // T*c(k)

  // Checks every structural invariant; throws ConfigError on violation.
  void validate() const;
  InstanceView view() const;
};

// MNL choice probability of outcome i (a product in S, or 0 for
// no-purchase) when assortment S is offered under utilities v.
double choice_prob(const UtilityVector& v, const Assortment& s, int i);

// Expected one-period revenue of offering S.
double expected_revenue(const UtilityVector& v, const Assortment& s,
                        std::span<const double> revenues);

// Expected one-period consumption of resource k when offering S.
double expected_consumption(const UtilityVector& v, const Assortment& s,
                            const BinaryMatrix& consumption, int k);

// Samples the purchased product (or 0) by inverse CDF over the items of S in
// ascending order followed by the no-purchase outcome.
int sample_purchase(const UtilityVector& v, const Assortment& s, Rng& rng);

}  // namespace assort
