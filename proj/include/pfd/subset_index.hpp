#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace pfd {

/// Canonical ordering of all subsets S of {1..p} with |S| <= k.
///
/// Subsets are ordered by size ascending, ties broken lexicographically on
/// the sorted member lists; index 0 is the empty set. Each subset is stored
/// as a bitmask with bit (i-1) set iff treatment i is a member.
class SubsetIndex {
 public:
  SubsetIndex(int p, int k);

  int p() const { return p_; }
  int k() const { return k_; }
  int size() const { return static_cast<int>(masks_.size()); }

  std::uint64_t mask(int column) const { return masks_[column]; }
  const std::vector<std::uint64_t>& masks() const { return masks_; }

  /// Column index of a subset given as a bitmask; throws if not indexed.
  int column_of(std::uint64_t mask) const;

  /// Sorted member list (1-based treatment ids) of a column's subset.
  std::vector<int> members(int column) const;

 private:
  int p_;
  int k_;
  std::vector<std::uint64_t> masks_;
  std::unordered_map<std::uint64_t, int> lookup_;
};

/// Parity basis function: product of x_i over i in the subset mask.
/// x holds +-1 entries; the empty product is +1.
double phi(std::uint64_t subset_mask, const std::vector<double>& x);

/// Same on a sign bitmask: bit i set means x_{i+1} = +1.
inline double phi_bits(std::uint64_t subset_mask, std::uint64_t x_bits) {
  return (__builtin_parityll(subset_mask & ~x_bits)) ? -1.0 : 1.0;
}

}  // namespace pfd
