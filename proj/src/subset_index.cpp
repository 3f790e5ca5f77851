#include "pfd/subset_index.hpp"

#include <stdexcept>
#include <string>

namespace pfd {

SubsetIndex::SubsetIndex(int p, int k) : p_(p), k_(k) {
  if (p <= 0) throw std::invalid_argument("SubsetIndex: p must be positive");
  if (p > 63) throw std::invalid_argument("SubsetIndex: p > 63 not supported");
  if (k < 0 || k > p)
    throw std::invalid_argument("SubsetIndex: k must be in [0, p]");

  masks_.push_back(0);
  // Size s subsets in lexicographic order of the sorted member lists,
  // via the standard next-combination walk over member indices.
  std::vector<int> comb;
  for (int s = 1; s <= k; ++s) {
    comb.resize(s);
    for (int i = 0; i < s; ++i) comb[i] = i + 1;
    while (true) {
      std::uint64_t m = 0;
      for (int v : comb) m |= std::uint64_t{1} << (v - 1);
      masks_.push_back(m);
      int i = s - 1;
      while (i >= 0 && comb[i] == p - s + i + 1) --i;
      if (i < 0) break;
      ++comb[i];
      for (int j = i + 1; j < s; ++j) comb[j] = comb[j - 1] + 1;
    }
  }
  lookup_.reserve(masks_.size());
  for (int j = 0; j < static_cast<int>(masks_.size()); ++j)
    lookup_.emplace(masks_[j], j);
}

int SubsetIndex::column_of(std::uint64_t mask) const {
  auto it = lookup_.find(mask);
  if (it == lookup_.end())
    throw std::invalid_argument("SubsetIndex: subset not indexed");
  return it->second;
}

std::vector<int> SubsetIndex::members(int column) const {
  std::vector<int> out;
  std::uint64_t m = masks_.at(column);
  while (m) {
    int b = __builtin_ctzll(m);
    out.push_back(b + 1);
    m &= m - 1;
  }
  return out;
}

double phi(std::uint64_t subset_mask, const std::vector<double>& x) {
  double v = 1.0;
  std::uint64_t m = subset_mask;
  while (m) {
    int b = __builtin_ctzll(m);
    if (b >= static_cast<int>(x.size()))
      throw std::invalid_argument("phi: subset member outside assignment");
    v *= x[b];
    m &= m - 1;
  }
  return v;
}

}  // namespace pfd
