#pragma once

#include <bit>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sharpcq/errors.hpp"
#include "sharpcq/relational.hpp"

namespace sharpcq::detail {

using Mask = std::uint64_t;

inline int popcount(Mask m) { return std::popcount(m); }
inline Mask lowest_bit(Mask m) { return m & (~m + 1); }

// Dense numbering of a variable universe (at most 64 variables) so searches
// can work on bitmasks.
class VarIndex {
 public:
  explicit VarIndex(const VarSet& universe) : names_(universe.begin(), universe.end()) {
    if (names_.size() > 64) throw SearchBudgetExceeded("more than 64 variables in a decomposition search");
    for (std::size_t i = 0; i < names_.size(); ++i) bits_.emplace(names_[i], static_cast<int>(i));
  }

  Mask mask(const VarSet& vars) const {
    Mask m = 0;
    for (const auto& v : vars) {
      auto it = bits_.find(v);
      if (it != bits_.end()) m |= Mask{1} << it->second;
    }
    return m;
  }

  VarSet set(Mask m) const {
    VarSet out;
    for (std::size_t i = 0; i < names_.size(); ++i)
      if (m >> i & 1) out.insert(names_[i]);
    return out;
  }

  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::map<std::string, int> bits_;
};

// All nonempty submasks of an n-bit word, largest first, then by value.
const std::vector<std::uint32_t>& subset_order(int n);

inline Mask spread(std::uint32_t pattern, const std::vector<int>& bits) {
  Mask out = 0;
  for (std::size_t j = 0; pattern; ++j, pattern >>= 1)
    if (pattern & 1) out |= Mask{1} << bits[j];
  return out;
}

inline std::vector<int> bit_positions(Mask m) {
  std::vector<int> out;
  for (int i = 0; m; ++i, m >>= 1)
    if (m & 1) out.push_back(i);
  return out;
}

// Connected pieces of `region`, linked through the given edges.
inline std::vector<Mask> components_within(Mask region, const std::vector<Mask>& edges) {
  std::vector<Mask> out;
  Mask rest = region;
  while (rest) {
    Mask comp = lowest_bit(rest);
    bool grown = true;
    while (grown) {
      grown = false;
      for (Mask e : edges) {
        if ((e & comp) && (e & rest & ~comp)) {
          comp |= e & rest;
          grown = true;
        }
      }
    }
    out.push_back(comp);
    rest &= ~comp;
  }
  return out;
}

inline Mask touching(Mask comp, const std::vector<Mask>& edges) {
  Mask out = 0;
  for (Mask e : edges)
    if (e & comp) out |= e;
  return out;
}

}  // namespace sharpcq::detail
