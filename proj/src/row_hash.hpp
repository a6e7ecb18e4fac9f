#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sharpcq/relational.hpp"

namespace sharpcq::detail {

struct RowHash {
  std::size_t operator()(std::span<const Value> row) const noexcept {
    std::size_t h = 0x9e3779b97f4a7c15ULL ^ row.size();
    for (Value v : row) {
      h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
  }
  std::size_t operator()(const std::vector<Value>& row) const noexcept {
    return (*this)(std::span<const Value>(row));
  }
};

// Positions of `vars` inside `schema`; every var must be present.
std::vector<std::size_t> column_positions(const std::vector<std::string>& schema,
                                          const std::vector<std::string>& vars);

inline void extract(std::span<const Value> row, const std::vector<std::size_t>& cols,
                    std::vector<Value>& out) {
  out.clear();
  for (std::size_t c : cols) out.push_back(row[c]);
}

}  // namespace sharpcq::detail
