#pragma once

#include <cstdint>

#include "sharpcq/relational.hpp"

namespace sharpcq {

// Brute-force references: plain backtracking over the atoms, collecting
// distinct projections in a set. state_cap bounds the number of partial
// assignments visited; exceeding it throws StateCapExceeded.
inline constexpr std::uint64_t kDefaultStateCap = 100'000'000;

Relation enumerate_projection(const Query& q, const Database& db, const VarSet& w,
                              std::uint64_t state_cap = kDefaultStateCap);
Relation enumerate_answers(const Query& q, const Database& db, std::uint64_t state_cap = kDefaultStateCap);
BigInt brute_force_count(const Query& q, const Database& db, std::uint64_t state_cap = kDefaultStateCap);

}  // namespace sharpcq
