#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "sharpcq/counting.hpp"
#include "sharpcq/decomposition.hpp"
#include "sharpcq/relational.hpp"

namespace sharpcq {

// max over θ ∈ π_{F∩schema}(r) of |σ_θ(r)|; 0 for an empty relation. Two
// independent implementations, cross-checked in tests.
std::size_t degree_by_grouping(const Relation& r, const VarSet& f);
std::size_t degree_by_sorting(const Relation& r, const VarSet& f);

struct DegreeProfile {
  std::vector<std::size_t> per_vertex;
  std::size_t overall = 0;
  VarSet f;
};

std::size_t vertex_degree(const HypertreeDecomposition& hd, std::size_t v, const Query& q, const Database& db,
                          const VarSet& f);
DegreeProfile bound(const HypertreeDecomposition& hd, const Query& q, const Database& db, const VarSet& f);
// Degrees over the bags χ(v) ∩ promoted instead of χ(v).
DegreeProfile bound_restricted(const HypertreeDecomposition& hd, const Query& q, const Database& db,
                               const VarSet& f, const VarSet& promoted);

// Q[S̄]; throws InvalidSelection unless free(q) ⊆ S̄ ⊆ vars(q).
Query promote_free(const Query& q, const VarSet& promoted);

struct HybridDecomposition {
  HypertreeDecomposition hd;  // λ indexes the atoms of q
  VarSet promoted;            // S̄
  std::size_t b = 0;
  std::size_t k = 0;
  std::vector<std::size_t> core_atoms;  // core of color(Q[S̄]) as indices into q
};

struct HybridSearchOptions {
  std::size_t max_promoted = 12;
  // Rows materialized for degree computations before giving up.
  std::size_t row_budget = 20'000'000;
};

// Smallest b <= bmax for which Q[S̄] has a width-k #-decomposition whose bags,
// restricted to S̄, have degree <= b w.r.t. free(q).
std::optional<HybridDecomposition> min_bound_for_selection(const Query& q, const Database& db, std::size_t k,
                                                           const VarSet& promoted, std::size_t bmax,
                                                           const HybridSearchOptions& options = {});

// Minimum b first; at that b, S̄ = free(q) if it works, otherwise the largest
// promotion (lexicographic among equal sizes). Throws SearchBudgetExceeded
// when there are more than max_promoted quantified variables.
std::optional<HybridDecomposition> search_sharp_b(const Query& q, const Database& db, std::size_t k,
                                                  std::size_t bmax, const HybridSearchOptions& options = {});

// Throws InvalidHybridDecomposition when hd is not a #-decomposition of the
// core of color(Q[S̄]) built from its atoms.
BigInt count_hybrid(const Query& q, const Database& db, const HypertreeDecomposition& hd, const VarSet& promoted);
CountTrace count_hybrid_traced(const Query& q, const Database& db, const HypertreeDecomposition& hd,
                               const VarSet& promoted);

}  // namespace sharpcq
