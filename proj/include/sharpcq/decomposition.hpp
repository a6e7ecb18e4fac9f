#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sharpcq/hypergraph.hpp"
#include "sharpcq/relational.hpp"

namespace sharpcq {

struct View {
  std::string symbol;
  VarSet vars;
  std::vector<std::size_t> provenance;  // atom indices of the query the set was built for
  bool query_view = false;
};

struct ViewSet {
  std::size_t k = 0;
  std::vector<View> views;

  std::vector<VarSet> edges() const;
  Hypergraph hypergraph() const;
};

// One view per k-subset of atoms (lexicographic by index), then one query
// view per atom. Throws InvalidWidth unless 1 <= k <= |atoms|.
ViewSet build_view_set(const Query& q, std::size_t k);

// A join tree whose vertices are the bags of an acyclic hypergraph sandwiched
// between h1 and the resource edges; cover[i] is the resource edge that
// contains bag i.
struct TreeProjection {
  JoinTree tree;
  std::vector<std::size_t> cover;

  Hypergraph hypergraph() const;
};

struct TreeProjectionOptions {
  // Largest number of candidate subsets enumerated for a single resource edge
  // at a single search state; beyond it SearchBudgetExceeded is thrown.
  std::size_t subset_cap = std::size_t{1} << 16;
  // Upper bound on distinct (component, connector) states explored.
  std::size_t state_cap = 2'000'000;
  // Chooses the resource edge that covers a candidate bag, or rejects the bag.
  // The default picks the smallest containing edge (lowest index on ties).
  std::function<std::optional<std::size_t>(const VarSet& bag)> select_cover;
};

// Exact search for an acyclic hypergraph H_a with h1 ≤ H_a ≤ resources. The
// search follows the component recursion of normal-form decompositions:
// every bag splits the current component, children solve the resulting
// sub-components. Deterministic; absent results are certified by exhaustion.
std::optional<TreeProjection> tree_projection(const Hypergraph& h1, std::span<const VarSet> resources,
                                              const TreeProjectionOptions& options = {});
std::optional<TreeProjection> tree_projection(const Hypergraph& h1, const Hypergraph& h2,
                                              const TreeProjectionOptions& options = {});

struct HdVertex {
  VarSet chi;
  std::vector<std::size_t> lambda;  // atom indices of the query the decomposition belongs to
  std::vector<std::size_t> children;
};

struct HypertreeDecomposition {
  std::vector<HdVertex> vertices;
  std::size_t root = 0;

  std::size_t width() const;
  std::vector<std::optional<std::size_t>> parents() const;
  std::vector<std::size_t> preorder() const;
  std::vector<std::size_t> postorder() const;
};

// χ = bags, λ = provenance of each bag's covering view.
HypertreeDecomposition to_hypertree_decomposition(const TreeProjection& tp, const ViewSet& vs);

struct SharpDecomposition {
  TreeProjection tp;
  Query core;                           // uncolored core: a subquery of q
  std::vector<std::size_t> core_atoms;  // indices of the core's atoms in q
};

// H' = H_core ∪ FH(core, free(q)) for a core of color(q).
Hypergraph sharp_target(const Query& colored_core, const VarSet& free);

// Tries up to cores_to_try cores of color(q) (enumeration order) and returns
// the first admitting a tree projection of H' against the views.
std::optional<SharpDecomposition> sharp_decomposition(const Query& q, const ViewSet& vs,
                                                      std::size_t cores_to_try = 8);
// Same, for one explicitly chosen core (indices into color(q)'s atoms).
std::optional<SharpDecomposition> sharp_decomposition_for_core(const Query& q, const ViewSet& vs,
                                                               std::span<const std::size_t> colored_core);

struct SharpWidth {
  std::size_t k = 0;
  HypertreeDecomposition hd;  // λ indexes core's atoms
  Query core;
  std::vector<std::size_t> core_atoms;  // indices into q
  ViewSet views;                        // built over core
  TreeProjection tp;                    // cover indexes views.views
};

// Smallest k <= kmax admitting a width-k #-hypertree decomposition. Views are
// built over the atoms of each tried core.
std::optional<SharpWidth> sharp_hypertree_width(const Query& q, std::size_t kmax, std::size_t cores_to_try = 8,
                                                const TreeProjectionOptions& options = {});

struct ConditionCheck {
  bool ok = true;
  std::string witness;
};

struct ValidationReport {
  ConditionCheck coverage;         // (1)
  ConditionCheck connectedness;    // (2)
  ConditionCheck chi_in_lambda;    // (3)
  ConditionCheck descendant;       // (4)
  ConditionCheck completeness;     // every atom in λ(p) with vars ⊆ χ(p)
  ConditionCheck tree;             // well-formed rooted tree

  bool generalized() const { return tree.ok && coverage.ok && connectedness.ok && chi_in_lambda.ok; }
  bool hypertree() const { return generalized() && descendant.ok; }
};

ValidationReport validate_hd(const HypertreeDecomposition& hd, const Query& q);

// Adds, for each atom lacking a vertex p with atom ∈ λ(p) and vars ⊆ χ(p), a
// leaf under the first vertex whose bag holds its variables; its relation is
// filtered against that vertex. Throws IncompatibleDecomposition when no
// vertex holds an atom's variables.
std::pair<HypertreeDecomposition, Database> complete_hd(const HypertreeDecomposition& hd, const Query& q,
                                                        const Database& db);

// r_v = π_χ(v)(⋈ λ(v)).
Relation vertex_relation(const HypertreeDecomposition& hd, std::size_t v, const Query& q, const Database& db);

// F_{Q,D} = Σ_v (w+1)^{deg(v)}, w = |atoms(q)|, degrees w.r.t. free(q).
BigInt decomposition_cost(const HypertreeDecomposition& hd, const Query& q, const Database& db);

// Normal-form width-k decomposition of H_q minimizing decomposition_cost.
std::optional<HypertreeDecomposition> d_optimal_nf(const Query& q, const Database& db, std::size_t k);

std::string format_hd(const HypertreeDecomposition& hd, const Query& q);

}  // namespace sharpcq
