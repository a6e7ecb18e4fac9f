#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sharpcq/config.hpp"
#include "sharpcq/decomposition.hpp"
#include "sharpcq/relational.hpp"

namespace sharpcq {

// Relations for (a subset of) the views of a ViewSet. relations[i] belongs to
// views[i], which indexes ViewSet::views.
struct LegalViewDatabase {
  std::vector<std::size_t> views;
  std::vector<Relation> relations;
  bool pairwise_consistent = false;

  const Relation* find(std::size_t view) const;
  bool any_empty() const;
};

// Query views hold their atom's relation, other views the join of their
// provenance atoms. `only` restricts materialization to the listed views.
LegalViewDatabase standard_view_extension(const Query& q, const Database& db, const ViewSet& vs,
                                          std::optional<std::span<const std::size_t>> only = std::nullopt);

// Semijoin fixpoint over every pair of views. A nonzero shuffle_seed
// randomizes the processing order (the fixpoint does not depend on it).
LegalViewDatabase enforce_pairwise_consistency(LegalViewDatabase lvdb, std::uint64_t shuffle_seed = 0);

// One fresh atom per bag of the tree projection; atom i sits on tree vertex i.
struct AcyclicInstance {
  Query query;
  Database db;
  JoinTree tree;
};

AcyclicInstance build_acyclic_instance(const TreeProjection& tp, const ViewSet& vs, const LegalViewDatabase& lvdb,
                                       const VarSet& free, const Database& base);

// The quantifier-free query Q_f: atoms of the core inside free(core) keep
// their relations, every quantified component becomes one atom over its
// frontier whose relation is projected from a covering bag.
struct QuantifierFree {
  Query query;
  Database db;
  std::vector<std::size_t> host;  // per atom of query: the tree vertex covering it
};

QuantifierFree reduce_quantified(const Query& core, const Database& db, const TreeProjection& tp,
                                 const AcyclicInstance& qa);

struct CountTrace;

// Counts π_output over the answers of core, given a tree projection of core
// (plus its frontier hypergraph) whose bag instance qa was taken from
// pairwise-consistent views. Bags are cut down to free(core) and Q_f hangs
// below the bags covering its atoms; output ⊆ free(core).
CountTrace count_from_tree_projection(const Query& core, const Database& db, const TreeProjection& tp,
                                     const AcyclicInstance& qa, const VarSet& output);

struct CountTrace {
  BigInt count;
  std::size_t vertices = 0;
  std::size_t width = 0;
  std::size_t max_relation = 0;  // m
  std::size_t degree_bound = 0;  // h: largest initial block
  std::size_t max_blocks = 0;    // largest |R_p| seen at any point
  std::size_t bound_violations = 0;
};

// The #-relation dynamic program. Throws IncompleteDecomposition.
BigInt count_via_hd(const Query& q, const Database& db, const HypertreeDecomposition& hd);
CountTrace count_via_hd_traced(const Query& q, const Database& db, const HypertreeDecomposition& hd);

struct CountReport {
  BigInt count;
  Mode mode_used = Mode::Oracle;
  std::optional<std::size_t> width;
  std::optional<std::size_t> bound;
  std::vector<Atom> core_atoms;
  std::optional<VarSet> promoted;  // S̄ when the hybrid path answered
  double elapsed_ms = 0;
  std::size_t bound_violations = 0;
  std::size_t max_blocks = 0;
  std::vector<std::string> notes;
};

// Structural pipeline for one width; std::nullopt when no #-decomposition of
// width <= kmax exists among the tried cores.
std::optional<CountReport> count_structural(const Query& q, const Database& db, const RunConfig& cfg);

// Dispatch on cfg.mode. Throws NoDecompositionWithinBudget in structural or
// hybrid mode when no decomposition is found.
CountReport count(const Query& q, const Database& db, const RunConfig& cfg = {});

}  // namespace sharpcq
