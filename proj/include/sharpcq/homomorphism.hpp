#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sharpcq/relational.hpp"

namespace sharpcq {

// Images of the source variables; constants are fixed implicitly.
using Homomorphism = std::map<std::string, Term>;

struct HomomorphismOptions {
  bool injective = false;  // distinct variables get distinct images
};

// Backtracking search with forward checking. The search is deterministic: the
// same inputs always produce the same witness.
std::optional<Homomorphism> find_homomorphism(std::span<const Atom> src, std::span<const Atom> dst,
                                              HomomorphismOptions options = {});
inline std::optional<Homomorphism> find_homomorphism(const Query& src, const Query& dst) {
  return find_homomorphism(src.atoms(), dst.atoms());
}

Atom apply(const Homomorphism& h, const Atom& atom);

// Isomorphism as atom sets: a variable bijection mapping atoms onto atoms.
bool isomorphic(std::span<const Atom> a, std::span<const Atom> b);

struct ColoredQuery {
  Query query;                             // original atoms followed by color atoms
  std::vector<std::string> color_symbols;  // one per free variable, in free() order
  std::size_t original_atoms = 0;
};

ColoredQuery color(const Query& q);

// Atom indices in the order the deletion loop tries them: atoms over
// later-introduced variables first, so cores keep the earliest-named pieces.
std::vector<std::size_t> deletion_order(const Query& q);

// Indices (ascending) of the atoms kept by the deletion loop.
std::vector<std::size_t> core_atom_indices(const Query& q);
Query core(const Query& q);

// Same loop, but every "q maps into Q_c minus one atom" test is decided by
// pairwise consistency over the views V_q^k evaluated on the database of the
// candidate substructure. With cross_check each decision is compared with a
// direct homomorphism search and std::nullopt signals a disagreement, i.e.
// the cores of q are wider than k.
std::optional<std::vector<std::size_t>> core_indices_via_consistency(const Query& q, std::size_t k,
                                                                     bool cross_check);
std::optional<Query> core_via_consistency(const Query& q, std::size_t k);

struct CoreEnumeration {
  std::vector<std::vector<std::size_t>> atom_indices;  // first entry = core_atom_indices(q)
  bool truncated = false;
};

CoreEnumeration enumerate_core_indices(const Query& q, std::size_t cap, std::size_t state_budget = 20000);
std::vector<Query> enumerate_cores(const Query& q, std::size_t cap);

}  // namespace sharpcq
