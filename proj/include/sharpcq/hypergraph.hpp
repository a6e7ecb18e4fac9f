#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "sharpcq/relational.hpp"

namespace sharpcq {

// Edges keep first-insertion order (searches use it as their canonical
// order); equality ignores that order.
class Hypergraph {
 public:
  Hypergraph() = default;
  Hypergraph(VarSet nodes, const std::vector<VarSet>& edges);

  const VarSet& nodes() const { return nodes_; }
  const std::vector<VarSet>& edges() const { return edges_; }

  // Ignores empty and duplicate edges; the edge's variables become nodes.
  void add_edge(const VarSet& edge);
  void add_node(const std::string& node) { nodes_.insert(node); }
  Hypergraph united(const Hypergraph& other) const;

  bool operator==(const Hypergraph& other) const;

 private:
  VarSet nodes_;
  std::vector<VarSet> edges_;
};

// A rooted tree over hyperedges; parent[i] is empty exactly for the root.
struct JoinTree {
  std::vector<VarSet> vertices;
  std::vector<std::optional<std::size_t>> parent;

  std::size_t root() const;
  std::vector<std::vector<std::size_t>> children() const;
  // For every variable the vertices containing it form a connected subtree.
  bool satisfies_connectedness() const;
};

Hypergraph hypergraph_of(std::span<const Atom> atoms);

// h1 ≤ h2: every edge of h1 lies inside some edge of h2.
bool covers(const Hypergraph& h1, const Hypergraph& h2);

// Maximal [W]-connected sets of nodes(h) \ W, ordered by smallest member.
std::vector<VarSet> w_components(const Hypergraph& h, const VarSet& w);

// Fr(Y, W, h); throws UnknownVariable when Y is not a node of h.
VarSet frontier(const std::string& y, const VarSet& w, const Hypergraph& h);

Hypergraph frontier_hypergraph(std::span<const Atom> atoms, const VarSet& w);

// GYO ear removal; returns a join tree iff h is alpha-acyclic.
std::optional<JoinTree> gyo_reduce(const Hypergraph& h);

std::size_t quantified_star_size(const Query& q);

}  // namespace sharpcq
