#include "sharpcq/hypergraph.hpp"

#include <algorithm>
#include <map>

#include "sharpcq/errors.hpp"

namespace sharpcq {

namespace {

bool subset(const VarSet& a, const VarSet& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

bool intersects(const VarSet& a, const VarSet& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j)
      ++i;
    else if (*j < *i)
      ++j;
    else
      return true;
  }
  return false;
}

}  // namespace

Hypergraph::Hypergraph(VarSet nodes, const std::vector<VarSet>& edges) : nodes_(std::move(nodes)) {
  for (const auto& e : edges) add_edge(e);
}

void Hypergraph::add_edge(const VarSet& edge) {
  if (edge.empty()) return;
  nodes_.insert(edge.begin(), edge.end());
  if (std::find(edges_.begin(), edges_.end(), edge) == edges_.end()) edges_.push_back(edge);
}

Hypergraph Hypergraph::united(const Hypergraph& other) const {
  Hypergraph out = *this;
  out.nodes_.insert(other.nodes_.begin(), other.nodes_.end());
  for (const auto& e : other.edges_) out.add_edge(e);
  return out;
}

bool Hypergraph::operator==(const Hypergraph& other) const {
  if (nodes_ != other.nodes_ || edges_.size() != other.edges_.size()) return false;
  std::set<VarSet> a(edges_.begin(), edges_.end());
  std::set<VarSet> b(other.edges_.begin(), other.edges_.end());
  return a == b;
}

std::size_t JoinTree::root() const {
  for (std::size_t i = 0; i < parent.size(); ++i)
    if (!parent[i]) return i;
  throw Error("join tree has no root");
}

std::vector<std::vector<std::size_t>> JoinTree::children() const {
  std::vector<std::vector<std::size_t>> out(vertices.size());
  for (std::size_t i = 0; i < parent.size(); ++i)
    if (parent[i]) out[*parent[i]].push_back(i);
  return out;
}

bool JoinTree::satisfies_connectedness() const {
  if (vertices.empty()) return true;
  std::size_t roots = 0;
  for (const auto& p : parent) roots += !p;
  if (roots != 1) return false;
  VarSet all;
  for (const auto& v : vertices) all.insert(v.begin(), v.end());
  // The vertices holding X are connected iff exactly one of them has a parent
  // that does not hold X.
  for (const auto& x : all) {
    std::size_t tops = 0;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      if (!vertices[i].count(x)) continue;
      if (!parent[i] || !vertices[*parent[i]].count(x)) ++tops;
    }
    if (tops != 1) return false;
  }
  return true;
}

Hypergraph hypergraph_of(std::span<const Atom> atoms) {
  Hypergraph h;
  for (const auto& a : atoms) {
    VarSet vars = a.vars();
    for (const auto& v : vars) h.add_node(v);
    h.add_edge(vars);
  }
  return h;
}

bool covers(const Hypergraph& h1, const Hypergraph& h2) {
  return std::all_of(h1.edges().begin(), h1.edges().end(), [&](const VarSet& e1) {
    return std::any_of(h2.edges().begin(), h2.edges().end(), [&](const VarSet& e2) { return subset(e1, e2); });
  });
}

std::vector<VarSet> w_components(const Hypergraph& h, const VarSet& w) {
  // Union-find over the nodes outside W, merged along each edge minus W.
  std::map<std::string, std::string> parent;
  for (const auto& n : h.nodes())
    if (!w.count(n)) parent[n] = n;
  auto find = [&](std::string x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : h.edges()) {
    const std::string* first = nullptr;
    for (const auto& v : e) {
      if (w.count(v)) continue;
      if (!first) {
        first = &v;
        continue;
      }
      auto a = find(*first);
      auto b = find(v);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }
  std::map<std::string, VarSet> groups;
  for (const auto& [n, _] : parent) groups[find(n)].insert(n);
  std::vector<VarSet> out;
  for (auto& [_, g] : groups) out.push_back(std::move(g));
  std::sort(out.begin(), out.end(), [](const VarSet& a, const VarSet& b) { return *a.begin() < *b.begin(); });
  return out;
}

namespace {

VarSet component_frontier(const VarSet& component, const VarSet& w, const Hypergraph& h) {
  VarSet out;
  for (const auto& e : h.edges()) {
    if (!intersects(e, component)) continue;
    for (const auto& v : e)
      if (w.count(v)) out.insert(v);
  }
  return out;
}

}  // namespace

VarSet frontier(const std::string& y, const VarSet& w, const Hypergraph& h) {
  if (!h.nodes().count(y)) throw UnknownVariable("variable " + y + " is not a node of the hypergraph");
  if (w.count(y)) return {};
  for (const auto& c : w_components(h, w))
    if (c.count(y)) return component_frontier(c, w, h);
  return {};
}

Hypergraph frontier_hypergraph(std::span<const Atom> atoms, const VarSet& w) {
  Hypergraph h = hypergraph_of(atoms);
  VarSet nodes = h.nodes();
  nodes.insert(w.begin(), w.end());
  Hypergraph out(nodes, {});
  for (const auto& c : w_components(h, w)) out.add_edge(component_frontier(c, w, h));
  for (const auto& e : h.edges())
    if (subset(e, w)) out.add_edge(e);
  return out;
}

std::optional<JoinTree> gyo_reduce(const Hypergraph& h) {
  const auto& edges = h.edges();
  JoinTree tree;
  tree.vertices = edges;
  tree.parent.assign(edges.size(), std::nullopt);
  std::vector<std::size_t> alive(edges.size());
  for (std::size_t i = 0; i < alive.size(); ++i) alive[i] = i;

  while (alive.size() > 1) {
    bool removed = false;
    for (std::size_t ai = 0; ai < alive.size() && !removed; ++ai) {
      std::size_t e = alive[ai];
      VarSet shared;
      for (const auto& v : edges[e])
        for (std::size_t f : alive)
          if (f != e && edges[f].count(v)) {
            shared.insert(v);
            break;
          }
      for (std::size_t f : alive) {
        if (f == e || !subset(shared, edges[f])) continue;
        tree.parent[e] = f;
        alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(ai));
        removed = true;
        break;
      }
    }
    if (!removed) return std::nullopt;
  }
  return tree;
}

std::size_t quantified_star_size(const Query& q) {
  Hypergraph h = hypergraph_of(q.atoms());
  std::size_t best = 0;
  for (const auto& c : w_components(h, q.free())) {
    VarSet fr = component_frontier(c, q.free(), h);
    std::vector<std::string> nodes(fr.begin(), fr.end());
    const std::size_t n = nodes.size();
    if (n > 24) throw SearchBudgetExceeded("frontier too large for exhaustive independent-set search");
    std::vector<std::uint32_t> adjacent(n, 0);
    for (const auto& e : h.edges())
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (i != j && e.count(nodes[i]) && e.count(nodes[j])) adjacent[i] |= 1u << j;
    for (std::uint32_t s = 0; s < (1u << n); ++s) {
      auto size = static_cast<std::size_t>(__builtin_popcount(s));
      if (size <= best) continue;
      bool independent = true;
      for (std::size_t i = 0; i < n && independent; ++i)
        if ((s >> i & 1u) && (adjacent[i] & s)) independent = false;
      if (independent) best = size;
    }
  }
  return best;
}

}  // namespace sharpcq
