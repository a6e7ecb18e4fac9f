#include <doctest.h>

#include <algorithm>
#include <functional>
#include <random>

#include "fixtures.hpp"
#include "sharpcq/errors.hpp"
#include "sharpcq/homomorphism.hpp"
#include "sharpcq/hypergraph.hpp"

using namespace sharpcq;

namespace {

std::set<VarSet> edge_set(const Hypergraph& h) { return {h.edges().begin(), h.edges().end()}; }

Hypergraph hg(std::vector<VarSet> edges) {
  VarSet nodes;
  for (const auto& e : edges) nodes.insert(e.begin(), e.end());
  return Hypergraph(nodes, edges);
}

// Acyclicity by trying every order of ear removals (desk scale only).
bool acyclic_by_any_order(std::vector<VarSet> edges) {
  if (edges.size() <= 1) return true;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    VarSet shared;
    for (const auto& v : edges[i]) {
      for (std::size_t j = 0; j < edges.size(); ++j)
        if (j != i && edges[j].count(v)) shared.insert(v);
    }
    bool ear = false;
    for (std::size_t j = 0; j < edges.size() && !ear; ++j)
      if (j != i && std::includes(edges[j].begin(), edges[j].end(), shared.begin(), shared.end())) ear = true;
    if (!ear) continue;
    auto rest = edges;
    rest.erase(rest.begin() + static_cast<long>(i));
    if (acyclic_by_any_order(rest)) return true;
  }
  return false;
}

// Brute-force maximum independent set of the graph induced on `nodes`.
std::size_t max_independent(const VarSet& nodes, const Hypergraph& h) {
  std::vector<std::string> v(nodes.begin(), nodes.end());
  std::size_t best = 0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << v.size()); ++mask) {
    bool ok = true;
    for (std::size_t a = 0; a < v.size() && ok; ++a)
      for (std::size_t b = a + 1; b < v.size() && ok; ++b)
        if ((mask >> a & 1) && (mask >> b & 1))
          for (const auto& e : h.edges())
            if (e.count(v[a]) && e.count(v[b])) ok = false;
    if (ok) best = std::max<std::size_t>(best, static_cast<std::size_t>(__builtin_popcountll(mask)));
  }
  return best;
}

}  // namespace

TEST_CASE("hypergraph_of") {
  Hypergraph cycle = hypergraph_of(fixtures::q1().atoms());
  CHECK(edge_set(cycle) == std::set<VarSet>{{"A", "B"}, {"B", "C"}, {"C", "D"}, {"A", "D"}});

  Hypergraph h0 = hypergraph_of(fixtures::q0().atoms());
  CHECK(edge_set(h0) == std::set<VarSet>{{"A", "B", "I"}, {"B", "D"}, {"B", "E"}, {"C", "D"}, {"D", "F"}, {"D", "G"},
                                         {"G", "H"}, {"F", "H"}, {"D", "H"}});

  Hypergraph single = hypergraph_of(parse_query("Q() :- r(X,X,c).").atoms());
  CHECK(single.nodes() == VarSet{"X"});
  CHECK(edge_set(single) == std::set<VarSet>{{"X"}});
}

TEST_CASE("coverage") {
  Hypergraph cycle = hypergraph_of(fixtures::q1().atoms());
  CHECK(covers(cycle, cycle));
  Hypergraph v2 = hg({{"A", "B", "C"}, {"A", "B", "D"}, {"A", "C", "D"}, {"B", "C", "D"}});
  CHECK(covers(cycle, v2));
  CHECK_FALSE(covers(hg({{"A", "B", "C"}}), cycle));

  std::mt19937_64 rng(3);
  auto random_h = [&] {
    std::vector<VarSet> edges;
    for (int i = 0; i < 3; ++i) {
      VarSet e;
      for (int j = 0; j < 2; ++j) e.insert(std::string(1, static_cast<char>('A' + rng() % 4)));
      edges.push_back(e);
    }
    return hg(edges);
  };
  for (int i = 0; i < 200; ++i) {
    Hypergraph a = random_h(), b = random_h(), c = random_h();
    if (covers(a, b) && covers(b, c)) CHECK(covers(a, c));
  }
}

TEST_CASE("[W]-components and frontiers of Q0") {
  Hypergraph h0 = hypergraph_of(fixtures::q0().atoms());
  VarSet w{"A", "B", "C"};
  auto comps = w_components(h0, w);
  REQUIRE(comps.size() == 3);
  CHECK(std::set<VarSet>(comps.begin(), comps.end()) == std::set<VarSet>{{"I"}, {"E"}, {"D", "F", "G", "H"}});

  CHECK(frontier("I", w, h0) == VarSet{"A", "B"});
  CHECK(frontier("E", w, h0) == VarSet{"B"});
  for (const char* v : {"D", "F", "G", "H"}) CHECK(frontier(v, w, h0) == VarSet{"B", "C"});
  CHECK(frontier("A", {"D", "E", "G"}, h0) == VarSet{"D", "E"});
  CHECK(frontier("A", w, h0).empty());
  CHECK_THROWS_AS(frontier("Z", w, h0), UnknownVariable);

  CHECK(w_components(h0, h0.nodes()).empty());
  CHECK(w_components(h0, {}).size() == 1);

  // Partition property and shared frontiers on random W.
  std::mt19937_64 rng(5);
  std::vector<std::string> nodes(h0.nodes().begin(), h0.nodes().end());
  for (int t = 0; t < 50; ++t) {
    VarSet rw;
    for (const auto& n : nodes)
      if (rng() % 3 == 0) rw.insert(n);
    VarSet seen;
    for (const auto& c : w_components(h0, rw)) {
      for (const auto& v : c) {
        CHECK(seen.insert(v).second);
        CHECK_FALSE(rw.count(v));
        CHECK(frontier(v, rw, h0) == frontier(*c.begin(), rw, h0));
      }
    }
    CHECK(seen.size() + rw.size() == nodes.size());
  }
}

TEST_CASE("frontier hypergraphs") {
  Query q0 = fixtures::q0();
  Hypergraph fh = frontier_hypergraph(q0.atoms(), q0.free());
  CHECK(edge_set(fh) == std::set<VarSet>{{"A", "B"}, {"B"}, {"B", "C"}});
  CHECK(fh.nodes() == q0.vars());

  ColoredQuery cq = color(q0);
  Query core = cq.query.subquery(core_atom_indices(cq.query));
  Hypergraph fh_core = frontier_hypergraph(core.atoms(), q0.free());
  for (const VarSet& e : std::vector<VarSet>{{"A"}, {"B"}, {"C"}}) CHECK(edge_set(fh_core).count(e));

  // Promoting D: every frontier edge lies inside an original hyperedge.
  Hypergraph fh_d = frontier_hypergraph(q0.atoms(), {"A", "B", "C", "D"});
  CHECK(covers(fh_d, hypergraph_of(q0.atoms())));

  // W = vars: no frontier edges, only original edges inside W.
  Hypergraph all = frontier_hypergraph(q0.atoms(), q0.vars());
  CHECK(edge_set(all) == edge_set(hypergraph_of(q0.atoms())));

  // Isolated W nodes are kept.
  Hypergraph iso = frontier_hypergraph(q0.atoms(), {"A", "Z"});
  CHECK(iso.nodes().count("Z"));
}

TEST_CASE("GYO reduction") {
  CHECK_FALSE(gyo_reduce(hypergraph_of(fixtures::q1().atoms())));
  auto one = gyo_reduce(hg({{"A", "B"}}));
  REQUIRE(one);
  CHECK(one->vertices.size() == 1);
  auto fig = gyo_reduce(hg({{"A", "B", "I"}, {"B", "E"}, {"B", "C", "D"}, {"D", "F", "H"}}));
  REQUIRE(fig);
  CHECK(fig->satisfies_connectedness());
  CHECK(fig->vertices.size() == 4);

  std::mt19937_64 rng(9);
  for (int t = 0; t < 300; ++t) {
    std::vector<VarSet> edges;
    std::size_t n = 1 + rng() % 6;
    for (std::size_t i = 0; i < n; ++i) {
      VarSet e;
      std::size_t size = 1 + rng() % 3;
      for (std::size_t j = 0; j < size; ++j) e.insert(std::string(1, static_cast<char>('A' + rng() % 5)));
      edges.push_back(e);
    }
    Hypergraph h = hg(edges);
    auto jt = gyo_reduce(h);
    CHECK(jt.has_value() == acyclic_by_any_order(h.edges()));
    if (jt) {
      CHECK(jt->satisfies_connectedness());
      CHECK(std::set<VarSet>(jt->vertices.begin(), jt->vertices.end()) == edge_set(h));
    }
  }
}

TEST_CASE("quantified star size") {
  CHECK(quantified_star_size(parse_query("Q(X,Y) :- r(X,Y), s(Y,X).")) == 0);
  for (std::size_t n : {2u, 3u, 4u, 5u, 6u}) CHECK(quantified_star_size(fixtures::q1n(n)) == (n + 1) / 2);

  // Star: quantified centre Z with k pairwise non-adjacent free leaves.
  for (std::size_t k = 1; k <= 5; ++k) {
    std::vector<Atom> atoms;
    std::vector<std::string> head;
    for (std::size_t i = 0; i < k; ++i) {
      atoms.push_back(fixtures::atom("e", {"Z", fixtures::x(i)}));
      head.push_back(fixtures::x(i));
    }
    Query star("S", atoms, head);
    Hypergraph h = hypergraph_of(star.atoms());
    CHECK(quantified_star_size(star) == max_independent(frontier("Z", star.free(), h), h));
    CHECK(quantified_star_size(star) == k);
  }
}
