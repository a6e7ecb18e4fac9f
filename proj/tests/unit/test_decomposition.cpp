#include <doctest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "sharpcq/errors.hpp"
#include "sharpcq/homomorphism.hpp"
#include "sharpcq/hybrid.hpp"
#include "sharpcq/oracle.hpp"

using namespace sharpcq;

namespace {

Hypergraph hg(std::vector<VarSet> edges) {
  VarSet nodes;
  for (const auto& e : edges) nodes.insert(e.begin(), e.end());
  return Hypergraph(nodes, edges);
}

bool has_edge(const Hypergraph& h, const VarSet& e) {
  return std::find(h.edges().begin(), h.edges().end(), e) != h.edges().end();
}

// Does any acyclic hypergraph over subsets of h2's edges cover h1? Every
// family of candidate edges is tried.
bool sandwich_exists(const Hypergraph& h1, const Hypergraph& h2) {
  std::set<VarSet> candidates;
  for (const auto& e : h2.edges()) {
    std::vector<std::string> v(e.begin(), e.end());
    for (std::size_t mask = 1; mask < (std::size_t{1} << v.size()); ++mask) {
      VarSet s;
      for (std::size_t i = 0; i < v.size(); ++i)
        if (mask >> i & 1) s.insert(v[i]);
      candidates.insert(s);
    }
  }
  std::vector<VarSet> c(candidates.begin(), candidates.end());
  for (std::size_t mask = 1; mask < (std::size_t{1} << c.size()); ++mask) {
    std::vector<VarSet> chosen;
    for (std::size_t i = 0; i < c.size(); ++i)
      if (mask >> i & 1) chosen.push_back(c[i]);
    Hypergraph ha = hg(chosen);
    if (covers(h1, ha) && gyo_reduce(ha)) return true;
  }
  return false;
}

std::optional<std::size_t> first_vertex_holding(const HypertreeDecomposition& hd, const VarSet& vars) {
  for (std::size_t v = 0; v < hd.vertices.size(); ++v)
    if (std::includes(hd.vertices[v].chi.begin(), hd.vertices[v].chi.end(), vars.begin(), vars.end())) return v;
  return std::nullopt;
}

}  // namespace

TEST_CASE("view sets") {
  Query q1 = fixtures::q1();
  ViewSet v2 = build_view_set(q1, 2);
  CHECK(v2.views.size() == 10);
  auto edges = v2.edges();
  for (const VarSet& e : std::vector<VarSet>{{"A", "B", "C"}, {"A", "B", "D"}, {"A", "C", "D"}, {"B", "C", "D"}})
    CHECK(std::find(edges.begin(), edges.end(), e) != edges.end());
  CHECK(std::count_if(v2.views.begin(), v2.views.end(), [](const View& w) { return w.query_view; }) == 4);
  for (std::size_t i = 0; i < q1.atoms().size(); ++i) {
    auto it = std::find_if(v2.views.begin(), v2.views.end(), [&](const View& w) {
      return w.query_view && w.provenance == std::vector<std::size_t>{i};
    });
    REQUIRE(it != v2.views.end());
    CHECK(it->vars == q1.atoms()[i].vars());
  }

  ViewSet v1 = build_view_set(q1, 1);
  for (const auto& w : v1.views) {
    REQUIRE(w.provenance.size() == 1);
    CHECK(w.vars == q1.atoms()[w.provenance[0]].vars());
  }
  ViewSet v4 = build_view_set(q1, 4);
  auto e4 = v4.edges();
  CHECK(std::count(e4.begin(), e4.end(), q1.vars()) >= 1);
  CHECK_THROWS_AS(build_view_set(q1, 0), InvalidWidth);
  CHECK_THROWS_AS(build_view_set(q1, 5), InvalidWidth);

  Query q0 = fixtures::q0();
  CHECK(build_view_set(q0, 3).views.size() == 84 + 9);
}

TEST_CASE("tree projections") {
  Hypergraph cycle = hypergraph_of(fixtures::q1().atoms());
  Hypergraph v2 = build_view_set(fixtures::q1(), 2).hypergraph();
  auto tp = tree_projection(cycle, v2);
  REQUIRE(tp);
  Hypergraph ha = tp->hypergraph();
  CHECK(gyo_reduce(ha));
  CHECK(tp->tree.satisfies_connectedness());
  CHECK(covers(cycle, ha));
  CHECK(covers(ha, v2));
  for (std::size_t i = 0; i < tp->tree.vertices.size(); ++i) {
    const VarSet& bag = tp->tree.vertices[i];
    const VarSet& cover = v2.edges()[tp->cover[i]];
    CHECK(std::includes(cover.begin(), cover.end(), bag.begin(), bag.end()));
  }

  Hypergraph path = hg({{"A", "B"}, {"B", "C"}, {"C", "D"}});
  auto same = tree_projection(path, path);
  REQUIRE(same);
  CHECK(covers(same->hypergraph(), path));
  CHECK(covers(path, same->hypergraph()));

  Hypergraph triangle = hg({{"A", "B"}, {"B", "C"}, {"A", "C"}});
  CHECK_FALSE(tree_projection(triangle, triangle));
  CHECK(tree_projection(triangle, hg({{"A", "B", "C"}})));
  CHECK_FALSE(tree_projection(cycle, hg({{"A", "B", "C"}})));

  // Agreement with exhaustive enumeration of acyclic sandwiches.
  std::mt19937_64 rng(21);
  auto random_h = [&](std::size_t max_edges, std::size_t max_size) {
    std::vector<VarSet> edges;
    std::size_t n = 1 + rng() % max_edges;
    for (std::size_t i = 0; i < n; ++i) {
      VarSet e;
      std::size_t size = 1 + rng() % max_size;
      for (std::size_t j = 0; j < size; ++j) e.insert(std::string(1, static_cast<char>('A' + rng() % 4)));
      edges.push_back(e);
    }
    return hg(edges);
  };
  std::size_t present = 0;
  for (int t = 0; t < 150; ++t) {
    Hypergraph h1 = random_h(5, 2);
    Hypergraph h2 = random_h(4, 3);
    auto found = tree_projection(h1, h2);
    CHECK(found.has_value() == sandwich_exists(h1, h2));
    if (found) {
      ++present;
      CHECK(gyo_reduce(found->hypergraph()));
      CHECK(covers(h1, found->hypergraph()));
      CHECK(covers(found->hypergraph(), h2));
    }
  }
  CHECK(present > 10);
  CHECK(present < 140);
}

TEST_CASE("#-decompositions against V0") {
  Query q0 = fixtures::q0();
  ViewSet v0 = fixtures::v0();
  auto sd = sharp_decomposition(q0, v0, 8);
  REQUIRE(sd);
  Hypergraph ha = sd->tp.hypergraph();
  CHECK(has_edge(ha, {"B", "C", "D"}));
  CHECK(covers(frontier_hypergraph(sd->core.atoms(), q0.free()), ha));
  CHECK(covers(hypergraph_of(sd->core.atoms()), ha));

  ColoredQuery cq = color(q0);
  auto cores = enumerate_core_indices(cq.query, 8);
  REQUIRE(cores.atom_indices.size() == 2);
  CHECK(sharp_decomposition_for_core(q0, v0, cores.atom_indices[0]));
  CHECK_FALSE(sharp_decomposition_for_core(q0, v0, cores.atom_indices[1]));

  // free = vars: the frontier hypergraph adds nothing.
  Query all_free = q0.with_free(q0.vars());
  ViewSet vs = build_view_set(all_free, 2);
  auto plain = tree_projection(hypergraph_of(core(all_free).atoms()), vs.hypergraph());
  CHECK(sharp_decomposition(all_free, vs).has_value() == plain.has_value());
}

TEST_CASE("#-hypertree width of the fixtures") {
  auto q1 = sharp_hypertree_width(fixtures::q1(), 3);
  REQUIRE(q1);
  CHECK(q1->k == 2);
  CHECK(first_vertex_holding(q1->hd, {"A", "C"}).has_value());
  CHECK(validate_hd(q1->hd, q1->core).generalized());
  CHECK(covers(frontier_hypergraph(q1->core.atoms(), fixtures::q1().free()), q1->tp.hypergraph()));

  auto q0 = sharp_hypertree_width(fixtures::q0(), 3);
  REQUIRE(q0);
  CHECK(q0->k == 2);
  CHECK(validate_hd(q0->hd, q0->core).generalized());
  CHECK(q0->hd.width() <= 2);

  auto q23 = sharp_hypertree_width(fixtures::q2n(3), 3);
  REQUIRE(q23);
  CHECK(q23->k == 1);

  CHECK_FALSE(sharp_hypertree_width(fixtures::q1(), 1));

  // Monotone in k.
  for (const Query& q : {fixtures::q0(), fixtures::q1(), fixtures::q2n(2), fixtures::q1n(3), fixtures::q2h(2)}) {
    bool seen = false;
    for (std::size_t k = 1; k <= std::min<std::size_t>(4, q.atoms().size()); ++k) {
      bool present = sharp_decomposition(q, build_view_set(q, k)).has_value();
      if (seen) CHECK(present);
      seen = seen || present;
    }
    CHECK(seen);
  }
}

TEST_CASE("plain generalized hypertree width of Q2^n") {
  for (std::size_t n : {2u, 3u}) {
    Query q = fixtures::q2n(n);
    Hypergraph h = hypergraph_of(q.atoms());
    for (std::size_t k = 1; k <= n; ++k) {
      bool present = tree_projection(h, build_view_set(q, k).hypergraph()).has_value();
      CHECK(present == (k == n));
    }
  }
}

TEST_CASE("validation reports each condition") {
  Query q0 = fixtures::q0();
  auto hd = fixtures::fig2_hd();
  ValidationReport ok = validate_hd(hd, q0);
  CHECK(ok.hypertree());
  CHECK(hd.width() == 2);
  CHECK_FALSE(ok.completeness.ok);

  auto broken = hd;
  broken.vertices[0].chi.erase("B");
  ValidationReport r = validate_hd(broken, q0);
  CHECK_FALSE(r.connectedness.ok);
  CHECK(r.connectedness.witness.find('B') != std::string::npos);

  // Violates only the descendant condition.
  Query path = parse_query("P(A,B,C) :- e1(A,B), e2(B,C).");
  HypertreeDecomposition g;
  g.vertices.push_back(HdVertex{{"B"}, {1}, {1, 2}});
  g.vertices.push_back(HdVertex{{"A", "B"}, {0}, {}});
  g.vertices.push_back(HdVertex{{"B", "C"}, {1}, {}});
  ValidationReport d = validate_hd(g, path);
  CHECK(d.coverage.ok);
  CHECK(d.connectedness.ok);
  CHECK(d.chi_in_lambda.ok);
  CHECK(d.tree.ok);
  CHECK_FALSE(d.descendant.ok);
  CHECK(d.descendant.witness.find('C') != std::string::npos);

  auto chi_bad = hd;
  chi_bad.vertices[2].chi.insert("A");
  CHECK_FALSE(validate_hd(chi_bad, q0).chi_in_lambda.ok);

  auto cyclic = hd;
  cyclic.vertices[1].children.push_back(0);
  CHECK_FALSE(validate_hd(cyclic, q0).tree.ok);
}

TEST_CASE("completion") {
  Query q0 = fixtures::q0();
  auto hd = fixtures::fig2_hd();
  Database db = fixtures::random_database(q0, 4, 4, 30);
  auto [full, filtered] = complete_hd(hd, q0, db);
  CHECK(validate_hd(full, q0).completeness.ok);
  CHECK(validate_hd(full, q0).hypertree());
  CHECK(full.width() == hd.width());
  CHECK(full.vertices.size() == hd.vertices.size() + 3);
  bool dg_leaf = false;
  for (const auto& v : full.vertices)
    if (v.lambda == std::vector<std::size_t>{fixtures::ST_DG} && v.chi == VarSet{"D", "G"}) dg_leaf = true;
  CHECK(dg_leaf);
  CHECK(enumerate_answers(q0, db) == enumerate_answers(q0, filtered));

  auto [again, db_again] = complete_hd(full, q0, filtered);
  CHECK(again.vertices.size() == full.vertices.size());
  CHECK(db_again.equivalent(filtered));

  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Database rdb = fixtures::random_database(q0, seed, 3, 12);
    auto [c, fdb] = complete_hd(hd, q0, rdb);
    for (const auto& a : q0.atoms()) {
      const auto& before = rdb.table(a.relation)->tuples;
      for (const auto& t : fdb.table(a.relation)->tuples) CHECK(before.count(t));
    }
    CHECK(enumerate_answers(q0, rdb).size() == enumerate_answers(q0, fdb).size());
    CHECK(bound(c, q0, fdb, q0.free()).overall <= std::max<std::size_t>(1, bound(hd, q0, rdb, q0.free()).overall));
  }

  // No vertex holds {A,E}.
  Query extra = parse_query("Q0x(A,B,C) :- mw(A,B,I), wt(B,D), wi(B,E), pt(C,D), st(D,F), st(D,G), rr(G,H), rr(F,H), rr(D,H), z(A,E).");
  Database zdb = db;
  zdb.add("z", {"1", "1"});
  CHECK_THROWS_AS(complete_hd(hd, extra, zdb), IncompatibleDecomposition);
}

TEST_CASE("D-optimal normal-form decompositions") {
  for (std::size_t h : {2u, 3u}) {
    const std::size_t m = std::size_t{1} << h;
    Query q = fixtures::q2h(h);
    Database db = fixtures::d2(h);
    CHECK(bound(fixtures::hd2(h), q, db, q.free()).overall == m);
    auto one = d_optimal_nf(q, db, 1);
    REQUIRE(one);
    CHECK(one->width() == 1);
    CHECK(validate_hd(*one, q).hypertree());
    CHECK(bound(*one, q, db, q.free()).overall == m);
    auto two = d_optimal_nf(q, db, 2);
    REQUIRE(two);
    CHECK(two->width() <= 2);
    CHECK(validate_hd(*two, q).hypertree());
    CHECK(bound(*two, q, db, q.free()).overall == 1);
    CHECK(decomposition_cost(*two, q, db) <= decomposition_cost(fixtures::hd2_merged(h), q, db));
  }

  // Every degree is 1 when all variables are free.
  Query q = parse_query("U(X,Y,Z) :- r(X,Y), s(Y,Z), t(Z,X).");
  Database db = parse_facts(
      "r(1,1). r(1,2). r(2,1). s(1,2). s(2,2). s(2,1). t(1,1). t(2,1). t(2,2).");
  auto hd = d_optimal_nf(q, db, 2);
  REQUIRE(hd);
  const std::size_t w = q.atoms().size();
  CHECK(decomposition_cost(*hd, q, db) == BigInt(hd->vertices.size() * (w + 1)));
  CHECK_FALSE(d_optimal_nf(q, db, 1));
}
