#include <doctest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "sharpcq/errors.hpp"
#include "sharpcq/homomorphism.hpp"
#include "sharpcq/oracle.hpp"

using namespace sharpcq;

namespace {

// The same facts, inserted in a shuffled order.
Database shuffled(const Database& db, const Query& q, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::pair<std::string, std::vector<std::string>>> facts;
  std::set<std::string> symbols;
  for (const auto& a : q.atoms()) symbols.insert(a.relation);
  for (const auto& s : symbols)
    for (const auto& t : db.table(s)->tuples) {
      std::vector<std::string> names;
      for (Value v : t) names.push_back(db.constant_name(v));
      facts.emplace_back(s, names);
    }
  std::shuffle(facts.begin(), facts.end(), rng);
  Database out;
  for (const auto& s : symbols) out.declare(s, db.table(s)->arity);
  for (const auto& [s, names] : facts) out.add(s, names);
  return out;
}

}  // namespace

TEST_CASE("oracle on tiny instances") {
  Query one = parse_query("O(X) :- r(X,Y).");
  CHECK(brute_force_count(one, parse_facts("r(1,1). r(1,2). r(2,1).")) == 2);

  Query unsat = parse_query("U(X) :- r(X,Y), r(Y,X).");
  CHECK(brute_force_count(unsat, parse_facts("r(1,2). r(2,3).")) == 0);

  Query boolean = parse_query("B() :- r(X,Y).");
  Relation answers = enumerate_answers(boolean, parse_facts("r(1,2)."));
  CHECK(answers.size() == 1);
  CHECK(answers.schema().empty());
  Database no_r = parse_facts("s(1).");
  no_r.declare("r", 2);
  CHECK(enumerate_answers(boolean, no_r).empty());

  // Directed 4-cycle: A determines C.
  Database cycle = parse_facts(
      "s1(1,2). s1(2,3). s1(3,4). s1(4,1). s2(1,2). s2(2,3). s2(3,4). s2(4,1)."
      "s3(1,2). s3(2,3). s3(3,4). s3(4,1). s4(1,2). s4(2,3). s4(3,4). s4(4,1).");
  CHECK(brute_force_count(fixtures::q1(), cycle) == 4);

  CHECK(brute_force_count(parse_query("C(X) :- r(X,c)."), parse_facts("r(1,c). r(2,d).")) == 1);
  CHECK(brute_force_count(parse_query("C(X) :- r(X,zz)."), parse_facts("r(1,c).")) == 0);

  CHECK_THROWS_AS(brute_force_count(one, parse_facts("s(1).")), MissingRelation);
  CHECK_THROWS_AS(brute_force_count(fixtures::q0(), fixtures::random_database(fixtures::q0(), 1, 5, 25), 50),
                  StateCapExceeded);
}

TEST_CASE("oracle self-consistency") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    Query q = fixtures::random_query(seed, 6, 6, true);
    Database db = fixtures::random_database(q, seed, 3, 8);
    Relation answers = enumerate_answers(q, db);
    BigInt n = brute_force_count(q, db);
    CHECK(n == answers.size());

    // Projections of the answers are the answers' projections.
    VarSet w;
    std::size_t i = 0;
    for (const auto& v : q.free())
      if (i++ % 2 == 0) w.insert(v);
    CHECK(enumerate_projection(q, db, w) == project(answers, w));

    // Reordering atoms or tuples changes nothing.
    std::vector<Atom> reversed(q.atoms().rbegin(), q.atoms().rend());
    Query rq(q.name(), reversed, q.free());
    CHECK(brute_force_count(rq, db) == n);
    CHECK(brute_force_count(q, shuffled(db, q, seed)) == n);

    // The core has the same answers.
    ColoredQuery cq = color(q);
    std::vector<std::size_t> kept;
    for (std::size_t a : core_atom_indices(cq.query))
      if (a < q.atoms().size()) kept.push_back(a);
    CHECK(brute_force_count(q.subquery(kept), db) == n);
  }
  CHECK_THROWS_AS(enumerate_projection(fixtures::q1(), fixtures::random_database(fixtures::q1(), 1, 3, 3), {"Z"}),
                  UnknownVariable);
}
