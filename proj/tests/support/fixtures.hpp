#pragma once

// Queries, databases and decompositions shared by the unit and acceptance
// tests. Families follow the running examples: Q0 (movies), Q1 (4-cycle),
// Q1^n / Q2^n (width vs. star size), Q2^h and the Z-extended variant with
// their degree-heavy databases.

#include <bitset>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sharpcq/decomposition.hpp"
#include "sharpcq/io.hpp"
#include "sharpcq/relational.hpp"

namespace fixtures {

using namespace sharpcq;

inline Query q0() {
  return parse_query(
      "Q0(A,B,C) :- mw(A,B,I), wt(B,D), wi(B,E), pt(C,D), st(D,F), st(D,G), rr(G,H), rr(F,H), rr(D,H).");
}

// Atom positions in q0(), for readability in tests.
enum Q0Atom : std::size_t { MW, WT, WI, PT, ST_DF, ST_DG, RR_GH, RR_FH, RR_DH };

inline Query q1() { return parse_query("Q1(A,C) :- s1(A,B), s2(B,C), s3(C,D), s4(D,A)."); }

inline std::string x(std::size_t i) { return "X" + std::to_string(i); }
inline std::string y(std::size_t i) { return "Y" + std::to_string(i); }

inline Atom atom(const std::string& rel, std::vector<std::string> vars) {
  Atom a{rel, {}};
  for (auto& v : vars) a.args.push_back(Term::variable(std::move(v)));
  return a;
}

// r(Xi,Yi) for all i, chains r(Xi,Xi+1) and r(Yi,Yi+1); free = X1..Xn.
inline Query q1n(std::size_t n) {
  std::vector<Atom> atoms;
  for (std::size_t i = 1; i <= n; ++i) atoms.push_back(atom("r", {x(i), y(i)}));
  for (std::size_t i = 1; i < n; ++i) atoms.push_back(atom("r", {x(i), x(i + 1)}));
  for (std::size_t i = 1; i < n; ++i) atoms.push_back(atom("r", {y(i), y(i + 1)}));
  std::vector<std::string> head;
  for (std::size_t i = 1; i <= n; ++i) head.push_back(x(i));
  return Query("Q1n", std::move(atoms), std::move(head));
}

// r(Xi,Yj) for all i,j; Boolean.
inline Query q2n(std::size_t n) {
  std::vector<Atom> atoms;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= n; ++j) atoms.push_back(atom("r", {x(i), y(j)}));
  return Query("Q2n", std::move(atoms), std::vector<std::string>{});
}

// r(X0,Y1..Yh), s(Y0,Y1..Yh), wi(Xi,Yi); free = X0..Xh.
inline Query q2h(std::size_t h) {
  std::vector<std::string> ry{x(0)};
  std::vector<std::string> sy{y(0)};
  for (std::size_t i = 1; i <= h; ++i) {
    ry.push_back(y(i));
    sy.push_back(y(i));
  }
  std::vector<Atom> atoms{atom("r", ry), atom("s", sy)};
  std::vector<std::string> head{x(0)};
  for (std::size_t i = 1; i <= h; ++i) {
    atoms.push_back(atom("w" + std::to_string(i), {x(i), y(i)}));
    head.push_back(x(i));
  }
  return Query("Q2h", std::move(atoms), std::move(head));
}

// As q2h but r̄ carries an extra Z and v(Z,X1) links Z to X1.
inline Query q2h_bar(std::size_t h) {
  std::vector<std::string> ry{x(0)};
  std::vector<std::string> sy{y(0)};
  for (std::size_t i = 1; i <= h; ++i) {
    ry.push_back(y(i));
    sy.push_back(y(i));
  }
  ry.push_back("Z");
  std::vector<Atom> atoms{atom("rbar", ry), atom("s", sy)};
  std::vector<std::string> head{x(0)};
  for (std::size_t i = 1; i <= h; ++i) {
    atoms.push_back(atom("w" + std::to_string(i), {x(i), y(i)}));
    head.push_back(x(i));
  }
  atoms.push_back(atom("v", {"Z", x(1)}));
  return Query("Q2hbar", std::move(atoms), std::move(head));
}

inline std::vector<std::string> bits(std::size_t j, std::size_t h) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i <= h; ++i) out.push_back(std::to_string((j >> (i - 1)) & 1));
  return out;
}

// m = 2^h numbers j: X0 = a<j> is a key, (Y1..Yh) = bits of j, Y0 = y<j>;
// Xi = x<i>_<bit> is a key of wi.
inline Database d2(std::size_t h, bool with_z = false) {
  const std::size_t m = std::size_t{1} << h;
  Database db;
  for (std::size_t j = 0; j < m; ++j) {
    auto b = bits(j, h);
    std::vector<std::string> s{"y" + std::to_string(j)};
    s.insert(s.end(), b.begin(), b.end());
    db.add("s", s);
    std::vector<std::string> r{"a" + std::to_string(j)};
    r.insert(r.end(), b.begin(), b.end());
    if (!with_z) {
      db.add("r", r);
    } else {
      for (std::size_t z = 0; z < m; ++z) {
        auto rz = r;
        rz.push_back("z" + std::to_string(z));
        db.add("rbar", rz);
      }
    }
  }
  for (std::size_t i = 1; i <= h; ++i)
    for (int bit = 0; bit < 2; ++bit)
      db.add("w" + std::to_string(i), {"x" + std::to_string(i) + "_" + std::to_string(bit), std::to_string(bit)});
  if (with_z)
    for (std::size_t z = 0; z < m; ++z)
      for (int bit = 0; bit < 2; ++bit) db.add("v", {"z" + std::to_string(z), "x1_" + std::to_string(bit)});
  return db;
}

inline Database d2_bar(std::size_t h) { return d2(h, true); }

// Width-1 decomposition of q2h: s at the root (no free variable), r below
// it, one wi leaf per i under r.
inline HypertreeDecomposition hd2(std::size_t h) {
  HypertreeDecomposition hd;
  VarSet sv{y(0)};
  VarSet rv{x(0)};
  for (std::size_t i = 1; i <= h; ++i) {
    sv.insert(y(i));
    rv.insert(y(i));
  }
  hd.vertices.push_back(HdVertex{sv, {1}, {1}});
  hd.vertices.push_back(HdVertex{rv, {0}, {}});
  for (std::size_t i = 1; i <= h; ++i) {
    hd.vertices[1].children.push_back(hd.vertices.size());
    hd.vertices.push_back(HdVertex{{x(i), y(i)}, {i + 1}, {}});
  }
  hd.root = 0;
  return hd;
}

// hd2 with root and child merged: χ = {X0,Y0..Yh}, λ = {r,s}.
inline HypertreeDecomposition hd2_merged(std::size_t h) {
  HypertreeDecomposition hd;
  VarSet bag{x(0), y(0)};
  for (std::size_t i = 1; i <= h; ++i) bag.insert(y(i));
  hd.vertices.push_back(HdVertex{bag, {0, 1}, {}});
  for (std::size_t i = 1; i <= h; ++i) {
    hd.vertices[0].children.push_back(hd.vertices.size());
    hd.vertices.push_back(HdVertex{{x(i), y(i)}, {i + 1}, {}});
  }
  hd.root = 0;
  return hd;
}

// Width-2 decomposition of Q0 with root {B,C,D}.
inline HypertreeDecomposition fig2_hd() {
  HypertreeDecomposition hd;
  hd.vertices.push_back(HdVertex{{"B", "C", "D"}, {WT, PT}, {1, 2, 3}});
  hd.vertices.push_back(HdVertex{{"A", "B", "I"}, {MW}, {}});
  hd.vertices.push_back(HdVertex{{"B", "E"}, {WI}, {}});
  hd.vertices.push_back(HdVertex{{"D", "F", "G", "H"}, {ST_DF, RR_GH}, {}});
  hd.root = 0;
  return hd;
}

// Query views of Q0 plus {A,B,I}, {B,E}, {B,C,D}, {D,F,H}.
inline ViewSet v0() {
  Query q = q0();
  ViewSet vs;
  vs.k = 2;
  vs.views.push_back(View{"w_abi", {"A", "B", "I"}, {MW}, false});
  vs.views.push_back(View{"w_be", {"B", "E"}, {WI}, false});
  vs.views.push_back(View{"w_bcd", {"B", "C", "D"}, {WT, PT}, false});
  vs.views.push_back(View{"w_dfh", {"D", "F", "H"}, {ST_DF, RR_FH}, false});
  for (std::size_t i = 0; i < q.atoms().size(); ++i)
    vs.views.push_back(View{"wq_" + std::to_string(i), q.atoms()[i].vars(), {i}, true});
  return vs;
}

// Random tuples for every relation symbol of q.
inline Database random_database(const Query& q, std::uint64_t seed, std::size_t domain, std::size_t tuples) {
  std::mt19937_64 rng(seed);
  Database db;
  for (const auto& a : q.atoms()) {
    if (db.table(a.relation)) continue;
    db.declare(a.relation, a.arity());
    for (std::size_t t = 0; t < tuples; ++t) {
      std::vector<std::string> row;
      for (std::size_t j = 0; j < a.arity(); ++j) row.push_back(std::to_string(rng() % domain));
      db.add(a.relation, row);
    }
  }
  return db;
}

// Random query over symbols r0..r(nsym-1) of arity 2 (r0 may be ternary).
inline Query random_query(std::uint64_t seed, std::size_t max_atoms, std::size_t max_vars, bool allow_constants = false) {
  std::mt19937_64 rng(seed);
  std::size_t n_atoms = 1 + rng() % max_atoms;
  std::size_t n_vars = 1 + rng() % max_vars;
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < n_atoms; ++i) {
    std::size_t sym = rng() % 3;
    std::size_t arity = sym == 0 ? 3 : 2;
    Atom a{"r" + std::to_string(sym), {}};
    for (std::size_t j = 0; j < arity; ++j) {
      if (allow_constants && rng() % 10 == 0)
        a.args.push_back(Term::constant(std::to_string(rng() % 3)));
      else
        a.args.push_back(Term::variable("V" + std::to_string(rng() % n_vars)));
    }
    if (a.vars().empty()) a.args[0] = Term::variable("V0");
    atoms.push_back(std::move(a));
  }
  std::vector<std::string> head;
  for (const auto& v : vars_of(atoms))
    if (rng() % 100 < 40) head.push_back(v);
  return Query("R", std::move(atoms), std::move(head));
}

inline std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = i;
  return out;
}

}  // namespace fixtures
