#include "sharpcq/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>

#include "sharpcq/errors.hpp"
#include "sharpcq/io.hpp"

namespace sharpcq {

namespace {

class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}
  // Uniform enough for tiny ranges; chosen for reproducibility.
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }
  std::size_t between(std::size_t lo, std::size_t hi) { return lo + below(hi - lo + 1); }
  bool chance(unsigned percent) { return below(100) < percent; }

 private:
  std::mt19937_64 rng_;
};

CorpusInstance make_instance(Draw& draw, std::size_t index, const CorpusShape& shape) {
  const std::size_t domain = draw.between(2, shape.max_domain);
  const std::size_t n_symbols = draw.between(1, 4);
  std::vector<std::size_t> arity(n_symbols);
  for (auto& a : arity) a = draw.between(1, shape.max_arity);
  const std::size_t n_atoms = draw.between(1, shape.max_atoms);
  const std::size_t n_vars = draw.between(1, shape.max_vars);

  std::vector<Atom> atoms;
  std::set<Atom> seen;
  for (std::size_t attempt = 0; atoms.size() < n_atoms && attempt < 4 * n_atoms; ++attempt) {
    std::size_t s = draw.below(n_symbols);
    Atom a{"r" + std::to_string(s), {}};
    for (std::size_t j = 0; j < arity[s]; ++j) {
      if (draw.chance(6))
        a.args.push_back(Term::constant(std::to_string(draw.below(domain))));
      else
        a.args.push_back(Term::variable("X" + std::to_string(draw.below(n_vars))));
    }
    if (a.vars().empty() || !seen.insert(a).second) continue;
    atoms.push_back(std::move(a));
  }
  if (atoms.empty()) atoms.push_back(Atom{"r0", std::vector<Term>(arity[0], Term::variable("X0"))});

  std::vector<std::string> head;
  for (const auto& v : vars_of(atoms))
    if (draw.chance(40)) head.push_back(v);

  Database db;
  for (std::size_t s = 0; s < n_symbols; ++s) {
    const std::string symbol = "r" + std::to_string(s);
    db.declare(symbol, arity[s]);
    std::size_t space = 1;
    for (std::size_t j = 0; j < arity[s]; ++j) space *= domain;
    const std::size_t target = std::min(space, draw.between(shape.min_tuples, shape.max_tuples));
    while (db.table(symbol)->tuples.size() < target) {
      std::vector<std::string> t;
      for (std::size_t j = 0; j < arity[s]; ++j) t.push_back(std::to_string(draw.below(domain)));
      db.add(symbol, t);
    }
  }

  char id[32];
  std::snprintf(id, sizeof id, "inst%04zu", index);
  return CorpusInstance{id, Query("Q", std::move(atoms), std::move(head)), std::move(db)};
}

}  // namespace

std::vector<CorpusInstance> generate_corpus(std::uint64_t seed, std::size_t n, const CorpusShape& shape) {
  Draw draw(seed);
  std::vector<CorpusInstance> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(make_instance(draw, i, shape));
  return out;
}

void write_corpus(const std::vector<CorpusInstance>& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& inst : corpus) {
    std::ofstream q(dir / (inst.id + ".cq"));
    q << print_query(inst.query) << "\n";
    std::ofstream f(dir / (inst.id + ".facts"));
    write_facts(inst.db, f);
    if (!q || !f) throw Error("cannot write corpus instance " + inst.id);
  }
}

}  // namespace sharpcq
