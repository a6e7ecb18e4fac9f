#include "sharpcq/homomorphism.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "sharpcq/counting.hpp"
#include "sharpcq/decomposition.hpp"
#include "sharpcq/errors.hpp"

namespace sharpcq {

namespace {

// Source atoms are compiled to integer patterns: variables are indices >= 0,
// constants are -(id + 1) with ids taken from the destination's term table.
class HomSearch {
 public:
  HomSearch(std::span<const Atom> src, std::span<const Atom> dst, HomomorphismOptions options)
      : options_(options) {
    std::map<Term, int> dst_ids;
    auto dst_id = [&](const Term& t) {
      auto [it, fresh] = dst_ids.emplace(t, static_cast<int>(dst_terms_.size()));
      if (fresh) dst_terms_.push_back(t);
      return it->second;
    };
    std::map<std::pair<std::string, std::size_t>, std::size_t> groups;
    for (const auto& a : dst) {
      auto [it, fresh] = groups.emplace(std::make_pair(a.relation, a.arity()), candidates_.size());
      if (fresh) candidates_.emplace_back();
      std::vector<int> enc;
      for (const auto& t : a.args) enc.push_back(dst_id(t));
      candidates_[it->second].push_back(std::move(enc));
    }
    for (auto& group : candidates_) {
      std::sort(group.begin(), group.end());
      group.erase(std::unique(group.begin(), group.end()), group.end());
    }

    std::map<std::string, int> var_ids;
    for (const auto& a : src) {
      auto g = groups.find({a.relation, a.arity()});
      if (g == groups.end()) {
        impossible_ = true;
        return;
      }
      Pattern p;
      p.group = g->second;
      for (const auto& t : a.args) {
        if (t.is_variable()) {
          auto [it, fresh] = var_ids.emplace(t.name, static_cast<int>(var_names_.size()));
          if (fresh) var_names_.push_back(t.name);
          p.args.push_back(it->second);
        } else {
          auto it = dst_ids.find(t);
          if (it == dst_ids.end()) {
            impossible_ = true;
            return;
          }
          p.args.push_back(-(it->second + 1));
        }
      }
      patterns_.push_back(std::move(p));
    }
    image_.assign(var_names_.size(), -1);
    used_.assign(dst_terms_.size(), false);
    done_.assign(patterns_.size(), false);
  }

  std::optional<Homomorphism> run() {
    if (impossible_) return std::nullopt;
    if (!search(0)) return std::nullopt;
    Homomorphism h;
    for (std::size_t i = 0; i < var_names_.size(); ++i) h.emplace(var_names_[i], dst_terms_[image_[i]]);
    return h;
  }

 private:
  struct Pattern {
    std::size_t group = 0;
    std::vector<int> args;
  };

  bool compatible(const Pattern& p, const std::vector<int>& cand) const {
    // Repeated unbound variables must agree inside this candidate too.
    for (std::size_t i = 0; i < p.args.size(); ++i) {
      int a = p.args[i];
      if (a < 0) {
        if (cand[i] != -a - 1) return false;
      } else if (image_[a] >= 0) {
        if (image_[a] != cand[i]) return false;
      } else {
        if (options_.injective && (used_[cand[i]] || dst_terms_[cand[i]].kind == Term::Kind::Constant)) return false;
        for (std::size_t j = 0; j < i; ++j)
          if (p.args[j] == a && cand[j] != cand[i]) return false;
        if (options_.injective)
          for (std::size_t j = 0; j < i; ++j)
            if (p.args[j] >= 0 && p.args[j] != a && image_[p.args[j]] < 0 && cand[j] == cand[i]) return false;
      }
    }
    return true;
  }

  bool search(std::size_t placed) {
    if (placed == patterns_.size()) return true;
    // Most constrained pattern first.
    std::size_t best = patterns_.size();
    std::size_t best_count = SIZE_MAX;
    for (std::size_t i = 0; i < patterns_.size(); ++i) {
      if (done_[i]) continue;
      std::size_t n = 0;
      for (const auto& cand : candidates_[patterns_[i].group]) {
        if (compatible(patterns_[i], cand) && ++n >= best_count) break;
      }
      if (n < best_count) {
        best = i;
        best_count = n;
        if (n == 0) return false;
      }
    }
    const Pattern& p = patterns_[best];
    done_[best] = true;
    std::vector<int> bound;
    for (const auto& cand : candidates_[p.group]) {
      if (!compatible(p, cand)) continue;
      bound.clear();
      for (std::size_t i = 0; i < p.args.size(); ++i) {
        int a = p.args[i];
        if (a >= 0 && image_[a] < 0) {
          image_[a] = cand[i];
          used_[cand[i]] = true;
          bound.push_back(a);
        }
      }
      if (search(placed + 1)) return true;
      for (int a : bound) {
        used_[image_[a]] = false;
        image_[a] = -1;
      }
    }
    done_[best] = false;
    return false;
  }

  HomomorphismOptions options_;
  bool impossible_ = false;
  std::vector<Term> dst_terms_;
  std::vector<std::vector<std::vector<int>>> candidates_;
  std::vector<std::string> var_names_;
  std::vector<Pattern> patterns_;
  std::vector<int> image_;
  std::vector<bool> used_;
  std::vector<bool> done_;
};

std::vector<Atom> pick(std::span<const Atom> atoms, const std::vector<bool>& alive) {
  std::vector<Atom> out;
  for (std::size_t i = 0; i < atoms.size(); ++i)
    if (alive[i]) out.push_back(atoms[i]);
  return out;
}

std::vector<std::size_t> indices_of(const std::vector<bool>& alive) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < alive.size(); ++i)
    if (alive[i]) out.push_back(i);
  return out;
}

// The database whose facts are the atoms themselves; variables become
// constants in a namespace no parsed constant can reach.
Database canonical_database(std::span<const Atom> atoms, const Query& vocabulary) {
  Database db;
  for (const auto& a : vocabulary.atoms()) db.declare(a.relation, a.arity());
  for (const auto& a : atoms) {
    std::vector<std::string> tuple;
    for (const auto& t : a.args) tuple.push_back(t.is_variable() ? "\x01" + t.name : t.name);
    db.add(a.relation, tuple);
  }
  return db;
}

bool maps_by_consistency(const Query& q, const ViewSet& vs, std::span<const Atom> target) {
  Database db = canonical_database(target, q);
  auto lvdb = enforce_pairwise_consistency(standard_view_extension(q, db, vs));
  return !lvdb.any_empty();
}

}  // namespace

std::optional<Homomorphism> find_homomorphism(std::span<const Atom> src, std::span<const Atom> dst,
                                              HomomorphismOptions options) {
  return HomSearch(src, dst, options).run();
}

Atom apply(const Homomorphism& h, const Atom& atom) {
  Atom out{atom.relation, {}};
  for (const auto& t : atom.args) {
    if (t.is_variable()) {
      auto it = h.find(t.name);
      out.args.push_back(it == h.end() ? t : it->second);
    } else {
      out.args.push_back(t);
    }
  }
  return out;
}

bool isomorphic(std::span<const Atom> a, std::span<const Atom> b) {
  std::set<Atom> sa(a.begin(), a.end());
  std::set<Atom> sb(b.begin(), b.end());
  if (sa.size() != sb.size() || vars_of(a).size() != vars_of(b).size()) return false;
  std::vector<Atom> va(sa.begin(), sa.end());
  std::vector<Atom> vb(sb.begin(), sb.end());
  auto h = find_homomorphism(va, vb, {.injective = true});
  if (!h) return false;
  std::set<Atom> image;
  for (const auto& atom : va) image.insert(sharpcq::apply(*h, atom));
  return image == sb;
}

ColoredQuery color(const Query& q) {
  std::set<std::string> vocabulary;
  for (const auto& a : q.atoms()) vocabulary.insert(a.relation);
  ColoredQuery out;
  std::vector<Atom> atoms = q.atoms();
  out.original_atoms = atoms.size();
  for (const auto& x : q.free()) {
    std::string symbol = "color_" + x;
    while (vocabulary.count(symbol)) symbol += "_";
    vocabulary.insert(symbol);
    out.color_symbols.push_back(symbol);
    atoms.push_back(Atom{symbol, {Term::variable(x)}});
  }
  out.query = Query(q.name(), std::move(atoms), q.head());
  return out;
}

std::vector<std::size_t> deletion_order(const Query& q) {
  std::map<std::string, std::size_t> rank;
  for (const auto& a : q.atoms())
    for (const auto& t : a.args)
      if (t.is_variable()) rank.emplace(t.name, rank.size());
  std::vector<std::vector<std::size_t>> keys;
  for (const auto& a : q.atoms()) {
    std::vector<std::size_t> key;
    for (const auto& v : a.vars()) key.push_back(rank.at(v));
    std::sort(key.rbegin(), key.rend());
    keys.push_back(std::move(key));
  }
  std::vector<std::size_t> order(q.atoms().size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (keys[a] != keys[b]) return keys[a] > keys[b];
    return a > b;
  });
  return order;
}

std::vector<std::size_t> core_atom_indices(const Query& q) {
  const auto& atoms = q.atoms();
  std::vector<bool> alive(atoms.size(), true);
  for (std::size_t i : deletion_order(q)) {
    auto candidate = alive;
    candidate[i] = false;
    if (find_homomorphism(pick(atoms, alive), pick(atoms, candidate))) alive = std::move(candidate);
  }
  return indices_of(alive);
}

Query core(const Query& q) { return q.subquery(core_atom_indices(q)); }

std::optional<std::vector<std::size_t>> core_indices_via_consistency(const Query& q, std::size_t k,
                                                                     bool cross_check) {
  if (k == 0) throw InvalidWidth("k must be at least 1");
  const auto& atoms = q.atoms();
  ViewSet vs = build_view_set(q, std::min(k, atoms.size()));
  std::vector<bool> alive(atoms.size(), true);
  for (std::size_t i : deletion_order(q)) {
    auto candidate = alive;
    candidate[i] = false;
    auto target = pick(atoms, candidate);
    bool consistent = maps_by_consistency(q, vs, target);
    if (cross_check && consistent != find_homomorphism(atoms, target).has_value()) return std::nullopt;
    if (consistent) alive = std::move(candidate);
  }
  return indices_of(alive);
}

std::optional<Query> core_via_consistency(const Query& q, std::size_t k) {
  auto kept = core_indices_via_consistency(q, k, paranoid());
  if (!kept) return std::nullopt;
  return q.subquery(*kept);
}

CoreEnumeration enumerate_core_indices(const Query& q, std::size_t cap, std::size_t state_budget) {
  const auto& atoms = q.atoms();
  const auto order = deletion_order(q);
  CoreEnumeration out;
  std::set<std::vector<bool>> visited;
  // Duplicate atoms give several index sets for one core; report it once.
  std::set<std::set<Atom>> found;

  std::function<bool(const std::vector<bool>&)> dfs = [&](const std::vector<bool>& alive) -> bool {
    if (!visited.insert(alive).second) return true;
    if (visited.size() > state_budget) {
      out.truncated = true;
      return false;
    }
    bool reducible = false;
    auto current = pick(atoms, alive);
    for (std::size_t i : order) {
      if (!alive[i]) continue;
      auto candidate = alive;
      candidate[i] = false;
      if (!find_homomorphism(current, pick(atoms, candidate))) continue;
      reducible = true;
      if (!dfs(candidate)) return false;
    }
    if (!reducible && found.insert(std::set<Atom>(current.begin(), current.end())).second) {
      out.atom_indices.push_back(indices_of(alive));
      if (out.atom_indices.size() >= cap) {
        out.truncated = true;
        return false;
      }
    }
    return true;
  };
  dfs(std::vector<bool>(atoms.size(), true));
  return out;
}

std::vector<Query> enumerate_cores(const Query& q, std::size_t cap) {
  std::vector<Query> out;
  for (const auto& idx : enumerate_core_indices(q, cap).atom_indices) out.push_back(q.subquery(idx));
  return out;
}

}  // namespace sharpcq
