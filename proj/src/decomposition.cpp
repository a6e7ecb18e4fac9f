#include "sharpcq/decomposition.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "bitset_util.hpp"
#include "sharpcq/errors.hpp"
#include "sharpcq/homomorphism.hpp"
#include "sharpcq/hybrid.hpp"

namespace sharpcq {

namespace detail {

const std::vector<std::uint32_t>& subset_order(int n) {
  static std::mutex lock;
  static std::map<int, std::vector<std::uint32_t>> cache;
  std::lock_guard<std::mutex> guard(lock);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<std::uint32_t> order;
  for (std::uint32_t s = 1; s < (std::uint32_t{1} << n); ++s) order.push_back(s);
  std::stable_sort(order.begin(), order.end(),
                   [](std::uint32_t a, std::uint32_t b) { return std::popcount(a) > std::popcount(b); });
  return cache.emplace(n, std::move(order)).first->second;
}

}  // namespace detail

using detail::Mask;

std::vector<VarSet> ViewSet::edges() const {
  std::vector<VarSet> out;
  out.reserve(views.size());
  for (const auto& v : views) out.push_back(v.vars);
  return out;
}

Hypergraph ViewSet::hypergraph() const {
  Hypergraph h;
  for (const auto& v : views) h.add_edge(v.vars);
  return h;
}

ViewSet build_view_set(const Query& q, std::size_t k) {
  const std::size_t n = q.atoms().size();
  if (k < 1 || k > n)
    throw InvalidWidth("width " + std::to_string(k) + " outside 1.." + std::to_string(n));
  ViewSet vs;
  vs.k = k;
  std::vector<std::size_t> pick(k);
  for (std::size_t i = 0; i < k; ++i) pick[i] = i;
  while (true) {
    View v;
    v.symbol = "w";
    for (std::size_t i : pick) {
      v.symbol += "_" + std::to_string(i);
      auto vars = q.atoms()[i].vars();
      v.vars.insert(vars.begin(), vars.end());
    }
    v.provenance = pick;
    vs.views.push_back(std::move(v));
    // Next combination in lexicographic order.
    std::size_t i = k;
    while (i > 0 && pick[i - 1] == n - k + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
  for (std::size_t i = 0; i < n; ++i)
    vs.views.push_back(View{"wq_" + std::to_string(i), q.atoms()[i].vars(), {i}, true});
  return vs;
}

Hypergraph TreeProjection::hypergraph() const {
  Hypergraph h;
  for (const auto& bag : tree.vertices) h.add_edge(bag);
  return h;
}

namespace {

class TreeProjectionSearch {
 public:
  TreeProjectionSearch(const Hypergraph& h1, std::span<const VarSet> resources, const TreeProjectionOptions& options)
      : index_(h1.nodes()), options_(options), resources_(resources.begin(), resources.end()) {
    for (const auto& e : h1.edges()) edges_.push_back(index_.mask(e));
    for (const auto& r : resources_) {
      Mask m = index_.mask(r);
      restricted_.push_back(m);
      if (m && std::find(distinct_.begin(), distinct_.end(), m) == distinct_.end()) distinct_.push_back(m);
    }
  }

  std::optional<TreeProjection> run() {
    for (Mask e : edges_) {
      bool covered = std::any_of(restricted_.begin(), restricted_.end(), [&](Mask r) { return (e & ~r) == 0; });
      if (!covered) return std::nullopt;
    }
    Mask all = 0;
    for (Mask e : edges_) all |= e;
    std::vector<int> roots;
    for (Mask comp : detail::components_within(all, edges_)) {
      int id = solve(comp, 0);
      if (id < 0) return std::nullopt;
      roots.push_back(id);
    }
    TreeProjection tp;
    if (roots.empty()) return tp;
    emit(roots[0], std::nullopt, tp);
    const std::size_t top = 0;
    for (std::size_t i = 1; i < roots.size(); ++i) emit(roots[i], top, tp);
    return tp;
  }

 private:
  struct Node {
    Mask bag = 0;
    std::size_t cover = 0;
    std::vector<int> children;
  };

  struct PairHash {
    std::size_t operator()(const std::pair<Mask, Mask>& p) const noexcept {
      return std::hash<Mask>()(p.first * 0x9e3779b97f4a7c15ULL ^ p.second);
    }
  };

  std::optional<std::size_t> cover_for(Mask bag) {
    auto it = cover_cache_.find(bag);
    if (it != cover_cache_.end()) return it->second;
    std::optional<std::size_t> chosen;
    if (options_.select_cover) {
      chosen = options_.select_cover(index_.set(bag));
    } else {
      for (std::size_t i = 0; i < restricted_.size(); ++i) {
        if (bag & ~restricted_[i]) continue;
        if (!chosen || resources_[i].size() < resources_[*chosen].size()) chosen = i;
      }
    }
    cover_cache_.emplace(bag, chosen);
    return chosen;
  }

  int solve(Mask comp, Mask conn) {
    auto key = std::make_pair(comp, conn);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    if (++states_ > options_.state_cap) throw SearchBudgetExceeded("tree projection search exceeded its state cap");

    std::unordered_set<Mask> tried;
    std::unordered_set<Mask> seen_avail;
    int result = -1;
    for (Mask r : distinct_) {
      if (conn & ~r) continue;
      Mask avail = r & comp;
      if (!avail || !seen_avail.insert(avail).second) continue;
      int n = detail::popcount(avail);
      if ((std::size_t{1} << n) > options_.subset_cap)
        throw SearchBudgetExceeded("candidate bag enumeration exceeds the subset cap");
      auto bits = detail::bit_positions(avail);
      for (std::uint32_t pattern : detail::subset_order(n)) {
        Mask bag = conn | detail::spread(pattern, bits);
        if (!tried.insert(bag).second) continue;
        auto cover = cover_for(bag);
        if (!cover) continue;
        std::vector<int> children;
        bool ok = true;
        for (Mask sub : detail::components_within(comp & ~bag, edges_)) {
          Mask sub_conn = detail::touching(sub, edges_) & bag;
          int child = solve(sub, sub_conn);
          if (child < 0) {
            ok = false;
            break;
          }
          children.push_back(child);
        }
        if (!ok) continue;
        nodes_.push_back(Node{bag, *cover, std::move(children)});
        result = static_cast<int>(nodes_.size()) - 1;
        break;
      }
      if (result >= 0) break;
    }
    memo_.emplace(key, result);
    return result;
  }

  void emit(int id, std::optional<std::size_t> parent, TreeProjection& tp) {
    const Node& node = nodes_[id];
    std::size_t me = tp.tree.vertices.size();
    tp.tree.vertices.push_back(index_.set(node.bag));
    tp.tree.parent.push_back(parent);
    tp.cover.push_back(node.cover);
    for (int child : node.children) emit(child, me, tp);
  }

  detail::VarIndex index_;
  const TreeProjectionOptions& options_;
  std::vector<VarSet> resources_;
  std::vector<Mask> edges_;
  std::vector<Mask> restricted_;
  std::vector<Mask> distinct_;
  std::unordered_map<Mask, std::optional<std::size_t>> cover_cache_;
  std::unordered_map<std::pair<Mask, Mask>, int, PairHash> memo_;
  std::vector<Node> nodes_;
  std::size_t states_ = 0;
};

}  // namespace

std::optional<TreeProjection> tree_projection(const Hypergraph& h1, std::span<const VarSet> resources,
                                              const TreeProjectionOptions& options) {
  return TreeProjectionSearch(h1, resources, options).run();
}

std::optional<TreeProjection> tree_projection(const Hypergraph& h1, const Hypergraph& h2,
                                              const TreeProjectionOptions& options) {
  return tree_projection(h1, std::span<const VarSet>(h2.edges()), options);
}

std::size_t HypertreeDecomposition::width() const {
  std::size_t w = 0;
  for (const auto& v : vertices) w = std::max(w, v.lambda.size());
  return w;
}

std::vector<std::optional<std::size_t>> HypertreeDecomposition::parents() const {
  std::vector<std::optional<std::size_t>> out(vertices.size());
  for (std::size_t p = 0; p < vertices.size(); ++p)
    for (std::size_t c : vertices[p].children) out.at(c) = p;
  return out;
}

std::vector<std::size_t> HypertreeDecomposition::preorder() const {
  std::vector<std::size_t> out;
  if (vertices.empty()) return out;
  std::vector<std::size_t> stack{root};
  while (!stack.empty()) {
    std::size_t v = stack.back();
    stack.pop_back();
    out.push_back(v);
    const auto& ch = vertices[v].children;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

std::vector<std::size_t> HypertreeDecomposition::postorder() const {
  // Children left to right, then the parent.
  std::vector<std::size_t> out;
  if (vertices.empty()) return out;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
  while (!stack.empty()) {
    auto& [v, next] = stack.back();
    if (next < vertices[v].children.size()) {
      std::size_t c = vertices[v].children[next++];
      stack.emplace_back(c, 0);
    } else {
      out.push_back(v);
      stack.pop_back();
    }
  }
  return out;
}

HypertreeDecomposition to_hypertree_decomposition(const TreeProjection& tp, const ViewSet& vs) {
  HypertreeDecomposition hd;
  const auto& t = tp.tree;
  hd.vertices.resize(t.vertices.size());
  for (std::size_t i = 0; i < t.vertices.size(); ++i) {
    hd.vertices[i].chi = t.vertices[i];
    hd.vertices[i].lambda = vs.views.at(tp.cover[i]).provenance;
    if (t.parent[i])
      hd.vertices[*t.parent[i]].children.push_back(i);
    else
      hd.root = i;
  }
  return hd;
}

Hypergraph sharp_target(const Query& colored_core, const VarSet& free) {
  return hypergraph_of(colored_core.atoms()).united(frontier_hypergraph(colored_core.atoms(), free));
}

std::optional<SharpDecomposition> sharp_decomposition_for_core(const Query& q, const ViewSet& vs,
                                                               std::span<const std::size_t> colored_core) {
  ColoredQuery cq = color(q);
  Query colored = cq.query.subquery(colored_core);
  auto tp = tree_projection(sharp_target(colored, q.free()), vs.edges());
  if (!tp) return std::nullopt;
  SharpDecomposition out{std::move(*tp), Query(), {}};
  for (std::size_t i : colored_core)
    if (i < cq.original_atoms) out.core_atoms.push_back(i);
  out.core = q.subquery(out.core_atoms);
  return out;
}

std::optional<SharpDecomposition> sharp_decomposition(const Query& q, const ViewSet& vs, std::size_t cores_to_try) {
  ColoredQuery cq = color(q);
  for (const auto& idx : enumerate_core_indices(cq.query, cores_to_try).atom_indices)
    if (auto found = sharp_decomposition_for_core(q, vs, idx)) return found;
  return std::nullopt;
}

std::optional<SharpWidth> sharp_hypertree_width(const Query& q, std::size_t kmax, std::size_t cores_to_try,
                                                const TreeProjectionOptions& options) {
  ColoredQuery cq = color(q);
  auto cores = enumerate_core_indices(cq.query, cores_to_try).atom_indices;
  for (std::size_t k = 1; k <= kmax; ++k) {
    for (const auto& idx : cores) {
      std::vector<std::size_t> core_atoms;
      for (std::size_t i : idx)
        if (i < cq.original_atoms) core_atoms.push_back(i);
      Query core_q = q.subquery(core_atoms);
      ViewSet vs = build_view_set(core_q, std::min(k, core_q.atoms().size()));
      auto tp = tree_projection(sharp_target(cq.query.subquery(idx), q.free()), vs.edges(), options);
      if (!tp) continue;
      SharpWidth out;
      out.k = k;
      out.hd = to_hypertree_decomposition(*tp, vs);
      out.core = std::move(core_q);
      out.core_atoms = std::move(core_atoms);
      out.views = std::move(vs);
      out.tp = std::move(*tp);
      return out;
    }
  }
  return std::nullopt;
}

namespace {

std::string describe(const Atom& a) {
  std::string s = a.relation + "(";
  for (std::size_t i = 0; i < a.args.size(); ++i) s += (i ? "," : "") + a.args[i].name;
  return s + ")";
}

std::string describe(const VarSet& vars) {
  std::string s = "{";
  bool first = true;
  for (const auto& v : vars) {
    s += (first ? "" : ",") + v;
    first = false;
  }
  return s + "}";
}

bool subset(const VarSet& a, const VarSet& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

VarSet lambda_vars(const HdVertex& v, const Query& q) {
  VarSet out;
  for (std::size_t i : v.lambda) {
    auto vars = q.atoms().at(i).vars();
    out.insert(vars.begin(), vars.end());
  }
  return out;
}

}  // namespace

ValidationReport validate_hd(const HypertreeDecomposition& hd, const Query& q) {
  ValidationReport report;
  const std::size_t n = hd.vertices.size();
  auto fail = [](ConditionCheck& c, std::string witness) {
    if (!c.ok) return;
    c.ok = false;
    c.witness = std::move(witness);
  };

  // Shape: every vertex reached exactly once from the root, λ in range.
  if (n == 0 || hd.root >= n) {
    fail(report.tree, "no root");
  } else {
    std::vector<int> seen(n, 0);
    for (const auto& v : hd.vertices)
      for (std::size_t c : v.children) {
        if (c >= n || c == hd.root) fail(report.tree, "bad child index " + std::to_string(c));
        else ++seen[c];
      }
    for (std::size_t i = 0; i < n && report.tree.ok; ++i)
      if (i != hd.root && seen[i] != 1) fail(report.tree, "vertex " + std::to_string(i) + " has " +
                                                              std::to_string(seen[i]) + " parents");
    if (report.tree.ok && hd.preorder().size() != n) fail(report.tree, "vertices unreachable from the root");
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t a : hd.vertices[i].lambda)
        if (a >= q.atoms().size()) fail(report.tree, "vertex " + std::to_string(i) + " names atom " + std::to_string(a));
  }
  if (!report.tree.ok) {
    for (auto* c : {&report.coverage, &report.connectedness, &report.chi_in_lambda, &report.descendant,
                    &report.completeness})
      fail(*c, "malformed tree: " + report.tree.witness);
    return report;
  }

  for (std::size_t a = 0; a < q.atoms().size(); ++a) {
    VarSet vars = q.atoms()[a].vars();
    bool covered = false, complete = false;
    for (const auto& v : hd.vertices) {
      if (!subset(vars, v.chi)) continue;
      covered = true;
      if (std::find(v.lambda.begin(), v.lambda.end(), a) != v.lambda.end()) complete = true;
    }
    if (!covered) fail(report.coverage, describe(q.atoms()[a]));
    if (!complete) fail(report.completeness, describe(q.atoms()[a]));
  }

  auto parent = hd.parents();
  VarSet all;
  for (const auto& v : hd.vertices) all.insert(v.chi.begin(), v.chi.end());
  for (const auto& x : all) {
    std::size_t tops = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (hd.vertices[i].chi.count(x) && (!parent[i] || !hd.vertices[*parent[i]].chi.count(x))) ++tops;
    if (tops != 1) fail(report.connectedness, x);
  }

  for (std::size_t i = 0; i < n; ++i)
    if (!subset(hd.vertices[i].chi, lambda_vars(hd.vertices[i], q)))
      fail(report.chi_in_lambda, "vertex " + std::to_string(i) + " " + describe(hd.vertices[i].chi));

  // χ(T_p) bottom-up, then vars(λ(p)) ∩ χ(T_p) ⊆ χ(p).
  std::vector<VarSet> below(n);
  for (std::size_t v : hd.postorder()) {
    below[v] = hd.vertices[v].chi;
    for (std::size_t c : hd.vertices[v].children) below[v].insert(below[c].begin(), below[c].end());
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& x : lambda_vars(hd.vertices[i], q))
      if (below[i].count(x) && !hd.vertices[i].chi.count(x)) {
        fail(report.descendant, "vertex " + std::to_string(i) + " variable " + x);
        break;
      }
  }
  return report;
}

Relation vertex_relation(const HypertreeDecomposition& hd, std::size_t v, const Query& q, const Database& db) {
  std::vector<Atom> atoms;
  for (std::size_t i : hd.vertices.at(v).lambda) atoms.push_back(q.atoms().at(i));
  Relation joined = evaluate_atoms(atoms, db);
  return project(joined, hd.vertices[v].chi);
}

std::pair<HypertreeDecomposition, Database> complete_hd(const HypertreeDecomposition& hd, const Query& q,
                                                        const Database& db) {
  auto report = validate_hd(hd, q);
  if (!report.generalized())
    throw IncompatibleDecomposition("decomposition is not a generalized hypertree decomposition of the query");

  HypertreeDecomposition out = hd;
  const auto order = hd.preorder();
  std::map<std::string, std::vector<std::size_t>> completed_by_symbol;
  std::map<std::size_t, std::size_t> host;  // completed atom -> vertex it was filtered against
  for (std::size_t a = 0; a < q.atoms().size(); ++a) {
    VarSet vars = q.atoms()[a].vars();
    bool complete = false;
    for (const auto& v : hd.vertices)
      if (subset(vars, v.chi) && std::find(v.lambda.begin(), v.lambda.end(), a) != v.lambda.end()) complete = true;
    if (complete) continue;
    std::optional<std::size_t> p;
    for (std::size_t v : order)
      if (subset(vars, hd.vertices[v].chi)) {
        p = v;
        break;
      }
    if (!p) throw IncompatibleDecomposition("no bag covers " + describe(q.atoms()[a]));
    out.vertices.push_back(HdVertex{vars, {a}, {}});
    out.vertices[*p].children.push_back(out.vertices.size() - 1);
    completed_by_symbol[q.atoms()[a].relation].push_back(a);
    host[a] = *p;
  }

  Database filtered = db;
  for (const auto& [symbol, atoms] : completed_by_symbol) {
    std::size_t uses = 0;
    for (const auto& atom : q.atoms()) uses += atom.relation == symbol;
    if (uses != atoms.size()) continue;  // other atoms still need the unfiltered relation
    const auto* table = db.table(symbol);
    if (!table) throw MissingRelation("relation " + symbol + " is not in the database");
    std::set<Tuple> keep;
    for (std::size_t a : atoms) {
      const Atom& atom = q.atoms()[a];
      Relation allowed = project(vertex_relation(hd, host[a], q, db), atom.vars());
      for (const auto& tup : table->tuples) {
        // A tuple survives if it instantiates the atom with an allowed binding.
        Substitution theta;
        bool ok = true;
        for (std::size_t i = 0; i < tup.size() && ok; ++i) {
          const auto& t = atom.args[i];
          if (!t.is_variable()) {
            auto id = db.lookup(t.name);
            ok = id && *id == tup[i];
          } else if (auto [it, fresh] = theta.emplace(t.name, tup[i]); !fresh) {
            ok = it->second == tup[i];
          }
        }
        if (!ok) continue;
        std::vector<Value> row;
        for (const auto& [var, val] : theta) row.push_back(val);
        if (allowed.contains(row)) keep.insert(tup);
      }
    }
    Database next = filtered.derived();
    for (const auto& [rel, t] : filtered.tables()) {
      next.declare(rel, t.arity);
      const auto& source = rel == symbol ? keep : t.tuples;
      for (const auto& tup : source) next.add_values(rel, tup);
    }
    filtered = std::move(next);
  }
  return {std::move(out), std::move(filtered)};
}

BigInt decomposition_cost(const HypertreeDecomposition& hd, const Query& q, const Database& db) {
  const BigInt base = q.atoms().size() + 1;
  BigInt total = 0;
  for (std::size_t v = 0; v < hd.vertices.size(); ++v) {
    std::size_t deg = degree_by_grouping(vertex_relation(hd, v, q, db), q.free());
    total += boost::multiprecision::pow(base, static_cast<unsigned>(deg));
  }
  return total;
}

namespace {

// det-k-decomp style recursion: λ is any set of at most k atoms whose
// variables contain the connector, χ = vars(λ) ∩ (C ∪ conn). Each state is
// solved once, keeping the cheapest subtree.
class DOptimalSearch {
 public:
  DOptimalSearch(const Query& q, const Database& db, std::size_t k)
      : q_(q), db_(db), index_(q.vars()), base_(q.atoms().size() + 1) {
    for (const auto& a : q.atoms()) atom_masks_.push_back(index_.mask(a.vars()));
    for (Mask m : atom_masks_)
      if (m) edges_.push_back(m);
    const std::size_t n = q.atoms().size();
    for (std::size_t size = 1; size <= std::min(k, n); ++size) {
      std::vector<std::size_t> pick(size);
      for (std::size_t i = 0; i < size; ++i) pick[i] = i;
      while (true) {
        lambdas_.push_back(pick);
        std::size_t i = size;
        while (i > 0 && pick[i - 1] == n - size + i - 1) --i;
        if (i == 0) break;
        ++pick[i - 1];
        for (std::size_t j = i; j < size; ++j) pick[j] = pick[j - 1] + 1;
      }
    }
  }

  std::optional<HypertreeDecomposition> run() {
    Mask all = 0;
    for (Mask e : edges_) all |= e;
    std::vector<int> roots;
    for (Mask comp : detail::components_within(all, edges_)) {
      int id = solve(comp, 0);
      if (id < 0) return std::nullopt;
      roots.push_back(id);
    }
    if (roots.empty()) return std::nullopt;
    HypertreeDecomposition hd;
    std::size_t top = emit(roots[0], hd);
    hd.root = top;
    for (std::size_t i = 1; i < roots.size(); ++i) {
      std::size_t child = emit(roots[i], hd);
      hd.vertices[top].children.push_back(child);
    }
    return hd;
  }

 private:
  struct Node {
    std::size_t lambda = 0;
    Mask chi = 0;
    BigInt cost;
    std::vector<int> children;
  };

  struct PairHash {
    std::size_t operator()(const std::pair<Mask, Mask>& p) const noexcept {
      return std::hash<Mask>()(p.first * 0x9e3779b97f4a7c15ULL ^ p.second);
    }
  };

  const BigInt& vertex_cost(std::size_t lambda, Mask chi) {
    auto key = std::make_pair(lambda, chi);
    if (auto it = cost_cache_.find(key); it != cost_cache_.end()) return it->second;
    auto& joined = joins_[lambda];
    if (!joined) {
      std::vector<Atom> atoms;
      for (std::size_t i : lambdas_[lambda]) atoms.push_back(q_.atoms()[i]);
      joined = evaluate_atoms(atoms, db_);
    }
    std::size_t deg = degree_by_grouping(project(*joined, index_.set(chi)), q_.free());
    return cost_cache_.emplace(key, boost::multiprecision::pow(base_, static_cast<unsigned>(deg))).first->second;
  }

  int solve(Mask comp, Mask conn) {
    auto key = std::make_pair(comp, conn);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    int best = -1;
    Mask scope = comp | conn;
    for (std::size_t l = 0; l < lambdas_.size(); ++l) {
      Mask vars = 0;
      bool useful = true;
      for (std::size_t i : lambdas_[l]) {
        vars |= atom_masks_[i];
        if (!(atom_masks_[i] & scope)) useful = false;
      }
      if (!useful || (conn & ~vars)) continue;
      Mask chi = vars & scope;
      if (!(chi & comp)) continue;
      std::vector<int> children;
      BigInt cost = vertex_cost(l, chi);
      bool ok = true;
      for (Mask sub : detail::components_within(comp & ~chi, edges_)) {
        int child = solve(sub, detail::touching(sub, edges_) & chi);
        if (child < 0) {
          ok = false;
          break;
        }
        children.push_back(child);
        cost += nodes_[child].cost;
      }
      if (!ok) continue;
      if (best < 0 || cost < nodes_[best].cost) {
        nodes_.push_back(Node{l, chi, cost, std::move(children)});
        best = static_cast<int>(nodes_.size()) - 1;
      }
    }
    memo_.emplace(key, best);
    return best;
  }

  std::size_t emit(int id, HypertreeDecomposition& hd) {
    const Node& node = nodes_[id];
    std::size_t me = hd.vertices.size();
    hd.vertices.push_back(HdVertex{index_.set(node.chi), lambdas_[node.lambda], {}});
    for (int child : node.children) {
      std::size_t c = emit(child, hd);
      hd.vertices[me].children.push_back(c);
    }
    return me;
  }

  const Query& q_;
  const Database& db_;
  detail::VarIndex index_;
  BigInt base_;
  std::vector<Mask> atom_masks_;
  std::vector<Mask> edges_;
  std::vector<std::vector<std::size_t>> lambdas_;
  std::map<std::size_t, std::optional<Relation>> joins_;
  std::map<std::pair<std::size_t, Mask>, BigInt> cost_cache_;
  std::unordered_map<std::pair<Mask, Mask>, int, PairHash> memo_;
  std::vector<Node> nodes_;
};

}  // namespace

std::optional<HypertreeDecomposition> d_optimal_nf(const Query& q, const Database& db, std::size_t k) {
  if (k == 0) throw InvalidWidth("k must be at least 1");
  return DOptimalSearch(q, db, k).run();
}

std::string format_hd(const HypertreeDecomposition& hd, const Query& q) {
  std::ostringstream out;
  std::function<void(std::size_t, int)> walk = [&](std::size_t v, int depth) {
    const auto& node = hd.vertices[v];
    out << std::string(static_cast<std::size_t>(depth) * 2, ' ') << "chi=" << describe(node.chi) << " lambda={";
    for (std::size_t i = 0; i < node.lambda.size(); ++i)
      out << (i ? ", " : "") << describe(q.atoms().at(node.lambda[i]));
    out << "}\n";
    for (std::size_t c : node.children) walk(c, depth + 1);
  };
  if (!hd.vertices.empty()) walk(hd.root, 0);
  return out.str();
}

}  // namespace sharpcq
