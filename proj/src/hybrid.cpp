#include "sharpcq/hybrid.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "row_hash.hpp"
#include "sharpcq/counting.hpp"
#include "sharpcq/errors.hpp"
#include "sharpcq/homomorphism.hpp"

namespace sharpcq {

namespace {

std::vector<std::string> profile_of(const Relation& r, const VarSet& f) {
  std::vector<std::string> out;
  for (const auto& v : r.schema())
    if (f.count(v)) out.push_back(v);
  return out;
}

bool subset(const VarSet& a, const VarSet& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

VarSet intersect(const VarSet& a, const VarSet& b) {
  VarSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
  return out;
}

}  // namespace

std::size_t degree_by_grouping(const Relation& r, const VarSet& f) {
  auto cols = detail::column_positions(r.schema(), profile_of(r, f));
  std::unordered_map<std::vector<Value>, std::size_t, detail::RowHash> groups;
  std::vector<Value> key;
  std::size_t best = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    detail::extract(r.row(i), cols, key);
    best = std::max(best, ++groups[key]);
  }
  return best;
}

std::size_t degree_by_sorting(const Relation& r, const VarSet& f) {
  auto cols = detail::column_positions(r.schema(), profile_of(r, f));
  std::vector<std::vector<Value>> keys(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) detail::extract(r.row(i), cols, keys[i]);
  std::sort(keys.begin(), keys.end());
  std::size_t best = 0;
  for (std::size_t i = 0; i < keys.size();) {
    std::size_t j = i;
    while (j < keys.size() && keys[j] == keys[i]) ++j;
    best = std::max(best, j - i);
    i = j;
  }
  return best;
}

std::size_t vertex_degree(const HypertreeDecomposition& hd, std::size_t v, const Query& q, const Database& db,
                          const VarSet& f) {
  return degree_by_grouping(vertex_relation(hd, v, q, db), f);
}

DegreeProfile bound(const HypertreeDecomposition& hd, const Query& q, const Database& db, const VarSet& f) {
  DegreeProfile out;
  out.f = f;
  for (std::size_t v = 0; v < hd.vertices.size(); ++v) {
    out.per_vertex.push_back(vertex_degree(hd, v, q, db, f));
    out.overall = std::max(out.overall, out.per_vertex.back());
  }
  return out;
}

DegreeProfile bound_restricted(const HypertreeDecomposition& hd, const Query& q, const Database& db,
                               const VarSet& f, const VarSet& promoted) {
  DegreeProfile out;
  out.f = f;
  for (std::size_t v = 0; v < hd.vertices.size(); ++v) {
    Relation r = project(vertex_relation(hd, v, q, db), intersect(hd.vertices[v].chi, promoted));
    out.per_vertex.push_back(degree_by_grouping(r, f));
    out.overall = std::max(out.overall, out.per_vertex.back());
  }
  return out;
}

Query promote_free(const Query& q, const VarSet& promoted) {
  if (!subset(q.free(), promoted)) throw InvalidSelection("promoted set must contain every free variable");
  if (!subset(promoted, q.vars())) throw InvalidSelection("promoted set mentions variables outside the query");
  return q.with_free(promoted);
}

namespace {

// Raw view relations (joins of atoms of q on the unreduced database) are
// shared by every promotion tried for the same query.
class ViewRelations {
 public:
  ViewRelations(const Query& q, const Database& db, std::size_t row_budget)
      : q_(q), db_(db), row_budget_(row_budget) {}

  const Relation& get(const std::vector<std::size_t>& atoms_of_q) {
    auto it = cache_.find(atoms_of_q);
    if (it != cache_.end()) return it->second;
    std::vector<Atom> atoms;
    for (std::size_t i : atoms_of_q) atoms.push_back(q_.atoms().at(i));
    Relation r = evaluate_atoms(atoms, db_);
    rows_ += r.size();
    if (rows_ > row_budget_) throw SearchBudgetExceeded("hybrid search materialized too many view rows");
    return cache_.emplace(atoms_of_q, std::move(r)).first->second;
  }

  std::size_t degree(const std::vector<std::size_t>& atoms_of_q, const VarSet& onto) {
    auto key = std::make_pair(atoms_of_q, onto);
    auto it = degrees_.find(key);
    if (it != degrees_.end()) return it->second;
    std::size_t d = degree_by_grouping(project(get(atoms_of_q), onto), q_.free());
    degrees_.emplace(std::move(key), d);
    return d;
  }

 private:
  const Query& q_;
  const Database& db_;
  std::size_t row_budget_;
  std::size_t rows_ = 0;
  std::map<std::vector<std::size_t>, Relation> cache_;
  std::map<std::pair<std::vector<std::size_t>, VarSet>, std::size_t> degrees_;
};

struct Promotion {
  VarSet promoted;
  std::vector<std::size_t> core_atoms;  // indices into q
  Hypergraph target;                    // H' for the colored core of Q[S̄]
  ViewSet views;                        // over the core's atoms; provenance indexes core_atoms
};

Promotion prepare(const Query& q, const VarSet& promoted, std::size_t k) {
  Query qs = promote_free(q, promoted);
  ColoredQuery cq = color(qs);
  auto colored_core = core_atom_indices(cq.query);
  Promotion p;
  p.promoted = promoted;
  for (std::size_t i : colored_core)
    if (i < cq.original_atoms) p.core_atoms.push_back(i);
  p.target = sharp_target(cq.query.subquery(colored_core), promoted);
  Query core_q = qs.subquery(p.core_atoms);
  p.views = build_view_set(core_q, std::min(k, core_q.atoms().size()));
  return p;
}

std::vector<std::size_t> to_q(const Promotion& p, const std::vector<std::size_t>& provenance) {
  std::vector<std::size_t> out;
  for (std::size_t i : provenance) out.push_back(p.core_atoms.at(i));
  return out;
}

std::optional<HybridDecomposition> min_bound(const Promotion& p, ViewRelations& rels, std::size_t k,
                                             std::size_t bmax) {
  if (bmax == 0) return std::nullopt;
  // For each bag, the containing view whose restriction to S̄ has the least
  // degree; a bag is admissible at threshold t when that degree is <= t.
  std::map<VarSet, std::pair<std::size_t, std::size_t>> best_view;
  auto cheapest = [&](const VarSet& bag) -> std::optional<std::pair<std::size_t, std::size_t>> {
    if (auto it = best_view.find(bag); it != best_view.end()) return it->second;
    std::optional<std::pair<std::size_t, std::size_t>> found;
    VarSet onto = intersect(bag, p.promoted);
    for (std::size_t w = 0; w < p.views.views.size(); ++w) {
      const View& view = p.views.views[w];
      if (!subset(bag, view.vars)) continue;
      std::size_t d = rels.degree(to_q(p, view.provenance), onto);
      if (!found || d < found->first) found = std::make_pair(d, w);
    }
    if (found) best_view.emplace(bag, *found);
    return found;
  };
  auto attempt = [&](std::size_t t) {
    TreeProjectionOptions options;
    options.select_cover = [&, t](const VarSet& bag) -> std::optional<std::size_t> {
      auto c = cheapest(bag);
      if (!c || c->first > t) return std::nullopt;
      return c->second;
    };
    return tree_projection(p.target, p.views.edges(), options);
  };

  auto tp = attempt(bmax);
  if (!tp) return std::nullopt;
  std::size_t lo = 1;
  std::size_t hi = bmax;
  while (lo < hi) {
    std::size_t mid = lo + (hi - lo) / 2;
    if (auto found = attempt(mid)) {
      tp = std::move(found);
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }

  HybridDecomposition out;
  out.hd = to_hypertree_decomposition(*tp, p.views);
  for (auto& v : out.hd.vertices) v.lambda = to_q(p, v.lambda);
  out.promoted = p.promoted;
  out.b = hi;
  out.k = k;
  out.core_atoms = p.core_atoms;
  return out;
}

}  // namespace

std::optional<HybridDecomposition> min_bound_for_selection(const Query& q, const Database& db, std::size_t k,
                                                           const VarSet& promoted, std::size_t bmax,
                                                           const HybridSearchOptions& options) {
  if (k == 0) throw InvalidWidth("k must be at least 1");
  ViewRelations rels(q, db, options.row_budget);
  return min_bound(prepare(q, promoted, k), rels, k, bmax);
}

std::optional<HybridDecomposition> search_sharp_b(const Query& q, const Database& db, std::size_t k,
                                                  std::size_t bmax, const HybridSearchOptions& options) {
  if (k == 0) throw InvalidWidth("k must be at least 1");
  const VarSet quantified = q.existential();
  if (quantified.size() > options.max_promoted)
    throw SearchBudgetExceeded("too many quantified variables to enumerate promotions (" +
                               std::to_string(quantified.size()) + ")");
  const std::vector<std::string> pool(quantified.begin(), quantified.end());
  const std::size_t n = pool.size();

  // Candidates in preference order: free(q) first, then larger promotions,
  // lexicographic (by variable name order) within one size. A later
  // candidate only wins with a strictly smaller b.
  std::vector<std::vector<std::size_t>> order;
  for (std::size_t size = 0; size <= n; ++size) {
    std::vector<bool> pick(n, false);
    std::fill(pick.begin(), pick.begin() + static_cast<long>(size), true);
    std::vector<std::vector<std::size_t>> same_size;
    do {
      std::vector<std::size_t> chosen;
      for (std::size_t i = 0; i < n; ++i)
        if (pick[i]) chosen.push_back(i);
      same_size.push_back(std::move(chosen));
    } while (std::prev_permutation(pick.begin(), pick.end()));
    if (size == 0)
      order.insert(order.begin(), same_size.begin(), same_size.end());
    else
      order.insert(order.begin() + 1, same_size.begin(), same_size.end());
  }

  ViewRelations rels(q, db, options.row_budget);
  std::optional<HybridDecomposition> best;
  for (const auto& chosen : order) {
    std::size_t limit = best ? best->b - 1 : bmax;
    if (limit == 0) break;
    VarSet promoted = q.free();
    for (std::size_t i : chosen) promoted.insert(pool[i]);
    if (auto found = min_bound(prepare(q, promoted, k), rels, k, limit)) best = std::move(found);
  }
  return best;
}

CountTrace count_hybrid_traced(const Query& q, const Database& db, const HypertreeDecomposition& hd,
                               const VarSet& promoted) {
  Query qs = promote_free(q, promoted);
  ColoredQuery cq = color(qs);
  auto colored_core = core_atom_indices(cq.query);
  std::vector<std::size_t> core_atoms;
  for (std::size_t i : colored_core)
    if (i < cq.original_atoms) core_atoms.push_back(i);
  std::map<std::size_t, std::size_t> position;
  for (std::size_t i = 0; i < core_atoms.size(); ++i) position.emplace(core_atoms[i], i);

  if (hd.vertices.empty()) throw InvalidHybridDecomposition("decomposition has no vertices");
  auto parents = hd.parents();
  TreeProjection tp;
  tp.tree.vertices.resize(hd.vertices.size());
  tp.tree.parent = parents;
  ViewSet vs;
  for (std::size_t i = 0; i < core_atoms.size(); ++i)
    vs.views.push_back(View{"wq_" + std::to_string(i), qs.atoms()[core_atoms[i]].vars(), {i}, true});
  for (std::size_t v = 0; v < hd.vertices.size(); ++v) {
    const HdVertex& vertex = hd.vertices[v];
    View view{"wh_" + std::to_string(v), {}, {}, false};
    for (std::size_t a : vertex.lambda) {
      auto it = position.find(a);
      if (it == position.end())
        throw InvalidHybridDecomposition("vertex " + std::to_string(v) + " uses an atom outside the core");
      view.provenance.push_back(it->second);
      auto vars = q.atoms()[a].vars();
      view.vars.insert(vars.begin(), vars.end());
    }
    if (!subset(vertex.chi, view.vars))
      throw InvalidHybridDecomposition("bag of vertex " + std::to_string(v) + " is not covered by its λ");
    tp.tree.vertices[v] = vertex.chi;
    tp.cover.push_back(vs.views.size());
    vs.views.push_back(std::move(view));
  }
  if (hd.preorder().size() != hd.vertices.size() || parents[hd.root])
    throw InvalidHybridDecomposition("decomposition is not a rooted tree");
  if (!tp.tree.satisfies_connectedness())
    throw InvalidHybridDecomposition("bags violate the connectedness condition");
  Hypergraph target = sharp_target(cq.query.subquery(colored_core), promoted);
  for (const auto& e : target.edges()) {
    bool covered = std::any_of(tp.tree.vertices.begin(), tp.tree.vertices.end(),
                               [&](const VarSet& bag) { return subset(e, bag); });
    if (!covered) throw InvalidHybridDecomposition("an edge of the #-target is not inside any bag");
  }

  Query core_q = qs.subquery(core_atoms);
  auto lvdb = enforce_pairwise_consistency(standard_view_extension(core_q, db, vs));
  if (lvdb.any_empty()) return CountTrace{};
  AcyclicInstance qa = build_acyclic_instance(tp, vs, lvdb, promoted, db);
  return count_from_tree_projection(core_q, db, tp, qa, q.free());
}

BigInt count_hybrid(const Query& q, const Database& db, const HypertreeDecomposition& hd, const VarSet& promoted) {
  return count_hybrid_traced(q, db, hd, promoted).count;
}

}  // namespace sharpcq
