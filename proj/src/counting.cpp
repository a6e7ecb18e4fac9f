#include "sharpcq/counting.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <future>
#include <map>
#include <numeric>
#include <random>
#include <unordered_map>

#include "row_hash.hpp"
#include "sharpcq/errors.hpp"
#include "sharpcq/homomorphism.hpp"
#include "sharpcq/hybrid.hpp"
#include "sharpcq/oracle.hpp"

namespace sharpcq {

const Relation* LegalViewDatabase::find(std::size_t view) const {
  for (std::size_t i = 0; i < views.size(); ++i)
    if (views[i] == view) return &relations[i];
  return nullptr;
}

bool LegalViewDatabase::any_empty() const {
  return std::any_of(relations.begin(), relations.end(), [](const Relation& r) { return r.empty(); });
}

LegalViewDatabase standard_view_extension(const Query& q, const Database& db, const ViewSet& vs,
                                          std::optional<std::span<const std::size_t>> only) {
  LegalViewDatabase out;
  std::vector<std::size_t> ids;
  if (only) {
    ids.assign(only->begin(), only->end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  } else {
    ids.resize(vs.views.size());
    std::iota(ids.begin(), ids.end(), 0);
  }
  std::map<std::vector<std::size_t>, Relation> by_provenance;
  for (std::size_t id : ids) {
    const View& view = vs.views.at(id);
    auto it = by_provenance.find(view.provenance);
    if (it == by_provenance.end()) {
      std::vector<Atom> atoms;
      for (std::size_t a : view.provenance) atoms.push_back(q.atoms().at(a));
      it = by_provenance.emplace(view.provenance, evaluate_atoms(atoms, db)).first;
    }
    out.views.push_back(id);
    out.relations.push_back(it->second);
  }
  return out;
}

LegalViewDatabase enforce_pairwise_consistency(LegalViewDatabase lvdb, std::uint64_t shuffle_seed) {
  auto& rel = lvdb.relations;
  const std::size_t n = rel.size();
  lvdb.pairwise_consistent = true;
  auto wipe = [&] {
    for (auto& r : rel) r = Relation(r.schema());
  };
  if (lvdb.any_empty()) {
    wipe();
    return lvdb;
  }

  std::vector<std::vector<std::size_t>> neighbours(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto& a = rel[i].schema();
      const auto& b = rel[j].schema();
      std::vector<std::string> shared;
      std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(shared));
      if (!shared.empty()) neighbours[j].push_back(i);
    }

  std::vector<std::size_t> queue(n);
  std::iota(queue.begin(), queue.end(), 0);
  if (shuffle_seed != 0) {
    std::mt19937_64 rng(shuffle_seed);
    std::shuffle(queue.begin(), queue.end(), rng);
    for (auto& nb : neighbours) std::shuffle(nb.begin(), nb.end(), rng);
  }
  std::vector<bool> queued(n, true);
  std::size_t head = 0;
  // Each popped view filters all of its neighbours; a neighbour that shrinks
  // is queued again so that it filters its own neighbours in turn.
  while (head < queue.size()) {
    std::size_t j = queue[head++];
    queued[j] = false;
    for (std::size_t i : neighbours[j]) {
      Relation reduced = semijoin(rel[i], rel[j]);
      if (reduced.size() == rel[i].size()) continue;
      rel[i] = std::move(reduced);
      if (rel[i].empty()) {
        wipe();
        return lvdb;
      }
      if (!queued[i]) {
        queued[i] = true;
        queue.push_back(i);
      }
    }
  }
  return lvdb;
}

namespace {

std::vector<Value> row_vector(std::span<const Value> row) { return {row.begin(), row.end()}; }

void put_relation(Database& db, const std::string& symbol, const Relation& r) {
  db.declare(symbol, r.arity());
  for (std::size_t i = 0; i < r.size(); ++i) db.add_values(symbol, row_vector(r.row(i)));
}

Atom atom_over(const std::string& symbol, const VarSet& vars) {
  Atom a{symbol, {}};
  for (const auto& v : vars) a.args.push_back(Term::variable(v));
  return a;
}

bool subset(const VarSet& a, const VarSet& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

}  // namespace

AcyclicInstance build_acyclic_instance(const TreeProjection& tp, const ViewSet& vs, const LegalViewDatabase& lvdb,
                                       const VarSet& free, const Database& base) {
  AcyclicInstance out{Query(), base.derived(), tp.tree};
  std::vector<Atom> atoms;
  VarSet vars;
  for (std::size_t i = 0; i < tp.tree.vertices.size(); ++i) {
    const VarSet& bag = tp.tree.vertices[i];
    const std::size_t view = tp.cover.at(i);
    const Relation* r = lvdb.find(view);
    if (!r || !subset(bag, vs.views.at(view).vars))
      throw UncoveredEdge("bag " + std::to_string(i) + " has no materialized covering view");
    std::string symbol = "$tp_" + std::to_string(i);
    put_relation(out.db, symbol, project(*r, bag));
    atoms.push_back(atom_over(symbol, bag));
    vars.insert(bag.begin(), bag.end());
  }
  std::vector<std::string> head;
  for (const auto& v : free)
    if (vars.count(v)) head.push_back(v);
  out.query = Query("Qa", std::move(atoms), std::move(head));
  return out;
}

QuantifierFree reduce_quantified(const Query& core, const Database& db, const TreeProjection& tp,
                                 const AcyclicInstance& qa) {
  const VarSet& free = core.free();
  const auto& bags = tp.tree.vertices;
  auto host_of = [&](const VarSet& vars) -> std::optional<std::size_t> {
    for (std::size_t j = 0; j < bags.size(); ++j)
      if (subset(vars, bags[j])) return j;
    return std::nullopt;
  };

  QuantifierFree out{Query(), db.derived(), {}};
  std::vector<Atom> atoms;
  for (const auto& a : core.atoms()) {
    VarSet vars = a.vars();
    if (!subset(vars, free)) continue;
    auto host = host_of(vars);
    if (!host) throw FrontierNotCovered("atom over " + a.relation + " is not inside any bag");
    const auto* table = db.table(a.relation);
    if (!table) throw MissingRelation("relation " + a.relation + " is not in the database");
    out.db.declare(a.relation, table->arity);
    for (const auto& t : table->tuples) out.db.add_values(a.relation, t);
    atoms.push_back(a);
    out.host.push_back(*host);
  }

  Hypergraph h = hypergraph_of(core.atoms());
  auto components = w_components(h, free);
  for (std::size_t c = 0; c < components.size(); ++c) {
    VarSet fr = frontier(*components[c].begin(), free, h);
    auto host = host_of(fr);
    if (!host) throw FrontierNotCovered("frontier of component " + std::to_string(c) + " is not inside any bag");
    Relation bag = evaluate_atom(qa.query.atoms().at(*host), qa.db);
    std::string symbol = "$fr_" + std::to_string(c);
    put_relation(out.db, symbol, project(bag, fr));
    atoms.push_back(atom_over(symbol, fr));
    out.host.push_back(*host);
  }
  out.query = Query("Qf", std::move(atoms), std::vector<std::string>(free.begin(), free.end()));
  if (out.query.vars() != free) throw Error("quantifier-free reduction left quantified variables");
  return out;
}

namespace {

struct Block {
  std::vector<std::uint32_t> rows;  // ascending indices into the vertex relation
  BigInt count;
};

struct SharpRelation {
  Relation base;
  std::vector<Block> blocks;
};

SharpRelation initial_blocks(Relation base, const VarSet& free) {
  std::vector<std::string> profile_vars;
  for (const auto& v : base.schema())
    if (free.count(v)) profile_vars.push_back(v);
  auto cols = detail::column_positions(base.schema(), profile_vars);
  std::map<std::vector<Value>, std::vector<std::uint32_t>> groups;
  std::vector<Value> key;
  for (std::size_t i = 0; i < base.size(); ++i) {
    detail::extract(base.row(i), cols, key);
    groups[key].push_back(static_cast<std::uint32_t>(i));
  }
  SharpRelation out{std::move(base), {}};
  for (auto& [_, rows] : groups) out.blocks.push_back(Block{std::move(rows), 1});
  return out;
}

// R_p ⋉ R_c on #-relations: every pair of blocks yields S_p ⋉ S_c when that is
// nonempty, with multiplicity c_p·c_c; equal results are merged by summing.
void block_semijoin(SharpRelation& parent, const SharpRelation& child) {
  std::vector<std::string> shared;
  std::set_intersection(parent.base.schema().begin(), parent.base.schema().end(), child.base.schema().begin(),
                        child.base.schema().end(), std::back_inserter(shared));
  auto pcols = detail::column_positions(parent.base.schema(), shared);
  auto ccols = detail::column_positions(child.base.schema(), shared);

  std::unordered_map<std::vector<Value>, std::uint32_t, detail::RowHash> key_ids;
  std::vector<Value> key;
  std::vector<std::uint32_t> child_key(child.base.size());
  for (std::size_t i = 0; i < child.base.size(); ++i) {
    detail::extract(child.base.row(i), ccols, key);
    child_key[i] = key_ids.emplace(key, static_cast<std::uint32_t>(key_ids.size())).first->second;
  }
  constexpr std::uint32_t kNoKey = UINT32_MAX;
  std::vector<std::uint32_t> parent_key(parent.base.size(), kNoKey);
  for (std::size_t i = 0; i < parent.base.size(); ++i) {
    detail::extract(parent.base.row(i), pcols, key);
    if (auto it = key_ids.find(key); it != key_ids.end()) parent_key[i] = it->second;
  }

  // Child blocks only matter through the set of join keys they carry.
  std::map<std::vector<std::uint32_t>, BigInt> key_sets;
  for (const auto& b : child.blocks) {
    std::vector<std::uint32_t> ks;
    for (auto r : b.rows) ks.push_back(child_key[r]);
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    key_sets[std::move(ks)] += b.count;
  }
  std::vector<const std::pair<const std::vector<std::uint32_t>, BigInt>*> sets;
  std::vector<std::vector<std::uint32_t>> sets_with_key(key_ids.size());
  for (const auto& entry : key_sets) {
    auto id = static_cast<std::uint32_t>(sets.size());
    sets.push_back(&entry);
    for (auto k : entry.first) sets_with_key[k].push_back(id);
  }

  std::map<std::vector<std::uint32_t>, BigInt> merged;
  std::vector<std::uint32_t> candidates;
  std::vector<std::uint32_t> rows;
  for (const auto& pb : parent.blocks) {
    candidates.clear();
    for (auto r : pb.rows)
      if (parent_key[r] != kNoKey)
        candidates.insert(candidates.end(), sets_with_key[parent_key[r]].begin(), sets_with_key[parent_key[r]].end());
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    for (auto s : candidates) {
      const auto& ks = sets[s]->first;
      rows.clear();
      for (auto r : pb.rows)
        if (parent_key[r] != kNoKey && std::binary_search(ks.begin(), ks.end(), parent_key[r])) rows.push_back(r);
      if (!rows.empty()) merged[rows] += pb.count * sets[s]->second;
    }
  }
  parent.blocks.clear();
  for (auto& [r, c] : merged) parent.blocks.push_back(Block{r, c});
}

class HdCounter {
 public:
  HdCounter(const Query& q, const Database& db, const HypertreeDecomposition& hd) : q_(q), db_(db), hd_(hd) {}

  CountTrace run() {
    auto report = validate_hd(hd_, q_);
    if (!report.tree.ok) throw IncompatibleDecomposition("malformed decomposition: " + report.tree.witness);
    if (!report.completeness.ok)
      throw IncompleteDecomposition("decomposition is not complete: " + report.completeness.witness);

    trace_.vertices = hd_.vertices.size();
    trace_.width = hd_.width();
    for (const auto& a : q_.atoms())
      if (const auto* t = db_.table(a.relation)) trace_.max_relation = std::max(trace_.max_relation, t->tuples.size());

    initial_.resize(hd_.vertices.size());
    for (std::size_t v = 0; v < hd_.vertices.size(); ++v) {
      initial_[v] = initial_blocks(vertex_relation(hd_, v, q_, db_), q_.free());
      for (const auto& b : initial_[v].blocks) trace_.degree_bound = std::max(trace_.degree_bound, b.rows.size());
    }
    limit_ = boost::multiprecision::pow(BigInt(trace_.max_relation), static_cast<unsigned>(trace_.width)) *
             boost::multiprecision::pow(BigInt(2), static_cast<unsigned>(trace_.degree_bound));
    spare_threads_ = static_cast<long>(thread_limit()) - 1;

    SharpRelation root = solve(hd_.root);
    trace_.count = 0;
    for (const auto& b : root.blocks) trace_.count += b.count;
    return trace_;
  }

 private:
  void observe(std::size_t blocks) {
    std::lock_guard<std::mutex> guard(stats_lock_);
    trace_.max_blocks = std::max(trace_.max_blocks, blocks);
    if (BigInt(blocks) > limit_) ++trace_.bound_violations;
  }

  SharpRelation solve(std::size_t v) {
    SharpRelation mine = initial_[v];
    observe(mine.blocks.size());
    const auto& children = hd_.vertices[v].children;
    // Subtrees are independent; spare worker threads may take some of them.
    // Merging below always happens in child order, so results do not depend
    // on scheduling.
    std::vector<std::future<SharpRelation>> pending(children.size());
    std::vector<std::optional<SharpRelation>> done(children.size());
    for (std::size_t i = 0; i < children.size(); ++i) {
      if (i + 1 < children.size() && spare_threads_.fetch_sub(1) > 0) {
        pending[i] = std::async(std::launch::async, [this, c = children[i]] {
          SharpRelation r = solve(c);
          spare_threads_.fetch_add(1);
          return r;
        });
      } else {
        if (i + 1 < children.size()) spare_threads_.fetch_add(1);
        done[i] = solve(children[i]);
      }
    }
    for (std::size_t i = 0; i < children.size(); ++i) {
      const SharpRelation& child = done[i] ? *done[i] : *(done[i] = pending[i].get());
      block_semijoin(mine, child);
      observe(mine.blocks.size());
    }
    return mine;
  }

  const Query& q_;
  const Database& db_;
  const HypertreeDecomposition& hd_;
  std::vector<SharpRelation> initial_;
  CountTrace trace_;
  BigInt limit_;
  std::atomic<long> spare_threads_{0};
  std::mutex stats_lock_;
};

double elapsed_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

CountTrace count_via_hd_traced(const Query& q, const Database& db, const HypertreeDecomposition& hd) {
  return HdCounter(q, db, hd).run();
}

BigInt count_via_hd(const Query& q, const Database& db, const HypertreeDecomposition& hd) {
  return count_via_hd_traced(q, db, hd).count;
}

CountTrace count_from_tree_projection(const Query& core, const Database& db, const TreeProjection& tp,
                                     const AcyclicInstance& qa, const VarSet& output) {
  QuantifierFree qf = reduce_quantified(core, db, tp, qa);
  Database rdb = qf.db;
  std::vector<Atom> atoms;
  HypertreeDecomposition hd;
  for (std::size_t j = 0; j < qa.query.atoms().size(); ++j) {
    VarSet kept;
    for (const auto& v : tp.tree.vertices[j])
      if (core.free().count(v)) kept.insert(v);
    std::string symbol = "$r_" + std::to_string(j);
    put_relation(rdb, symbol, project(evaluate_atom(qa.query.atoms()[j], qa.db), kept));
    atoms.push_back(atom_over(symbol, kept));
    hd.vertices.push_back(HdVertex{kept, {j}, {}});
  }
  for (std::size_t j = 0; j < tp.tree.vertices.size(); ++j) {
    if (tp.tree.parent[j])
      hd.vertices[*tp.tree.parent[j]].children.push_back(j);
    else
      hd.root = j;
  }
  for (std::size_t i = 0; i < qf.query.atoms().size(); ++i) {
    const Atom& a = qf.query.atoms()[i];
    std::size_t id = atoms.size();
    atoms.push_back(a);
    hd.vertices.push_back(HdVertex{a.vars(), {id}, {}});
    hd.vertices[qf.host[i]].children.push_back(hd.vertices.size() - 1);
  }
  Query residual("residual", std::move(atoms), std::vector<std::string>(output.begin(), output.end()));
  return count_via_hd_traced(residual, rdb, hd);
}


std::optional<CountReport> count_structural(const Query& q, const Database& db, const RunConfig& cfg) {
  auto start = std::chrono::steady_clock::now();
  CountReport report;
  report.mode_used = Mode::Structural;

  // The consistency-based core is only trustworthy up to the width of the
  // core; a disagreement at every k <= kmax means no decomposition fits.
  ColoredQuery cq = color(q);
  std::optional<std::vector<std::size_t>> consistent_core;
  for (std::size_t k = 1; k <= cfg.kmax && !consistent_core; ++k)
    consistent_core = core_indices_via_consistency(cq.query, k, true);
  if (!consistent_core) return std::nullopt;

  auto sw = sharp_hypertree_width(q, cfg.kmax, cfg.cores_to_try);
  if (!sw) return std::nullopt;
  std::vector<std::size_t> first_core;
  for (std::size_t i : *consistent_core)
    if (i < cq.original_atoms) first_core.push_back(i);
  if (first_core != sw->core_atoms) report.notes.push_back("decomposition uses an alternative core");

  std::vector<std::size_t> needed(sw->tp.cover);
  for (std::size_t i = 0; i < sw->views.views.size(); ++i)
    if (sw->views.views[i].query_view) needed.push_back(i);
  LegalViewDatabase raw = standard_view_extension(sw->core, db, sw->views, needed);

  std::size_t degree = 0;
  for (std::size_t j = 0; j < sw->tp.tree.vertices.size(); ++j)
    degree = std::max(degree, degree_by_grouping(project(*raw.find(sw->tp.cover[j]), sw->tp.tree.vertices[j]), q.free()));

  LegalViewDatabase lvdb = enforce_pairwise_consistency(std::move(raw));
  report.width = sw->k;
  report.bound = degree;
  report.core_atoms = sw->core.atoms();
  if (lvdb.any_empty()) {
    report.count = 0;
  } else {
    AcyclicInstance qa = build_acyclic_instance(sw->tp, sw->views, lvdb, q.free(), db);
    CountTrace trace = count_from_tree_projection(sw->core, db, sw->tp, qa, q.free());
    report.count = trace.count;
    report.bound_violations = trace.bound_violations;
    report.max_blocks = trace.max_blocks;
  }
  report.elapsed_ms = elapsed_since(start);
  return report;
}

namespace {

std::optional<CountReport> count_hybrid_path(const Query& q, const Database& db, const RunConfig& cfg) {
  auto start = std::chrono::steady_clock::now();
  HybridSearchOptions options;
  options.max_promoted = cfg.max_promoted;
  for (std::size_t k = 1; k <= cfg.kmax; ++k) {
    auto found = search_sharp_b(q, db, k, cfg.bmax, options);
    if (!found) continue;
    CountReport report;
    report.mode_used = Mode::Hybrid;
    CountTrace trace = count_hybrid_traced(q, db, found->hd, found->promoted);
    report.count = trace.count;
    report.bound_violations = trace.bound_violations;
    report.max_blocks = trace.max_blocks;
    report.width = found->k;
    report.bound = found->b;
    report.promoted = found->promoted;
    for (std::size_t i : found->core_atoms) report.core_atoms.push_back(q.atoms()[i]);
    report.elapsed_ms = elapsed_since(start);
    return report;
  }
  return std::nullopt;
}

}  // namespace

CountReport count(const Query& q, const Database& db, const RunConfig& cfg) {
  auto start = std::chrono::steady_clock::now();

  // Variable-free atoms are plain membership tests; the rest of the machinery
  // only sees atoms with variables.
  std::vector<std::size_t> keep;
  bool satisfied = true;
  for (std::size_t i = 0; i < q.atoms().size(); ++i) {
    if (!q.atoms()[i].vars().empty())
      keep.push_back(i);
    else if (evaluate_atom(q.atoms()[i], db).empty())
      satisfied = false;
  }
  if (!satisfied || keep.empty()) {
    CountReport report;
    report.mode_used = cfg.mode == Mode::Oracle ? Mode::Oracle : Mode::Structural;
    report.count = satisfied ? 1 : 0;
    report.notes.push_back("decided by variable-free atoms");
    report.elapsed_ms = elapsed_since(start);
    return report;
  }
  const Query body = keep.size() == q.atoms().size() ? q : q.subquery(keep);

  auto oracle = [&] {
    CountReport report;
    report.mode_used = Mode::Oracle;
    report.count = brute_force_count(body, db, cfg.state_cap);
    report.elapsed_ms = elapsed_since(start);
    return report;
  };

  switch (cfg.mode) {
    case Mode::Oracle:
      return oracle();
    case Mode::Structural: {
      auto r = count_structural(body, db, cfg);
      if (!r) throw NoDecompositionWithinBudget("no #-hypertree decomposition of width <= " + std::to_string(cfg.kmax));
      r->elapsed_ms = elapsed_since(start);
      return *r;
    }
    case Mode::Hybrid: {
      auto r = count_hybrid_path(body, db, cfg);
      if (!r) throw NoDecompositionWithinBudget("no hybrid decomposition within the width and degree budget");
      r->elapsed_ms = elapsed_since(start);
      return *r;
    }
    case Mode::Auto: {
      std::vector<std::string> notes;
      try {
        if (auto r = count_structural(body, db, cfg)) {
          r->elapsed_ms = elapsed_since(start);
          return *r;
        }
      } catch (const SearchBudgetExceeded& e) {
        notes.push_back(std::string("structural search: ") + e.what());
      }
      try {
        if (auto r = count_hybrid_path(body, db, cfg)) {
          r->notes.insert(r->notes.begin(), notes.begin(), notes.end());
          r->elapsed_ms = elapsed_since(start);
          return *r;
        }
      } catch (const SearchBudgetExceeded& e) {
        notes.push_back(std::string("hybrid search: ") + e.what());
      }
      CountReport r = oracle();
      r.notes = std::move(notes);
      r.notes.push_back("no decomposition within budget; answered by the oracle");
      return r;
    }
  }
  return oracle();
}

}  // namespace sharpcq
