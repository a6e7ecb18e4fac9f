#include "sharpcq/relational.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

#include "row_hash.hpp"
#include "sharpcq/errors.hpp"

namespace sharpcq {

namespace detail {

std::vector<std::size_t> column_positions(const std::vector<std::string>& schema,
                                          const std::vector<std::string>& vars) {
  std::vector<std::size_t> out;
  out.reserve(vars.size());
  for (const auto& v : vars) {
    auto it = std::lower_bound(schema.begin(), schema.end(), v);
    if (it == schema.end() || *it != v) throw UnknownVariable("variable " + v + " is not in the schema");
    out.push_back(static_cast<std::size_t>(it - schema.begin()));
  }
  return out;
}

}  // namespace detail

VarSet Atom::vars() const {
  VarSet out;
  for (const auto& t : args)
    if (t.is_variable()) out.insert(t.name);
  return out;
}

VarSet vars_of(std::span<const Atom> atoms) {
  VarSet out;
  for (const auto& a : atoms)
    for (const auto& t : a.args)
      if (t.is_variable()) out.insert(t.name);
  return out;
}

Query::Query(std::string name, std::vector<Atom> atoms, std::vector<std::string> head)
    : name_(std::move(name)), atoms_(std::move(atoms)), head_(std::move(head)) {
  if (atoms_.empty()) throw InvalidQuery("query " + name_ + " has no atoms");
  std::map<std::string, std::size_t> arity;
  for (const auto& a : atoms_) {
    auto [it, fresh] = arity.emplace(a.relation, a.arity());
    if (!fresh && it->second != a.arity())
      throw ArityMismatch("relation " + a.relation + " used with arities " + std::to_string(it->second) +
                          " and " + std::to_string(a.arity()));
  }
  vars_ = vars_of(atoms_);
  for (const auto& v : head_) {
    if (!vars_.count(v)) throw FreeVarNotInBody("free variable " + v + " does not occur in the body");
    if (!free_.insert(v).second) throw InvalidQuery("free variable " + v + " listed twice");
  }
}

VarSet Query::existential() const {
  VarSet out;
  std::set_difference(vars_.begin(), vars_.end(), free_.begin(), free_.end(), std::inserter(out, out.end()));
  return out;
}

Query Query::subquery(std::span<const std::size_t> indices) const {
  std::vector<Atom> atoms;
  for (std::size_t i : indices) atoms.push_back(atoms_.at(i));
  VarSet body = vars_of(atoms);
  std::vector<std::string> head;
  for (const auto& v : head_)
    if (body.count(v)) head.push_back(v);
  return Query(name_, std::move(atoms), std::move(head));
}

Query Query::with_free(const VarSet& free) const {
  return Query(name_, atoms_, std::vector<std::string>(free.begin(), free.end()));
}

Value Dictionary::intern(std::string_view constant) {
  auto key = std::string(constant);
  auto it = ids_.find(key);
  if (it != ids_.end()) return it->second;
  auto id = static_cast<Value>(names_.size());
  names_.push_back(key);
  ids_.emplace(std::move(key), id);
  return id;
}

std::optional<Value> Dictionary::lookup(std::string_view constant) const {
  auto it = ids_.find(std::string(constant));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

Database::Database() : dictionary_(std::make_shared<Dictionary>()) {}
Database::Database(std::shared_ptr<Dictionary> dictionary) : dictionary_(std::move(dictionary)) {}

Database::Table& Database::table_for(const std::string& relation, std::size_t arity) {
  auto [it, fresh] = tables_.try_emplace(relation);
  if (fresh) {
    it->second.arity = arity;
  } else if (it->second.arity != arity) {
    throw ArityMismatch("relation " + relation + " has arity " + std::to_string(it->second.arity) +
                        ", got a tuple of arity " + std::to_string(arity));
  }
  return it->second;
}

void Database::declare(const std::string& relation, std::size_t arity) { table_for(relation, arity); }

void Database::add(const std::string& relation, const std::vector<std::string>& tuple) {
  Tuple t;
  t.reserve(tuple.size());
  for (const auto& c : tuple) t.push_back(intern(c));
  add_values(relation, std::move(t));
}

void Database::add_values(const std::string& relation, Tuple tuple) {
  table_for(relation, tuple.size()).tuples.insert(std::move(tuple));
}

const Database::Table* Database::table(const std::string& relation) const {
  auto it = tables_.find(relation);
  return it == tables_.end() ? nullptr : &it->second;
}

std::size_t Database::max_relation_size() const {
  std::size_t m = 0;
  for (const auto& [_, t] : tables_) m = std::max(m, t.tuples.size());
  return m;
}

std::size_t Database::total_tuples() const {
  std::size_t n = 0;
  for (const auto& [_, t] : tables_) n += t.tuples.size();
  return n;
}

bool Database::equivalent(const Database& other) const {
  auto named = [](const Database& db) {
    std::map<std::string, std::pair<std::size_t, std::set<std::vector<std::string>>>> out;
    for (const auto& [rel, t] : db.tables_) {
      auto& slot = out[rel];
      slot.first = t.arity;
      for (const auto& tup : t.tuples) {
        std::vector<std::string> s;
        for (Value v : tup) s.push_back(db.constant_name(v));
        slot.second.insert(std::move(s));
      }
    }
    return out;
  };
  return named(*this) == named(other);
}

namespace {

// Sorts rows lexicographically and drops duplicates, in place.
void canonicalize(std::vector<Value>& data, std::size_t arity, std::size_t& rows) {
  if (arity == 0) {
    rows = rows > 0 ? 1 : 0;
    return;
  }
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), 0);
  auto less = [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(data.begin() + a * arity, data.begin() + (a + 1) * arity,
                                        data.begin() + b * arity, data.begin() + (b + 1) * arity);
  };
  auto equal = [&](std::size_t a, std::size_t b) {
    return std::equal(data.begin() + a * arity, data.begin() + (a + 1) * arity, data.begin() + b * arity);
  };
  if (!std::is_sorted(order.begin(), order.end(), less)) std::sort(order.begin(), order.end(), less);
  std::vector<Value> out;
  out.reserve(data.size());
  std::size_t kept = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    if (i > 0 && equal(order[i - 1], order[i])) continue;
    out.insert(out.end(), data.begin() + order[i] * arity, data.begin() + (order[i] + 1) * arity);
    ++kept;
  }
  data = std::move(out);
  rows = kept;
}

}  // namespace

Relation::Relation(std::vector<std::string> schema) : schema_(std::move(schema)) {
  std::sort(schema_.begin(), schema_.end());
  if (std::adjacent_find(schema_.begin(), schema_.end()) != schema_.end())
    throw Error("relation schema lists a variable twice");
}

Relation Relation::from_rows(std::vector<std::string> schema, std::vector<Value> data,
                             std::optional<std::size_t> rows) {
  const std::size_t arity = schema.size();
  Relation out(schema);
  std::size_t n = arity == 0 ? rows.value_or(0) : data.size() / arity;
  if (!std::is_sorted(schema.begin(), schema.end())) {
    auto cols = detail::column_positions(out.schema_, schema);  // out column of each input column
    std::vector<Value> permuted(data.size());
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < arity; ++c) permuted[r * arity + cols[c]] = data[r * arity + c];
    data = std::move(permuted);
  }
  canonicalize(data, arity, n);
  out.data_ = std::move(data);
  out.rows_ = n;
  return out;
}

std::optional<std::size_t> Relation::column(std::string_view var) const {
  auto it = std::lower_bound(schema_.begin(), schema_.end(), var);
  if (it == schema_.end() || *it != var) return std::nullopt;
  return static_cast<std::size_t>(it - schema_.begin());
}

Substitution Relation::substitution(std::size_t i) const {
  Substitution s;
  auto r = row(i);
  for (std::size_t c = 0; c < schema_.size(); ++c) s.emplace(schema_[c], r[c]);
  return s;
}

bool Relation::contains(std::span<const Value> probe) const {
  if (schema_.empty()) return rows_ > 0;
  std::size_t lo = 0, hi = rows_;
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    auto r = row(mid);
    if (std::lexicographical_compare(r.begin(), r.end(), probe.begin(), probe.end()))
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo < rows_ && std::equal(probe.begin(), probe.end(), row(lo).begin());
}

bool Relation::is_subset_of(const Relation& other) const {
  if (schema_ != other.schema_) return false;
  for (std::size_t i = 0; i < rows_; ++i)
    if (!other.contains(row(i))) return false;
  return true;
}

Relation project(const Relation& rel, const VarSet& w) {
  std::vector<std::string> target(w.begin(), w.end());
  auto cols = detail::column_positions(rel.schema(), target);
  if (target == rel.schema()) return rel;
  std::vector<Value> data;
  data.reserve(rel.size() * cols.size());
  for (std::size_t i = 0; i < rel.size(); ++i) {
    auto r = rel.row(i);
    for (std::size_t c : cols) data.push_back(r[c]);
  }
  return Relation::from_rows(std::move(target), std::move(data), rel.size());
}

namespace {

std::vector<std::string> shared_vars(const Relation& a, const Relation& b) {
  std::vector<std::string> out;
  std::set_intersection(a.schema().begin(), a.schema().end(), b.schema().begin(), b.schema().end(),
                        std::back_inserter(out));
  return out;
}

Relation empty_over(const VarSet& vars) { return Relation(std::vector<std::string>(vars.begin(), vars.end())); }

}  // namespace

Relation natural_join(const Relation& r1, const Relation& r2) {
  auto shared = shared_vars(r1, r2);
  std::vector<std::string> schema;
  std::set_union(r1.schema().begin(), r1.schema().end(), r2.schema().begin(), r2.schema().end(),
                 std::back_inserter(schema));
  if (r1.empty() || r2.empty()) return Relation(schema);

  // Hash the smaller side on the shared columns, stream the larger one.
  const bool swap = r1.size() > r2.size();
  const Relation& build = swap ? r2 : r1;
  const Relation& probe = swap ? r1 : r2;
  auto bcols = detail::column_positions(build.schema(), shared);
  auto pcols = detail::column_positions(probe.schema(), shared);

  // Where each output column comes from: (from build?, column index).
  std::vector<std::pair<bool, std::size_t>> source;
  for (const auto& v : schema) {
    if (auto c = build.column(v))
      source.emplace_back(true, *c);
    else
      source.emplace_back(false, *probe.column(v));
  }

  std::unordered_map<std::vector<Value>, std::vector<std::size_t>, detail::RowHash> index;
  std::vector<Value> key;
  for (std::size_t i = 0; i < build.size(); ++i) {
    detail::extract(build.row(i), bcols, key);
    index[key].push_back(i);
  }
  std::vector<Value> data;
  std::size_t rows = 0;
  for (std::size_t j = 0; j < probe.size(); ++j) {
    auto pr = probe.row(j);
    detail::extract(pr, pcols, key);
    auto it = index.find(key);
    if (it == index.end()) continue;
    for (std::size_t i : it->second) {
      auto br = build.row(i);
      for (auto [from_build, c] : source) data.push_back(from_build ? br[c] : pr[c]);
      ++rows;
    }
  }
  return Relation::from_rows(std::move(schema), std::move(data), rows);
}

Relation semijoin(const Relation& r1, const Relation& r2) {
  if (r2.empty()) return Relation(r1.schema());
  auto shared = shared_vars(r1, r2);
  if (shared.empty()) return r1;
  auto c1 = detail::column_positions(r1.schema(), shared);
  auto c2 = detail::column_positions(r2.schema(), shared);
  std::unordered_set<std::vector<Value>, detail::RowHash> keys;
  std::vector<Value> key;
  for (std::size_t i = 0; i < r2.size(); ++i) {
    detail::extract(r2.row(i), c2, key);
    keys.insert(key);
  }
  std::vector<Value> data;
  std::size_t rows = 0;
  for (std::size_t i = 0; i < r1.size(); ++i) {
    auto r = r1.row(i);
    detail::extract(r, c1, key);
    if (!keys.count(key)) continue;
    data.insert(data.end(), r.begin(), r.end());
    ++rows;
  }
  if (rows == r1.size()) return r1;
  return Relation::from_rows(r1.schema(), std::move(data), rows);
}

Relation select(const Relation& rel, const Substitution& theta) {
  std::vector<std::pair<std::size_t, Value>> filter;
  for (const auto& [var, val] : theta)
    if (auto c = rel.column(var)) filter.emplace_back(*c, val);
  std::vector<Value> data;
  std::size_t rows = 0;
  for (std::size_t i = 0; i < rel.size(); ++i) {
    auto r = rel.row(i);
    bool ok = std::all_of(filter.begin(), filter.end(), [&](auto f) { return r[f.first] == f.second; });
    if (!ok) continue;
    data.insert(data.end(), r.begin(), r.end());
    ++rows;
  }
  return Relation::from_rows(rel.schema(), std::move(data), rows);
}

Relation evaluate_atom(const Atom& atom, const Database& db) {
  const auto* table = db.table(atom.relation);
  if (!table) throw MissingRelation("relation " + atom.relation + " is not in the database");
  if (table->arity != atom.arity())
    throw ArityMismatch("atom over " + atom.relation + " has arity " + std::to_string(atom.arity()) +
                        " but the relation has arity " + std::to_string(table->arity));

  std::vector<std::string> schema;
  for (const auto& v : atom.vars()) schema.push_back(v);
  // For every argument position: a required constant, or the schema column
  // its variable feeds (repeated variables must agree).
  std::vector<std::optional<Value>> constant(atom.arity());
  std::vector<std::size_t> column(atom.arity());
  for (std::size_t i = 0; i < atom.arity(); ++i) {
    const auto& t = atom.args[i];
    if (t.is_variable()) {
      column[i] = static_cast<std::size_t>(std::lower_bound(schema.begin(), schema.end(), t.name) - schema.begin());
    } else {
      auto id = db.lookup(t.name);
      if (!id) return Relation(schema);  // constant never occurs: nothing matches
      constant[i] = *id;
    }
  }
  std::vector<Value> data;
  std::vector<Value> row(schema.size());
  std::vector<bool> seen(schema.size());
  std::size_t rows = 0;
  for (const auto& tup : table->tuples) {
    std::fill(seen.begin(), seen.end(), false);
    bool ok = true;
    for (std::size_t i = 0; i < tup.size() && ok; ++i) {
      if (constant[i]) {
        ok = tup[i] == *constant[i];
      } else if (!seen[column[i]]) {
        seen[column[i]] = true;
        row[column[i]] = tup[i];
      } else {
        ok = row[column[i]] == tup[i];
      }
    }
    if (!ok) continue;
    data.insert(data.end(), row.begin(), row.end());
    ++rows;
  }
  return Relation::from_rows(std::move(schema), std::move(data), rows);
}

Relation evaluate_atoms(std::span<const Atom> atoms, const Database& db) {
  if (atoms.empty()) return Relation::unit();
  std::vector<Relation> pending;
  pending.reserve(atoms.size());
  for (const auto& a : atoms) {
    pending.push_back(evaluate_atom(a, db));
    if (pending.back().empty()) return empty_over(vars_of(atoms));
  }

  // Greedy order: start from the smallest relation, then repeatedly join the
  // relation with the smallest estimated output, preferring connected ones.
  auto smallest = std::min_element(pending.begin(), pending.end(),
                                   [](const Relation& a, const Relation& b) { return a.size() < b.size(); });
  Relation acc = std::move(*smallest);
  pending.erase(smallest);
  while (!pending.empty()) {
    std::size_t best = 0;
    double best_cost = 0;
    for (std::size_t i = 0; i < pending.size(); ++i) {
      const auto& r = pending[i];
      bool connected = !shared_vars(acc, r).empty();
      double cost = static_cast<double>(acc.size()) * static_cast<double>(r.size());
      if (connected) cost = cost / static_cast<double>(std::max<std::size_t>(r.size(), 1)) + r.size();
      else cost = cost * 4 + 1;  // Cartesian products last
      if (i == 0 || cost < best_cost) {
        best = i;
        best_cost = cost;
      }
    }
    acc = natural_join(acc, pending[best]);
    pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(best));
    if (acc.empty()) return empty_over(vars_of(atoms));
  }
  return acc;
}

}  // namespace sharpcq
