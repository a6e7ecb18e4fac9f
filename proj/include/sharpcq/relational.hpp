#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace sharpcq {

using BigInt = boost::multiprecision::cpp_int;
using Value = std::uint32_t;
using VarSet = std::set<std::string>;

struct Term {
  enum class Kind { Variable, Constant };

  Kind kind = Kind::Variable;
  std::string name;

  static Term variable(std::string n) { return {Kind::Variable, std::move(n)}; }
  static Term constant(std::string n) { return {Kind::Constant, std::move(n)}; }

  bool is_variable() const { return kind == Kind::Variable; }
  auto operator<=>(const Term&) const = default;
};

struct Atom {
  std::string relation;
  std::vector<Term> args;

  std::size_t arity() const { return args.size(); }
  VarSet vars() const;
  auto operator<=>(const Atom&) const = default;
};

VarSet vars_of(std::span<const Atom> atoms);

// A conjunctive query. The head keeps the order in which free variables were
// written so that printing round-trips; free() is the set view of it.
class Query {
 public:
  Query() = default;
  // Throws InvalidQuery (no atoms), ArityMismatch (one symbol used with two
  // arities) or FreeVarNotInBody.
  Query(std::string name, std::vector<Atom> atoms, std::vector<std::string> head);
  Query(std::string name, std::vector<Atom> atoms, const VarSet& free)
      : Query(std::move(name), std::move(atoms), std::vector<std::string>(free.begin(), free.end())) {}

  const std::string& name() const { return name_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<std::string>& head() const { return head_; }
  const VarSet& free() const { return free_; }
  const VarSet& vars() const { return vars_; }
  VarSet existential() const;

  // Same query restricted to the atoms at `indices` (in the given order).
  Query subquery(std::span<const std::size_t> indices) const;
  Query with_free(const VarSet& free) const;

  bool operator==(const Query& other) const {
    return name_ == other.name_ && atoms_ == other.atoms_ && head_ == other.head_;
  }

 private:
  std::string name_;
  std::vector<Atom> atoms_;
  std::vector<std::string> head_;
  VarSet free_;
  VarSet vars_;
};

// Constants are interned once per database family; derived databases share
// the dictionary so Value ids stay comparable across them.
class Dictionary {
 public:
  Value intern(std::string_view constant);
  std::optional<Value> lookup(std::string_view constant) const;
  const std::string& name(Value v) const { return names_.at(v); }
  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, Value> ids_;
};

using Tuple = std::vector<Value>;

class Database {
 public:
  struct Table {
    std::size_t arity = 0;
    std::set<Tuple> tuples;
  };

  Database();
  explicit Database(std::shared_ptr<Dictionary> dictionary);

  // An empty database that shares this one's constant dictionary.
  Database derived() const { return Database(dictionary_); }

  Value intern(std::string_view constant) { return dictionary_->intern(constant); }
  std::optional<Value> lookup(std::string_view constant) const { return dictionary_->lookup(constant); }
  const std::string& constant_name(Value v) const { return dictionary_->name(v); }
  const std::shared_ptr<Dictionary>& dictionary() const { return dictionary_; }

  // Creates an empty relation (or checks the arity of an existing one).
  void declare(const std::string& relation, std::size_t arity);
  void add(const std::string& relation, const std::vector<std::string>& tuple);
  void add_values(const std::string& relation, Tuple tuple);

  const Table* table(const std::string& relation) const;
  const std::map<std::string, Table>& tables() const { return tables_; }
  std::size_t max_relation_size() const;
  std::size_t total_tuples() const;

  // Content equality by constant names, independent of interning order.
  bool equivalent(const Database& other) const;

 private:
  Table& table_for(const std::string& relation, std::size_t arity);

  std::shared_ptr<Dictionary> dictionary_;
  std::map<std::string, Table> tables_;
};

using Substitution = std::map<std::string, Value>;

// A duplicate-free set of substitutions over a fixed variable schema. The
// schema is kept sorted by name and rows are kept in lexicographic order, so
// equal relations are equal as values and iteration is deterministic.
class Relation {
 public:
  Relation() = default;
  explicit Relation(std::vector<std::string> schema);

  // `data` is a row-major table over `schema` (any column order); the result
  // is canonicalized. `rows` must be given for nullary schemas.
  static Relation from_rows(std::vector<std::string> schema, std::vector<Value> data,
                            std::optional<std::size_t> rows = std::nullopt);
  static Relation unit() { return from_rows({}, {}, 1); }

  const std::vector<std::string>& schema() const { return schema_; }
  VarSet schema_set() const { return VarSet(schema_.begin(), schema_.end()); }
  std::size_t arity() const { return schema_.size(); }
  std::size_t size() const { return rows_; }
  bool empty() const { return rows_ == 0; }
  std::span<const Value> row(std::size_t i) const {
    return {data_.data() + i * schema_.size(), schema_.size()};
  }
  const std::vector<Value>& data() const { return data_; }
  std::optional<std::size_t> column(std::string_view var) const;
  Substitution substitution(std::size_t i) const;
  bool contains(std::span<const Value> row) const;
  bool is_subset_of(const Relation& other) const;

  bool operator==(const Relation& other) const = default;

 private:
  std::vector<std::string> schema_;
  std::vector<Value> data_;
  std::size_t rows_ = 0;
};

// Throws UnknownVariable when W is not a subset of the schema.
Relation project(const Relation& rel, const VarSet& w);
Relation natural_join(const Relation& r1, const Relation& r2);
Relation semijoin(const Relation& r1, const Relation& r2);
// σ_θ: rows agreeing with θ on the variables θ shares with the schema.
Relation select(const Relation& rel, const Substitution& theta);

// Throws MissingRelation / ArityMismatch.
Relation evaluate_atom(const Atom& atom, const Database& db);
Relation evaluate_atoms(std::span<const Atom> atoms, const Database& db);

}  // namespace sharpcq
