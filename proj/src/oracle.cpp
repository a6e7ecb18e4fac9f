#include "sharpcq/oracle.hpp"

#include <algorithm>
#include <set>

#include "sharpcq/errors.hpp"

namespace sharpcq {

namespace {

class Backtracker {
 public:
  Backtracker(const Query& q, const Database& db, const VarSet& w, std::uint64_t cap)
      : output_(w.begin(), w.end()), cap_(cap) {
    for (const auto& v : w)
      if (!q.vars().count(v)) throw UnknownVariable("variable " + v + " does not occur in the query");
    std::vector<std::string> names(q.vars().begin(), q.vars().end());
    auto index_of = [&](const std::string& v) {
      return static_cast<int>(std::lower_bound(names.begin(), names.end(), v) - names.begin());
    };
    binding_.assign(names.size(), 0);
    bound_.assign(names.size(), false);
    for (const auto& v : output_) output_idx_.push_back(index_of(v));

    // Next atom: the one sharing most already-bound variables (lowest index
    // on ties). Only affects speed.
    std::vector<bool> used(q.atoms().size(), false);
    std::vector<bool> seen(names.size(), false);
    for (std::size_t step = 0; step < q.atoms().size(); ++step) {
      std::size_t best = 0;
      int best_score = -1;
      for (std::size_t i = 0; i < q.atoms().size(); ++i) {
        if (used[i]) continue;
        int score = 0;
        for (const auto& v : q.atoms()[i].vars()) score += seen[index_of(v)];
        if (score > best_score) {
          best = i;
          best_score = score;
        }
      }
      used[best] = true;
      const Atom& a = q.atoms()[best];
      const auto* table = db.table(a.relation);
      if (!table) throw MissingRelation("relation " + a.relation + " is not in the database");
      if (table->arity != a.arity()) throw ArityMismatch("atom over " + a.relation + " has the wrong arity");
      Step s{table, {}};
      for (const auto& t : a.args) {
        if (t.is_variable()) {
          s.slots.push_back(index_of(t.name));
          seen[s.slots.back()] = true;
        } else if (auto id = db.lookup(t.name)) {
          s.slots.push_back(-static_cast<int>(*id) - 1);
        } else {
          impossible_ = true;
        }
      }
      steps_.push_back(std::move(s));
    }
    // After step i, are all output variables bound?
    std::vector<bool> now(names.size(), false);
    for (const auto& s : steps_) {
      for (int slot : s.slots)
        if (slot >= 0) now[slot] = true;
      output_done_.push_back(std::all_of(output_idx_.begin(), output_idx_.end(), [&](int i) { return now[i]; }));
    }
  }

  Relation run() {
    std::set<std::vector<Value>> answers;
    if (!impossible_) {
      if (output_idx_.empty()) {
        if (exists(0)) answers.insert(std::vector<Value>{});
      } else {
        collect(0, answers);
      }
    }
    std::vector<Value> data;
    for (const auto& a : answers) data.insert(data.end(), a.begin(), a.end());
    return Relation::from_rows(output_, std::move(data), answers.size());
  }

 private:
  struct Step {
    const Database::Table* table;
    std::vector<int> slots;  // variable index, or -(constant id)-1
  };

  // Tries tuple t for step i; on success binds the new variables and records
  // them in `fresh`.
  bool bind(const Step& s, const Tuple& t, std::vector<int>& fresh) {
    fresh.clear();
    for (std::size_t j = 0; j < s.slots.size(); ++j) {
      int slot = s.slots[j];
      bool ok = true;
      if (slot < 0) {
        ok = t[j] == static_cast<Value>(-slot - 1);
      } else if (bound_[slot]) {
        ok = binding_[slot] == t[j];
      } else {
        binding_[slot] = t[j];
        bound_[slot] = true;
        fresh.push_back(slot);
      }
      if (!ok) {
        unbind(fresh);
        return false;
      }
    }
    if (++states_ > cap_) throw StateCapExceeded("oracle visited more than " + std::to_string(cap_) + " states");
    return true;
  }

  void unbind(const std::vector<int>& fresh) {
    for (int v : fresh) bound_[v] = false;
  }

  bool exists(std::size_t i) {
    if (i == steps_.size()) return true;
    std::vector<int> fresh;
    for (const auto& t : steps_[i].table->tuples) {
      if (!bind(steps_[i], t, fresh)) continue;
      bool found = exists(i + 1);
      unbind(fresh);
      if (found) return true;
    }
    return false;
  }

  void collect(std::size_t i, std::set<std::vector<Value>>& answers) {
    std::vector<int> fresh;
    for (const auto& t : steps_[i].table->tuples) {
      if (!bind(steps_[i], t, fresh)) continue;
      if (output_done_[i]) {
        // The output is fixed; the rest only has to be satisfiable.
        if (exists(i + 1)) {
          std::vector<Value> answer;
          for (int v : output_idx_) answer.push_back(binding_[v]);
          answers.insert(std::move(answer));
        }
      } else {
        collect(i + 1, answers);
      }
      unbind(fresh);
    }
  }

  std::vector<std::string> output_;
  std::vector<int> output_idx_;
  std::uint64_t cap_;
  std::uint64_t states_ = 0;
  bool impossible_ = false;
  std::vector<Step> steps_;
  std::vector<bool> output_done_;
  std::vector<Value> binding_;
  std::vector<bool> bound_;
};

}  // namespace

Relation enumerate_projection(const Query& q, const Database& db, const VarSet& w, std::uint64_t state_cap) {
  return Backtracker(q, db, w, state_cap).run();
}

Relation enumerate_answers(const Query& q, const Database& db, std::uint64_t state_cap) {
  return enumerate_projection(q, db, q.free(), state_cap);
}

BigInt brute_force_count(const Query& q, const Database& db, std::uint64_t state_cap) {
  return enumerate_answers(q, db, state_cap).size();
}

}  // namespace sharpcq
