#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "combilog/ast.hpp"
#include "combilog/check.hpp"
#include "combilog/error.hpp"
#include "combilog/term.hpp"

namespace combilog {

struct OracleConfig {
  std::size_t max_universe = 4096;
  std::size_t max_candidates = 2000000;
};

// All flat lists over the given constants up to the given length, plus the
// constants themselves. Tails of every list are included by construction.
inline std::set<Term> enumerate_universe(const std::set<Term>& constants,
                                         int max_list_length,
                                         const OracleConfig& limits = {}) {
  std::set<Term> universe = constants;
  std::vector<Term> level = {nil()};
  universe.insert(nil());
  for (int len = 1; len <= max_list_length; ++len) {
    std::vector<Term> next;
    for (const Term& shorter : level) {
      for (const Term& c : constants) {
        std::vector<Term> elements = {c};
        for (const auto& e : shorter.as_list().elements)
          elements.push_back(e);
        next.push_back(list(std::move(elements)));
      }
    }
    for (const Term& l : next) universe.insert(l);
    if (universe.size() > limits.max_universe)
      throw Error(ErrorKind::UniverseLimitExceeded,
                  "universe grew past " +
                      std::to_string(limits.max_universe) + " terms");
    level = std::move(next);
  }
  return universe;
}

// Atoms and integers appearing anywhere in the fact base.
inline std::set<Term> fact_constants(const Program& program) {
  std::set<Term> out;
  auto walk = [&](const Term& t, auto&& self) -> void {
    if (t.is_atom() || t.is_int()) {
      out.insert(t);
    } else if (t.is_list()) {
      for (const auto& e : t.as_list().elements) self(e, self);
    }
  };
  for (const auto& [name, rel] : program.facts) {
    (void)name;
    for (const auto& tuple : rel.tuples)
      for (const auto& t : tuple) walk(t, walk);
  }
  return out;
}

namespace detail {

// Direct inductive denotation by exhaustive enumeration. Deliberately
// naive and independent of the evaluator; used as the reference in tests.
class Oracle {
 public:
  Oracle(const Program& program, const std::set<Term>& universe,
         const OracleConfig& limits)
      : program_(program), universe_(universe), limits_(limits) {
    if (universe_.size() > limits_.max_universe)
      throw Error(ErrorKind::UniverseLimitExceeded,
                  "universe has " + std::to_string(universe_.size()) +
                      " terms (limit " +
                      std::to_string(limits_.max_universe) + ")");
  }

  std::set<Tuple> den(const ExprPtr& expr) {
    auto it = memo_.find(expr.get());
    if (it != memo_.end()) return it->second;
    std::set<Tuple> result = compute(expr);
    memo_.emplace(expr.get(), result);
    return result;
  }

 private:
  std::set<Tuple> compute(const ExprPtr& expr) {
    if (const auto* p = std::get_if<PredRef>(&expr->node)) {
      if (p->name == "eq") {
        std::set<Tuple> out;
        for (const Term& t : universe_) out.insert({t, t});
        return out;
      }
      if (p->name == "ineq") {
        guard(universe_.size() * universe_.size());
        std::set<Tuple> out;
        for (const Term& s : universe_)
          for (const Term& t : universe_)
            if (!(s == t)) out.insert({s, t});
        return out;
      }
      if (p->name == "cons") {
        std::set<Tuple> out;
        for (const Term& l : universe_) {
          if (!l.is_list() || l.as_list().elements.empty()) continue;
          const auto& els = l.as_list().elements;
          out.insert({els[0], list({els.begin() + 1, els.end()}), l});
        }
        return out;
      }
      auto fact = program_.facts.find(p->name);
      if (fact != program_.facts.end()) return fact->second.tuples;
      const Definition* def = program_.find_definition(p->name);
      if (def == nullptr)
        throw Error(ErrorKind::UnknownPredicate, "unknown predicate " + p->name,
                    expr->span);
      if (!def_stack_.insert(p->name).second)
        throw Error(ErrorKind::RecursiveDefinition,
                    "definition " + p->name + " refers to itself", expr->span);
      auto r = den(def->body);
      def_stack_.erase(p->name);
      return r;
    }

    if (const auto* m = std::get_if<MakeOp>(&expr->node))
      return compute_make(*m);

    if (const auto* c = std::get_if<AndOp>(&expr->node)) {
      std::set<Tuple> out = den(c->operands[0]);
      for (std::size_t i = 1; i < c->operands.size(); ++i) {
        std::set<Tuple> other = den(c->operands[i]);
        std::set<Tuple> kept;
        for (const auto& t : out)
          if (other.count(t)) kept.insert(t);
        out = std::move(kept);
      }
      return out;
    }

    if (const auto* d = std::get_if<OrOp>(&expr->node)) {
      std::set<Tuple> out;
      for (const auto& op : d->operands) {
        std::set<Tuple> r = den(op);
        out.insert(r.begin(), r.end());
      }
      return out;
    }

    const bool is_foldr = std::holds_alternative<FoldrOp>(expr->node);
    const ExprPtr& step = is_foldr ? std::get<FoldrOp>(expr->node).step
                                   : std::get<FoldlOp>(expr->node).step;
    const ExprPtr& base = is_foldr ? std::get<FoldrOp>(expr->node).base
                                   : std::get<FoldlOp>(expr->node).base;
    return compute_fold(den(step), den(base), is_foldr);
  }

  std::set<Tuple> compute_make(const MakeOp& m) {
    int operand_arity = expr_arity(m.operand, program_);
    std::set<Tuple> base = den(m.operand);

    std::vector<int> introduced;
    for (int idx : m.indices)
      if (idx > operand_arity) introduced.push_back(idx);
    std::sort(introduced.begin(), introduced.end());
    introduced.erase(std::unique(introduced.begin(), introduced.end()),
                     introduced.end());

    std::size_t combos = 1;
    for (std::size_t k = 0; k < introduced.size(); ++k) {
      combos *= universe_.size();
      guard(combos);
    }
    guard(base.size() * combos);

    std::vector<Term> pool(universe_.begin(), universe_.end());
    std::set<Tuple> out;
    for (const Tuple& x : base) {
      std::vector<std::size_t> odometer(introduced.size(), 0);
      while (true) {
        std::map<int, Term> col;
        for (int j = 1; j <= operand_arity; ++j) col.emplace(j, x[j - 1]);
        for (std::size_t k = 0; k < introduced.size(); ++k)
          col.emplace(introduced[k], pool[odometer[k]]);
        Tuple t;
        t.reserve(m.indices.size());
        for (int idx : m.indices) t.push_back(col.at(idx));
        out.insert(std::move(t));

        if (introduced.empty()) break;
        std::size_t k = 0;
        while (k < odometer.size() && ++odometer[k] == pool.size()) {
          odometer[k] = 0;
          ++k;
        }
        if (k == odometer.size()) break;
      }
    }
    return out;
  }

  // Least fixpoint of the fold equations over the lists in the universe.
  // Grows by list length, so it stabilizes after at most max-length rounds.
  std::set<Tuple> compute_fold(const std::set<Tuple>& step,
                               const std::set<Tuple>& base, bool is_foldr) {
    std::set<Tuple> f;
    for (const Tuple& t : base) f.insert({t[0], nil(), t[1]});

    std::vector<Term> lists;
    for (const Term& l : universe_)
      if (l.is_list() && !l.as_list().elements.empty()) lists.push_back(l);

    bool grew = true;
    while (grew) {
      grew = false;
      for (const Term& l : lists) {
        const auto& els = l.as_list().elements;
        Term x = els[0];
        Term xs = list({els.begin() + 1, els.end()});
        for (const Tuple& s : step) {
          if (is_foldr) {
            // F(y, xs, w) and step(x, w, z) give F(y, [x|xs], z)
            if (!(s[0] == x)) continue;
            for (const Tuple& r : f) {
              if (!(r[1] == xs) || !(r[2] == s[1])) continue;
              if (f.insert({r[0], l, s[2]}).second) grew = true;
            }
          } else {
            // step(x, y, w) and F(w, xs, z) give F(y, [x|xs], z)
            if (!(s[0] == x)) continue;
            for (const Tuple& r : f) {
              if (!(r[1] == xs) || !(r[0] == s[2])) continue;
              if (f.insert({s[1], l, r[2]}).second) grew = true;
            }
          }
          guard(f.size());
        }
      }
    }
    return f;
  }

  void guard(std::size_t n) const {
    if (n > limits_.max_candidates)
      throw Error(ErrorKind::UniverseLimitExceeded,
                  "enumeration needs " + std::to_string(n) +
                      " candidates (limit " +
                      std::to_string(limits_.max_candidates) + ")");
  }

  const Program& program_;
  const std::set<Term>& universe_;
  OracleConfig limits_;
  std::map<const Expr*, std::set<Tuple>> memo_;
  std::set<std::string> def_stack_;
};

}  // namespace detail

inline Relation brute_force_oracle(const Program& program, const ExprPtr& expr,
                                   const std::set<Term>& universe,
                                   const OracleConfig& limits = {}) {
  Relation rel;
  rel.arity = expr_arity(expr, program);
  detail::Oracle oracle(program, universe, limits);
  rel.tuples = oracle.den(expr);
  return rel;
}

}  // namespace combilog
