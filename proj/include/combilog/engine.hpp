#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "combilog/ast.hpp"
#include "combilog/check.hpp"
#include "combilog/error.hpp"
#include "combilog/parser.hpp"
#include "combilog/pretty.hpp"
#include "combilog/term.hpp"

namespace combilog {

enum class Mode { Free, Bound };

using ModePattern = std::vector<Mode>;

inline Mode meet(Mode a, Mode b) {
  return (a == Mode::Bound && b == Mode::Bound) ? Mode::Bound : Mode::Free;
}

inline Mode join(Mode a, Mode b) {
  return (a == Mode::Bound || b == Mode::Bound) ? Mode::Bound : Mode::Free;
}

struct EvalConfig {
  int max_solutions = 10000;
  int max_fold_list_length = 1024;
};

// Answer to a query: ground term per named query variable.
using Substitution = std::map<std::string, Term>;

inline ModePattern argument_modes(const std::vector<Term>& args) {
  ModePattern in;
  in.reserve(args.size());
  for (const auto& a : args)
    in.push_back(is_ground(a) ? Mode::Bound : Mode::Free);
  return in;
}

// A variable environment with syntactic unification. Copied at branch
// points; chains of var-to-var links are followed by walk/resolve.
class Bindings {
 public:
  Term walk(Term t) const {
    while (t.is_var()) {
      auto it = map_.find(t.as_var().name);
      if (it == map_.end()) return t;
      t = it->second;
    }
    return t;
  }

  Term resolve(const Term& t) const {
    Term w = walk(t);
    if (!w.is_list()) return w;
    std::vector<Term> elements;
    elements.reserve(w.as_list().elements.size());
    for (const auto& e : w.as_list().elements) elements.push_back(resolve(e));
    return list(std::move(elements));
  }

  bool unify(const Term& a, const Term& b) {
    Term x = walk(a);
    Term y = walk(b);
    if (x.is_var() && y.is_var() && x.as_var().name == y.as_var().name)
      return true;
    if (x.is_var()) return bind(x.as_var().name, y);
    if (y.is_var()) return bind(y.as_var().name, x);
    if (x.is_atom() && y.is_atom()) return x.as_atom().name == y.as_atom().name;
    if (x.is_int() && y.is_int()) return x.as_int().value == y.as_int().value;
    if (x.is_list() && y.is_list()) {
      const auto& xs = x.as_list().elements;
      const auto& ys = y.as_list().elements;
      if (xs.size() != ys.size()) return false;
      for (std::size_t i = 0; i < xs.size(); ++i)
        if (!unify(xs[i], ys[i])) return false;
      return true;
    }
    return false;
  }

 private:
  bool bind(const std::string& name, const Term& t) {
    if (occurs(name, t)) return false;
    map_.emplace(name, t);
    return true;
  }

  bool occurs(const std::string& name, const Term& t) const {
    Term w = walk(t);
    if (w.is_var()) return w.as_var().name == name;
    if (w.is_list()) {
      for (const auto& e : w.as_list().elements)
        if (occurs(name, e)) return true;
    }
    return false;
  }

  std::map<std::string, Term> map_;
};

struct AEval {
  bool executable = false;
  ModePattern post;
};

// Abstract groundness interpreter. Given the bound/free pattern of an
// expression's arguments it decides whether the expression can run and
// which argument positions are guaranteed ground afterwards.
//
// Built-in mode tables come in two flavours. Declared is the documented
// contract used by safety_check: ineq needs both arguments bound; eq at
// least one; cons one of (B,B,F), (F,F,B), (B,F,B), (B,B,B); a fold needs
// its list argument bound. Operational is what evaluation can actually
// execute; it is a superset of Declared and monotone in the input pattern,
// so a query that passes the Declared check never strands the evaluator,
// which only ever sees equal-or-more-bound arguments at run time.
//
// Folds are analyzed with a signature table keyed by (fold node, y mode,
// z mode), computed as a greatest fixpoint from an optimistic start; the
// recursion is well-founded at run time because the list shrinks.
class Analyzer {
 public:
  enum class Discipline { Declared, Operational };

  Analyzer(const Program& program, Discipline discipline)
      : program_(program), discipline_(discipline) {}

  AEval analyze(const ExprPtr& expr, const ModePattern& in) {
    AEval result;
    for (int round = 0; round < 10000; ++round) {
      changed_ = false;
      recording_ = false;
      aeval(expr, in);
      if (changed_) continue;
      recording_ = true;
      failure_.clear();
      failure_span_ = {};
      orders_.clear();
      result = aeval(expr, in);
      recording_ = false;
      if (!changed_) return result;
    }
    throw Error(ErrorKind::UnsafeQuery,
                "mode analysis did not converge for " + pretty_print(expr),
                expr->span);
  }

  const std::string& failure_message() const { return failure_; }
  const SourceSpan& failure_span() const { return failure_span_; }

  // Evaluation order found for each conjunction reached outside fold
  // operands; conjunctions inside folds are re-ordered per unrolled list.
  const std::map<const Expr*, std::vector<std::size_t>>& conjunct_orders()
      const {
    return orders_;
  }

  int arity(const ExprPtr& expr) {
    auto it = arity_cache_.find(expr.get());
    if (it != arity_cache_.end()) return it->second;
    int a = expr_arity(expr, program_);
    arity_cache_.emplace(expr.get(), a);
    return a;
  }

 private:
  struct FoldRow {
    bool executable = true;
    Mode y = Mode::Bound;
    Mode z = Mode::Bound;

    friend bool operator==(const FoldRow&, const FoldRow&) = default;
  };

  AEval aeval(const ExprPtr& expr, const ModePattern& in) {
    if (const auto* p = std::get_if<PredRef>(&expr->node)) {
      if (is_builtin(p->name)) return aeval_builtin(p->name, in, expr);
      auto fact = program_.facts.find(p->name);
      if (fact != program_.facts.end())
        return {true, ModePattern(in.size(), Mode::Bound)};
      const Definition* def = program_.find_definition(p->name);
      if (def == nullptr)
        throw Error(ErrorKind::UnknownPredicate, "unknown predicate " + p->name,
                    expr->span);
      if (!def_stack_.insert(p->name).second)
        throw Error(ErrorKind::RecursiveDefinition,
                    "definition " + p->name + " refers to itself", expr->span);
      AEval r = aeval(def->body, in);
      def_stack_.erase(p->name);
      return r;
    }

    if (const auto* m = std::get_if<MakeOp>(&expr->node)) {
      int operand_arity = arity(m->operand);
      int n = operand_arity;
      for (int idx : m->indices) n = std::max(n, idx);
      ModePattern col(n, Mode::Free);
      for (std::size_t i = 0; i < m->indices.size(); ++i)
        if (in[i] == Mode::Bound) col[m->indices[i] - 1] = Mode::Bound;
      ModePattern operand_in(col.begin(), col.begin() + operand_arity);
      AEval r = aeval(m->operand, operand_in);
      for (int j = 0; j < operand_arity; ++j) col[j] = join(col[j], r.post[j]);
      ModePattern post(m->indices.size());
      for (std::size_t i = 0; i < m->indices.size(); ++i)
        post[i] = col[m->indices[i] - 1];
      return {r.executable, post};
    }

    if (const auto* c = std::get_if<AndOp>(&expr->node))
      return aeval_and(expr, c->operands, in);

    if (const auto* d = std::get_if<OrOp>(&expr->node)) {
      bool exec = true;
      ModePattern post(in.size(), Mode::Bound);
      for (const auto& op : d->operands) {
        AEval r = aeval(op, in);
        exec = exec && r.executable;
        for (std::size_t j = 0; j < in.size(); ++j)
          post[j] = meet(post[j], r.post[j]);
      }
      return {exec, post};
    }

    return aeval_fold(expr, in);
  }

  AEval aeval_builtin(const std::string& name, const ModePattern& in,
                      const ExprPtr& expr) {
    auto bound = [&](std::size_t i) { return in[i] == Mode::Bound; };
    bool ok = false;
    const char* need = "";
    if (name == "eq") {
      ok = bound(0) || bound(1);
      need = "eq needs at least one argument bound";
    } else if (name == "ineq") {
      ok = bound(0) && bound(1);
      need = "ineq needs both arguments bound";
    } else {
      ok = discipline_ == Discipline::Declared
               ? (bound(0) && bound(1)) || (bound(2) && !bound(1))
               : bound(2) || (bound(0) && bound(1));
      need = "cons needs the whole list bound, or both head and tail";
    }
    if (!ok) record(expr, need, in);
    return {ok, ModePattern(in.size(), Mode::Bound)};
  }

  AEval aeval_and(const ExprPtr& expr, const std::vector<ExprPtr>& ops,
                  const ModePattern& in) {
    ModePattern cur = in;
    std::vector<std::size_t> order;
    std::vector<bool> done(ops.size(), false);
    for (std::size_t step = 0; step < ops.size(); ++step) {
      std::size_t pick = ops.size();
      for (std::size_t i = 0; i < ops.size(); ++i) {
        if (done[i]) continue;
        if (probe(ops[i], cur).executable) {
          pick = i;
          break;
        }
      }
      if (pick == ops.size()) {
        record(expr, "no safe evaluation order for the remaining conjuncts",
               cur);
        return {false, cur};
      }
      done[pick] = true;
      order.push_back(pick);
      AEval r = aeval(ops[pick], cur);
      for (std::size_t j = 0; j < cur.size(); ++j)
        cur[j] = join(cur[j], r.post[j]);
    }
    if (recording_) orders_[expr.get()] = order;
    return {true, cur};
  }

  AEval aeval_fold(const ExprPtr& expr, const ModePattern& in) {
    const bool is_foldr = std::holds_alternative<FoldrOp>(expr->node);
    const ExprPtr& step = is_foldr ? std::get<FoldrOp>(expr->node).step
                                   : std::get<FoldlOp>(expr->node).step;
    const ExprPtr& base = is_foldr ? std::get<FoldrOp>(expr->node).base
                                   : std::get<FoldlOp>(expr->node).base;
    FoldRow row = fold_row(expr, step, base, is_foldr, in[0], in[2]);
    bool exec = row.executable && in[1] == Mode::Bound;
    if (in[1] != Mode::Bound)
      record(expr, "the list argument of a fold must be bound", in);
    else if (!row.executable)
      record(expr, "fold base or step is not executable here", in);
    ModePattern post = {join(in[0], row.y), join(in[1], Mode::Bound),
                        join(in[2], row.z)};
    return {exec, post};
  }

  FoldRow& peek_row(const Expr* node, Mode y, Mode z) {
    auto key = std::make_tuple(node, y, z);
    auto it = table_.find(key);
    if (it == table_.end()) {
      it = table_.emplace(key, FoldRow{}).first;
      changed_ = true;
    }
    return it->second;
  }

  FoldRow fold_row(const ExprPtr& expr, const ExprPtr& step,
                   const ExprPtr& base, bool is_foldr, Mode y, Mode z) {
    FoldRow next = compute_row(expr, step, base, is_foldr, y, z);
    FoldRow& cell = peek_row(expr.get(), y, z);
    FoldRow merged{cell.executable && next.executable, meet(cell.y, next.y),
                   meet(cell.z, next.z)};
    if (!(merged == cell)) {
      cell = merged;
      changed_ = true;
    }
    return cell;
  }

  // One recomputation of a signature row from the current table. The list
  // is bound, so each element x is ground; w is the chain variable linking
  // the step to the recursive occurrence. Either goal may run first; the
  // definitional order is preferred, matching the evaluator's greedy pick.
  FoldRow compute_row(const ExprPtr& expr, const ExprPtr& step,
                      const ExprPtr& base, bool is_foldr, Mode y, Mode z) {
    AEval b = probe(base, {y, z});
    bool rec_ok = false;
    Mode ry = Mode::Free;
    Mode rz = Mode::Free;
    if (is_foldr) {
      // F(y, xs, w) and step(x, w, z)
      {
        FoldRow rec = peek_row(expr.get(), y, Mode::Free);
        if (rec.executable) {
          AEval p = probe(step, {Mode::Bound, rec.z, z});
          if (p.executable) {
            rec_ok = true;
            ry = rec.y;
            rz = p.post[2];
          }
        }
      }
      if (!rec_ok) {
        AEval p = probe(step, {Mode::Bound, Mode::Free, z});
        if (p.executable) {
          FoldRow rec = peek_row(expr.get(), y, p.post[1]);
          if (rec.executable) {
            rec_ok = true;
            ry = rec.y;
            rz = p.post[2];
          }
        }
      }
    } else {
      // step(x, y, w) and F(w, xs, z)
      {
        AEval p = probe(step, {Mode::Bound, y, Mode::Free});
        if (p.executable) {
          FoldRow rec = peek_row(expr.get(), p.post[2], z);
          if (rec.executable) {
            rec_ok = true;
            ry = p.post[1];
            rz = rec.z;
          }
        }
      }
      if (!rec_ok) {
        FoldRow rec = peek_row(expr.get(), Mode::Free, z);
        if (rec.executable) {
          AEval p = probe(step, {Mode::Bound, y, rec.y});
          if (p.executable) {
            rec_ok = true;
            ry = p.post[1];
            rz = rec.z;
          }
        }
      }
    }
    FoldRow out;
    out.executable = b.executable && rec_ok;
    out.y = out.executable ? meet(b.post[0], ry) : Mode::Free;
    out.z = out.executable ? meet(b.post[1], rz) : Mode::Free;
    return out;
  }

  // Candidate checks must not leave failure notes behind.
  AEval probe(const ExprPtr& expr, const ModePattern& in) {
    bool saved = recording_;
    recording_ = false;
    AEval r = aeval(expr, in);
    recording_ = saved;
    return r;
  }

  void record(const ExprPtr& expr, const std::string& reason,
              const ModePattern& in) {
    if (!recording_ || !failure_.empty()) return;
    std::string cols;
    for (std::size_t i = 0; i < in.size(); ++i) {
      if (in[i] != Mode::Free) continue;
      if (!cols.empty()) cols += ", ";
      cols += std::to_string(i + 1);
    }
    failure_ = reason + " in " + pretty_print(expr);
    if (!cols.empty()) failure_ += " (unbound argument position " + cols + ")";
    failure_span_ = expr->span;
  }

  const Program& program_;
  Discipline discipline_;
  std::map<std::tuple<const Expr*, Mode, Mode>, FoldRow> table_;
  std::map<const Expr*, int> arity_cache_;
  std::map<const Expr*, std::vector<std::size_t>> orders_;
  std::set<std::string> def_stack_;
  std::string failure_;
  SourceSpan failure_span_;
  bool changed_ = false;
  bool recording_ = false;
};

struct SafetyPlan {
  std::map<const Expr*, std::vector<std::size_t>> conjunct_orders;
  ModePattern post;
};

namespace detail {

inline SafetyPlan check_modes(const Program& program, const ExprPtr& expr,
                              const ModePattern& in, ErrorKind kind) {
  Analyzer analyzer(program, Analyzer::Discipline::Declared);
  AEval r = analyzer.analyze(expr, in);
  if (!r.executable) {
    std::string msg = analyzer.failure_message().empty()
                          ? "cannot evaluate " + pretty_print(expr)
                          : analyzer.failure_message();
    throw Error(kind, msg, analyzer.failure_span());
  }
  std::string free_cols;
  for (std::size_t i = 0; i < r.post.size(); ++i) {
    if (r.post[i] != Mode::Free) continue;
    if (!free_cols.empty()) free_cols += ", ";
    free_cols += std::to_string(i + 1);
  }
  if (!free_cols.empty())
    throw Error(kind,
                "argument position " + free_cols + " of " +
                    pretty_print(expr) + " stays unbound, so the answer set "
                    "is not finite",
                expr->span);
  return SafetyPlan{analyzer.conjunct_orders(), r.post};
}

}  // namespace detail

// Checks that the expression can be evaluated left-to-right under some
// conjunct ordering with every built-in mode satisfied, and that every
// argument position is ground in answers. Throws UnsafeQuery otherwise.
inline SafetyPlan safety_check(const Program& program, const ExprPtr& expr,
                               const ModePattern& in) {
  return detail::check_modes(program, expr, in, ErrorKind::UnsafeQuery);
}

inline SafetyPlan safety_check(const Program& program, const Query& query) {
  return safety_check(program, pred(query.predicate, query.span),
                      argument_modes(query.arguments));
}

// Goal-directed evaluator. Conjunctions pick the leftmost goal whose
// arguments are bound enough to run, folds unroll over the (bound) list
// into a goal chain evaluated the same way.
class Evaluator {
 public:
  Evaluator(const Program& program, const EvalConfig& config)
      : program_(program),
        config_(config),
        analyzer_(program, Analyzer::Discipline::Operational) {}

  std::vector<Bindings> eval(const ExprPtr& expr, const std::vector<Term>& args,
                             const Bindings& b) {
    if (const auto* p = std::get_if<PredRef>(&expr->node)) {
      if (is_builtin(p->name)) return eval_builtin(p->name, args, b);
      auto fact = program_.facts.find(p->name);
      if (fact != program_.facts.end()) return eval_fact(fact->second, args, b);
      const Definition* def = program_.find_definition(p->name);
      if (def == nullptr)
        throw Error(ErrorKind::UnknownPredicate, "unknown predicate " + p->name,
                    expr->span);
      if (!def_stack_.insert(p->name).second)
        throw Error(ErrorKind::RecursiveDefinition,
                    "definition " + p->name + " refers to itself", expr->span);
      auto r = eval(def->body, args, b);
      def_stack_.erase(p->name);
      return r;
    }

    if (const auto* m = std::get_if<MakeOp>(&expr->node)) {
      int operand_arity = analyzer_.arity(m->operand);
      int n = operand_arity;
      for (int idx : m->indices) n = std::max(n, idx);
      std::vector<Term> cols;
      cols.reserve(n);
      for (int j = 0; j < n; ++j) cols.push_back(fresh_var());
      Bindings nb = b;
      for (std::size_t i = 0; i < m->indices.size(); ++i)
        if (!nb.unify(args[i], cols[m->indices[i] - 1])) return {};
      std::vector<Term> operand_args(cols.begin(), cols.begin() + operand_arity);
      return eval(m->operand, operand_args, nb);
    }

    if (const auto* c = std::get_if<AndOp>(&expr->node)) {
      std::vector<Goal> goals;
      goals.reserve(c->operands.size());
      for (const auto& op : c->operands) goals.push_back({op, args});
      return eval_goals(std::move(goals), b);
    }

    if (const auto* d = std::get_if<OrOp>(&expr->node)) {
      std::vector<Bindings> out;
      for (const auto& op : d->operands) {
        auto r = eval(op, args, b);
        for (auto& s : r) out.push_back(std::move(s));
        guard(out.size());
      }
      return out;
    }

    return eval_fold(expr, args, b);
  }

 private:
  struct Goal {
    ExprPtr expr;
    std::vector<Term> args;
  };

  Term fresh_var() { return var("_G" + std::to_string(++fresh_counter_)); }

  void guard(std::size_t n) const {
    if (n > static_cast<std::size_t>(config_.max_solutions))
      throw Error(ErrorKind::SolutionLimitExceeded,
                  "more than " + std::to_string(config_.max_solutions) +
                      " solutions");
  }

  std::vector<Bindings> eval_goals(std::vector<Goal> goals, const Bindings& b) {
    std::vector<Bindings> sols = {b};
    std::vector<bool> done(goals.size(), false);
    for (std::size_t step = 0; step < goals.size(); ++step) {
      if (sols.empty()) return {};
      std::size_t pick = goals.size();
      for (std::size_t i = 0; i < goals.size() && pick == goals.size(); ++i) {
        if (done[i]) continue;
        ModePattern in(goals[i].args.size(), Mode::Bound);
        for (std::size_t k = 0; k < goals[i].args.size(); ++k)
          for (const auto& s : sols)
            if (!is_ground(s.resolve(goals[i].args[k]))) {
              in[k] = Mode::Free;
              break;
            }
        if (analyzer_.analyze(goals[i].expr, in).executable) pick = i;
      }
      if (pick == goals.size()) {
        std::size_t first = 0;
        while (done[first]) ++first;
        throw Error(ErrorKind::UnsafeQuery,
                    "no executable goal order at " +
                        pretty_print(goals[first].expr),
                    goals[first].expr->span);
      }
      done[pick] = true;
      std::vector<Bindings> next;
      for (const auto& s : sols) {
        auto r = eval(goals[pick].expr, goals[pick].args, s);
        for (auto& x : r) next.push_back(std::move(x));
        guard(next.size());
      }
      sols = std::move(next);
    }
    return sols;
  }

  std::vector<Bindings> eval_builtin(const std::string& name,
                                     const std::vector<Term>& args,
                                     const Bindings& b) {
    if (name == "eq") {
      Bindings nb = b;
      if (nb.unify(args[0], args[1])) return {nb};
      return {};
    }
    if (name == "ineq") {
      Term x = b.resolve(args[0]);
      Term y = b.resolve(args[1]);
      if (!is_ground(x) || !is_ground(y))
        throw Error(ErrorKind::UnsafeQuery,
                    "ineq reached with an unbound argument");
      if (x == y) return {};
      return {b};
    }
    // cons(head, tail, whole)
    Term whole = b.resolve(args[2]);
    if (whole.is_list()) {
      const auto& els = whole.as_list().elements;
      if (els.empty()) return {};
      Bindings nb = b;
      std::vector<Term> tail(els.begin() + 1, els.end());
      if (nb.unify(args[0], els[0]) && nb.unify(args[1], list(std::move(tail))))
        return {nb};
      return {};
    }
    if (!whole.is_var()) return {};
    Term tail = b.resolve(args[1]);
    if (tail.is_list()) {
      std::vector<Term> els;
      els.reserve(tail.as_list().elements.size() + 1);
      els.push_back(b.resolve(args[0]));
      for (const auto& e : tail.as_list().elements) els.push_back(e);
      Bindings nb = b;
      if (nb.unify(args[2], list(std::move(els)))) return {nb};
      return {};
    }
    if (!tail.is_var()) return {};
    throw Error(ErrorKind::UnsafeQuery,
                "cons reached with both the whole list and the tail unbound");
  }

  std::vector<Bindings> eval_fact(const Relation& rel,
                                  const std::vector<Term>& args,
                                  const Bindings& b) {
    std::vector<Bindings> out;
    for (const auto& tuple : rel.tuples) {
      Bindings nb = b;
      bool ok = true;
      for (std::size_t i = 0; i < args.size() && ok; ++i)
        ok = nb.unify(args[i], tuple[i]);
      if (ok) {
        out.push_back(std::move(nb));
        guard(out.size());
      }
    }
    return out;
  }

  // Folds over a known list unroll into a plain goal chain, so conjunct
  // reordering handles both running directions of the step predicate.
  std::vector<Bindings> eval_fold(const ExprPtr& expr,
                                  const std::vector<Term>& args,
                                  const Bindings& b) {
    const bool is_foldr = std::holds_alternative<FoldrOp>(expr->node);
    const ExprPtr& step = is_foldr ? std::get<FoldrOp>(expr->node).step
                                   : std::get<FoldlOp>(expr->node).step;
    const ExprPtr& base = is_foldr ? std::get<FoldrOp>(expr->node).base
                                   : std::get<FoldlOp>(expr->node).base;
    Term lst = b.resolve(args[1]);
    if (!lst.is_list()) {
      if (is_ground(lst)) return {};
      throw Error(ErrorKind::UnsafeQuery,
                  "fold reached with an unbound list argument", expr->span);
    }
    const auto& xs = lst.as_list().elements;
    if (static_cast<int>(xs.size()) > config_.max_fold_list_length)
      throw Error(ErrorKind::FoldListTooLong,
                  "fold over a list of length " + std::to_string(xs.size()) +
                      " (limit " +
                      std::to_string(config_.max_fold_list_length) + ")",
                  expr->span);

    std::vector<Goal> goals;
    if (xs.empty()) {
      goals.push_back({base, {args[0], args[2]}});
    } else if (is_foldr) {
      // base(y, w_k), step(x_{k-1}, w_k, w_{k-1}), ..., step(x_0, w_1, z)
      std::vector<Term> w(xs.size() + 1);
      w[0] = args[2];
      for (std::size_t i = 1; i <= xs.size(); ++i) w[i] = fresh_var();
      goals.push_back({base, {args[0], w[xs.size()]}});
      for (std::size_t i = xs.size(); i >= 1; --i)
        goals.push_back({step, {xs[i - 1], w[i], w[i - 1]}});
    } else {
      // step(x_0, y, w_1), step(x_1, w_1, w_2), ..., base(w_k, z)
      std::vector<Term> w(xs.size() + 1);
      w[0] = args[0];
      for (std::size_t i = 1; i <= xs.size(); ++i) w[i] = fresh_var();
      for (std::size_t i = 0; i < xs.size(); ++i)
        goals.push_back({step, {xs[i], w[i], w[i + 1]}});
      goals.push_back({base, {w[xs.size()], args[2]}});
    }
    return eval_goals(std::move(goals), b);
  }

  const Program& program_;
  EvalConfig config_;
  Analyzer analyzer_;
  std::set<std::string> def_stack_;
  long long fresh_counter_ = 0;
};

namespace detail {

inline void collect_vars(const Term& t, std::vector<std::string>& names,
                         std::set<std::string>& seen) {
  if (t.is_var()) {
    const std::string& n = t.as_var().name;
    if (!n.empty() && n[0] != '_' && seen.insert(n).second)
      names.push_back(n);
  } else if (t.is_list()) {
    for (const auto& e : t.as_list().elements) collect_vars(e, names, seen);
  }
}

}  // namespace detail

// Named variables of a query in first-occurrence order. Underscore-prefixed
// variables are anonymous and never reported.
inline std::vector<std::string> query_variables(const Query& query) {
  std::vector<std::string> names;
  std::set<std::string> seen;
  for (const auto& a : query.arguments)
    detail::collect_vars(a, names, seen);
  return names;
}

// All substitutions that make the query true. A ground query that holds
// yields one empty substitution; an empty set means failure.
inline std::set<Substitution> solve(const Program& program, const Query& query,
                                    const EvalConfig& config = {}) {
  safety_check(program, query);
  Evaluator evaluator(program, config);
  auto sols = evaluator.eval(pred(query.predicate, query.span),
                             query.arguments, Bindings{});
  auto names = query_variables(query);
  std::set<Substitution> answers;
  for (const auto& s : sols) {
    Substitution sub;
    for (const auto& n : names) {
      Term t = s.resolve(var(n));
      if (!is_ground(t))
        throw Error(ErrorKind::UnsafeQuery,
                    "variable " + n + " is unbound in an answer", query.span);
      sub.emplace(n, std::move(t));
    }
    answers.insert(std::move(sub));
    if (answers.size() > static_cast<std::size_t>(config.max_solutions))
      throw Error(ErrorKind::SolutionLimitExceeded,
                  "more than " + std::to_string(config.max_solutions) +
                      " answers",
                  query.span);
  }
  return answers;
}

// Materializes the full denotation of an expression. Only meaningful when
// the fact base makes it finite; rejected otherwise.
inline Relation eval_closed(const Program& program, const ExprPtr& expr,
                            const EvalConfig& config = {}) {
  int m = expr_arity(expr, program);
  ModePattern in(m, Mode::Free);
  detail::check_modes(program, expr, in, ErrorKind::NotFinitelyDenotable);
  Evaluator evaluator(program, config);
  std::vector<Term> args;
  args.reserve(m);
  for (int i = 0; i < m; ++i)
    args.push_back(var("_C" + std::to_string(i + 1)));
  auto sols = evaluator.eval(expr, args, Bindings{});
  Relation rel;
  rel.arity = m;
  for (const auto& s : sols) {
    Tuple tuple;
    tuple.reserve(args.size());
    for (const auto& a : args) {
      Term g = s.resolve(a);
      if (!is_ground(g))
        throw Error(ErrorKind::NotFinitelyDenotable,
                    "a column of " + pretty_print(expr) + " stays unbound",
                    expr->span);
      tuple.push_back(std::move(g));
    }
    rel.tuples.insert(std::move(tuple));
    if (rel.tuples.size() > static_cast<std::size_t>(config.max_solutions))
      throw Error(ErrorKind::SolutionLimitExceeded,
                  "denotation exceeds " + std::to_string(config.max_solutions) +
                      " tuples",
                  expr->span);
  }
  return rel;
}

}  // namespace combilog
