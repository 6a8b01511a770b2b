#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "combilog/ast.hpp"
#include "combilog/check.hpp"
#include "combilog/engine.hpp"
#include "combilog/error.hpp"
#include "combilog/parser.hpp"
#include "combilog/term.hpp"

namespace combilog {

class PlTerm;

struct PlVar {
  int id = 0;
};

struct PlAtom {
  std::string name;
};

struct PlInt {
  std::int64_t value = 0;
};

// A (possibly partial) list: [a, b], [X|Xs], [X, Y|Xs]. A tail implies at
// least one element; the empty list never carries a tail.
struct PlList {
  std::vector<PlTerm> elements;
  std::shared_ptr<PlTerm> tail;
};

class PlTerm {
 public:
  using Node = std::variant<PlVar, PlAtom, PlInt, PlList>;

  PlTerm() : node_(PlAtom{"nil"}) {}
  PlTerm(PlVar v) : node_(v) {}
  PlTerm(PlAtom a) : node_(std::move(a)) {}
  PlTerm(PlInt i) : node_(i) {}
  PlTerm(PlList l) : node_(std::move(l)) {}

  const Node& node() const { return node_; }
  Node& node() { return node_; }

  bool is_var() const { return std::holds_alternative<PlVar>(node_); }
  bool is_atom() const { return std::holds_alternative<PlAtom>(node_); }
  bool is_int() const { return std::holds_alternative<PlInt>(node_); }
  bool is_list() const { return std::holds_alternative<PlList>(node_); }

  const PlVar& as_var() const { return std::get<PlVar>(node_); }
  const PlAtom& as_atom() const { return std::get<PlAtom>(node_); }
  const PlInt& as_int() const { return std::get<PlInt>(node_); }
  const PlList& as_list() const { return std::get<PlList>(node_); }

 private:
  Node node_;
};

inline PlTerm pl_var(int id) { return PlTerm(PlVar{id}); }
inline PlTerm pl_atom(std::string name) { return PlTerm(PlAtom{std::move(name)}); }
inline PlTerm pl_int(std::int64_t value) { return PlTerm(PlInt{value}); }
inline PlTerm pl_list(std::vector<PlTerm> elements) {
  return PlTerm(PlList{std::move(elements), nullptr});
}
inline PlTerm pl_partial_list(std::vector<PlTerm> elements, PlTerm tail) {
  if (elements.empty()) return tail;
  return PlTerm(PlList{std::move(elements),
                       std::make_shared<PlTerm>(std::move(tail))});
}

// Goal predicates are fact or definition names, fold auxiliaries, "cons",
// and the built-ins "=" and "\\=".
struct PlGoal {
  std::string predicate;
  std::vector<PlTerm> args;
};

struct PlClause {
  PlGoal head;
  std::vector<PlGoal> body;
};

struct CodegenOutput {
  std::vector<PlClause> clauses;
  std::vector<std::string> auxiliary_names;
};

namespace detail {

class VarClasses {
 public:
  int fresh() {
    parent_.push_back(static_cast<int>(parent_.size()));
    return parent_.back();
  }

  int find(int a) const {
    while (parent_[a] != a) a = parent_[a];
    return a;
  }

  // The smaller root wins, keeping representatives deterministic.
  void merge(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b)
      parent_[b] = a;
    else
      parent_[a] = b;
  }

 private:
  std::vector<int> parent_;
};

class DefinitionCompiler {
 public:
  DefinitionCompiler(const Program& program, const Definition& def)
      : program_(program), def_(def) {}

  CodegenOutput run() {
    int m = expr_arity(def_.body, program_);
    std::vector<int> head(m);
    for (int i = 0; i < m; ++i) head[i] = vars_.fresh();
    auto alternatives = compile(def_.body, head);

    CodegenOutput out;
    for (auto& goals : alternatives) {
      PlClause clause;
      clause.head.predicate = def_.name;
      for (int h : head) clause.head.args.push_back(pl_var(h));
      clause.body = order_goals(std::move(goals));
      out.clauses.push_back(std::move(clause));
    }
    for (auto& clause : aux_clauses_) out.clauses.push_back(std::move(clause));
    out.auxiliary_names = aux_names_;
    for (auto& clause : out.clauses) canonicalize_clause(clause);
    return out;
  }

 private:
  // Each alternative is one clause body; Or nodes fork alternatives and And
  // nodes take their cross product (disjunctive normal form).
  std::vector<std::vector<PlGoal>> compile(const ExprPtr& expr,
                                           const std::vector<int>& args) {
    if (const auto* p = std::get_if<PredRef>(&expr->node)) {
      std::string predicate = p->name;
      if (p->name == "eq") predicate = "=";
      if (p->name == "ineq") predicate = "\\=";
      if (!is_builtin(p->name) && program_.facts.find(p->name) == program_.facts.end() &&
          program_.find_definition(p->name) == nullptr)
        throw Error(ErrorKind::UnknownPredicate, "unknown predicate " + p->name,
                    expr->span);
      PlGoal goal{predicate, {}};
      for (int a : args) goal.args.push_back(pl_var(a));
      return {{goal}};
    }

    if (const auto* m = std::get_if<MakeOp>(&expr->node)) {
      int operand_arity = expr_arity(m->operand, program_);
      int n = operand_arity;
      for (int idx : m->indices) n = std::max(n, idx);
      // Repeated indices merge the outer variables they select; operand
      // positions nobody selects get a fresh variable that renders as `_`
      // when it stays single-use.
      std::vector<int> col(n, -1);
      for (std::size_t i = 0; i < m->indices.size(); ++i) {
        int j = m->indices[i] - 1;
        if (col[j] == -1)
          col[j] = args[i];
        else
          vars_.merge(col[j], args[i]);
      }
      std::vector<int> operand_args(operand_arity);
      for (int j = 0; j < operand_arity; ++j)
        operand_args[j] = col[j] == -1 ? vars_.fresh() : col[j];
      return compile(m->operand, operand_args);
    }

    if (const auto* c = std::get_if<AndOp>(&expr->node)) {
      std::vector<std::vector<PlGoal>> acc = {{}};
      for (const auto& op : c->operands) {
        auto branch = compile(op, args);
        std::vector<std::vector<PlGoal>> next;
        for (const auto& left : acc)
          for (const auto& right : branch) {
            std::vector<PlGoal> joined = left;
            joined.insert(joined.end(), right.begin(), right.end());
            next.push_back(std::move(joined));
          }
        acc = std::move(next);
      }
      return acc;
    }

    if (const auto* d = std::get_if<OrOp>(&expr->node)) {
      std::vector<std::vector<PlGoal>> acc;
      for (const auto& op : d->operands) {
        auto branch = compile(op, args);
        for (auto& goals : branch) acc.push_back(std::move(goals));
      }
      return acc;
    }

    return compile_fold(expr, args);
  }

  std::vector<std::vector<PlGoal>> compile_fold(const ExprPtr& expr,
                                                const std::vector<int>& args) {
    const bool is_foldr = std::holds_alternative<FoldrOp>(expr->node);
    const ExprPtr& step = is_foldr ? std::get<FoldrOp>(expr->node).step
                                   : std::get<FoldlOp>(expr->node).step;
    const ExprPtr& base = is_foldr ? std::get<FoldrOp>(expr->node).base
                                   : std::get<FoldlOp>(expr->node).base;

    auto named = fold_names_.find(expr.get());
    std::string aux;
    if (named != fold_names_.end()) {
      aux = named->second;
    } else {
      aux = def_.name + "__fold" + std::to_string(++fold_counter_);
      if (is_builtin(aux) || program_.facts.count(aux) ||
          program_.find_definition(aux) != nullptr)
        throw Error(ErrorKind::NameCollision,
                    "auxiliary predicate " + aux +
                        " collides with an existing name",
                    expr->span);
      fold_names_.emplace(expr.get(), aux);
      aux_names_.push_back(aux);

      // aux(Y, [], Z) :- base(Y, Z).
      int yb = vars_.fresh();
      int zb = vars_.fresh();
      for (auto& goals : compile(base, {yb, zb})) {
        PlClause clause;
        clause.head.predicate = aux;
        clause.head.args = {pl_var(yb), pl_list({}), pl_var(zb)};
        clause.body = order_goals(std::move(goals));
        aux_clauses_.push_back(std::move(clause));
      }

      // foldr: aux(Y, [X|Xs], Z) :- aux(Y, Xs, W), step(X, W, Z).
      // foldl: aux(Y, [X|Xs], Z) :- step(X, Y, W), aux(W, Xs, Z).
      int y = vars_.fresh();
      int x = vars_.fresh();
      int xs = vars_.fresh();
      int z = vars_.fresh();
      int w = vars_.fresh();
      auto step_args = is_foldr ? std::vector<int>{x, w, z}
                                : std::vector<int>{x, y, w};
      for (auto& goals : compile(step, step_args)) {
        PlClause clause;
        clause.head.predicate = aux;
        clause.head.args = {pl_var(y), pl_partial_list({pl_var(x)}, pl_var(xs)),
                            pl_var(z)};
        PlGoal rec{aux, is_foldr
                            ? std::vector<PlTerm>{pl_var(y), pl_var(xs), pl_var(w)}
                            : std::vector<PlTerm>{pl_var(w), pl_var(xs), pl_var(z)}};
        std::vector<PlGoal> body;
        if (is_foldr) {
          body.push_back(rec);
          for (auto& g : goals) body.push_back(std::move(g));
        } else {
          for (auto& g : goals) body.push_back(std::move(g));
          body.push_back(rec);
        }
        clause.body = order_goals(std::move(body));
        aux_clauses_.push_back(std::move(clause));
      }
    }

    PlGoal call{aux, {pl_var(args[0]), pl_var(args[1]), pl_var(args[2])}};
    return {{call}};
  }

  // Binder-first ordering: repeatedly take the leftmost goal whose inputs
  // are bound under the heuristic mode table, assuming a call binds every
  // argument. When nothing qualifies (the paper's own clauses start from
  // free heads) the leftmost remaining goal is taken as written.
  std::vector<PlGoal> order_goals(std::vector<PlGoal> goals) {
    std::set<int> bound;
    std::vector<PlGoal> out;
    std::vector<bool> done(goals.size(), false);
    auto term_bound = [&](const PlTerm& t) { return is_bound(t, bound); };
    auto executable = [&](const PlGoal& g) {
      if (g.predicate == "=")
        return term_bound(g.args[0]) || term_bound(g.args[1]);
      if (g.predicate == "\\=")
        return term_bound(g.args[0]) && term_bound(g.args[1]);
      if (g.predicate == "cons")
        return term_bound(g.args[2]) ||
               (term_bound(g.args[0]) && term_bound(g.args[1]));
      if (std::count(aux_names_.begin(), aux_names_.end(), g.predicate))
        return term_bound(g.args[1]);
      return true;
    };
    for (std::size_t step = 0; step < goals.size(); ++step) {
      std::size_t pick = goals.size();
      for (std::size_t i = 0; i < goals.size(); ++i) {
        if (done[i]) continue;
        if (executable(goals[i])) {
          pick = i;
          break;
        }
      }
      if (pick == goals.size())
        for (std::size_t i = 0; i < goals.size(); ++i)
          if (!done[i]) {
            pick = i;
            break;
          }
      done[pick] = true;
      mark_bound(goals[pick], bound);
      out.push_back(std::move(goals[pick]));
    }
    return out;
  }

  bool is_bound(const PlTerm& t, const std::set<int>& bound) {
    if (t.is_var()) return bound.count(vars_.find(t.as_var().id)) > 0;
    if (t.is_list()) {
      for (const auto& e : t.as_list().elements)
        if (!is_bound(e, bound)) return false;
      if (t.as_list().tail) return is_bound(*t.as_list().tail, bound);
    }
    return true;
  }

  void mark_bound(const PlGoal& g, std::set<int>& bound) {
    for (const auto& a : g.args) mark_bound_term(a, bound);
  }

  void mark_bound_term(const PlTerm& t, std::set<int>& bound) {
    if (t.is_var()) {
      bound.insert(vars_.find(t.as_var().id));
    } else if (t.is_list()) {
      for (const auto& e : t.as_list().elements) mark_bound_term(e, bound);
      if (t.as_list().tail) mark_bound_term(*t.as_list().tail, bound);
    }
  }

  void canonicalize_clause(PlClause& clause) {
    canonicalize_goal(clause.head);
    for (auto& g : clause.body) canonicalize_goal(g);
  }

  void canonicalize_goal(PlGoal& goal) {
    for (auto& a : goal.args) canonicalize_term(a);
  }

  void canonicalize_term(PlTerm& t) {
    if (t.is_var()) {
      t = pl_var(vars_.find(t.as_var().id));
    } else if (t.is_list()) {
      auto& l = std::get<PlList>(t.node());
      for (auto& e : l.elements) canonicalize_term(e);
      if (l.tail) canonicalize_term(*l.tail);
    }
  }

  const Program& program_;
  const Definition& def_;
  VarClasses vars_;
  std::vector<PlClause> aux_clauses_;
  std::vector<std::string> aux_names_;
  std::map<const Expr*, std::string> fold_names_;
  int fold_counter_ = 0;
};

}  // namespace detail

inline CodegenOutput compile_definition(const Program& program,
                                        const Definition& def) {
  return detail::DefinitionCompiler(program, def).run();
}

inline CodegenOutput compile_program(const Program& program) {
  CodegenOutput out;
  for (const auto& def : program.definitions) {
    CodegenOutput one = compile_definition(program, def);
    for (auto& clause : one.clauses) out.clauses.push_back(std::move(clause));
    for (auto& name : one.auxiliary_names)
      out.auxiliary_names.push_back(std::move(name));
  }
  return out;
}

namespace detail {

// Deterministic clause-local naming: multi-occurrence variables become
// V1, V2, ... in first-occurrence order, single-use ones render as `_`.
class ClauseNamer {
 public:
  explicit ClauseNamer(const PlClause& clause) {
    count_goal(clause.head);
    for (const auto& g : clause.body) count_goal(g);
  }

  std::string name(int id) {
    if (counts_[id] <= 1) return "_";
    auto it = names_.find(id);
    if (it != names_.end()) return it->second;
    std::string n = "V" + std::to_string(++next_);
    names_.emplace(id, n);
    return n;
  }

 private:
  void count_goal(const PlGoal& g) {
    for (const auto& a : g.args) count_term(a);
  }

  void count_term(const PlTerm& t) {
    if (t.is_var()) {
      ++counts_[t.as_var().id];
    } else if (t.is_list()) {
      for (const auto& e : t.as_list().elements) count_term(e);
      if (t.as_list().tail) count_term(*t.as_list().tail);
    }
  }

  std::map<int, int> counts_;
  std::map<int, std::string> names_;
  int next_ = 0;
};

inline std::string render_term(const PlTerm& t, ClauseNamer& namer) {
  if (t.is_var()) return namer.name(t.as_var().id);
  if (t.is_atom()) return t.as_atom().name;
  if (t.is_int()) return std::to_string(t.as_int().value);
  std::string out = "[";
  const auto& l = t.as_list();
  for (std::size_t i = 0; i < l.elements.size(); ++i) {
    if (i) out += ", ";
    out += render_term(l.elements[i], namer);
  }
  if (l.tail) out += "|" + render_term(*l.tail, namer);
  return out + "]";
}

inline std::string render_goal(const PlGoal& g, ClauseNamer& namer) {
  if (g.predicate == "=" || g.predicate == "\\=")
    return render_term(g.args[0], namer) + " " + g.predicate + " " +
           render_term(g.args[1], namer);
  std::string out = g.predicate + "(";
  for (std::size_t i = 0; i < g.args.size(); ++i) {
    if (i) out += ", ";
    out += render_term(g.args[i], namer);
  }
  return out + ")";
}

}  // namespace detail

inline std::string render_clause(const PlClause& clause) {
  detail::ClauseNamer namer(clause);
  std::string out = detail::render_goal(clause.head, namer);
  if (!clause.body.empty()) {
    out += " :- ";
    for (std::size_t i = 0; i < clause.body.size(); ++i) {
      if (i) out += ", ";
      out += detail::render_goal(clause.body[i], namer);
    }
  }
  return out + ".";
}

inline const char* prolog_prelude_text() { return "cons(U, V, [U|V]).\n"; }

inline std::string emit_prolog_text(const CodegenOutput& output) {
  std::string text = prolog_prelude_text();
  for (const auto& clause : output.clauses)
    text += render_clause(clause) + "\n";
  return text;
}

// Whole-program emission for .pl files: prelude, each definition under a
// comment naming it, then the fact base.
inline std::string emit_program_text(const Program& program) {
  std::string text = prolog_prelude_text();
  for (const auto& def : program.definitions) {
    text += "% " + def.name + "\n";
    CodegenOutput out = compile_definition(program, def);
    for (const auto& clause : out.clauses)
      text += render_clause(clause) + "\n";
  }
  for (const auto& [name, rel] : program.facts) {
    text += "% " + name + "\n";
    for (const auto& tuple : rel.tuples) {
      text += name + "(";
      for (std::size_t i = 0; i < tuple.size(); ++i) {
        if (i) text += ", ";
        text += term_to_string(tuple[i]);
      }
      text += ").\n";
    }
  }
  return text;
}

namespace detail {

inline bool alpha_equal_terms(const PlTerm& a, const PlTerm& b,
                              std::map<int, int>& ab, std::map<int, int>& ba) {
  if (a.node().index() != b.node().index()) return false;
  if (a.is_var()) {
    int x = a.as_var().id;
    int y = b.as_var().id;
    auto f = ab.find(x);
    auto g = ba.find(y);
    if (f == ab.end() && g == ba.end()) {
      ab.emplace(x, y);
      ba.emplace(y, x);
      return true;
    }
    return f != ab.end() && g != ba.end() && f->second == y && g->second == x;
  }
  if (a.is_atom()) return a.as_atom().name == b.as_atom().name;
  if (a.is_int()) return a.as_int().value == b.as_int().value;
  const auto& la = a.as_list();
  const auto& lb = b.as_list();
  if (la.elements.size() != lb.elements.size()) return false;
  if ((la.tail == nullptr) != (lb.tail == nullptr)) return false;
  for (std::size_t i = 0; i < la.elements.size(); ++i)
    if (!alpha_equal_terms(la.elements[i], lb.elements[i], ab, ba))
      return false;
  if (la.tail && !alpha_equal_terms(*la.tail, *lb.tail, ab, ba)) return false;
  return true;
}

inline bool alpha_equal_goals(const PlGoal& a, const PlGoal& b,
                              std::map<int, int>& ab, std::map<int, int>& ba) {
  if (a.predicate != b.predicate || a.args.size() != b.args.size())
    return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!alpha_equal_terms(a.args[i], b.args[i], ab, ba)) return false;
  return true;
}

}  // namespace detail

// Equality up to a variable bijection; goal order and structure must match.
inline bool alpha_equivalent(const PlClause& a, const PlClause& b) {
  std::map<int, int> ab, ba;
  if (!detail::alpha_equal_goals(a.head, b.head, ab, ba)) return false;
  if (a.body.size() != b.body.size()) return false;
  for (std::size_t i = 0; i < a.body.size(); ++i)
    if (!detail::alpha_equal_goals(a.body[i], b.body[i], ab, ba)) return false;
  return true;
}

inline bool alpha_equivalent(const std::vector<PlClause>& a,
                             const std::vector<PlClause>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!alpha_equivalent(a[i], b[i])) return false;
  return true;
}

inline PlTerm term_to_pl(const Term& t) {
  if (t.is_atom()) return pl_atom(t.as_atom().name);
  if (t.is_int()) return pl_int(t.as_int().value);
  if (t.is_list()) {
    std::vector<PlTerm> elements;
    for (const auto& e : t.as_list().elements) elements.push_back(term_to_pl(e));
    return pl_list(std::move(elements));
  }
  throw Error(ErrorKind::Syntax, "variables have no ground translation");
}

inline PlClause prelude_clause() {
  PlClause c;
  c.head.predicate = "cons";
  c.head.args = {pl_var(0), pl_var(1),
                 pl_partial_list({pl_var(0)}, pl_var(1))};
  return c;
}

// The generated clauses plus the prelude and the fact base, ready for the
// reference executor.
inline std::vector<PlClause> sld_database(const Program& program) {
  std::vector<PlClause> db;
  db.push_back(prelude_clause());
  CodegenOutput out = compile_program(program);
  for (auto& clause : out.clauses) db.push_back(std::move(clause));
  for (const auto& [name, rel] : program.facts) {
    for (const auto& tuple : rel.tuples) {
      PlClause c;
      c.head.predicate = name;
      for (const auto& t : tuple) c.head.args.push_back(term_to_pl(t));
      db.push_back(std::move(c));
    }
  }
  return db;
}

struct SldOptions {
  long long max_steps = 1000000;
};

// Plain SLD resolution over generated clauses: left-to-right goal selection,
// clause order as given, depth-first with renaming apart. Serves as the
// second route when checking that compiled programs answer like the
// evaluator does.
class SldMachine {
 public:
  explicit SldMachine(std::vector<PlClause> database) {
    for (auto& clause : database) {
      int high = 0;
      max_var_id(clause, high);
      widest_ = std::max(widest_, high + 1);
      clauses_[key_of(clause.head)].push_back(std::move(clause));
    }
  }

  std::set<Substitution> solve(const Query& query,
                               const SldOptions& options = {}) {
    steps_ = 0;
    max_steps_ = options.max_steps;
    next_id_ = 0;
    std::map<std::string, int> ids;
    PlGoal goal;
    goal.predicate = query.predicate;
    for (const auto& arg : query.arguments) goal.args.push_back(to_pl(arg, ids));

    std::vector<std::pair<std::string, int>> answer_vars;
    for (const auto& name : query_variables(query))
      answer_vars.emplace_back(name, ids.at(name));

    std::set<Substitution> answers;
    run({goal}, {}, answer_vars, answers);
    return answers;
  }

 private:
  using PlBindings = std::map<int, PlTerm>;

  static std::string key_of(const PlGoal& g) {
    return g.predicate + "/" + std::to_string(g.args.size());
  }

  static void max_var_id(const PlTerm& t, int& high) {
    if (t.is_var()) {
      high = std::max(high, t.as_var().id);
    } else if (t.is_list()) {
      for (const auto& e : t.as_list().elements) max_var_id(e, high);
      if (t.as_list().tail) max_var_id(*t.as_list().tail, high);
    }
  }

  static void max_var_id(const PlClause& c, int& high) {
    for (const auto& a : c.head.args) max_var_id(a, high);
    for (const auto& g : c.body)
      for (const auto& a : g.args) max_var_id(a, high);
  }

  PlTerm to_pl(const Term& t, std::map<std::string, int>& ids) {
    if (t.is_var()) {
      auto it = ids.find(t.as_var().name);
      if (it == ids.end()) it = ids.emplace(t.as_var().name, next_id_++).first;
      return pl_var(it->second);
    }
    if (t.is_list()) {
      std::vector<PlTerm> elements;
      for (const auto& e : t.as_list().elements)
        elements.push_back(to_pl(e, ids));
      return pl_list(std::move(elements));
    }
    return term_to_pl(t);
  }

  PlTerm rename(const PlTerm& t, int offset) const {
    if (t.is_var()) return pl_var(t.as_var().id + offset);
    if (t.is_list()) {
      std::vector<PlTerm> elements;
      for (const auto& e : t.as_list().elements)
        elements.push_back(rename(e, offset));
      if (t.as_list().tail)
        return pl_partial_list(std::move(elements),
                               rename(*t.as_list().tail, offset));
      return pl_list(std::move(elements));
    }
    return t;
  }

  PlClause rename_apart(const PlClause& clause) {
    int offset = next_id_;
    next_id_ += widest_;
    PlClause fresh;
    fresh.head.predicate = clause.head.predicate;
    for (const auto& a : clause.head.args)
      fresh.head.args.push_back(rename(a, offset));
    for (const auto& g : clause.body) {
      PlGoal goal;
      goal.predicate = g.predicate;
      for (const auto& a : g.args) goal.args.push_back(rename(a, offset));
      fresh.body.push_back(std::move(goal));
    }
    return fresh;
  }

  static PlTerm walk(PlTerm t, const PlBindings& b) {
    while (t.is_var()) {
      auto it = b.find(t.as_var().id);
      if (it == b.end()) break;
      t = it->second;
    }
    return t;
  }

  static bool occurs(int id, const PlTerm& t0, const PlBindings& b) {
    PlTerm t = walk(t0, b);
    if (t.is_var()) return t.as_var().id == id;
    if (t.is_list()) {
      for (const auto& e : t.as_list().elements)
        if (occurs(id, e, b)) return true;
      if (t.as_list().tail) return occurs(id, *t.as_list().tail, b);
    }
    return false;
  }

  // Everything past the first element; a lone tail stands for itself.
  static PlTerm rest_of(const PlList& l) {
    if (l.elements.size() > 1)
      return PlTerm(PlList{
          std::vector<PlTerm>(l.elements.begin() + 1, l.elements.end()),
          l.tail});
    if (l.tail) return *l.tail;
    return pl_list({});
  }

  static bool unify(const PlTerm& a0, const PlTerm& b0, PlBindings& bi) {
    PlTerm a = walk(a0, bi);
    PlTerm b = walk(b0, bi);
    if (a.is_var() && b.is_var() && a.as_var().id == b.as_var().id) return true;
    if (a.is_var()) {
      if (occurs(a.as_var().id, b, bi)) return false;
      bi[a.as_var().id] = b;
      return true;
    }
    if (b.is_var()) {
      if (occurs(b.as_var().id, a, bi)) return false;
      bi[b.as_var().id] = a;
      return true;
    }
    if (a.node().index() != b.node().index()) return false;
    if (a.is_atom()) return a.as_atom().name == b.as_atom().name;
    if (a.is_int()) return a.as_int().value == b.as_int().value;
    const auto& la = a.as_list();
    const auto& lb = b.as_list();
    if (la.elements.empty() && lb.elements.empty()) return true;
    if (la.elements.empty() || lb.elements.empty()) return false;
    if (!unify(la.elements[0], lb.elements[0], bi)) return false;
    return unify(rest_of(la), rest_of(lb), bi);
  }

  static PlTerm resolve(const PlTerm& t0, const PlBindings& b) {
    PlTerm t = walk(t0, b);
    if (!t.is_list()) return t;
    const auto& l = t.as_list();
    std::vector<PlTerm> elements;
    for (const auto& e : l.elements) elements.push_back(resolve(e, b));
    if (!l.tail) return pl_list(std::move(elements));
    PlTerm tail = resolve(*l.tail, b);
    if (tail.is_list()) {
      const auto& tl = tail.as_list();
      for (const auto& e : tl.elements) elements.push_back(e);
      if (tl.tail)
        return PlTerm(PlList{std::move(elements), tl.tail});
      return pl_list(std::move(elements));
    }
    return pl_partial_list(std::move(elements), std::move(tail));
  }

  static Term pl_to_term(const PlTerm& t) {
    if (t.is_atom()) return atom(t.as_atom().name);
    if (t.is_int()) return integer(t.as_int().value);
    if (t.is_list() && !t.as_list().tail) {
      std::vector<Term> elements;
      for (const auto& e : t.as_list().elements)
        elements.push_back(pl_to_term(e));
      return list(std::move(elements));
    }
    throw Error(ErrorKind::UnsafeQuery,
                "an answer from the reference executor is not ground");
  }

  void run(const std::vector<PlGoal>& goals, const PlBindings& b,
           const std::vector<std::pair<std::string, int>>& answer_vars,
           std::set<Substitution>& answers) {
    if (goals.empty()) {
      Substitution answer;
      for (const auto& [name, id] : answer_vars)
        answer[name] = pl_to_term(resolve(pl_var(id), b));
      answers.insert(std::move(answer));
      return;
    }
    if (++steps_ > max_steps_)
      throw Error(ErrorKind::SolutionLimitExceeded,
                  "step budget exceeded in the reference executor");

    const PlGoal& g = goals.front();
    std::vector<PlGoal> rest(goals.begin() + 1, goals.end());

    if (g.predicate == "=") {
      PlBindings b2 = b;
      if (unify(g.args[0], g.args[1], b2)) run(rest, b2, answer_vars, answers);
      return;
    }
    if (g.predicate == "\\=") {
      PlBindings b2 = b;
      if (!unify(g.args[0], g.args[1], b2)) run(rest, b, answer_vars, answers);
      return;
    }

    auto it = clauses_.find(key_of(g));
    if (it == clauses_.end()) return;
    for (const auto& clause : it->second) {
      PlClause fresh = rename_apart(clause);
      PlBindings b2 = b;
      bool ok = true;
      for (std::size_t i = 0; i < g.args.size(); ++i)
        if (!unify(g.args[i], fresh.head.args[i], b2)) {
          ok = false;
          break;
        }
      if (!ok) continue;
      std::vector<PlGoal> next = std::move(fresh.body);
      next.insert(next.end(), rest.begin(), rest.end());
      run(next, b2, answer_vars, answers);
    }
  }

  std::map<std::string, std::vector<PlClause>> clauses_;
  int widest_ = 1;
  int next_id_ = 0;
  long long steps_ = 0;
  long long max_steps_ = 1000000;
};

inline std::set<Substitution> sld_solve(const Program& program,
                                        const Query& query,
                                        const SldOptions& options = {}) {
  SldMachine machine(sld_database(program));
  return machine.solve(query, options);
}

}  // namespace combilog
