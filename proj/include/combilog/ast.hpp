#pragma once

#include <initializer_list>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "combilog/error.hpp"
#include "combilog/term.hpp"

namespace combilog {

// Combilog expressions are variable-free: predicates are combined with
// operators instead of sharing named variables. `make` is the projection
// operator; its 1-based index list may permute, replicate, drop, or
// introduce argument positions of the operand.
using IndexList = std::vector<int>;

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct PredRef {
  std::string name;
};

struct MakeOp {
  IndexList indices;
  ExprPtr operand;
};

struct AndOp {
  std::vector<ExprPtr> operands;  // length >= 2, equal arity
};

struct OrOp {
  std::vector<ExprPtr> operands;  // length >= 2, equal arity
};

struct FoldrOp {
  ExprPtr step;  // ternary
  ExprPtr base;  // binary
};

struct FoldlOp {
  ExprPtr step;
  ExprPtr base;
};

struct Expr {
  std::variant<PredRef, MakeOp, AndOp, OrOp, FoldrOp, FoldlOp> node;
  SourceSpan span;
};

inline ExprPtr pred(std::string name, SourceSpan span = {}) {
  return std::make_shared<Expr>(Expr{PredRef{std::move(name)}, span});
}

inline ExprPtr make(IndexList indices, ExprPtr operand, SourceSpan span = {}) {
  return std::make_shared<Expr>(
      Expr{MakeOp{std::move(indices), std::move(operand)}, span});
}

inline ExprPtr conj(std::vector<ExprPtr> operands, SourceSpan span = {}) {
  return std::make_shared<Expr>(Expr{AndOp{std::move(operands)}, span});
}

inline ExprPtr disj(std::vector<ExprPtr> operands, SourceSpan span = {}) {
  return std::make_shared<Expr>(Expr{OrOp{std::move(operands)}, span});
}

inline ExprPtr foldr(ExprPtr step, ExprPtr base, SourceSpan span = {}) {
  return std::make_shared<Expr>(
      Expr{FoldrOp{std::move(step), std::move(base)}, span});
}

inline ExprPtr foldl(ExprPtr step, ExprPtr base, SourceSpan span = {}) {
  return std::make_shared<Expr>(
      Expr{FoldlOp{std::move(step), std::move(base)}, span});
}

struct Definition {
  std::string name;
  ExprPtr body;
  SourceSpan span;
};

// The fixed built-in registry. cons pairs a head and a tail list, eq is
// identity, ineq is a groundness-requiring disequality check.
inline std::optional<int> builtin_arity(const std::string& name) {
  if (name == "cons") return 3;
  if (name == "eq") return 2;
  if (name == "ineq") return 2;
  return std::nullopt;
}

inline bool is_builtin(const std::string& name) {
  return builtin_arity(name).has_value();
}

// A program: named definitions (source order preserved), a fact base, and
// the built-ins. Definition, fact, and built-in names are pairwise disjoint;
// check_program reports violations.
struct Program {
  std::vector<Definition> definitions;
  std::map<std::string, Relation> facts;

  const Definition* find_definition(const std::string& name) const {
    for (const auto& def : definitions)
      if (def.name == name) return &def;
    return nullptr;
  }

  void add_definition(Definition def) { definitions.push_back(std::move(def)); }

  // Facts must be ground; the first tuple fixes the predicate's arity.
  void add_fact(const std::string& name, Tuple tuple) {
    auto& rel = facts[name];
    if (rel.tuples.empty()) rel.arity = static_cast<int>(tuple.size());
    if (rel.arity != static_cast<int>(tuple.size()))
      throw Error(ErrorKind::ArityMismatch,
                  "fact " + name + " has tuples of differing arity");
    for (const auto& t : tuple)
      if (!is_ground(t))
        throw Error(ErrorKind::Syntax, "facts must be ground: " + name);
    rel.tuples.insert(std::move(tuple));
  }
};

inline bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
  if (a->node.index() != b->node.index()) return false;
  if (const auto* p = std::get_if<PredRef>(&a->node))
    return p->name == std::get<PredRef>(b->node).name;
  if (const auto* m = std::get_if<MakeOp>(&a->node)) {
    const auto& n = std::get<MakeOp>(b->node);
    return m->indices == n.indices && expr_equal(m->operand, n.operand);
  }
  auto all_equal = [](const std::vector<ExprPtr>& xs,
                      const std::vector<ExprPtr>& ys) {
    if (xs.size() != ys.size()) return false;
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (!expr_equal(xs[i], ys[i])) return false;
    return true;
  };
  if (const auto* c = std::get_if<AndOp>(&a->node))
    return all_equal(c->operands, std::get<AndOp>(b->node).operands);
  if (const auto* d = std::get_if<OrOp>(&a->node))
    return all_equal(d->operands, std::get<OrOp>(b->node).operands);
  if (const auto* fr = std::get_if<FoldrOp>(&a->node)) {
    const auto& g = std::get<FoldrOp>(b->node);
    return expr_equal(fr->step, g.step) && expr_equal(fr->base, g.base);
  }
  const auto& f = std::get<FoldlOp>(a->node);
  const auto& g = std::get<FoldlOp>(b->node);
  return expr_equal(f.step, g.step) && expr_equal(f.base, g.base);
}

// Flattens conjunctions nested directly inside conjunctions (and likewise
// for disjunctions) into a single n-ary node. The parser accepts the nested
// binary form; this is the canonical shape.
inline ExprPtr normalize(const ExprPtr& expr) {
  if (std::holds_alternative<PredRef>(expr->node)) return expr;
  if (const auto* m = std::get_if<MakeOp>(&expr->node))
    return make(m->indices, normalize(m->operand), expr->span);
  if (const auto* fr = std::get_if<FoldrOp>(&expr->node))
    return foldr(normalize(fr->step), normalize(fr->base), expr->span);
  if (const auto* fl = std::get_if<FoldlOp>(&expr->node))
    return foldl(normalize(fl->step), normalize(fl->base), expr->span);

  const bool is_and = std::holds_alternative<AndOp>(expr->node);
  const auto& operands = is_and ? std::get<AndOp>(expr->node).operands
                                : std::get<OrOp>(expr->node).operands;
  std::vector<ExprPtr> flat;
  for (const auto& op : operands) {
    ExprPtr n = normalize(op);
    if (is_and && std::holds_alternative<AndOp>(n->node)) {
      for (const auto& inner : std::get<AndOp>(n->node).operands)
        flat.push_back(inner);
    } else if (!is_and && std::holds_alternative<OrOp>(n->node)) {
      for (const auto& inner : std::get<OrOp>(n->node).operands)
        flat.push_back(inner);
    } else {
      flat.push_back(n);
    }
  }
  return is_and ? conj(std::move(flat), expr->span)
                : disj(std::move(flat), expr->span);
}

inline Program normalize(const Program& program) {
  Program out;
  out.facts = program.facts;
  for (const auto& def : program.definitions)
    out.add_definition({def.name, normalize(def.body), def.span});
  return out;
}

}  // namespace combilog
