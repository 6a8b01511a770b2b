#pragma once

#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "combilog/ast.hpp"
#include "combilog/error.hpp"

namespace combilog {

namespace detail {

class ArityChecker {
 public:
  explicit ArityChecker(const Program& program) : program_(program) {}

  int arity_of(const ExprPtr& expr) {
    if (const auto* p = std::get_if<PredRef>(&expr->node))
      return name_arity(p->name, expr->span);

    if (const auto* m = std::get_if<MakeOp>(&expr->node)) {
      if (m->indices.empty())
        throw Error(ErrorKind::Syntax, "make needs at least one index",
                    expr->span);
      for (int idx : m->indices)
        if (idx < 1)
          throw Error(ErrorKind::ArityMismatch,
                      "make indices are 1-based, got " + std::to_string(idx),
                      expr->span);
      arity_of(m->operand);
      return static_cast<int>(m->indices.size());
    }

    if (const auto* c = std::get_if<AndOp>(&expr->node))
      return common_arity(c->operands, "and", expr->span);
    if (const auto* d = std::get_if<OrOp>(&expr->node))
      return common_arity(d->operands, "or", expr->span);

    const ExprPtr* step = nullptr;
    const ExprPtr* base = nullptr;
    const char* which = nullptr;
    if (const auto* fr = std::get_if<FoldrOp>(&expr->node)) {
      step = &fr->step;
      base = &fr->base;
      which = "foldr";
    } else {
      const auto& fl = std::get<FoldlOp>(expr->node);
      step = &fl.step;
      base = &fl.base;
      which = "foldl";
    }
    int step_arity = arity_of(*step);
    if (step_arity != 3)
      throw Error(ErrorKind::ArityMismatch,
                  std::string(which) + " step must be ternary, got arity " +
                      std::to_string(step_arity),
                  (*step)->span);
    int base_arity = arity_of(*base);
    if (base_arity != 2)
      throw Error(ErrorKind::ArityMismatch,
                  std::string(which) + " base must be binary, got arity " +
                      std::to_string(base_arity),
                  (*base)->span);
    return 3;
  }

  int name_arity(const std::string& name, SourceSpan span) {
    if (auto b = builtin_arity(name)) return *b;
    auto fact = program_.facts.find(name);
    if (fact != program_.facts.end()) return fact->second.arity;
    const Definition* def = program_.find_definition(name);
    if (def == nullptr)
      throw Error(ErrorKind::UnknownPredicate, "unknown predicate " + name,
                  span);
    auto memo = arity_memo_.find(name);
    if (memo != arity_memo_.end()) return memo->second;
    if (!in_progress_.insert(name).second)
      throw Error(ErrorKind::RecursiveDefinition,
                  "definition " + name +
                      " refers to itself; use foldr or foldl for recursion",
                  span);
    int arity = arity_of(def->body);
    in_progress_.erase(name);
    arity_memo_[name] = arity;
    return arity;
  }

 private:
  int common_arity(const std::vector<ExprPtr>& operands, const char* what,
                   SourceSpan span) {
    if (operands.size() < 2)
      throw Error(ErrorKind::Syntax,
                  std::string(what) + " needs at least two operands", span);
    int arity = arity_of(operands[0]);
    for (std::size_t i = 1; i < operands.size(); ++i) {
      int other = arity_of(operands[i]);
      if (other != arity)
        throw Error(ErrorKind::ArityMismatch,
                    std::string(what) + " operands disagree on arity: " +
                        std::to_string(arity) + " vs " + std::to_string(other),
                    operands[i]->span);
    }
    return arity;
  }

  const Program& program_;
  std::map<std::string, int> arity_memo_;
  std::set<std::string> in_progress_;
};

}  // namespace detail

// Arity of an expression in the context of a program. Throws on unknown
// predicates, arity clashes, and recursive definitions.
inline int expr_arity(const ExprPtr& expr, const Program& program) {
  return detail::ArityChecker(program).arity_of(expr);
}

inline int predicate_arity(const std::string& name, const Program& program) {
  return detail::ArityChecker(program).name_arity(name, {});
}

// Validates a whole program, collecting one diagnostic per problem instead
// of stopping at the first. An empty result means the program is well-formed.
inline std::vector<Diagnostic> check_program(const Program& program) {
  std::vector<Diagnostic> diagnostics;

  std::set<std::string> seen;
  for (const auto& def : program.definitions) {
    if (is_builtin(def.name))
      diagnostics.push_back({ErrorKind::NameCollision,
                             "definition " + def.name + " shadows a built-in",
                             def.span});
    if (program.facts.count(def.name))
      diagnostics.push_back(
          {ErrorKind::NameCollision,
           "definition " + def.name + " collides with a fact predicate",
           def.span});
    if (!seen.insert(def.name).second)
      diagnostics.push_back({ErrorKind::NameCollision,
                             "duplicate definition of " + def.name, def.span});
  }
  for (const auto& [name, rel] : program.facts) {
    (void)rel;
    if (is_builtin(name))
      diagnostics.push_back(
          {ErrorKind::NameCollision,
           "fact predicate " + name + " shadows a built-in", SourceSpan{}});
  }

  for (const auto& def : program.definitions) {
    try {
      detail::ArityChecker checker(program);
      checker.arity_of(def.body);
    } catch (const Error& e) {
      diagnostics.push_back(e.to_diagnostic());
    }
  }
  return diagnostics;
}

}  // namespace combilog
