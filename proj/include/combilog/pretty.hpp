#pragma once

#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "combilog/ast.hpp"
#include "combilog/term.hpp"

namespace combilog {

namespace detail {

inline void print_expr(std::ostream& os, const ExprPtr& expr);

// Nested conjunctions print as one n-ary and(...); same for or. Printing a
// tree and reparsing therefore yields the normalized tree.
inline void print_operands(std::ostream& os, const std::vector<ExprPtr>& ops,
                           bool is_and, bool& first) {
  for (const auto& op : ops) {
    bool same_kind = is_and ? std::holds_alternative<AndOp>(op->node)
                            : std::holds_alternative<OrOp>(op->node);
    if (same_kind) {
      const auto& inner = is_and ? std::get<AndOp>(op->node).operands
                                 : std::get<OrOp>(op->node).operands;
      print_operands(os, inner, is_and, first);
      continue;
    }
    if (!first) os << ", ";
    first = false;
    print_expr(os, op);
  }
}

inline void print_expr(std::ostream& os, const ExprPtr& expr) {
  if (const auto* p = std::get_if<PredRef>(&expr->node)) {
    os << p->name;
  } else if (const auto* m = std::get_if<MakeOp>(&expr->node)) {
    os << "make[";
    for (std::size_t i = 0; i < m->indices.size(); ++i) {
      if (i) os << ",";
      os << m->indices[i];
    }
    os << "](";
    print_expr(os, m->operand);
    os << ")";
  } else if (const auto* c = std::get_if<AndOp>(&expr->node)) {
    os << "and(";
    bool first = true;
    print_operands(os, c->operands, true, first);
    os << ")";
  } else if (const auto* d = std::get_if<OrOp>(&expr->node)) {
    os << "or(";
    bool first = true;
    print_operands(os, d->operands, false, first);
    os << ")";
  } else if (const auto* fr = std::get_if<FoldrOp>(&expr->node)) {
    os << "foldr(";
    print_expr(os, fr->step);
    os << ", ";
    print_expr(os, fr->base);
    os << ")";
  } else {
    const auto& fl = std::get<FoldlOp>(expr->node);
    os << "foldl(";
    print_expr(os, fl.step);
    os << ", ";
    print_expr(os, fl.base);
    os << ")";
  }
}

}  // namespace detail

inline std::string pretty_print(const ExprPtr& expr) {
  std::ostringstream os;
  detail::print_expr(os, expr);
  return os.str();
}

// Definitions in source order, then the fact base grouped by predicate name.
inline std::string pretty_print(const Program& program) {
  std::ostringstream os;
  for (const auto& def : program.definitions)
    os << def.name << " <- " << pretty_print(def.body) << ".\n";
  if (!program.definitions.empty() && !program.facts.empty()) os << "\n";
  for (const auto& [name, rel] : program.facts)
    for (const auto& tuple : rel.tuples)
      os << name << tuple_to_string(tuple) << ".\n";
  return os.str();
}

}  // namespace combilog
