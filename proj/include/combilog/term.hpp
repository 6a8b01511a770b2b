#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace combilog {

class Term;

// First-order terms. Programs and fact bases are ground; variables occur
// only in queries and in generated clauses.
struct Atom {
  std::string name;
};

struct Int {
  std::int64_t value = 0;
};

struct Var {
  std::string name;
};

struct ListTerm {
  std::vector<Term> elements;
};

class Term {
 public:
  using Node = std::variant<Atom, Int, Var, ListTerm>;

  Term() : node_(Atom{"nil"}) {}
  Term(Atom a) : node_(std::move(a)) {}
  Term(Int i) : node_(std::move(i)) {}
  Term(Var v) : node_(std::move(v)) {}
  Term(ListTerm l) : node_(std::move(l)) {}

  const Node& node() const { return node_; }

  bool is_atom() const { return std::holds_alternative<Atom>(node_); }
  bool is_int() const { return std::holds_alternative<Int>(node_); }
  bool is_var() const { return std::holds_alternative<Var>(node_); }
  bool is_list() const { return std::holds_alternative<ListTerm>(node_); }

  const Atom& as_atom() const { return std::get<Atom>(node_); }
  const Int& as_int() const { return std::get<Int>(node_); }
  const Var& as_var() const { return std::get<Var>(node_); }
  const ListTerm& as_list() const { return std::get<ListTerm>(node_); }

 private:
  Node node_;
};

inline Term atom(std::string name) { return Term(Atom{std::move(name)}); }
inline Term integer(std::int64_t value) { return Term(Int{value}); }
inline Term var(std::string name) { return Term(Var{std::move(name)}); }
inline Term list(std::vector<Term> elements) {
  return Term(ListTerm{std::move(elements)});
}
inline Term nil() { return list({}); }

// Total order: atoms < ints < vars < lists, then by payload. Gives sets of
// terms and tuples a stable iteration order, which keeps every emitted
// artifact byte-reproducible.
inline int compare(const Term& a, const Term& b) {
  auto rank = [](const Term& t) { return static_cast<int>(t.node().index()); };
  if (rank(a) != rank(b)) return rank(a) < rank(b) ? -1 : 1;
  if (a.is_atom()) return a.as_atom().name.compare(b.as_atom().name);
  if (a.is_int()) {
    auto x = a.as_int().value, y = b.as_int().value;
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  if (a.is_var()) return a.as_var().name.compare(b.as_var().name);
  const auto& xs = a.as_list().elements;
  const auto& ys = b.as_list().elements;
  for (std::size_t i = 0; i < xs.size() && i < ys.size(); ++i) {
    if (int c = compare(xs[i], ys[i])) return c;
  }
  if (xs.size() != ys.size()) return xs.size() < ys.size() ? -1 : 1;
  return 0;
}

inline bool operator==(const Term& a, const Term& b) { return compare(a, b) == 0; }
inline bool operator!=(const Term& a, const Term& b) { return compare(a, b) != 0; }
inline bool operator<(const Term& a, const Term& b) { return compare(a, b) < 0; }

inline bool is_ground(const Term& t) {
  if (t.is_var()) return false;
  if (t.is_list()) {
    for (const auto& e : t.as_list().elements)
      if (!is_ground(e)) return false;
  }
  return true;
}

inline std::string term_to_string(const Term& t) {
  if (t.is_atom()) return t.as_atom().name;
  if (t.is_int()) return std::to_string(t.as_int().value);
  if (t.is_var()) return t.as_var().name;
  std::string out = "[";
  const auto& es = t.as_list().elements;
  for (std::size_t i = 0; i < es.size(); ++i) {
    if (i) out += ", ";
    out += term_to_string(es[i]);
  }
  out += "]";
  return out;
}

using Tuple = std::vector<Term>;

inline std::string tuple_to_string(const Tuple& tuple) {
  std::string out = "(";
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    if (i) out += ", ";
    out += term_to_string(tuple[i]);
  }
  return out + ")";
}

// A finite set of equal-arity ground tuples; the denotation of a predicate.
struct Relation {
  int arity = 0;
  std::set<Tuple> tuples;

  friend bool operator==(const Relation& a, const Relation& b) {
    return a.arity == b.arity && a.tuples == b.tuples;
  }
};

}  // namespace combilog
