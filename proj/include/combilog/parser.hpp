#pragma once

#include <cctype>
#include <string>
#include <vector>

#include "combilog/ast.hpp"
#include "combilog/check.hpp"
#include "combilog/error.hpp"
#include "combilog/term.hpp"

namespace combilog {

// A query against a program: `?- head([a,b], X).` Arguments may contain
// variables; programs and facts never do.
struct Query {
  std::string predicate;
  std::vector<Term> arguments;
  SourceSpan span;
};

struct ParseResult {
  Program program;
  std::vector<Diagnostic> diagnostics;  // from check_program and fact checks
};

namespace detail {

enum class TokenKind {
  Name,
  VarName,
  Int,
  Arrow,       // <-
  QueryArrow,  // ?-
  LParen,
  RParen,
  LBracket,
  RBracket,
  Comma,
  Period,
  Underscore,
  End,
};

struct Token {
  TokenKind kind;
  std::string text;
  long long value = 0;  // Int only
  SourceSpan span;
};

inline const char* token_kind_name(TokenKind k) {
  switch (k) {
    case TokenKind::Name: return "name";
    case TokenKind::VarName: return "variable";
    case TokenKind::Int: return "integer";
    case TokenKind::Arrow: return "'<-'";
    case TokenKind::QueryArrow: return "'?-'";
    case TokenKind::LParen: return "'('";
    case TokenKind::RParen: return "')'";
    case TokenKind::LBracket: return "'['";
    case TokenKind::RBracket: return "']'";
    case TokenKind::Comma: return "','";
    case TokenKind::Period: return "'.'";
    case TokenKind::Underscore: return "'_'";
    case TokenKind::End: return "end of input";
  }
  return "?";
}

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> tokens;
    while (true) {
      skip_trivia();
      SourceSpan span{line_, column_, 1};
      if (pos_ >= text_.size()) {
        tokens.push_back({TokenKind::End, "", 0, span});
        return tokens;
      }
      char c = text_[pos_];
      if (std::islower(static_cast<unsigned char>(c))) {
        tokens.push_back(lex_word(TokenKind::Name, span));
      } else if (std::isupper(static_cast<unsigned char>(c))) {
        tokens.push_back(lex_word(TokenKind::VarName, span));
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 (c == '-' && pos_ + 1 < text_.size() &&
                  std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
        tokens.push_back(lex_int(span));
      } else if (c == '_') {
        advance();
        if (pos_ < text_.size() && is_word_char(text_[pos_]))
          throw Error(ErrorKind::Syntax,
                      "'_' cannot start an identifier", span);
        tokens.push_back({TokenKind::Underscore, "_", 0, span});
      } else if (c == '<' && pos_ + 1 < text_.size() &&
                 text_[pos_ + 1] == '-') {
        advance();
        advance();
        span.length = 2;
        tokens.push_back({TokenKind::Arrow, "<-", 0, span});
      } else if (c == '?' && pos_ + 1 < text_.size() &&
                 text_[pos_ + 1] == '-') {
        advance();
        advance();
        span.length = 2;
        tokens.push_back({TokenKind::QueryArrow, "?-", 0, span});
      } else {
        TokenKind kind;
        switch (c) {
          case '(': kind = TokenKind::LParen; break;
          case ')': kind = TokenKind::RParen; break;
          case '[': kind = TokenKind::LBracket; break;
          case ']': kind = TokenKind::RBracket; break;
          case ',': kind = TokenKind::Comma; break;
          case '.': kind = TokenKind::Period; break;
          default:
            throw Error(ErrorKind::Syntax,
                        std::string("unexpected character '") + c + "'", span);
        }
        advance();
        tokens.push_back({kind, std::string(1, c), 0, span});
      }
    }
  }

 private:
  static bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_trivia() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '%') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else {
        return;
      }
    }
  }

  Token lex_word(TokenKind kind, SourceSpan span) {
    std::string word;
    while (pos_ < text_.size() && is_word_char(text_[pos_])) {
      word.push_back(text_[pos_]);
      advance();
    }
    span.length = static_cast<int>(word.size());
    return {kind, word, 0, span};
  }

  Token lex_int(SourceSpan span) {
    std::string digits;
    if (text_[pos_] == '-') {
      digits.push_back('-');
      advance();
    }
    while (pos_ < text_.size() &&
           std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      digits.push_back(text_[pos_]);
      advance();
    }
    span.length = static_cast<int>(digits.size());
    long long value = 0;
    try {
      value = std::stoll(digits);
    } catch (const std::out_of_range&) {
      throw Error(ErrorKind::Syntax, "integer literal out of range", span);
    }
    return {TokenKind::Int, digits, value, span};
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

inline bool is_operator_word(const std::string& w) {
  return w == "make" || w == "and" || w == "or" || w == "foldr" ||
         w == "foldl";
}

class Parser {
 public:
  explicit Parser(const std::string& text) : tokens_(Lexer(text).run()) {}

  ParseResult parse_program() {
    ParseResult result;
    while (!at(TokenKind::End)) parse_statement(result);
    auto checks = check_program(result.program);
    result.diagnostics.insert(result.diagnostics.end(), checks.begin(),
                              checks.end());
    return result;
  }

  Query parse_query() {
    expect(TokenKind::QueryArrow, "a query starting with '?-'");
    Token name = expect(TokenKind::Name, "a predicate name");
    expect(TokenKind::LParen, "'('");
    std::vector<Term> args;
    args.push_back(parse_term(true));
    while (at(TokenKind::Comma)) {
      next();
      args.push_back(parse_term(true));
    }
    expect(TokenKind::RParen, "')'");
    expect(TokenKind::Period, "'.'");
    expect(TokenKind::End, "end of input");
    return Query{name.text, std::move(args), name.span};
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  bool at(TokenKind k) const { return peek().kind == k; }
  Token next() { return tokens_[pos_++]; }

  Token expect(TokenKind kind, const std::string& what) {
    if (!at(kind))
      throw Error(ErrorKind::Syntax,
                  "expected " + what + ", got " +
                      token_kind_name(peek().kind),
                  peek().span);
    return next();
  }

  void parse_statement(ParseResult& result) {
    Token name = expect(TokenKind::Name, "a definition or fact");
    if (is_operator_word(name.text))
      throw Error(ErrorKind::Syntax,
                  "'" + name.text + "' is reserved and cannot be defined",
                  name.span);
    if (at(TokenKind::Arrow)) {
      next();
      ExprPtr body = parse_expr();
      expect(TokenKind::Period, "'.'");
      result.program.add_definition({name.text, std::move(body), name.span});
      return;
    }
    expect(TokenKind::LParen, "'<-' or '('");
    Tuple tuple;
    tuple.push_back(parse_term(false));
    while (at(TokenKind::Comma)) {
      next();
      tuple.push_back(parse_term(false));
    }
    expect(TokenKind::RParen, "')'");
    expect(TokenKind::Period, "'.'");
    try {
      result.program.add_fact(name.text, std::move(tuple));
    } catch (const Error& e) {
      Diagnostic d = e.to_diagnostic();
      d.span = name.span;
      result.diagnostics.push_back(d);
    }
  }

  ExprPtr parse_expr() {
    Token name = expect(TokenKind::Name, "an expression");
    if (name.text == "make") {
      expect(TokenKind::LBracket, "'[' after make");
      IndexList indices;
      indices.push_back(parse_index());
      while (at(TokenKind::Comma)) {
        next();
        indices.push_back(parse_index());
      }
      expect(TokenKind::RBracket, "']'");
      expect(TokenKind::LParen, "'('");
      ExprPtr operand = parse_expr();
      expect(TokenKind::RParen, "')'");
      return make(std::move(indices), std::move(operand), name.span);
    }
    if (name.text == "and" || name.text == "or") {
      expect(TokenKind::LParen, "'(' after " + name.text);
      std::vector<ExprPtr> operands;
      operands.push_back(parse_expr());
      while (at(TokenKind::Comma)) {
        next();
        operands.push_back(parse_expr());
      }
      expect(TokenKind::RParen, "')'");
      if (operands.size() < 2)
        throw Error(ErrorKind::Syntax,
                    name.text + " needs at least two operands", name.span);
      return name.text == "and" ? conj(std::move(operands), name.span)
                                : disj(std::move(operands), name.span);
    }
    if (name.text == "foldr" || name.text == "foldl") {
      expect(TokenKind::LParen, "'(' after " + name.text);
      ExprPtr step = parse_expr();
      expect(TokenKind::Comma, "','");
      ExprPtr base = parse_expr();
      expect(TokenKind::RParen, "')'");
      return name.text == "foldr"
                 ? combilog::foldr(std::move(step), std::move(base), name.span)
                 : combilog::foldl(std::move(step), std::move(base),
                                   name.span);
    }
    return pred(name.text, name.span);
  }

  int parse_index() {
    Token t = expect(TokenKind::Int, "an argument index");
    if (t.value < 1 || t.value > 64)
      throw Error(ErrorKind::Syntax,
                  "make index must be between 1 and 64, got " + t.text,
                  t.span);
    return static_cast<int>(t.value);
  }

  // Terms in facts must be ground; queries also allow variables and `_`.
  Term parse_term(bool allow_vars) {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::Name:
        next();
        return atom(t.text);
      case TokenKind::Int:
        next();
        return integer(t.value);
      case TokenKind::VarName:
        if (!allow_vars)
          throw Error(ErrorKind::Syntax,
                      "facts must be ground; variable " + t.text +
                          " is not allowed here",
                      t.span);
        next();
        return var(t.text);
      case TokenKind::Underscore: {
        if (!allow_vars)
          throw Error(ErrorKind::Syntax,
                      "facts must be ground; '_' is not allowed here", t.span);
        next();
        return var("_" + std::to_string(++anon_counter_));
      }
      case TokenKind::LBracket: {
        next();
        std::vector<Term> elements;
        if (!at(TokenKind::RBracket)) {
          elements.push_back(parse_term(allow_vars));
          while (at(TokenKind::Comma)) {
            next();
            elements.push_back(parse_term(allow_vars));
          }
        }
        expect(TokenKind::RBracket, "']'");
        return list(std::move(elements));
      }
      default:
        throw Error(ErrorKind::Syntax,
                    std::string("expected a term, got ") +
                        token_kind_name(t.kind),
                    t.span);
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  int anon_counter_ = 0;
};

}  // namespace detail

// Parses a whole program. Syntax errors throw; semantic problems (unknown
// predicates, arity clashes, collisions) come back as diagnostics so a file
// with several mistakes reports them all.
inline ParseResult parse_program(const std::string& text) {
  return detail::Parser(text).parse_program();
}

// Parses `?- name(args).` and validates the predicate against the program.
// Each `_` becomes a fresh variable that answers do not report.
inline Query parse_query(const std::string& text, const Program& program) {
  Query query = detail::Parser(text).parse_query();
  int arity = 0;
  try {
    arity = predicate_arity(query.predicate, program);
  } catch (const Error& e) {
    throw Error(e.kind(), e.to_diagnostic().message, query.span);
  }
  if (arity != static_cast<int>(query.arguments.size()))
    throw Error(ErrorKind::ArityMismatch,
                query.predicate + " expects " + std::to_string(arity) +
                    " arguments, got " +
                    std::to_string(query.arguments.size()),
                query.span);
  return query;
}

}  // namespace combilog
