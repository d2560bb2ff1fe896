#pragma once

#include <algorithm>
#include <cctype>
#include <memory>
#include <string>
#include <vector>

#include "apbu/error.hpp"

namespace apbu {

// Immutable formula over the six core constructors. Derived connectives
// (true, |, ->, E, Ehat) exist only in the concrete syntax and are expanded
// by the parser, so consumers only ever see the core shapes.
class Formula {
public:
  enum class Kind { Atom, False, Not, And, Believes, Announced };

  static Formula atom(std::string name) {
    return Formula(std::make_shared<Node>(Node{Kind::Atom, std::move(name), {}, {}}));
  }
  static Formula falsum() {
    return Formula(std::make_shared<Node>(Node{Kind::False, "", {}, {}}));
  }
  static Formula negation(Formula f) {
    return Formula(std::make_shared<Node>(Node{Kind::Not, "", std::move(f.n_), {}}));
  }
  static Formula conjunction(Formula l, Formula r) {
    return Formula(
        std::make_shared<Node>(Node{Kind::And, "", std::move(l.n_), std::move(r.n_)}));
  }
  static Formula believes(std::string agent, Formula f) {
    return Formula(
        std::make_shared<Node>(Node{Kind::Believes, std::move(agent), std::move(f.n_), {}}));
  }
  static Formula announced(Formula announcement, Formula body) {
    return Formula(std::make_shared<Node>(
        Node{Kind::Announced, "", std::move(announcement.n_), std::move(body.n_)}));
  }

  Kind kind() const { return n_->kind; }

  // Atom: the atom identifier. Believes: the agent identifier.
  const std::string& name() const { return n_->name; }

  // Not/Believes: the operand. And: left conjunct. Announced: the announcement.
  Formula left() const { return Formula(n_->a); }
  // And: right conjunct. Announced: the body.
  Formula right() const { return Formula(n_->b); }

  bool operator==(const Formula& o) const { return equal(n_.get(), o.n_.get()); }
  bool operator!=(const Formula& o) const { return !(*this == o); }

  std::string str() const {
    std::string out;
    print(*n_, out);
    return out;
  }

  int modal_depth() const { return depth(*n_); }

private:
  struct Node {
    Kind kind;
    std::string name;
    std::shared_ptr<const Node> a, b;
  };

  explicit Formula(std::shared_ptr<const Node> n) : n_(std::move(n)) {}

  static bool equal(const Node* x, const Node* y) {
    if (x == y) return true;
    if (x->kind != y->kind || x->name != y->name) return false;
    if (!!x->a != !!y->a || !!x->b != !!y->b) return false;
    if (x->a && !equal(x->a.get(), y->a.get())) return false;
    if (x->b && !equal(x->b.get(), y->b.get())) return false;
    return true;
  }

  static int depth(const Node& n) {
    switch (n.kind) {
      case Kind::Atom:
      case Kind::False:
        return 0;
      case Kind::Not:
        return depth(*n.a);
      case Kind::And:
        return std::max(depth(*n.a), depth(*n.b));
      case Kind::Believes:
        return 1 + depth(*n.a);
      case Kind::Announced:
        return 1 + std::max(depth(*n.a), depth(*n.b));
    }
    return 0;
  }

  // Canonical text. And is always parenthesized, prefix operators chain
  // without parentheses, so parse(print(f)) reconstructs f exactly.
  static void print(const Node& n, std::string& out) {
    switch (n.kind) {
      case Kind::Atom:
        out += n.name;
        return;
      case Kind::False:
        out += "false";
        return;
      case Kind::Not:
        out += '~';
        print_operand(*n.a, out);
        return;
      case Kind::And:
        out += '(';
        print(*n.a, out);
        out += " & ";
        print(*n.b, out);
        out += ')';
        return;
      case Kind::Believes:
        out += "B ";
        out += n.name;
        out += ' ';
        print(*n.a, out);
        return;
      case Kind::Announced:
        out += "[! ";
        print(*n.a, out);
        out += "] ";
        print(*n.b, out);
        return;
    }
  }

  // Negation operand: parenthesize everything that is not already atomic or
  // self-delimiting, matching the usual written form ~(B a false).
  static void print_operand(const Node& n, std::string& out) {
    if (n.kind == Kind::Atom || n.kind == Kind::False || n.kind == Kind::Not ||
        n.kind == Kind::And) {
      print(n, out);
    } else {
      out += '(';
      print(n, out);
      out += ')';
    }
  }

  std::shared_ptr<const Node> n_;
};

inline bool valid_identifier(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return true;
}

// Derived forms, expanded into the core constructors.
inline Formula f_true() { return Formula::negation(Formula::falsum()); }
inline Formula f_or(Formula l, Formula r) {
  return Formula::negation(
      Formula::conjunction(Formula::negation(std::move(l)), Formula::negation(std::move(r))));
}
inline Formula f_implies(Formula l, Formula r) {
  return Formula::negation(Formula::conjunction(std::move(l), Formula::negation(std::move(r))));
}

// E phi: conjunction of B i phi over the declared agents in lexicographic
// order, folded to the left.
inline Formula f_everyone(std::vector<std::string> agents, const Formula& f) {
  std::sort(agents.begin(), agents.end());
  Formula acc = Formula::believes(agents.front(), f);
  for (std::size_t i = 1; i < agents.size(); ++i) {
    acc = Formula::conjunction(std::move(acc), Formula::believes(agents[i], f));
  }
  return acc;
}
inline Formula f_everyone_dual(std::vector<std::string> agents, const Formula& f) {
  return Formula::negation(f_everyone(std::move(agents), Formula::negation(f)));
}

namespace detail {

class FormulaParser {
public:
  FormulaParser(const std::string& text, const std::vector<std::string>& agents,
                const std::vector<std::string>& atoms)
      : text_(text), agents_(agents), atoms_(atoms) {}

  Formula parse() {
    Formula f = parse_implies();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return f;
  }

private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(errkind::parse,
                "formula, column " + std::to_string(pos_ + 1) + ": " + what);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  bool eat_arrow() {
    skip_ws();
    if (pos_ + 1 < text_.size() && text_[pos_] == '-' && text_[pos_ + 1] == '>') {
      pos_ += 2;
      return true;
    }
    return false;
  }

  std::string ident() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    if (start == pos_) fail("expected identifier");
    return text_.substr(start, pos_ - start);
  }

  Formula parse_implies() {
    Formula l = parse_or();
    if (eat_arrow()) return f_implies(std::move(l), parse_implies());  // right-associative
    return l;
  }

  Formula parse_or() {
    Formula acc = parse_and();
    while (true) {
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == '|') {
        ++pos_;
        acc = f_or(std::move(acc), parse_and());
      } else {
        break;
      }
    }
    return acc;
  }

  Formula parse_and() {
    Formula acc = parse_prefix();
    while (eat('&')) acc = Formula::conjunction(std::move(acc), parse_prefix());
    return acc;
  }

  Formula parse_prefix() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of formula");
    char c = text_[pos_];
    if (c == '~') {
      ++pos_;
      return Formula::negation(parse_prefix());
    }
    if (c == '[') {
      ++pos_;
      if (!eat('!')) fail("expected '!' after '[' in announcement");
      Formula ann = parse_implies();
      if (!eat(']')) fail("expected ']' closing announcement");
      return Formula::announced(std::move(ann), parse_prefix());
    }
    if (c == '(') {
      ++pos_;
      Formula f = parse_implies();
      if (!eat(')')) fail("expected ')'");
      return f;
    }
    std::size_t at = pos_;
    std::string id = ident();
    if (id == "B") {
      std::string agent = ident();
      if (!declared(agents_, agent)) {
        pos_ = at;
        fail("undeclared agent '" + agent + "'");
      }
      return Formula::believes(agent, parse_prefix());
    }
    if (id == "E") return f_everyone(agents_, parse_prefix());
    if (id == "Ehat") return f_everyone_dual(agents_, parse_prefix());
    if (id == "false") return Formula::falsum();
    if (id == "true") return f_true();
    if (!declared(atoms_, id)) {
      pos_ = at;
      throw Error(errkind::undeclared,
                  "formula, column " + std::to_string(at + 1) + ": undeclared atom '" + id + "'");
    }
    return Formula::atom(id);
  }

  static bool declared(const std::vector<std::string>& pool, const std::string& id) {
    return std::find(pool.begin(), pool.end(), id) != pool.end();
  }

  const std::string& text_;
  const std::vector<std::string>& agents_;
  const std::vector<std::string>& atoms_;
  std::size_t pos_ = 0;
};

}  // namespace detail

// Grammar, tightest to loosest: primaries; prefix ~, B <agent>, [! f];
// left-associative &; left-associative |; right-associative ->.
inline Formula parse_formula(const std::string& text, const std::vector<std::string>& agents,
                             const std::vector<std::string>& atoms) {
  if (agents.empty()) throw Error(errkind::parse, "agent set must be nonempty");
  for (const auto& a : agents) {
    if (!valid_identifier(a)) throw Error(errkind::parse, "invalid agent identifier '" + a + "'");
  }
  for (const auto& p : atoms) {
    if (!valid_identifier(p)) throw Error(errkind::parse, "invalid atom identifier '" + p + "'");
  }
  return detail::FormulaParser(text, agents, atoms).parse();
}

inline std::string print_formula(const Formula& f) { return f.str(); }

inline int modal_depth(const Formula& f) { return f.modal_depth(); }

}  // namespace apbu
