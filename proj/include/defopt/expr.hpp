#pragma once

// Arithmetic expression language over the variables x1..xp.
//
//   expression := multiplicative (('+'|'-') multiplicative)*
//   multiplicative := unary (('*'|'/') unary)*
//   unary      := '-' unary | power
//   power      := primary ('^' unary)?        right-associative
//   primary    := NUMBER | FUNC '(' expression ')' | VAR | '(' expression ')'
//   FUNC       := "abs" | "sqrt" | "sin" | "cos" | "exp"
//   VAR        := "x" POSITIVE-INTEGER
//
// Precedence, low to high: +,-  <  *,/  <  unary -  <  ^, with function
// application binding tightest. '#' starts a comment that runs to end of line.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace defopt {

// Raised by the tokenizer and parsers; line/col are 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int line, int col)
      : std::runtime_error("line " + std::to_string(line) + ", col " +
                           std::to_string(col) + ": " + msg),
        line_(line),
        col_(col) {}

  int line() const { return line_; }
  int col() const { return col_; }

 private:
  int line_;
  int col_;
};

enum class TokenKind { Number, Identifier, Operator, LParen, RParen, Comma, Keyword };

struct Token {
  TokenKind kind;
  std::string lexeme;
  int line = 1;
  int col = 1;
};

namespace detail {

inline bool is_keyword(std::string_view s) {
  return s == "var" || s == "in" || s == "minimize" || s == "eq" || s == "le" ||
         s == "map";
}

inline bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}

inline bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace detail

// Longest-match tokenization of a whole source text. Numbers accept integer,
// decimal and scientific forms; '#' comments and whitespace are skipped.
inline std::vector<Token> tokenize(std::string_view source) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (source[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < source.size()) {
    char c = source[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < source.size() && source[i] != '\n') advance(1);
      continue;
    }
    int tline = line;
    int tcol = col;
    if (detail::is_digit(c) || (c == '.' && i + 1 < source.size() && detail::is_digit(source[i + 1]))) {
      std::size_t j = i;
      while (j < source.size() && detail::is_digit(source[j])) ++j;
      if (j < source.size() && source[j] == '.') {
        ++j;
        while (j < source.size() && detail::is_digit(source[j])) ++j;
      }
      if (j < source.size() && (source[j] == 'e' || source[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < source.size() && (source[k] == '+' || source[k] == '-')) ++k;
        if (k < source.size() && detail::is_digit(source[k])) {
          ++k;
          while (k < source.size() && detail::is_digit(source[k])) ++k;
          j = k;
        }
      }
      out.push_back({TokenKind::Number, std::string(source.substr(i, j - i)), tline, tcol});
      advance(j - i);
      continue;
    }
    if (detail::is_ident_start(c)) {
      std::size_t j = i;
      while (j < source.size() && detail::is_ident_char(source[j])) ++j;
      std::string lex(source.substr(i, j - i));
      TokenKind kind = detail::is_keyword(lex) ? TokenKind::Keyword : TokenKind::Identifier;
      out.push_back({kind, std::move(lex), tline, tcol});
      advance(j - i);
      continue;
    }
    switch (c) {
      case '(':
        out.push_back({TokenKind::LParen, "(", tline, tcol});
        advance(1);
        continue;
      case ')':
        out.push_back({TokenKind::RParen, ")", tline, tcol});
        advance(1);
        continue;
      case ',':
        out.push_back({TokenKind::Comma, ",", tline, tcol});
        advance(1);
        continue;
      case '+':
      case '-':
      case '*':
      case '/':
      case '^':
      case '=':
      case '[':
      case ']':
        out.push_back({TokenKind::Operator, std::string(1, c), tline, tcol});
        advance(1);
        continue;
      case '<':
      case '>':
        if (i + 1 < source.size() && source[i + 1] == '=') {
          out.push_back({TokenKind::Operator, std::string(1, c) + "=", tline, tcol});
          advance(2);
          continue;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", tline, tcol);
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", tline, tcol);
    }
  }
  return out;
}

// Immutable arithmetic expression tree. Copies share structure; evaluation
// of a fixed tree is deterministic and safe from concurrent threads.
class Expr {
 public:
  enum class UnaryOp { Negate, Abs, Sqrt, Sin, Cos, Exp };
  enum class BinaryOp { Add, Sub, Mul, Div, Pow };

  Expr() : Expr(constant(0.0)) {}

  static Expr constant(double v) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Constant;
    n->value = v;
    return Expr(std::move(n));
  }

  // index is 1-based: variable(1) is x1.
  static Expr variable(int index) {
    if (index < 1) throw std::invalid_argument("variable index must be >= 1");
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Variable;
    n->var_index = index;
    return Expr(std::move(n));
  }

  static Expr unary(UnaryOp op, Expr child) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Unary;
    n->uop = op;
    n->a = std::move(child.node_);
    return Expr(std::move(n));
  }

  static Expr binary(BinaryOp op, Expr lhs, Expr rhs) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Binary;
    n->bop = op;
    n->a = std::move(lhs.node_);
    n->b = std::move(rhs.node_);
    return Expr(std::move(n));
  }

  // IEEE semantics throughout: division by zero, sqrt of a negative and
  // similar produce inf/nan rather than throwing; callers that care test
  // std::isfinite on the result. Integer exponents with magnitude <= 32
  // are evaluated by repeated multiplication so that expressions like
  // (x-4)^6 stay exact at negative bases.
  double eval(std::span<const double> point) const { return eval_node(*node_, point); }

  // Highest variable index referenced, 0 for a constant expression.
  int max_variable() const { return max_var(*node_); }

  // Printable form; parsing it back yields a tree that evaluates
  // identically (bit for bit) at every point.
  std::string str() const { return print(*node_, 0); }

 private:
  struct Node {
    enum class Kind { Constant, Variable, Unary, Binary };
    Kind kind;
    double value = 0.0;
    int var_index = 0;
    UnaryOp uop = UnaryOp::Negate;
    BinaryOp bop = BinaryOp::Add;
    std::shared_ptr<const Node> a;
    std::shared_ptr<const Node> b;
  };

  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static double int_pow(double base, long long n) {
    if (n < 0) return 1.0 / int_pow(base, -n);
    double r = 1.0;
    for (long long k = 0; k < n; ++k) r *= base;
    return r;
  }

  static double eval_pow(double base, double e) {
    if (e == std::floor(e) && std::fabs(e) <= 32.0)
      return int_pow(base, static_cast<long long>(e));
    return std::pow(base, e);
  }

  static double eval_node(const Node& n, std::span<const double> point) {
    switch (n.kind) {
      case Node::Kind::Constant:
        return n.value;
      case Node::Kind::Variable:
        if (static_cast<std::size_t>(n.var_index) > point.size())
          throw std::invalid_argument("point has fewer components than x" +
                                      std::to_string(n.var_index) + " requires");
        return point[static_cast<std::size_t>(n.var_index) - 1];
      case Node::Kind::Unary: {
        double c = eval_node(*n.a, point);
        switch (n.uop) {
          case UnaryOp::Negate: return -c;
          case UnaryOp::Abs: return std::fabs(c);
          case UnaryOp::Sqrt: return std::sqrt(c);
          case UnaryOp::Sin: return std::sin(c);
          case UnaryOp::Cos: return std::cos(c);
          case UnaryOp::Exp: return std::exp(c);
        }
        return 0.0;
      }
      case Node::Kind::Binary: {
        double l = eval_node(*n.a, point);
        double r = eval_node(*n.b, point);
        switch (n.bop) {
          case BinaryOp::Add: return l + r;
          case BinaryOp::Sub: return l - r;
          case BinaryOp::Mul: return l * r;
          case BinaryOp::Div: return l / r;
          case BinaryOp::Pow: return eval_pow(l, r);
        }
        return 0.0;
      }
    }
    return 0.0;
  }

  static int max_var(const Node& n) {
    switch (n.kind) {
      case Node::Kind::Constant: return 0;
      case Node::Kind::Variable: return n.var_index;
      case Node::Kind::Unary: return max_var(*n.a);
      case Node::Kind::Binary: return std::max(max_var(*n.a), max_var(*n.b));
    }
    return 0;
  }

  // Shortest decimal form that parses back to the same double.
  static std::string format_number(double v) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
      std::snprintf(buf, sizeof buf, "%.*g", prec, v);
      if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
  }

  // Precedence levels used for printing: +,- = 1; *,/ = 2; unary - = 3;
  // ^ = 4; atoms = 5. A negative constant prints with its sign and is
  // treated like a unary minus for parenthesization.
  static int level(const Node& n) {
    switch (n.kind) {
      case Node::Kind::Constant:
        return std::signbit(n.value) ? 3 : 5;
      case Node::Kind::Variable:
        return 5;
      case Node::Kind::Unary:
        return n.uop == UnaryOp::Negate ? 3 : 5;
      case Node::Kind::Binary:
        switch (n.bop) {
          case BinaryOp::Add:
          case BinaryOp::Sub: return 1;
          case BinaryOp::Mul:
          case BinaryOp::Div: return 2;
          case BinaryOp::Pow: return 4;
        }
    }
    return 5;
  }

  static std::string wrap(const Node& n, bool parens) {
    std::string s = print(n, 0);
    return parens ? "(" + s + ")" : s;
  }

  static std::string print(const Node& n, int) {
    switch (n.kind) {
      case Node::Kind::Constant:
        return format_number(n.value);
      case Node::Kind::Variable:
        return "x" + std::to_string(n.var_index);
      case Node::Kind::Unary: {
        const char* name = nullptr;
        switch (n.uop) {
          case UnaryOp::Negate:
            return "-" + wrap(*n.a, level(*n.a) < 4);
          case UnaryOp::Abs: name = "abs"; break;
          case UnaryOp::Sqrt: name = "sqrt"; break;
          case UnaryOp::Sin: name = "sin"; break;
          case UnaryOp::Cos: name = "cos"; break;
          case UnaryOp::Exp: name = "exp"; break;
        }
        return std::string(name) + "(" + print(*n.a, 0) + ")";
      }
      case Node::Kind::Binary: {
        int lv = level(n);
        const char* op = nullptr;
        switch (n.bop) {
          case BinaryOp::Add: op = " + "; break;
          case BinaryOp::Sub: op = " - "; break;
          case BinaryOp::Mul: op = " * "; break;
          case BinaryOp::Div: op = " / "; break;
          case BinaryOp::Pow: op = "^"; break;
        }
        if (n.bop == BinaryOp::Pow) {
          // Right-associative: parenthesize an exponent only when it binds
          // looser than unary minus.
          return wrap(*n.a, level(*n.a) <= lv) + op + wrap(*n.b, level(*n.b) < 3);
        }
        return wrap(*n.a, level(*n.a) < lv) + op + wrap(*n.b, level(*n.b) <= lv);
      }
    }
    return "";
  }

  std::shared_ptr<const Node> node_;
};

inline Expr operator+(Expr a, Expr b) { return Expr::binary(Expr::BinaryOp::Add, std::move(a), std::move(b)); }
inline Expr operator-(Expr a, Expr b) { return Expr::binary(Expr::BinaryOp::Sub, std::move(a), std::move(b)); }
inline Expr operator*(Expr a, Expr b) { return Expr::binary(Expr::BinaryOp::Mul, std::move(a), std::move(b)); }
inline Expr operator/(Expr a, Expr b) { return Expr::binary(Expr::BinaryOp::Div, std::move(a), std::move(b)); }
inline Expr operator-(Expr a) { return Expr::unary(Expr::UnaryOp::Negate, std::move(a)); }

namespace detail {

inline std::optional<int> variable_index(std::string_view name) {
  if (name.size() < 2 || name[0] != 'x') return std::nullopt;
  if (name[1] == '0') return std::nullopt;  // no leading zeros
  int idx = 0;
  for (std::size_t i = 1; i < name.size(); ++i) {
    if (!is_digit(name[i])) return std::nullopt;
    idx = idx * 10 + (name[i] - '0');
    if (idx > 1'000'000) return std::nullopt;
  }
  return idx;
}

inline std::optional<Expr::UnaryOp> function_op(std::string_view name) {
  if (name == "abs") return Expr::UnaryOp::Abs;
  if (name == "sqrt") return Expr::UnaryOp::Sqrt;
  if (name == "sin") return Expr::UnaryOp::Sin;
  if (name == "cos") return Expr::UnaryOp::Cos;
  if (name == "exp") return Expr::UnaryOp::Exp;
  return std::nullopt;
}

// Recursive-descent parser over a token span.
class ExprParser {
 public:
  ExprParser(std::span<const Token> tokens, int arity) : toks_(tokens), arity_(arity) {}

  Expr parse_all() {
    Expr e = expression();
    if (pos_ < toks_.size())
      throw ParseError("unexpected '" + toks_[pos_].lexeme + "'", toks_[pos_].line,
                       toks_[pos_].col);
    return e;
  }

  Expr expression() {
    Expr lhs = multiplicative();
    while (auto op = peek_op("+", "-")) {
      ++pos_;
      Expr rhs = multiplicative();
      lhs = Expr::binary(*op == '+' ? Expr::BinaryOp::Add : Expr::BinaryOp::Sub,
                         std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

 private:
  Expr multiplicative() {
    Expr lhs = unary();
    while (auto op = peek_op("*", "/")) {
      ++pos_;
      Expr rhs = unary();
      lhs = Expr::binary(*op == '*' ? Expr::BinaryOp::Mul : Expr::BinaryOp::Div,
                         std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  Expr unary() {
    if (peek_op("-")) {
      ++pos_;
      return Expr::unary(Expr::UnaryOp::Negate, unary());
    }
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (peek_op("^")) {
      ++pos_;
      Expr exponent = unary();
      return Expr::binary(Expr::BinaryOp::Pow, std::move(base), std::move(exponent));
    }
    return base;
  }

  Expr primary() {
    const Token& t = expect_any("expression");
    switch (t.kind) {
      case TokenKind::Number: {
        ++pos_;
        return Expr::constant(std::strtod(t.lexeme.c_str(), nullptr));
      }
      case TokenKind::LParen: {
        ++pos_;
        Expr inner = expression();
        expect_rparen(t);
        return inner;
      }
      case TokenKind::Identifier: {
        if (auto idx = variable_index(t.lexeme)) {
          if (*idx > arity_)
            throw ParseError("undeclared variable '" + t.lexeme + "'", t.line, t.col);
          ++pos_;
          return Expr::variable(*idx);
        }
        if (auto fn = function_op(t.lexeme)) {
          ++pos_;
          if (pos_ >= toks_.size() || toks_[pos_].kind != TokenKind::LParen)
            throw ParseError("expected '(' after '" + t.lexeme + "'", t.line, t.col);
          const Token& open = toks_[pos_++];
          Expr arg = expression();
          expect_rparen(open);
          return Expr::unary(*fn, std::move(arg));
        }
        throw ParseError("unknown identifier '" + t.lexeme + "'", t.line, t.col);
      }
      default:
        throw ParseError("unexpected '" + t.lexeme + "'", t.line, t.col);
    }
  }

  const Token& expect_any(const char* what) {
    if (pos_ >= toks_.size()) {
      int line = toks_.empty() ? 1 : toks_.back().line;
      int col = toks_.empty() ? 1 : toks_.back().col + static_cast<int>(toks_.back().lexeme.size());
      throw ParseError(std::string("expected ") + what, line, col);
    }
    return toks_[pos_];
  }

  void expect_rparen(const Token& open) {
    if (pos_ >= toks_.size() || toks_[pos_].kind != TokenKind::RParen)
      throw ParseError("unbalanced '('", open.line, open.col);
    ++pos_;
  }

  std::optional<char> peek_op(std::string_view a, std::string_view b = {}) {
    if (pos_ >= toks_.size()) return std::nullopt;
    const Token& t = toks_[pos_];
    if (t.kind != TokenKind::Operator) return std::nullopt;
    if (t.lexeme == a || (!b.empty() && t.lexeme == b)) return t.lexeme[0];
    return std::nullopt;
  }

  std::span<const Token> toks_;
  int arity_;
  std::size_t pos_ = 0;
};

}  // namespace detail

// Parses a full token sequence as one expression over x1..x<arity>.
inline Expr parse_expression(std::span<const Token> tokens, int arity) {
  if (arity < 1) throw std::invalid_argument("arity must be >= 1");
  return detail::ExprParser(tokens, arity).parse_all();
}

inline Expr parse_expression(std::string_view source, int arity) {
  std::vector<Token> toks = tokenize(source);
  return parse_expression(toks, arity);
}

}  // namespace defopt
