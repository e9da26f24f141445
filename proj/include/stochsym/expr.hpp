#pragma once

// Immutable expression trees over the variables x, t, w: construction with
// constant folding, a small infix parser and printer, exact symbolic
// differentiation, evaluation with domain checking, and a sampled test for
// "this expression vanishes identically".

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "stochsym/error.hpp"
#include "stochsym/numeric.hpp"

namespace stochsym {

enum class Var : std::uint8_t { x = 0, t = 1, w = 2 };

inline const char* var_name(Var v) {
  switch (v) {
    case Var::x: return "x";
    case Var::t: return "t";
    case Var::w: return "w";
  }
  return "?";
}

/// Values assigned to the free variables of an expression.
struct Bindings {
  std::array<std::optional<double>, 3> values{};

  Bindings() = default;
  Bindings(std::optional<double> x, std::optional<double> t = std::nullopt,
           std::optional<double> w = std::nullopt)
      : values{x, t, w} {}

  std::optional<double> operator[](Var v) const { return values[static_cast<std::size_t>(v)]; }

  Bindings with(Var v, double value) const {
    Bindings b = *this;
    b.values[static_cast<std::size_t>(v)] = value;
    return b;
  }
};

enum class Op : std::uint8_t {
  constant,
  variable,
  add,
  sub,
  mul,
  div,
  pow,  // constant exponent
  neg,
  exp,
  log,
  sqrt,
  sin,
  cos,
  integral,   // integral(g, v, a, U) = int_a^U g dv
  inverse,    // inverse(F, A, lo, hi): the x in (lo, hi) with F(x, t, w) = A
  tabulated,  // component of a tabulated ODE solution applied to an argument
};

class Tabulated;

namespace detail {
struct Node;
}

class Expr {
 public:
  Expr();
  Expr(double value);  // NOLINT(google-explicit-constructor): constants read naturally

  static Expr variable(Var v);

  Op op() const;
  /// Constant value, power exponent, or the lower limit of an integral.
  double number() const;
  Var var() const;
  const std::vector<Expr>& args() const;
  const detail::Node* node() const { return node_.get(); }

  bool is_constant() const { return op() == Op::constant; }
  bool is_constant(double v) const { return is_constant() && number() == v; }

  explicit Expr(std::shared_ptr<const detail::Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<const detail::Node> node_;
};

/// A function of one argument whose values come from a numeric table (an
/// ODE solution). Component `order` = 0 is the function, 1 its derivative;
/// `derivative` returns d/d(arg) of a component as an expression.
class Tabulated : public std::enable_shared_from_this<Tabulated> {
 public:
  virtual ~Tabulated() = default;
  virtual double value(int order, double arg) const = 0;
  virtual Expr derivative(int order, const Expr& arg) const = 0;
  virtual std::string label() const = 0;
};

namespace detail {

struct Node {
  Op op = Op::constant;
  double number = 0.0;
  Var var = Var::x;
  double lo = 0.0;
  double hi = 0.0;
  int order = 0;
  std::vector<Expr> args;
  std::shared_ptr<const Tabulated> table;
};

inline std::shared_ptr<const Node> make_node(Node n) {
  return std::make_shared<const Node>(std::move(n));
}

inline const std::shared_ptr<const Node>& zero_node() {
  static const std::shared_ptr<const Node> zero = make_node(Node{});
  return zero;
}

}  // namespace detail

inline Expr::Expr() : node_(detail::zero_node()) {}
inline Expr::Expr(double value) {
  detail::Node n;
  n.op = Op::constant;
  n.number = value;
  node_ = detail::make_node(std::move(n));
}
inline Expr Expr::variable(Var v) {
  detail::Node n;
  n.op = Op::variable;
  n.var = v;
  return Expr(detail::make_node(std::move(n)));
}
inline Op Expr::op() const { return node_->op; }
inline double Expr::number() const { return node_->number; }
inline Var Expr::var() const { return node_->var; }
inline const std::vector<Expr>& Expr::args() const { return node_->args; }

// ---------------------------------------------------------------------------
// Construction with constant folding.

namespace detail {

inline Expr raw(Op op, std::vector<Expr> args, double number = 0.0) {
  Node n;
  n.op = op;
  n.number = number;
  n.args = std::move(args);
  return Expr(make_node(std::move(n)));
}

// Folds only when the result is finite; singular constants stay symbolic so
// that evaluation reports them.
inline std::optional<Expr> fold(double v) {
  if (std::isfinite(v)) return Expr(v);
  return std::nullopt;
}

inline bool is_integer(double p) { return std::floor(p) == p && std::abs(p) < 1e15; }

}  // namespace detail

inline const Expr X = Expr::variable(Var::x);
inline const Expr T = Expr::variable(Var::t);
inline const Expr W = Expr::variable(Var::w);

inline Expr operator-(const Expr& a);

inline Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) {
    if (auto f = detail::fold(a.number() + b.number())) return *f;
  }
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  if (b.is_constant() && b.number() < 0) return detail::raw(Op::sub, {a, Expr(-b.number())});
  if (b.op() == Op::neg) return detail::raw(Op::sub, {a, b.args()[0]});
  return detail::raw(Op::add, {a, b});
}

inline Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) {
    if (auto f = detail::fold(a.number() - b.number())) return *f;
  }
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return -b;
  if (b.is_constant() && b.number() < 0) return detail::raw(Op::add, {a, Expr(-b.number())});
  if (b.op() == Op::neg) return a + b.args()[0];
  return detail::raw(Op::sub, {a, b});
}

inline Expr operator-(const Expr& a) {
  if (a.is_constant()) return Expr(-a.number());
  if (a.op() == Op::neg) return a.args()[0];
  return detail::raw(Op::neg, {a});
}

inline Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) {
    if (auto f = detail::fold(a.number() * b.number())) return *f;
  }
  if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr(0.0);
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(-1.0)) return -b;
  if (b.is_constant(-1.0)) return -a;
  return detail::raw(Op::mul, {a, b});
}

inline Expr operator/(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant() && b.number() != 0.0) {
    if (auto f = detail::fold(a.number() / b.number())) return *f;
  }
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(0.0) && !(b.is_constant(0.0))) return Expr(0.0);
  return detail::raw(Op::div, {a, b});
}

inline Expr pow(const Expr& base, double exponent) {
  if (exponent == 0.0) return Expr(1.0);
  if (exponent == 1.0) return base;
  if (base.is_constant()) {
    const double b = base.number();
    if ((b > 0 || detail::is_integer(exponent)) && !(b == 0 && exponent < 0)) {
      if (auto f = detail::fold(std::pow(b, exponent))) return *f;
    }
  }
  return detail::raw(Op::pow, {base}, exponent);
}

inline Expr exp(const Expr& a) {
  if (a.is_constant()) {
    if (auto f = detail::fold(std::exp(a.number()))) return *f;
  }
  return detail::raw(Op::exp, {a});
}

inline Expr log(const Expr& a) {
  if (a.is_constant() && a.number() > 0) return Expr(std::log(a.number()));
  return detail::raw(Op::log, {a});
}

inline Expr sqrt(const Expr& a) {
  if (a.is_constant() && a.number() >= 0) return Expr(std::sqrt(a.number()));
  return detail::raw(Op::sqrt, {a});
}

inline Expr sin(const Expr& a) {
  if (a.is_constant()) return Expr(std::sin(a.number()));
  return detail::raw(Op::sin, {a});
}

inline Expr cos(const Expr& a) {
  if (a.is_constant()) return Expr(std::cos(a.number()));
  return detail::raw(Op::cos, {a});
}

/// int_lower^upper integrand d(dummy). `dummy` is bound inside the integrand.
inline Expr integral(const Expr& integrand, Var dummy, double lower, const Expr& upper) {
  if (integrand.is_constant()) return integrand * (upper - Expr(lower));
  detail::Node n;
  n.op = Op::integral;
  n.var = dummy;
  n.number = lower;
  n.args = {integrand, upper};
  return Expr(detail::make_node(std::move(n)));
}

Expr differentiate(const Expr& e, Var v);

/// The x in (lo, hi) solving forward(x, t, w) = target; forward must be
/// strictly monotone in x on the bracket.
inline Expr inverse(const Expr& forward, const Expr& target, double lo, double hi) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw ValidationError("inverse map needs a finite bracket lo < hi");
  }
  detail::Node n;
  n.op = Op::inverse;
  n.lo = lo;
  n.hi = hi;
  n.args = {forward, target, differentiate(forward, Var::x)};
  return Expr(detail::make_node(std::move(n)));
}

inline Expr tabulated(std::shared_ptr<const Tabulated> table, int order, const Expr& arg) {
  detail::Node n;
  n.op = Op::tabulated;
  n.order = order;
  n.table = std::move(table);
  n.args = {arg};
  return Expr(detail::make_node(std::move(n)));
}

// ---------------------------------------------------------------------------
// Printing.

inline std::string format_number(double v) {
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

namespace detail {

inline int precedence(const Expr& e) {
  switch (e.op()) {
    case Op::constant: return e.number() < 0 ? 3 : 5;
    case Op::add:
    case Op::sub: return 1;
    case Op::mul:
    case Op::div: return 2;
    case Op::neg: return 3;
    case Op::pow: return 4;
    default: return 5;
  }
}

inline void print_to(const Expr& e, int min_prec, std::string& out);

inline void print_child(const Expr& e, int min_prec, std::string& out) {
  if (precedence(e) < min_prec) {
    out += '(';
    print_to(e, 0, out);
    out += ')';
  } else {
    print_to(e, min_prec, out);
  }
}

inline void print_call(const char* name, const Expr& arg, std::string& out) {
  out += name;
  out += '(';
  print_to(arg, 0, out);
  out += ')';
}

inline void print_to(const Expr& e, int /*min_prec*/, std::string& out) {
  const auto& a = e.args();
  switch (e.op()) {
    case Op::constant: out += format_number(e.number()); return;
    case Op::variable: out += var_name(e.var()); return;
    case Op::add:
    case Op::sub:
      print_child(a[0], 1, out);
      out += e.op() == Op::add ? " + " : " - ";
      print_child(a[1], 2, out);
      return;
    case Op::mul:
    case Op::div:
      print_child(a[0], 2, out);
      out += e.op() == Op::mul ? "*" : "/";
      print_child(a[1], 3, out);
      return;
    case Op::neg:
      out += '-';
      print_child(a[0], 3, out);
      return;
    case Op::pow: {
      print_child(a[0], 5, out);
      out += '^';
      const std::string p = format_number(e.number());
      if (e.number() < 0) out += "(" + p + ")"; else out += p;
      return;
    }
    case Op::exp: print_call("exp", a[0], out); return;
    case Op::log: print_call("log", a[0], out); return;
    case Op::sqrt: print_call("sqrt", a[0], out); return;
    case Op::sin: print_call("sin", a[0], out); return;
    case Op::cos: print_call("cos", a[0], out); return;
    case Op::integral:
      out += "integral(";
      print_to(a[0], 0, out);
      out += ", ";
      out += var_name(e.var());
      out += ", " + format_number(e.number()) + ", ";
      print_to(a[1], 0, out);
      out += ')';
      return;
    case Op::inverse:
      out += "inverse(";
      print_to(a[0], 0, out);
      out += ", ";
      print_to(a[1], 0, out);
      out += ", " + format_number(e.node()->lo) + ", " + format_number(e.node()->hi) + ")";
      return;
    case Op::tabulated:
      out += e.node()->table->label();
      out += e.node()->order == 0 ? "(" : "'(";
      print_to(a[0], 0, out);
      out += ')';
      return;
  }
}

}  // namespace detail

/// Infix rendering accepted back by `parse` (except tabulated nodes, which
/// print as a label).
inline std::string to_string(const Expr& e) {
  std::string out;
  detail::print_to(e, 0, out);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing.

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr parse_all() {
    Expr e = expression();
    skip_ws();
    if (pos_ < text_.size()) fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(msg, pos_ + 1); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= text_.size()) fail(std::string("expected '") + c + "' before end of input");
      fail(std::string("expected '") + c + "'");
    }
  }

  Expr expression() {
    Expr lhs = term();
    for (;;) {
      if (accept('+')) lhs = lhs + term();
      else if (accept('-')) lhs = lhs - term();
      else return lhs;
    }
  }

  Expr term() {
    Expr lhs = unary();
    for (;;) {
      if (accept('*')) lhs = lhs * unary();
      else if (accept('/')) lhs = lhs / unary();
      else return lhs;
    }
  }

  Expr unary() {
    if (accept('-')) return -unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (!accept('^')) return base;
    skip_ws();
    const std::size_t exponent_pos = pos_;
    Expr exponent = unary();
    if (exponent.is_constant()) return pow(base, exponent.number());
    if (base.is_constant() && base.number() > 0) {
      if (base.number() == std::numbers::e) return exp(exponent);
      return exp(exponent * Expr(std::log(base.number())));
    }
    pos_ = exponent_pos;
    fail("exponent must be a constant");
  }

  double constant_arg() {
    skip_ws();
    Expr e = expression();
    if (!e.is_constant()) fail("expected a constant");
    return e.number();
  }

  Var variable_arg() {
    skip_ws();
    const std::size_t start = pos_;
    const std::string id = identifier();
    if (id == "x") return Var::x;
    if (id == "t") return Var::t;
    if (id == "w") return Var::w;
    pos_ = start;
    fail("expected a variable name");
  }

  std::string identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  Expr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t n = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      n += digits();
    }
    if (n == 0) {
      pos_ = start;
      fail("malformed number");
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
      if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
        pos_ = look;
        digits();
      }
    }
    const std::string literal(text_.substr(start, pos_ - start));
    return Expr(std::strtod(literal.c_str(), nullptr));
  }

  Expr primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (c == '(') {
      ++pos_;
      Expr e = expression();
      expect(')');
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      const std::string id = identifier();
      if (id == "x") return X;
      if (id == "t") return T;
      if (id == "w") return W;
      if (id == "pi") return Expr(std::numbers::pi);
      if (id == "e") return Expr(std::numbers::e);
      if (id == "exp" || id == "log" || id == "sqrt" || id == "sin" || id == "cos" ||
          id == "integral" || id == "inverse") {
        expect('(');
        Expr result;
        if (id == "integral") {
          Expr g = expression();
          expect(',');
          const Var dummy = variable_arg();
          expect(',');
          const double lower = constant_arg();
          expect(',');
          Expr upper = expression();
          result = integral(g, dummy, lower, upper);
        } else if (id == "inverse") {
          Expr forward = expression();
          expect(',');
          Expr target = expression();
          expect(',');
          const double lo = constant_arg();
          expect(',');
          const double hi = constant_arg();
          result = inverse(forward, target, lo, hi);
        } else {
          Expr arg = expression();
          if (id == "exp") result = exp(arg);
          else if (id == "log") result = log(arg);
          else if (id == "sqrt") result = sqrt(arg);
          else if (id == "sin") result = sin(arg);
          else result = cos(arg);
        }
        expect(')');
        return result;
      }
      throw UnknownIdentifier(id, start + 1);
    }
    fail("expected operand");
  }
};

}  // namespace detail

/// Parses the infix grammar: + - * / ^ (constant exponent), unary minus,
/// exp log sqrt sin cos, integral(g, v, a, U), inverse(F, A, lo, hi),
/// variables x t w, constants pi and e, decimal literals.
inline Expr parse(std::string_view text) { return detail::Parser(text).parse_all(); }

// ---------------------------------------------------------------------------
// Structural queries.

inline bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.node() == b.node()) return true;
  const auto& na = *a.node();
  const auto& nb = *b.node();
  if (na.op != nb.op || na.number != nb.number || na.lo != nb.lo || na.hi != nb.hi ||
      na.order != nb.order || na.table != nb.table) {
    return false;
  }
  if ((na.op == Op::variable || na.op == Op::integral) && na.var != nb.var) return false;
  const std::size_t n = na.op == Op::inverse ? 2 : na.args.size();
  if (na.args.size() != nb.args.size()) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if (!structurally_equal(na.args[i], nb.args[i])) return false;
  }
  return true;
}

/// True when v occurs free in e.
inline bool depends_on(const Expr& e, Var v) {
  const auto& a = e.args();
  switch (e.op()) {
    case Op::constant: return false;
    case Op::variable: return e.var() == v;
    case Op::integral: return depends_on(a[1], v) || (e.var() != v && depends_on(a[0], v));
    case Op::inverse: return depends_on(a[1], v) || (v != Var::x && depends_on(a[0], v));
    default:
      for (const auto& c : a) {
        if (depends_on(c, v)) return true;
      }
      return false;
  }
}

/// Number of distinct nodes (shared subtrees counted once).
inline std::size_t node_count(const Expr& e) {
  std::unordered_map<const detail::Node*, bool> seen;
  std::vector<Expr> stack{e};
  while (!stack.empty()) {
    Expr cur = stack.back();
    stack.pop_back();
    if (!seen.emplace(cur.node(), true).second) continue;
    for (const auto& c : cur.args()) stack.push_back(c);
  }
  return seen.size();
}

// ---------------------------------------------------------------------------
// Evaluation.

namespace detail {

inline double finite_or_throw(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string("non-finite value in ") + what);
  return v;
}

inline double apply_div(double a, double b) {
  if (b == 0.0) throw DomainError("division by zero");
  return finite_or_throw(a / b, "division");
}

inline double apply_pow(double a, double p) {
  if (a < 0 && !is_integer(p)) throw DomainError("non-integer power of a negative value");
  if (a == 0 && p < 0) throw DomainError("division by zero");
  return finite_or_throw(std::pow(a, p), "power");
}

inline double apply_log(double a) {
  if (!(a > 0)) throw DomainError("log of non-positive value");
  return std::log(a);
}

inline double apply_sqrt(double a) {
  if (a < 0) throw DomainError("sqrt of negative value");
  return std::sqrt(a);
}

double eval(const Expr& e, const Bindings& b, double* scale);

inline double eval_integral(const Expr& e, const Bindings& b, double* scale) {
  const double upper = eval(e.args()[1], b, scale);
  const Expr& g = e.args()[0];
  const Var dummy = e.var();
  return adaptive_simpson([&](double s) { return eval(g, b.with(dummy, s), nullptr); },
                          e.number(), upper, 1e-12);
}

inline double eval_inverse(const Expr& e, const Bindings& b, double* scale) {
  const double target = eval(e.args()[1], b, scale);
  const Expr& forward = e.args()[0];
  const Expr& slope = e.args()[2];
  const double lo = e.node()->lo;
  const double hi = e.node()->hi;
  auto g = [&](double s) { return eval(forward, b.with(Var::x, s), nullptr) - target; };
  auto dg = [&](double s) { return eval(slope, b.with(Var::x, s), nullptr); };
  const double glo = g(lo);
  const double ghi = g(hi);
  if ((glo > 0 && ghi > 0) || (glo < 0 && ghi < 0)) {
    throw DomainError("inverse map: value " + format_number(target) +
                      " outside the range of the forward map on the bracket");
  }
  return bracketed_newton(g, dg, lo, hi);
}

inline double eval(const Expr& e, const Bindings& b, double* scale) {
  const auto& a = e.args();
  double r = 0.0;
  switch (e.op()) {
    case Op::constant: r = e.number(); break;
    case Op::variable: {
      const auto v = b[e.var()];
      if (!v) throw UnboundVariable(var_name(e.var()));
      r = *v;
      break;
    }
    case Op::add: r = finite_or_throw(eval(a[0], b, scale) + eval(a[1], b, scale), "sum"); break;
    case Op::sub:
      r = finite_or_throw(eval(a[0], b, scale) - eval(a[1], b, scale), "difference");
      break;
    case Op::mul:
      r = finite_or_throw(eval(a[0], b, scale) * eval(a[1], b, scale), "product");
      break;
    case Op::div: {
      const double num = eval(a[0], b, scale);
      r = apply_div(num, eval(a[1], b, scale));
      break;
    }
    case Op::pow: r = apply_pow(eval(a[0], b, scale), e.number()); break;
    case Op::neg: r = -eval(a[0], b, scale); break;
    case Op::exp: r = finite_or_throw(std::exp(eval(a[0], b, scale)), "exp"); break;
    case Op::log: r = apply_log(eval(a[0], b, scale)); break;
    case Op::sqrt: r = apply_sqrt(eval(a[0], b, scale)); break;
    case Op::sin: r = std::sin(eval(a[0], b, scale)); break;
    case Op::cos: r = std::cos(eval(a[0], b, scale)); break;
    case Op::integral: r = eval_integral(e, b, scale); break;
    case Op::inverse: r = eval_inverse(e, b, scale); break;
    case Op::tabulated:
      r = finite_or_throw(e.node()->table->value(e.node()->order, eval(a[0], b, scale)),
                          "tabulated function");
      break;
  }
  if (scale != nullptr) *scale = std::max(*scale, std::abs(r));
  return r;
}

}  // namespace detail

/// Evaluates e; throws UnboundVariable or DomainError, never returns a
/// non-finite value.
inline double evaluate(const Expr& e, const Bindings& b) { return detail::eval(e, b, nullptr); }

struct ScaledValue {
  double value;
  double scale;  // largest magnitude among all sub-terms
};

inline ScaledValue evaluate_scaled(const Expr& e, const Bindings& b) {
  double scale = 0.0;
  const double v = detail::eval(e, b, &scale);
  return {v, scale};
}

/// Flattened postfix form of an expression for hot loops; same semantics
/// and domain checks as `evaluate`, with every variable bound.
class CompiledExpr {
 public:
  CompiledExpr() : CompiledExpr(Expr(0.0)) {}

  explicit CompiledExpr(const Expr& e) {
    std::unordered_map<const detail::Node*, int> unused;
    emit(e);
    int depth = 0;
    int max_depth = 0;
    for (const auto& ins : code_) {
      depth += ins.stack_delta;
      max_depth = std::max(max_depth, depth);
    }
    max_stack_ = static_cast<std::size_t>(max_depth);
  }

  double operator()(double x, double t = 0.0, double w = 0.0) const {
    constexpr std::size_t local = 64;
    double small[local];
    small[0] = 0.0;
    std::vector<double> big;
    double* st = small;
    if (max_stack_ > local) {
      big.resize(max_stack_);
      st = big.data();
    }
    std::size_t sp = 0;
    for (const auto& ins : code_) {
      switch (ins.op) {
        case Op::constant: st[sp++] = ins.number; break;
        case Op::variable:
          st[sp++] = ins.var == Var::x ? x : (ins.var == Var::t ? t : w);
          break;
        case Op::add: --sp; st[sp - 1] = detail::finite_or_throw(st[sp - 1] + st[sp], "sum"); break;
        case Op::sub:
          --sp;
          st[sp - 1] = detail::finite_or_throw(st[sp - 1] - st[sp], "difference");
          break;
        case Op::mul:
          --sp;
          st[sp - 1] = detail::finite_or_throw(st[sp - 1] * st[sp], "product");
          break;
        case Op::div: --sp; st[sp - 1] = detail::apply_div(st[sp - 1], st[sp]); break;
        case Op::pow: st[sp - 1] = detail::apply_pow(st[sp - 1], ins.number); break;
        case Op::neg: st[sp - 1] = -st[sp - 1]; break;
        case Op::exp: st[sp - 1] = detail::finite_or_throw(std::exp(st[sp - 1]), "exp"); break;
        case Op::log: st[sp - 1] = detail::apply_log(st[sp - 1]); break;
        case Op::sqrt: st[sp - 1] = detail::apply_sqrt(st[sp - 1]); break;
        case Op::sin: st[sp - 1] = std::sin(st[sp - 1]); break;
        case Op::cos: st[sp - 1] = std::cos(st[sp - 1]); break;
        default:
          st[sp++] = evaluate(trees_[static_cast<std::size_t>(ins.tree)], Bindings(x, t, w));
          break;
      }
    }
    return st[0];
  }

 private:
  struct Instr {
    Op op;
    double number = 0.0;
    Var var = Var::x;
    int tree = -1;
    int stack_delta = 0;
  };

  void emit(const Expr& e) {
    switch (e.op()) {
      case Op::constant: code_.push_back({Op::constant, e.number(), Var::x, -1, 1}); return;
      case Op::variable: code_.push_back({Op::variable, 0.0, e.var(), -1, 1}); return;
      case Op::add:
      case Op::sub:
      case Op::mul:
      case Op::div:
        emit(e.args()[0]);
        emit(e.args()[1]);
        code_.push_back({e.op(), 0.0, Var::x, -1, -1});
        return;
      case Op::pow:
      case Op::neg:
      case Op::exp:
      case Op::log:
      case Op::sqrt:
      case Op::sin:
      case Op::cos:
        emit(e.args()[0]);
        code_.push_back({e.op(), e.number(), Var::x, -1, 0});
        return;
      default:
        trees_.push_back(e);
        code_.push_back({e.op(), 0.0, Var::x, static_cast<int>(trees_.size() - 1), 1});
        return;
    }
  }

  std::vector<Instr> code_;
  std::vector<Expr> trees_;
  std::size_t max_stack_ = 0;
};

// ---------------------------------------------------------------------------
// Substitution and differentiation.

namespace detail {

class Substituter {
 public:
  Substituter(Var v, Expr replacement)
      : var_(v), replacement_(std::move(replacement)) {
    for (Var u : {Var::x, Var::t, Var::w}) {
      replacement_uses_[static_cast<std::size_t>(u)] = depends_on(replacement_, u);
    }
  }

  Expr operator()(const Expr& e) {
    if (auto it = memo_.find(e.node()); it != memo_.end()) return it->second;
    Expr r = apply(e);
    memo_.emplace(e.node(), r);
    return r;
  }

 private:
  Var var_;
  Expr replacement_;
  std::array<bool, 3> replacement_uses_{};
  std::unordered_map<const Node*, Expr> memo_;

  bool captures(Var bound, const Expr& body) const {
    return replacement_uses_[static_cast<std::size_t>(bound)] && depends_on(body, var_);
  }

  Expr apply(const Expr& e) {
    const auto& a = e.args();
    switch (e.op()) {
      case Op::constant: return e;
      case Op::variable: return e.var() == var_ ? replacement_ : e;
      case Op::add: return (*this)(a[0]) + (*this)(a[1]);
      case Op::sub: return (*this)(a[0]) - (*this)(a[1]);
      case Op::mul: return (*this)(a[0]) * (*this)(a[1]);
      case Op::div: return (*this)(a[0]) / (*this)(a[1]);
      case Op::pow: return pow((*this)(a[0]), e.number());
      case Op::neg: return -(*this)(a[0]);
      case Op::exp: return exp((*this)(a[0]));
      case Op::log: return log((*this)(a[0]));
      case Op::sqrt: return sqrt((*this)(a[0]));
      case Op::sin: return sin((*this)(a[0]));
      case Op::cos: return cos((*this)(a[0]));
      case Op::integral: {
        const Var dummy = e.var();
        Expr body = a[0];
        if (dummy != var_) {
          if (captures(dummy, body)) throw ValidationError("substitution would capture a bound variable");
          body = Substituter(var_, replacement_)(body);
        }
        return integral(body, dummy, e.number(), (*this)(a[1]));
      }
      case Op::inverse: {
        Expr forward = a[0];
        if (var_ != Var::x) {
          if (captures(Var::x, forward)) {
            throw ValidationError("substitution would capture the inverse map's variable");
          }
          forward = Substituter(var_, replacement_)(forward);
        }
        return inverse(forward, (*this)(a[1]), e.node()->lo, e.node()->hi);
      }
      case Op::tabulated: return tabulated(e.node()->table, e.node()->order, (*this)(a[0]));
    }
    return e;
  }
};

class Differentiator {
 public:
  explicit Differentiator(Var v) : var_(v) {}

  Expr operator()(const Expr& e) {
    if (auto it = memo_.find(e.node()); it != memo_.end()) return it->second;
    Expr r = apply(e);
    memo_.emplace(e.node(), r);
    return r;
  }

 private:
  Var var_;
  std::unordered_map<const Node*, Expr> memo_;

  Expr apply(const Expr& e) {
    const auto& a = e.args();
    switch (e.op()) {
      case Op::constant: return Expr(0.0);
      case Op::variable: return Expr(e.var() == var_ ? 1.0 : 0.0);
      case Op::add: return (*this)(a[0]) + (*this)(a[1]);
      case Op::sub: return (*this)(a[0]) - (*this)(a[1]);
      case Op::mul: return (*this)(a[0]) * a[1] + a[0] * (*this)(a[1]);
      case Op::div: {
        const Expr du = (*this)(a[0]);
        const Expr dv = (*this)(a[1]);
        if (dv.is_constant(0.0)) return du / a[1];
        return (du * a[1] - a[0] * dv) / pow(a[1], 2.0);
      }
      case Op::pow:
        return Expr(e.number()) * pow(a[0], e.number() - 1.0) * (*this)(a[0]);
      case Op::neg: return -(*this)(a[0]);
      case Op::exp: return e * (*this)(a[0]);
      case Op::log: return (*this)(a[0]) / a[0];
      case Op::sqrt: return (*this)(a[0]) / (Expr(2.0) * e);
      case Op::sin: return cos(a[0]) * (*this)(a[0]);
      case Op::cos: return -(sin(a[0]) * (*this)(a[0]));
      case Op::integral: {
        const Var dummy = e.var();
        const Expr& body = a[0];
        const Expr& upper = a[1];
        Expr boundary = Substituter(dummy, upper)(body) * (*this)(upper);
        if (dummy == var_) return boundary;
        return boundary + integral(Differentiator(var_)(body), dummy, e.number(), upper);
      }
      case Op::inverse: {
        const Expr slope_at = Substituter(Var::x, e)(a[2]);
        const Expr dtarget = (*this)(a[1]);
        if (var_ == Var::x) return dtarget / slope_at;
        const Expr dforward = Substituter(Var::x, e)(Differentiator(var_)(a[0]));
        return (dtarget - dforward) / slope_at;
      }
      case Op::tabulated:
        return e.node()->table->derivative(e.node()->order, a[0]) * (*this)(a[0]);
    }
    return Expr(0.0);
  }
};

}  // namespace detail

/// e with every free occurrence of v replaced by `replacement`.
inline Expr substitute(const Expr& e, Var v, const Expr& replacement) {
  return detail::Substituter(v, replacement)(e);
}

/// Exact partial derivative of e with respect to v.
inline Expr differentiate(const Expr& e, Var v) { return detail::Differentiator(v)(e); }

inline Expr differentiate(const Expr& e, Var v, int times) {
  Expr r = e;
  for (int i = 0; i < times; ++i) r = differentiate(r, v);
  return r;
}

// ---------------------------------------------------------------------------
// Sampling and identity tests.

/// Region sampled by identity tests and residual checks. Unset t / w ranges
/// mean the expression must not depend on that variable.
struct SampleBox {
  Interval x = Interval::real_line();
  std::optional<Interval> t;
  std::optional<Interval> w;
};

/// Chebyshev tensor points covering the box: 64 points in one variable,
/// 12x12 in two, 6x6x6 in three.
inline std::vector<Bindings> sample_points(const SampleBox& box) {
  const int dims = 1 + (box.t ? 1 : 0) + (box.w ? 1 : 0);
  const int n = dims == 1 ? 64 : (dims == 2 ? 12 : 6);
  auto nodes = [n](const Interval& iv) {
    const Interval win = iv.window();
    return chebyshev_nodes(win.lo, win.hi, n);
  };
  const auto xs = nodes(box.x);
  const std::vector<double> ts = box.t ? nodes(*box.t) : std::vector<double>{0.0};
  const std::vector<double> ws = box.w ? nodes(*box.w) : std::vector<double>{0.0};
  std::vector<Bindings> pts;
  pts.reserve(xs.size() * ts.size() * ws.size());
  for (double x : xs) {
    for (double t : ts) {
      for (double w : ws) {
        pts.emplace_back(x, box.t ? std::optional<double>(t) : std::nullopt,
                         box.w ? std::optional<double>(w) : std::nullopt);
      }
    }
  }
  return pts;
}

/// Probabilistic identity test: e is declared identically zero when
/// |e| < tol * (1 + scale) at every non-singular sample point, scale being
/// the largest sub-term magnitude at that point. Throws IndeterminateError
/// when every sample point is singular.
inline bool is_identically_zero(const Expr& e, const SampleBox& box, double tol = 1e-9) {
  if (e.is_constant()) return e.number() == 0.0;
  std::size_t usable = 0;
  for (const auto& p : sample_points(box)) {
    ScaledValue sv{};
    try {
      sv = evaluate_scaled(e, p);
    } catch (const DomainError&) {
      continue;
    } catch (const NumericalError&) {
      continue;
    }
    ++usable;
    if (!(std::abs(sv.value) < tol * (1.0 + sv.scale))) return false;
  }
  if (usable == 0) throw IndeterminateError("identity test: every sample point is singular");
  return true;
}

inline bool is_identically_zero(const Expr& e, const Interval& x_interval, double tol = 1e-9) {
  return is_identically_zero(e, SampleBox{x_interval, std::nullopt, std::nullopt}, tol);
}

/// max |e| over the given points; singular points propagate as errors.
inline double sup_norm(const Expr& e, const std::vector<Bindings>& points) {
  double m = 0.0;
  for (const auto& p : points) m = std::max(m, std::abs(evaluate(e, p)));
  return m;
}

/// max |e| / (1 + scale) over the given points, where scale is the largest
/// sub-term magnitude at that point.
inline double scaled_sup_norm(const Expr& e, const std::vector<Bindings>& points) {
  double m = 0.0;
  for (const auto& p : points) {
    const ScaledValue sv = evaluate_scaled(e, p);
    m = std::max(m, std::abs(sv.value) / (1.0 + sv.scale));
  }
  return m;
}

}  // namespace stochsym
