#include "fracritz/expr.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <sstream>

#include "fracritz/special_functions.hpp"

namespace fracritz {

using Node = Expr::Node;
using NodePtr = std::shared_ptr<const Node>;
using Kind = Expr::Kind;

std::string to_string(Symbol s) {
  switch (s) {
    case Symbol::X: return "x";
    case Symbol::Y: return "y";
    case Symbol::Yp: return "yp";
    case Symbol::D: return "D";
    case Symbol::U: return "u";
  }
  return "?";
}

std::string to_string(Func f) {
  switch (f) {
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Exp: return "exp";
    case Func::Ln: return "ln";
    case Func::Sqrt: return "sqrt";
    case Func::Abs: return "abs";
    case Func::Gamma: return "gamma";
  }
  return "?";
}

Symbol slot_symbol(Slot s) {
  switch (s) {
    case Slot::Y: return Symbol::Y;
    case Slot::Yp: return Symbol::Yp;
    case Slot::D: return Symbol::D;
    case Slot::U: return Symbol::U;
  }
  return Symbol::Y;
}

double EvalContext::get(Symbol s) const noexcept {
  switch (s) {
    case Symbol::X: return x;
    case Symbol::Y: return y;
    case Symbol::Yp: return yp;
    case Symbol::D: return D;
    case Symbol::U: return u;
  }
  return 0.0;
}

void EvalContext::set(Symbol s, double v) noexcept {
  switch (s) {
    case Symbol::X: x = v; break;
    case Symbol::Y: y = v; break;
    case Symbol::Yp: yp = v; break;
    case Symbol::D: D = v; break;
    case Symbol::U: u = v; break;
  }
}

SyntaxError::SyntaxError(const std::string& msg, std::size_t position)
    : Error(msg + " at position " + std::to_string(position)), position_(position) {}

EvalError::EvalError(const std::string& msg, long position)
    : Error(position >= 0 ? msg + " at position " + std::to_string(position) : msg),
      position_(position) {}

namespace {

// --- raw node construction (no simplification) -------------------------------

NodePtr make_constant(double v, long pos = -1) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Constant;
  n->value = v;
  n->position = pos;
  return n;
}

NodePtr make_variable(Symbol s, long pos = -1) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Variable;
  n->symbol = s;
  n->position = pos;
  return n;
}

NodePtr make_unary(Kind k, NodePtr arg, long pos = -1, Func f = Func::Sin) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->func = f;
  n->lhs = std::move(arg);
  n->position = pos;
  return n;
}

NodePtr make_binary(Kind k, NodePtr l, NodePtr r, long pos = -1) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->lhs = std::move(l);
  n->rhs = std::move(r);
  n->position = pos;
  return n;
}

bool is_const(const NodePtr& n, double v) {
  return n->kind == Kind::Constant && n->value == v;
}

bool both_const(const NodePtr& l, const NodePtr& r) {
  return l->kind == Kind::Constant && r->kind == Kind::Constant;
}

// Folds only when the result is finite, so printing never produces inf/nan.
bool foldable(double v) { return std::isfinite(v); }

// --- simplifying construction -------------------------------------------------

NodePtr s_neg(const NodePtr& a) {
  if (a->kind == Kind::Constant) return make_constant(-a->value);
  if (a->kind == Kind::Negate) return a->lhs;
  return make_unary(Kind::Negate, a);
}

NodePtr s_add(const NodePtr& l, const NodePtr& r) {
  if (is_const(l, 0.0)) return r;
  if (is_const(r, 0.0)) return l;
  if (both_const(l, r) && foldable(l->value + r->value)) {
    return make_constant(l->value + r->value);
  }
  return make_binary(Kind::Add, l, r);
}

NodePtr s_sub(const NodePtr& l, const NodePtr& r) {
  if (is_const(r, 0.0)) return l;
  if (is_const(l, 0.0)) return s_neg(r);
  if (both_const(l, r) && foldable(l->value - r->value)) {
    return make_constant(l->value - r->value);
  }
  return make_binary(Kind::Sub, l, r);
}

NodePtr s_mul(const NodePtr& l, const NodePtr& r) {
  if (is_const(l, 0.0) || is_const(r, 0.0)) return make_constant(0.0);
  if (is_const(l, 1.0)) return r;
  if (is_const(r, 1.0)) return l;
  if (is_const(l, -1.0)) return s_neg(r);
  if (is_const(r, -1.0)) return s_neg(l);
  if (both_const(l, r) && foldable(l->value * r->value)) {
    return make_constant(l->value * r->value);
  }
  return make_binary(Kind::Mul, l, r);
}

NodePtr s_div(const NodePtr& l, const NodePtr& r) {
  if (is_const(r, 1.0)) return l;
  if (is_const(l, 0.0) && !is_const(r, 0.0)) return make_constant(0.0);
  if (both_const(l, r) && r->value != 0.0 && foldable(l->value / r->value)) {
    return make_constant(l->value / r->value);
  }
  return make_binary(Kind::Div, l, r);
}

NodePtr s_pow(const NodePtr& base, const NodePtr& ex) {
  if (is_const(ex, 0.0)) return make_constant(1.0);
  if (is_const(ex, 1.0)) return base;
  if (both_const(base, ex)) {
    const double v = std::pow(base->value, ex->value);
    if (foldable(v)) return make_constant(v);
  }
  return make_binary(Kind::Pow, base, ex);
}

NodePtr s_call(Func f, const NodePtr& arg) {
  return make_unary(Kind::Call, arg, -1, f);
}

// --- parser ------------------------------------------------------------------

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr parse() {
    skip_ws();
    if (pos_ >= src_.size()) throw SyntaxError("empty expression", pos_);
    NodePtr e = expr();
    skip_ws();
    if (pos_ < src_.size()) {
      throw SyntaxError(std::string("unexpected '") + src_[pos_] + "'", pos_);
    }
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      skip_ws();
      const long at = static_cast<long>(pos_);
      if (accept('+')) {
        lhs = make_binary(Kind::Add, lhs, term(), at);
      } else if (accept('-')) {
        lhs = make_binary(Kind::Sub, lhs, term(), at);
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      skip_ws();
      const long at = static_cast<long>(pos_);
      if (accept('*')) {
        lhs = make_binary(Kind::Mul, lhs, unary(), at);
      } else if (accept('/')) {
        lhs = make_binary(Kind::Div, lhs, unary(), at);
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    skip_ws();
    const long at = static_cast<long>(pos_);
    if (accept('-')) {
      NodePtr operand = unary();
      // A negated literal is a negative constant, as the printer writes it.
      if (operand->kind == Kind::Constant) return make_constant(-operand->value, at);
      return make_unary(Kind::Negate, operand, at);
    }
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    skip_ws();
    const long at = static_cast<long>(pos_);
    if (accept('^')) return make_binary(Kind::Pow, base, unary(), at);
    return base;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= src_.size()) throw SyntaxError("unexpected end of input", pos_);
    const std::size_t start = pos_;
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = expr();
      if (!accept(')')) throw SyntaxError("expected ')'", pos_);
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
        ++pos_;
      }
      const std::string_view name = src_.substr(start, pos_ - start);
      skip_ws();
      if (pos_ < src_.size() && src_[pos_] == '(') {
        const Func f = lookup_function(name, start);
        ++pos_;
        NodePtr arg = expr();
        if (!accept(')')) throw SyntaxError("expected ')'", pos_);
        return make_unary(Kind::Call, arg, static_cast<long>(start), f);
      }
      return make_variable(lookup_symbol(name, start), static_cast<long>(start));
    }
    throw SyntaxError(std::string("unexpected '") + c + "'", pos_);
  }

  NodePtr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        digits();
      } else {
        pos_ = save;
      }
    }
    double v = 0.0;
    const char* first = src_.data() + start;
    const char* last = src_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
      throw SyntaxError("malformed number", start);
    }
    return make_constant(v, static_cast<long>(start));
  }

  static Symbol lookup_symbol(std::string_view name, std::size_t at) {
    if (name == "x" || name == "t") return Symbol::X;
    if (name == "y") return Symbol::Y;
    if (name == "yp") return Symbol::Yp;
    if (name == "D") return Symbol::D;
    if (name == "u") return Symbol::U;
    throw UnknownSymbolError("unknown symbol '" + std::string(name) + "'", at);
  }

  static Func lookup_function(std::string_view name, std::size_t at) {
    static constexpr std::array<std::pair<std::string_view, Func>, 7> table = {{
        {"sin", Func::Sin}, {"cos", Func::Cos}, {"exp", Func::Exp},
        {"ln", Func::Ln}, {"sqrt", Func::Sqrt}, {"abs", Func::Abs},
        {"gamma", Func::Gamma},
    }};
    for (const auto& [n, f] : table) {
      if (n == name) return f;
    }
    throw UnknownFunctionError("unknown function '" + std::string(name) + "'", at);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

// --- evaluation ----------------------------------------------------------------

double eval_pow(double base, double ex, long pos) {
  const bool integral = ex == std::round(ex);
  if (base < 0.0 && !integral) {
    throw EvalError("fractional power of a negative number", pos);
  }
  if (base == 0.0 && ex < 0.0) throw EvalError("division by zero in power", pos);
  return std::pow(base, ex);
}

double eval_node(const Node& n, const EvalContext& ctx) {
  switch (n.kind) {
    case Kind::Constant: return n.value;
    case Kind::Variable: return ctx.get(n.symbol);
    case Kind::Negate: return -eval_node(*n.lhs, ctx);
    case Kind::Add: return eval_node(*n.lhs, ctx) + eval_node(*n.rhs, ctx);
    case Kind::Sub: return eval_node(*n.lhs, ctx) - eval_node(*n.rhs, ctx);
    case Kind::Mul: return eval_node(*n.lhs, ctx) * eval_node(*n.rhs, ctx);
    case Kind::Div: {
      const double num = eval_node(*n.lhs, ctx);
      const double den = eval_node(*n.rhs, ctx);
      if (den == 0.0) throw EvalError("division by zero", n.position);
      return num / den;
    }
    case Kind::Pow:
      return eval_pow(eval_node(*n.lhs, ctx), eval_node(*n.rhs, ctx), n.position);
    case Kind::Call: {
      const double a = eval_node(*n.lhs, ctx);
      switch (n.func) {
        case Func::Sin: return std::sin(a);
        case Func::Cos: return std::cos(a);
        case Func::Exp: return std::exp(a);
        case Func::Ln:
          if (!(a > 0.0)) throw EvalError("ln of a non-positive number", n.position);
          return std::log(a);
        case Func::Sqrt:
          if (a < 0.0) throw EvalError("sqrt of a negative number", n.position);
          return std::sqrt(a);
        case Func::Abs: return std::abs(a);
        case Func::Gamma:
          try {
            return gamma(a);
          } catch (const Error& e) {
            throw EvalError(e.what(), n.position);
          }
      }
    }
  }
  return 0.0;
}

// --- structure helpers ---------------------------------------------------------

bool node_references(const Node& n, Symbol s) {
  if (n.kind == Kind::Variable) return n.symbol == s;
  if (n.lhs && node_references(*n.lhs, s)) return true;
  if (n.rhs && node_references(*n.rhs, s)) return true;
  return false;
}

NodePtr derive(const NodePtr& n, Symbol s) {
  if (!node_references(*n, s)) return make_constant(0.0);
  switch (n->kind) {
    case Kind::Constant: return make_constant(0.0);
    case Kind::Variable: return make_constant(1.0);
    case Kind::Negate: return s_neg(derive(n->lhs, s));
    case Kind::Add: return s_add(derive(n->lhs, s), derive(n->rhs, s));
    case Kind::Sub: return s_sub(derive(n->lhs, s), derive(n->rhs, s));
    case Kind::Mul:
      return s_add(s_mul(derive(n->lhs, s), n->rhs), s_mul(n->lhs, derive(n->rhs, s)));
    case Kind::Div: {
      // (l/r)' = l'/r - l r'/r^2
      const NodePtr dl = derive(n->lhs, s);
      const NodePtr dr = derive(n->rhs, s);
      return s_sub(s_div(dl, n->rhs),
                   s_div(s_mul(n->lhs, dr), s_pow(n->rhs, make_constant(2.0))));
    }
    case Kind::Pow: {
      const NodePtr& base = n->lhs;
      const NodePtr& ex = n->rhs;
      const bool base_dep = node_references(*base, s);
      const bool ex_dep = node_references(*ex, s);
      if (!ex_dep) {
        const NodePtr reduced = s_sub(ex, make_constant(1.0));
        return s_mul(s_mul(ex, s_pow(base, reduced)), derive(base, s));
      }
      const NodePtr ln_base = s_call(Func::Ln, base);
      if (!base_dep) return s_mul(s_mul(n, ln_base), derive(ex, s));
      return s_mul(n, s_add(s_mul(derive(ex, s), ln_base),
                            s_div(s_mul(ex, derive(base, s)), base)));
    }
    case Kind::Call: {
      const NodePtr& a = n->lhs;
      const NodePtr da = derive(a, s);
      switch (n->func) {
        case Func::Sin: return s_mul(s_call(Func::Cos, a), da);
        case Func::Cos: return s_neg(s_mul(s_call(Func::Sin, a), da));
        case Func::Exp: return s_mul(n, da);
        case Func::Ln: return s_div(da, a);
        case Func::Sqrt: return s_div(da, s_mul(make_constant(2.0), n));
        case Func::Abs:
          throw UnsupportedDerivative("abs() is not differentiable with respect to " +
                                      to_string(s));
        case Func::Gamma:
          throw UnsupportedDerivative("gamma() of an argument depending on " +
                                      to_string(s) + " is not differentiable");
      }
    }
  }
  return make_constant(0.0);
}

NodePtr substitute_node(const NodePtr& n, Symbol s, const NodePtr& repl) {
  if (!node_references(*n, s)) return n;
  if (n->kind == Kind::Variable) return repl;
  auto copy = std::make_shared<Node>(*n);
  if (n->lhs) copy->lhs = substitute_node(n->lhs, s, repl);
  if (n->rhs) copy->rhs = substitute_node(n->rhs, s, repl);
  return copy;
}

bool nodes_equal(const Node& a, const Node& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Kind::Constant: return a.value == b.value;
    case Kind::Variable: return a.symbol == b.symbol;
    case Kind::Call:
      if (a.func != b.func) return false;
      break;
    default: break;
  }
  if (static_cast<bool>(a.lhs) != static_cast<bool>(b.lhs)) return false;
  if (static_cast<bool>(a.rhs) != static_cast<bool>(b.rhs)) return false;
  if (a.lhs && !nodes_equal(*a.lhs, *b.lhs)) return false;
  if (a.rhs && !nodes_equal(*a.rhs, *b.rhs)) return false;
  return true;
}

// --- printing -------------------------------------------------------------------

int precedence(const Node& n) {
  switch (n.kind) {
    case Kind::Add:
    case Kind::Sub: return 1;
    case Kind::Mul:
    case Kind::Div: return 2;
    case Kind::Negate: return 3;
    case Kind::Pow: return 4;
    default: return 5;
  }
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), std::abs(v));
  std::string digits(buf.data(), ptr);
  return v < 0.0 ? "(-" + digits + ")" : digits;
}

void print(const Node& n, std::string& out);

void print_child(const Node& child, bool parens, std::string& out) {
  if (parens) out += '(';
  print(child, out);
  if (parens) out += ')';
}

void print(const Node& n, std::string& out) {
  switch (n.kind) {
    case Kind::Constant: out += format_number(n.value); return;
    case Kind::Variable: out += to_string(n.symbol); return;
    case Kind::Negate:
      out += '-';
      print_child(*n.lhs, precedence(*n.lhs) < 3, out);
      return;
    case Kind::Call:
      out += to_string(n.func);
      out += '(';
      print(*n.lhs, out);
      out += ')';
      return;
    case Kind::Pow:
      print_child(*n.lhs, precedence(*n.lhs) <= 4, out);
      out += '^';
      print_child(*n.rhs, precedence(*n.rhs) < 3, out);
      return;
    default: {
      const int p = precedence(n);
      const char* op = n.kind == Kind::Add   ? " + "
                       : n.kind == Kind::Sub ? " - "
                       : n.kind == Kind::Mul ? " * "
                                             : " / ";
      print_child(*n.lhs, precedence(*n.lhs) < p, out);
      out += op;
      print_child(*n.rhs, precedence(*n.rhs) <= p, out);
      return;
    }
  }
}

}  // namespace

Expr::Expr() : node_(make_constant(0.0)) {}

Expr Expr::parse(std::string_view src) { return Expr(Parser(src).parse()); }

Expr Expr::constant(double v) { return Expr(make_constant(v)); }

Expr Expr::variable(Symbol s) { return Expr(make_variable(s)); }

double Expr::evaluate(const EvalContext& ctx) const { return eval_node(*node_, ctx); }

Expr Expr::partial(Slot slot) const { return Expr(derive(node_, slot_symbol(slot))); }

Expr Expr::substitute(Symbol s, const Expr& replacement) const {
  return Expr(substitute_node(node_, s, replacement.node_));
}

bool Expr::references(Symbol s) const { return node_references(*node_, s); }

std::string Expr::to_string() const {
  std::string out;
  print(*node_, out);
  return out;
}

bool Expr::structurally_equal(const Expr& other) const {
  return nodes_equal(*node_, *other.node_);
}

Expr operator+(const Expr& l, const Expr& r) { return Expr(s_add(l.node_, r.node_)); }
Expr operator-(const Expr& l, const Expr& r) { return Expr(s_sub(l.node_, r.node_)); }
Expr operator*(const Expr& l, const Expr& r) { return Expr(s_mul(l.node_, r.node_)); }
Expr operator/(const Expr& l, const Expr& r) { return Expr(s_div(l.node_, r.node_)); }
Expr operator-(const Expr& e) { return Expr(s_neg(e.node_)); }
Expr pow(const Expr& base, const Expr& exponent) {
  return Expr(s_pow(base.node_, exponent.node_));
}
Expr call(Func f, const Expr& arg) { return Expr(s_call(f, arg.node_)); }

}  // namespace fracritz
