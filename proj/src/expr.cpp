#include "pfil/expr.hpp"

#include <algorithm>
#include <sstream>

namespace pfil {

const char* to_string(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Mod: return "%";
  }
  return "?";
}

const char* to_string(Builtin fn) {
  switch (fn) {
    case Builtin::Pow2: return "pow2";
    case Builtin::Log2: return "log2";
    case Builtin::BitRev: return "bit_rev";
  }
  return "?";
}

std::optional<Builtin> builtin_from_name(const std::string& name) {
  if (name == "pow2") return Builtin::Pow2;
  if (name == "log2") return Builtin::Log2;
  if (name == "bit_rev") return Builtin::BitRev;
  return std::nullopt;
}

std::size_t builtin_arity(Builtin fn) { return fn == Builtin::BitRev ? 2 : 1; }

// ---------------------------------------------------------------------------

Expr::Expr() : node_(std::make_shared<const ExprNode>(ExprNode{NatLit{0}})) {}

Expr Expr::nat(std::uint64_t value) {
  return Expr(std::make_shared<const ExprNode>(ExprNode{NatLit{value}}));
}
Expr Expr::var(std::string name) {
  return Expr(std::make_shared<const ExprNode>(ExprNode{VarRef{std::move(name)}}));
}
Expr Expr::bin(BinOp op, Expr lhs, Expr rhs) {
  return Expr(std::make_shared<const ExprNode>(
      ExprNode{BinExpr{op, std::move(lhs), std::move(rhs)}}));
}
Expr Expr::call(Builtin fn, std::vector<Expr> args) {
  if (args.size() != builtin_arity(fn))
    throw MalformedExpr(std::string(to_string(fn)) + " takes " +
                        std::to_string(builtin_arity(fn)) + " argument(s)");
  return Expr(std::make_shared<const ExprNode>(ExprNode{CallExpr{fn, std::move(args)}}));
}

bool Expr::is_nat() const { return std::holds_alternative<NatLit>(node_->v); }
std::optional<std::uint64_t> Expr::as_nat() const {
  if (const auto* n = std::get_if<NatLit>(&node_->v)) return n->value;
  return std::nullopt;
}
bool Expr::is_var() const { return std::holds_alternative<VarRef>(node_->v); }
const std::string* Expr::as_var() const {
  if (const auto* v = std::get_if<VarRef>(&node_->v)) return &v->name;
  return nullptr;
}

namespace {

int compare(const Expr& a, const Expr& b);

int rank(const ExprNode& n) {
  // Constants sort last so sums print as `N+1`.
  switch (n.v.index()) {
    case 1: return 0;  // var
    case 2: return 1;  // bin
    case 3: return 2;  // call
    default: return 3; // nat
  }
}

int compare(const Expr& a, const Expr& b) {
  if (&a.node() == &b.node()) return 0;
  int ra = rank(a.node()), rb = rank(b.node());
  if (ra != rb) return ra < rb ? -1 : 1;
  const auto& na = a.node().v;
  const auto& nb = b.node().v;
  if (const auto* x = std::get_if<NatLit>(&na)) {
    auto y = std::get<NatLit>(nb).value;
    return x->value == y ? 0 : (x->value < y ? -1 : 1);
  }
  if (const auto* x = std::get_if<VarRef>(&na)) {
    return x->name.compare(std::get<VarRef>(nb).name) < 0
               ? -1
               : (x->name == std::get<VarRef>(nb).name ? 0 : 1);
  }
  if (const auto* x = std::get_if<BinExpr>(&na)) {
    const auto& y = std::get<BinExpr>(nb);
    if (x->op != y.op) return static_cast<int>(x->op) < static_cast<int>(y.op) ? -1 : 1;
    if (int c = compare(x->lhs, y.lhs)) return c;
    return compare(x->rhs, y.rhs);
  }
  const auto& x = std::get<CallExpr>(na);
  const auto& y = std::get<CallExpr>(nb);
  if (x.fn != y.fn) return static_cast<int>(x.fn) < static_cast<int>(y.fn) ? -1 : 1;
  for (std::size_t i = 0; i < std::min(x.args.size(), y.args.size()); ++i)
    if (int c = compare(x.args[i], y.args[i])) return c;
  return x.args.size() == y.args.size() ? 0 : (x.args.size() < y.args.size() ? -1 : 1);
}

}  // namespace

bool operator==(const Expr& a, const Expr& b) { return compare(a, b) == 0; }
bool operator<(const Expr& a, const Expr& b) { return compare(a, b) < 0; }

Expr operator+(const Expr& a, const Expr& b) { return Expr::bin(BinOp::Add, a, b); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::bin(BinOp::Sub, a, b); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::bin(BinOp::Mul, a, b); }

// ---------------------------------------------------------------------------

void collect_free_vars(const Expr& e, std::set<std::string>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, VarRef>) {
          out.insert(n.name);
        } else if constexpr (std::is_same_v<T, BinExpr>) {
          collect_free_vars(n.lhs, out);
          collect_free_vars(n.rhs, out);
        } else if constexpr (std::is_same_v<T, CallExpr>) {
          for (const auto& a : n.args) collect_free_vars(a, out);
        }
      },
      e.node().v);
}

std::set<std::string> free_vars(const Expr& e) {
  std::set<std::string> out;
  collect_free_vars(e, out);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw EvalError("arithmetic overflow");
  return r;
}
std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw EvalError("arithmetic overflow");
  return r;
}

std::uint64_t apply_bin(BinOp op, std::uint64_t a, std::uint64_t b) {
  switch (op) {
    case BinOp::Add: return checked_add(a, b);
    case BinOp::Sub:
      if (b > a)
        throw EvalError("subtraction underflow: " + std::to_string(a) + "-" + std::to_string(b));
      return a - b;
    case BinOp::Mul: return checked_mul(a, b);
    case BinOp::Div:
      if (b == 0) throw EvalError("division by zero");
      return a / b;
    case BinOp::Mod:
      if (b == 0) throw EvalError("modulo by zero");
      return a % b;
  }
  return 0;
}

void flatten(BinOp op, const Expr& e, std::vector<Expr>& out) {
  if (const auto* b = std::get_if<BinExpr>(&e.node().v); b && b->op == op) {
    flatten(op, b->lhs, out);
    flatten(op, b->rhs, out);
  } else {
    out.push_back(e);
  }
}

Expr rebuild(BinOp op, std::vector<Expr> terms, std::uint64_t constant, std::uint64_t unit) {
  std::sort(terms.begin(), terms.end());
  if (constant != unit || terms.empty()) terms.push_back(Expr::nat(constant));
  Expr acc = terms.front();
  for (std::size_t i = 1; i < terms.size(); ++i) acc = Expr::bin(op, acc, terms[i]);
  return acc;
}

Expr normalize_bin(BinOp op, const Expr& l, const Expr& r) {
  auto lc = l.as_nat();
  auto rc = r.as_nat();
  switch (op) {
    case BinOp::Add:
    case BinOp::Mul: {
      std::vector<Expr> parts;
      flatten(op, l, parts);
      flatten(op, r, parts);
      const std::uint64_t unit = op == BinOp::Add ? 0 : 1;
      std::uint64_t constant = unit;
      std::vector<Expr> terms;
      for (auto& p : parts) {
        if (auto c = p.as_nat()) {
          try {
            constant = op == BinOp::Add ? checked_add(constant, *c) : checked_mul(constant, *c);
          } catch (const EvalError& err) {
            throw MalformedExpr(err.what());
          }
        } else {
          terms.push_back(p);
        }
      }
      if (op == BinOp::Mul && constant == 0) return Expr::nat(0);
      return rebuild(op, std::move(terms), constant, unit);
    }
    case BinOp::Sub:
      if (rc && *rc == 0) return l;
      if (lc && rc) {
        if (*rc > *lc)
          throw MalformedExpr("constant subtraction underflows: " + std::to_string(*lc) + "-" +
                              std::to_string(*rc));
        return Expr::nat(*lc - *rc);
      }
      if (l == r) return Expr::nat(0);
      return Expr::bin(op, l, r);
    case BinOp::Div:
    case BinOp::Mod:
      if (rc && *rc == 0)
        throw MalformedExpr(op == BinOp::Div ? "division by constant zero"
                                             : "modulo by constant zero");
      if (rc && *rc == 1) return op == BinOp::Div ? l : Expr::nat(0);
      if (lc && rc) return Expr::nat(apply_bin(op, *lc, *rc));
      if (lc && *lc == 0 && rc) return Expr::nat(0);
      return Expr::bin(op, l, r);
  }
  return Expr::bin(op, l, r);
}

}  // namespace

Expr normalize(const Expr& e) {
  return std::visit(
      [&](const auto& n) -> Expr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, NatLit> || std::is_same_v<T, VarRef>) {
          return e;
        } else if constexpr (std::is_same_v<T, BinExpr>) {
          return normalize_bin(n.op, normalize(n.lhs), normalize(n.rhs));
        } else {
          std::vector<Expr> args;
          std::vector<std::uint64_t> vals;
          bool closed = true;
          for (const auto& a : n.args) {
            args.push_back(normalize(a));
            if (auto c = args.back().as_nat())
              vals.push_back(*c);
            else
              closed = false;
          }
          if (closed) {
            try {
              return Expr::nat(builtin_apply(n.fn, vals));
            } catch (const EvalError& err) {
              throw MalformedExpr(err.what());
            }
          }
          return Expr::call(n.fn, std::move(args));
        }
      },
      e.node().v);
}

Expr substitute(const Expr& e, const std::map<std::string, Expr>& s) {
  return std::visit(
      [&](const auto& n) -> Expr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, NatLit>) {
          return e;
        } else if constexpr (std::is_same_v<T, VarRef>) {
          auto it = s.find(n.name);
          return it == s.end() ? e : it->second;
        } else if constexpr (std::is_same_v<T, BinExpr>) {
          return Expr::bin(n.op, substitute(n.lhs, s), substitute(n.rhs, s));
        } else {
          std::vector<Expr> args;
          for (const auto& a : n.args) args.push_back(substitute(a, s));
          return Expr::call(n.fn, std::move(args));
        }
      },
      e.node().v);
}

std::uint64_t builtin_apply(Builtin fn, const std::vector<std::uint64_t>& args) {
  switch (fn) {
    case Builtin::Pow2:
      if (args.at(0) >= 64) throw EvalError("pow2 overflow");
      return std::uint64_t{1} << args[0];
    case Builtin::Log2: {
      if (args.at(0) == 0) throw EvalError("log2(0) is undefined");
      std::uint64_t k = 0;
      while ((std::uint64_t{1} << k) < args[0]) ++k;  // ceiling
      return k;
    }
    case Builtin::BitRev: {
      const auto v = args.at(0);
      const auto w = args.at(1);
      if (w >= 64) throw EvalError("bit_rev width too large");
      std::uint64_t r = 0;
      for (std::uint64_t i = 0; i < w; ++i)
        if (v & (std::uint64_t{1} << i)) r |= std::uint64_t{1} << (w - 1 - i);
      return r;
    }
  }
  return 0;
}

std::uint64_t evaluate(const Expr& e, const Binding& b) {
  return std::visit(
      [&](const auto& n) -> std::uint64_t {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, NatLit>) {
          return n.value;
        } else if constexpr (std::is_same_v<T, VarRef>) {
          auto it = b.find(n.name);
          if (it == b.end()) throw EvalError("unbound parameter `" + n.name + "`");
          return it->second;
        } else if constexpr (std::is_same_v<T, BinExpr>) {
          return apply_bin(n.op, evaluate(n.lhs, b), evaluate(n.rhs, b));
        } else {
          std::vector<std::uint64_t> vals;
          for (const auto& a : n.args) vals.push_back(evaluate(a, b));
          return builtin_apply(n.fn, vals);
        }
      },
      e.node().v);
}

__int128 evaluate_int(const Expr& e, const std::map<std::string, __int128>& b) {
  constexpr __int128 kLimit = (__int128{1} << 100);
  auto guard = [&](__int128 v) {
    if (v > kLimit || v < -kLimit) throw EvalError("arithmetic overflow");
    return v;
  };
  return std::visit(
      [&](const auto& n) -> __int128 {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, NatLit>) {
          return static_cast<__int128>(n.value);
        } else if constexpr (std::is_same_v<T, VarRef>) {
          auto it = b.find(n.name);
          return it == b.end() ? 0 : it->second;
        } else if constexpr (std::is_same_v<T, BinExpr>) {
          const __int128 x = evaluate_int(n.lhs, b);
          const __int128 y = evaluate_int(n.rhs, b);
          switch (n.op) {
            case BinOp::Add: return guard(x + y);
            case BinOp::Sub: return guard(x - y);
            case BinOp::Mul: return guard(x * y);
            case BinOp::Div:
            case BinOp::Mod: {
              if (y == 0) throw EvalError("division by zero");
              __int128 q = x / y;
              __int128 r = x % y;
              if (r < 0) {  // Euclidean: remainder is always non-negative
                if (y > 0) { q -= 1; r += y; } else { q += 1; r -= y; }
              }
              return n.op == BinOp::Div ? q : r;
            }
          }
          return 0;
        } else {
          std::vector<std::uint64_t> vals;
          for (const auto& a : n.args) {
            const __int128 v = evaluate_int(a, b);
            if (v < 0 || v > static_cast<__int128>(UINT64_MAX))
              throw EvalError(std::string(to_string(n.fn)) + " of an out-of-range value");
            vals.push_back(static_cast<std::uint64_t>(v));
          }
          return static_cast<__int128>(builtin_apply(n.fn, vals));
        }
      },
      e.node().v);
}

namespace {

int precedence(const Expr& e) {
  if (const auto* b = std::get_if<BinExpr>(&e.node().v))
    return (b->op == BinOp::Add || b->op == BinOp::Sub) ? 1 : 2;
  return 3;
}

void print(std::ostream& os, const Expr& e) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, NatLit>) {
          os << n.value;
        } else if constexpr (std::is_same_v<T, VarRef>) {
          os << n.name;
        } else if constexpr (std::is_same_v<T, BinExpr>) {
          const int p = precedence(e);
          const bool lp = precedence(n.lhs) < p;
          const bool rp = precedence(n.rhs) <= p;
          if (lp) os << '(';
          print(os, n.lhs);
          if (lp) os << ')';
          os << to_string(n.op);
          if (rp) os << '(';
          print(os, n.rhs);
          if (rp) os << ')';
        } else {
          os << to_string(n.fn) << '(';
          for (std::size_t i = 0; i < n.args.size(); ++i) {
            if (i) os << ", ";
            print(os, n.args[i]);
          }
          os << ')';
        }
      },
      e.node().v);
}

}  // namespace

std::string to_string(const Expr& e) {
  std::ostringstream os;
  print(os, e);
  return os.str();
}

// ---------------------------------------------------------------------------
// Formulas

const char* to_string(CmpOp op) {
  switch (op) {
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
    case CmpOp::Eq: return "==";
    case CmpOp::Ne: return "!=";
  }
  return "?";
}

Formula::Formula() : node_(std::make_shared<const FormulaNode>(FormulaNode{BoolLit{true}})) {}

Formula Formula::truth(bool v) {
  return Formula(std::make_shared<const FormulaNode>(FormulaNode{BoolLit{v}}));
}
Formula Formula::cmp(CmpOp op, Expr lhs, Expr rhs) {
  return Formula(std::make_shared<const FormulaNode>(
      FormulaNode{CmpF{op, std::move(lhs), std::move(rhs)}}));
}

Formula Formula::conj(std::vector<Formula> parts) {
  std::vector<Formula> flat;
  for (auto& p : parts) {
    if (p.is_true()) continue;
    if (p.is_false()) return truth(false);
    if (const auto* a = std::get_if<AndF>(&p.node().v))
      flat.insert(flat.end(), a->parts.begin(), a->parts.end());
    else
      flat.push_back(std::move(p));
  }
  if (flat.empty()) return truth(true);
  if (flat.size() == 1) return flat.front();
  return Formula(std::make_shared<const FormulaNode>(FormulaNode{AndF{std::move(flat)}}));
}

Formula Formula::disj(std::vector<Formula> parts) {
  std::vector<Formula> flat;
  for (auto& p : parts) {
    if (p.is_false()) continue;
    if (p.is_true()) return truth(true);
    if (const auto* o = std::get_if<OrF>(&p.node().v))
      flat.insert(flat.end(), o->parts.begin(), o->parts.end());
    else
      flat.push_back(std::move(p));
  }
  if (flat.empty()) return truth(false);
  if (flat.size() == 1) return flat.front();
  return Formula(std::make_shared<const FormulaNode>(FormulaNode{OrF{std::move(flat)}}));
}

Formula Formula::negate(Formula f) {
  if (f.is_true()) return truth(false);
  if (f.is_false()) return truth(true);
  return Formula(std::make_shared<const FormulaNode>(FormulaNode{NotF{std::move(f)}}));
}

Formula Formula::implies(Formula a, Formula b) {
  if (a.is_true()) return b;
  if (a.is_false() || b.is_true()) return truth(true);
  return Formula(
      std::make_shared<const FormulaNode>(FormulaNode{ImpliesF{std::move(a), std::move(b)}}));
}

bool Formula::is_true() const {
  const auto* b = std::get_if<BoolLit>(&node_->v);
  return b && b->value;
}
bool Formula::is_false() const {
  const auto* b = std::get_if<BoolLit>(&node_->v);
  return b && !b->value;
}

bool operator==(const Formula& a, const Formula& b) {
  const auto& x = a.node().v;
  const auto& y = b.node().v;
  if (x.index() != y.index()) return false;
  return std::visit(
      [&](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        const auto& m = std::get<T>(y);
        if constexpr (std::is_same_v<T, BoolLit>) return n.value == m.value;
        if constexpr (std::is_same_v<T, CmpF>)
          return n.op == m.op && n.lhs == m.lhs && n.rhs == m.rhs;
        if constexpr (std::is_same_v<T, AndF> || std::is_same_v<T, OrF>) return n.parts == m.parts;
        if constexpr (std::is_same_v<T, NotF>) return n.inner == m.inner;
        if constexpr (std::is_same_v<T, ImpliesF>) return n.lhs == m.lhs && n.rhs == m.rhs;
        return false;
      },
      x);
}

Formula operator&&(const Formula& a, const Formula& b) { return Formula::conj({a, b}); }
Formula operator||(const Formula& a, const Formula& b) { return Formula::disj({a, b}); }
Formula operator!(const Formula& a) { return Formula::negate(a); }
Formula le(const Expr& a, const Expr& b) { return Formula::cmp(CmpOp::Le, a, b); }
Formula lt(const Expr& a, const Expr& b) { return Formula::cmp(CmpOp::Lt, a, b); }
Formula eq(const Expr& a, const Expr& b) { return Formula::cmp(CmpOp::Eq, a, b); }

void collect_free_vars(const Formula& f, std::set<std::string>& out) {
  for_each_expr(f, [&](const Expr& e) { collect_free_vars(e, out); });
}

std::set<std::string> free_vars(const Formula& f) {
  std::set<std::string> out;
  collect_free_vars(f, out);
  return out;
}

Formula substitute(const Formula& f, const std::map<std::string, Expr>& s) {
  return std::visit(
      [&](const auto& n) -> Formula {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, BoolLit>) {
          return f;
        } else if constexpr (std::is_same_v<T, CmpF>) {
          return Formula::cmp(n.op, substitute(n.lhs, s), substitute(n.rhs, s));
        } else if constexpr (std::is_same_v<T, AndF> || std::is_same_v<T, OrF>) {
          std::vector<Formula> parts;
          for (const auto& p : n.parts) parts.push_back(substitute(p, s));
          return std::is_same_v<T, AndF> ? Formula::conj(std::move(parts))
                                         : Formula::disj(std::move(parts));
        } else if constexpr (std::is_same_v<T, NotF>) {
          return Formula::negate(substitute(n.inner, s));
        } else {
          return Formula::implies(substitute(n.lhs, s), substitute(n.rhs, s));
        }
      },
      f.node().v);
}

namespace {

template <typename V>
bool compare_values(CmpOp op, V a, V b) {
  switch (op) {
    case CmpOp::Lt: return a < b;
    case CmpOp::Le: return a <= b;
    case CmpOp::Gt: return a > b;
    case CmpOp::Ge: return a >= b;
    case CmpOp::Eq: return a == b;
    case CmpOp::Ne: return a != b;
  }
  return false;
}

template <typename Eval>
bool eval_formula(const Formula& f, Eval&& ev) {
  return std::visit(
      [&](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, BoolLit>) {
          return n.value;
        } else if constexpr (std::is_same_v<T, CmpF>) {
          return compare_values(n.op, ev(n.lhs), ev(n.rhs));
        } else if constexpr (std::is_same_v<T, AndF>) {
          for (const auto& p : n.parts)
            if (!eval_formula(p, ev)) return false;
          return true;
        } else if constexpr (std::is_same_v<T, OrF>) {
          for (const auto& p : n.parts)
            if (eval_formula(p, ev)) return true;
          return false;
        } else if constexpr (std::is_same_v<T, NotF>) {
          return !eval_formula(n.inner, ev);
        } else {
          return !eval_formula(n.lhs, ev) || eval_formula(n.rhs, ev);
        }
      },
      f.node().v);
}

}  // namespace

bool evaluate(const Formula& f, const Binding& b) {
  return eval_formula(f, [&](const Expr& e) { return evaluate(e, b); });
}

bool evaluate_int(const Formula& f, const std::map<std::string, __int128>& b) {
  return eval_formula(f, [&](const Expr& e) { return evaluate_int(e, b); });
}

Formula normalize(const Formula& f) {
  return std::visit(
      [&](const auto& n) -> Formula {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, BoolLit>) {
          return f;
        } else if constexpr (std::is_same_v<T, CmpF>) {
          auto l = normalize(n.lhs);
          auto r = normalize(n.rhs);
          if (auto lc = l.as_nat()) {
            if (auto rc = r.as_nat()) return Formula::truth(compare_values(n.op, *lc, *rc));
          }
          if (to_string(l) == to_string(r)) return Formula::truth(compare_values(n.op, 0, 0));
          return Formula::cmp(n.op, l, r);
        } else if constexpr (std::is_same_v<T, AndF> || std::is_same_v<T, OrF>) {
          std::vector<Formula> parts;
          for (const auto& p : n.parts) parts.push_back(normalize(p));
          return std::is_same_v<T, AndF> ? Formula::conj(std::move(parts))
                                         : Formula::disj(std::move(parts));
        } else if constexpr (std::is_same_v<T, NotF>) {
          return Formula::negate(normalize(n.inner));
        } else {
          return Formula::implies(normalize(n.lhs), normalize(n.rhs));
        }
      },
      f.node().v);
}

namespace {

void print(std::ostream& os, const Formula& f, int ctx) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, BoolLit>) {
          os << (n.value ? "true" : "false");
        } else if constexpr (std::is_same_v<T, CmpF>) {
          os << to_string(n.lhs) << ' ' << to_string(n.op) << ' ' << to_string(n.rhs);
        } else if constexpr (std::is_same_v<T, AndF> || std::is_same_v<T, OrF>) {
          const int p = std::is_same_v<T, AndF> ? 2 : 1;
          if (ctx > p) os << '(';
          for (std::size_t i = 0; i < n.parts.size(); ++i) {
            if (i) os << (p == 2 ? " && " : " || ");
            print(os, n.parts[i], p + 1);
          }
          if (ctx > p) os << ')';
        } else if constexpr (std::is_same_v<T, NotF>) {
          os << "!(";
          print(os, n.inner, 0);
          os << ')';
        } else {
          if (ctx > 0) os << '(';
          print(os, n.lhs, 1);
          os << " => ";
          print(os, n.rhs, 1);
          if (ctx > 0) os << ')';
        }
      },
      f.node().v);
}

}  // namespace

std::string to_string(const Formula& f) {
  std::ostringstream os;
  print(os, f, 0);
  return os.str();
}

}  // namespace pfil
