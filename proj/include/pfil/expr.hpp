#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace pfil {

/// Concrete values for parameters, loop indices and qualified output
/// parameters (`inst::P`).
using Binding = std::map<std::string, std::uint64_t>;

/// Raised when a parameter expression cannot be evaluated: underflowing
/// subtraction, division by zero, log2(0), overflow or an unbound name.
class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by normalize() for expressions that are malformed independent of
/// any binding, such as `N / 0`.
class MalformedExpr : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class BinOp { Add, Sub, Mul, Div, Mod };
enum class Builtin { Pow2, Log2, BitRev };

const char* to_string(BinOp op);
const char* to_string(Builtin fn);
std::optional<Builtin> builtin_from_name(const std::string& name);
std::size_t builtin_arity(Builtin fn);

struct ExprNode;

/// Immutable natural-number expression over named parameters. Copies share
/// structure.
class Expr {
 public:
  Expr();  // the literal 0

  static Expr nat(std::uint64_t value);
  static Expr var(std::string name);
  static Expr bin(BinOp op, Expr lhs, Expr rhs);
  static Expr call(Builtin fn, std::vector<Expr> args);

  const ExprNode& node() const { return *node_; }

  bool is_nat() const;
  std::optional<std::uint64_t> as_nat() const;
  bool is_var() const;
  const std::string* as_var() const;

  friend bool operator==(const Expr& a, const Expr& b);
  friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }
  /// Total structural order, used for canonical operand ordering.
  friend bool operator<(const Expr& a, const Expr& b);

 private:
  explicit Expr(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const ExprNode> node_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);

struct NatLit {
  std::uint64_t value;
};
struct VarRef {
  std::string name;
};
struct BinExpr {
  BinOp op;
  Expr lhs;
  Expr rhs;
};
struct CallExpr {
  Builtin fn;
  std::vector<Expr> args;
};

struct ExprNode {
  std::variant<NatLit, VarRef, BinExpr, CallExpr> v;
};

std::set<std::string> free_vars(const Expr& e);
void collect_free_vars(const Expr& e, std::set<std::string>& out);

/// Constant-folds closed subtrees, drops additive/multiplicative identities
/// and orders commutative operands canonically. Idempotent.
Expr normalize(const Expr& e);

/// Replaces variables by expressions; names absent from `s` are kept.
Expr substitute(const Expr& e, const std::map<std::string, Expr>& s);

/// Exact evaluation over naturals.
std::uint64_t evaluate(const Expr& e, const Binding& b);

/// Evaluation over signed integers, matching SMT-LIB integer semantics
/// (Euclidean div/mod, subtraction may go negative). Used to validate solver
/// models, which are integer models.
__int128 evaluate_int(const Expr& e, const std::map<std::string, __int128>& b);

std::uint64_t builtin_apply(Builtin fn, const std::vector<std::uint64_t>& args);

std::string to_string(const Expr& e);

/// Calls `f(lhs, rhs)` for every subtraction node in `e`.
template <typename F>
void for_each_sub(const Expr& e, F&& f);

/// Calls `f(divisor)` for every division/modulo node and `f(arg)` for log2.
template <typename F>
void for_each_partial(const Expr& e, F&& f);

// ---------------------------------------------------------------------------
// Boolean formulas over comparisons of expressions.

enum class CmpOp { Lt, Le, Gt, Ge, Eq, Ne };
const char* to_string(CmpOp op);

struct FormulaNode;

class Formula {
 public:
  Formula();  // true

  static Formula truth(bool v);
  static Formula cmp(CmpOp op, Expr lhs, Expr rhs);
  static Formula conj(std::vector<Formula> parts);
  static Formula disj(std::vector<Formula> parts);
  static Formula negate(Formula f);
  static Formula implies(Formula a, Formula b);

  const FormulaNode& node() const { return *node_; }
  bool is_true() const;
  bool is_false() const;

  friend bool operator==(const Formula& a, const Formula& b);
  friend bool operator!=(const Formula& a, const Formula& b) { return !(a == b); }

 private:
  explicit Formula(std::shared_ptr<const FormulaNode> n) : node_(std::move(n)) {}
  std::shared_ptr<const FormulaNode> node_;
};

Formula operator&&(const Formula& a, const Formula& b);
Formula operator||(const Formula& a, const Formula& b);
Formula operator!(const Formula& a);
Formula le(const Expr& a, const Expr& b);
Formula lt(const Expr& a, const Expr& b);
Formula eq(const Expr& a, const Expr& b);

struct BoolLit {
  bool value;
};
struct CmpF {
  CmpOp op;
  Expr lhs;
  Expr rhs;
};
struct AndF {
  std::vector<Formula> parts;
};
struct OrF {
  std::vector<Formula> parts;
};
struct NotF {
  Formula inner;
};
struct ImpliesF {
  Formula lhs;
  Formula rhs;
};

struct FormulaNode {
  std::variant<BoolLit, CmpF, AndF, OrF, NotF, ImpliesF> v;
};

std::set<std::string> free_vars(const Formula& f);
void collect_free_vars(const Formula& f, std::set<std::string>& out);
Formula substitute(const Formula& f, const std::map<std::string, Expr>& s);
Formula normalize(const Formula& f);
bool evaluate(const Formula& f, const Binding& b);
bool evaluate_int(const Formula& f, const std::map<std::string, __int128>& b);
std::string to_string(const Formula& f);

/// Visits every expression appearing in a comparison.
template <typename F>
void for_each_expr(const Formula& f, F&& fn);

// ---------------------------------------------------------------------------

template <typename F>
void for_each_sub(const Expr& e, F&& f) {
  const auto& n = e.node().v;
  if (const auto* b = std::get_if<BinExpr>(&n)) {
    if (b->op == BinOp::Sub) f(b->lhs, b->rhs);
    for_each_sub(b->lhs, f);
    for_each_sub(b->rhs, f);
  } else if (const auto* c = std::get_if<CallExpr>(&n)) {
    for (const auto& a : c->args) for_each_sub(a, f);
  }
}

template <typename F>
void for_each_partial(const Expr& e, F&& f) {
  const auto& n = e.node().v;
  if (const auto* b = std::get_if<BinExpr>(&n)) {
    if (b->op == BinOp::Div || b->op == BinOp::Mod) f(b->rhs, false);
    for_each_partial(b->lhs, f);
    for_each_partial(b->rhs, f);
  } else if (const auto* c = std::get_if<CallExpr>(&n)) {
    if (c->fn == Builtin::Log2) f(c->args.at(0), true);
    for (const auto& a : c->args) for_each_partial(a, f);
  }
}

template <typename F>
void for_each_expr(const Formula& f, F&& fn) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, CmpF>) {
          fn(n.lhs);
          fn(n.rhs);
        } else if constexpr (std::is_same_v<T, AndF> || std::is_same_v<T, OrF>) {
          for (const auto& p : n.parts) for_each_expr(p, fn);
        } else if constexpr (std::is_same_v<T, NotF>) {
          for_each_expr(n.inner, fn);
        } else if constexpr (std::is_same_v<T, ImpliesF>) {
          for_each_expr(n.lhs, fn);
          for_each_expr(n.rhs, fn);
        }
      },
      f.node().v);
}

}  // namespace pfil
