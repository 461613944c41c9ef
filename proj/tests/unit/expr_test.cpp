#include <gtest/gtest.h>

#include <random>

#include "pfil/expr.hpp"
#include "pfil/parser.hpp"

using namespace pfil;

namespace {

Expr random_expr(std::mt19937_64& rng, int depth) {
  static const char* vars[] = {"N", "W", "K"};
  std::uniform_int_distribution<int> d(0, 9);
  const int k = d(rng);
  if (depth == 0 || k < 3) {
    if (k % 2) return Expr::nat(d(rng));
    return Expr::var(vars[d(rng) % 3]);
  }
  Expr a = random_expr(rng, depth - 1), b = random_expr(rng, depth - 1);
  switch (k) {
    case 3:
    case 4: return a + b;
    case 5: return a * b;
    case 6: return Expr::bin(BinOp::Div, a, b + Expr::nat(1));
    case 7: return Expr::call(Builtin::Pow2, {Expr::bin(BinOp::Mod, a, Expr::nat(5))});
    case 8: return Expr::call(Builtin::Log2, {a + Expr::nat(1)});
    default: return (a + b) - b;
  }
}

}  // namespace

TEST(Expr, NormalizeIsIdempotentAndPreservesValue) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const Expr e = random_expr(rng, 4);
    const Expr n = normalize(e);
    ASSERT_EQ(normalize(n), n) << to_string(e);
    for (std::uint64_t v = 0; v < 4; ++v) {
      const Binding b{{"N", v}, {"W", v + 3}, {"K", 2 * v}};
      ASSERT_EQ(evaluate(e, b), evaluate(n, b)) << to_string(e) << " vs " << to_string(n);
    }
  }
}

TEST(Expr, NormalizeFoldsConstants) {
  EXPECT_EQ(normalize(parse_expr("2 + 3 * 4")), Expr::nat(14));
  EXPECT_EQ(to_string(normalize(parse_expr("1 + N + 2"))), to_string(normalize(parse_expr("N + 3"))));
  EXPECT_EQ(normalize(parse_expr("(N + 1) - (N + 1)")), Expr::nat(0));
  EXPECT_EQ(normalize(parse_expr("N * 1 + 0")), Expr::var("N"));
  EXPECT_EQ(normalize(parse_expr("pow2(3)")), Expr::nat(8));
}

TEST(Expr, FreeVars) {
  EXPECT_EQ(free_vars(parse_expr("N + W*2")), (std::set<std::string>{"N", "W"}));
  EXPECT_TRUE(free_vars(parse_expr("3 + pow2(2)")).empty());
  EXPECT_EQ(free_vars(parse_expr("bit_rev(i, Stages)")), (std::set<std::string>{"Stages", "i"}));
  EXPECT_EQ(free_vars(parse_formula("L >= II && II > 0")), (std::set<std::string>{"II", "L"}));
}

TEST(Expr, Builtins) {
  EXPECT_EQ(builtin_apply(Builtin::Pow2, {5}), 32u);
  EXPECT_EQ(builtin_apply(Builtin::Log2, {8}), 3u);
  EXPECT_EQ(builtin_apply(Builtin::Log2, {9}), 4u);  // rounds up
  EXPECT_EQ(builtin_apply(Builtin::BitRev, {1, 3}), 4u);
  EXPECT_EQ(builtin_apply(Builtin::BitRev, {6, 3}), 3u);
  EXPECT_THROW(builtin_apply(Builtin::Log2, {0}), EvalError);
}

TEST(Expr, EvaluateErrors) {
  EXPECT_THROW(evaluate(parse_expr("N - 3"), {{"N", 2}}), EvalError);
  EXPECT_THROW(evaluate(parse_expr("N / 0"), {{"N", 2}}), EvalError);
  EXPECT_THROW(evaluate(parse_expr("M + 1"), {{"N", 2}}), EvalError);
  EXPECT_EQ(evaluate(parse_expr("N / 2"), {{"N", 7}}), 3u);
}

TEST(Expr, PrintParseRoundTrip) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    const Expr e = random_expr(rng, 3);
    ASSERT_EQ(parse_expr(to_string(e)), e) << to_string(e);
  }
}

TEST(Formula, NormalizeDecidesClosedComparisons) {
  EXPECT_TRUE(normalize(parse_formula("2 + 2 == 4")).is_true());
  EXPECT_TRUE(normalize(parse_formula("N + 1 <= N + 1")).is_true());
  EXPECT_TRUE(normalize(parse_formula("3 < 1")).is_false());
  EXPECT_FALSE(normalize(parse_formula("N < 4")).is_true());
}
