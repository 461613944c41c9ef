#include <gtest/gtest.h>

#include <random>

#include "pfil/bundle_elim.hpp"
#include "pfil/elaborate.hpp"
#include "pfil/emit.hpp"
#include "pfil/simulate.hpp"
#include "random_program.hpp"
#include "support.hpp"

using namespace pfil;
using namespace pfil::testing;

namespace {

std::string bundle_error(const std::string& text, const std::string& entry) {
  try {
    const Env env = load_text(text);
    eliminate_bundles(elaborate(env, entry, {}, nullptr));
  } catch (const CompileError& e) {
    EXPECT_EQ(e.kind(), "bundle error");
    return e.message();
  }
  return "";
}

}  // namespace

TEST(BundleElim, FooGolden) {
  const Env env = load({"foo.pfil"});
  const auto flat = eliminate_bundles(elaborate(env, "Foo", {}, nullptr));
  EXPECT_EQ(print_component(*flat.program.find_component("Foo")),
            "comp Foo<'G:1>(in0: ['G, 'G+1] 32, in1: ['G+1, 'G+2] 32) -> (out: ['G, 'G+1] 32) {\n"
            "  out = in0;\n"
            "}\n");
}

TEST(BundleElim, ElementNames) {
  EXPECT_EQ(element_name("in", {0}), "in0");
  EXPECT_EQ(element_name("p", {0, 1}), "p0_1");
}

TEST(BundleElim, DanglingRead) {
  const auto msg = bundle_error(R"(
comp A<'G:1>(x: ['G, 'G+1] 32) -> (o: ['G, 'G+1] 32) {
  bundle w[2]: ['G, 'G+1] 32;
  w[0] = x;
  o = w[1];
}
)", "A");
  EXPECT_NE(msg.find("w"), std::string::npos) << msg;
}

TEST(BundleElim, DoubleWrite) {
  EXPECT_NE(bundle_error(R"(
comp A<'G:1>(x: ['G, 'G+1] 32) -> (o: ['G, 'G+1] 32) {
  bundle w[1]: ['G, 'G+1] 32;
  w[0] = x;
  w[0] = x;
  o = w[0];
}
)", "A"), "");
}

TEST(BundleElim, UnreadWriteIsOnlyALint) {
  const Env env = load_text(R"(
comp A<'G:1>(x: ['G, 'G+1] 32) -> (o: ['G, 'G+1] 32) {
  bundle w[2]: ['G, 'G+1] 32;
  w[0] = x; w[1] = x;
  o = w[0];
}
)");
  std::vector<std::string> lints;
  eliminate_bundles(elaborate(env, "A", {}, nullptr), &lints);
  EXPECT_EQ(lints.size(), 1u);
}

TEST(Simulate, ConcreteShiftIsClean) {
  const Env env = load({"shift.pfil"});
  const auto flat = eliminate_bundles(elaborate(env, "Shift", {{"N", 4}}, nullptr));
  const auto h = min_horizon(flat.program);
  for (const auto& r : simulate_concrete(flat.program, h + 8)) EXPECT_TRUE(r.passed()) << r.component;
}

TEST(Simulate, FindsPipeliningHazard) {
  const Env env = load({"addrep_delay_bug.pfil"});
  const auto flat = eliminate_bundles(elaborate(env, "AddRep", {{"K", 3}}, nullptr));
  const auto reps = simulate_concrete(flat.program, 32);
  bool found = false;
  for (const auto& r : reps) found |= r.categories().count(Category::DelayPipelining) > 0;
  EXPECT_TRUE(found);
}

TEST(Simulate, RefusesShortHorizon) {
  const Env env = load({"shift.pfil"});
  const auto flat = eliminate_bundles(elaborate(env, "Shift", {{"N", 4}}, nullptr));
  EXPECT_THROW(simulate_concrete(flat.program, 0), CompileError);
  EXPECT_THROW(simulate_concrete(flat.program, min_horizon(flat.program) - 1), CompileError);
}

TEST(Simulate, AgreesWithCheckerOnSmallSample) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 50; ++i) {
    const std::string text = random_program(rng);
    const Env env = load_text(text);
    const auto tc = report_for(check(env, false), "Top").failed_categories();
    std::set<Category> sim;
    for (const auto& r : simulate_concrete(env.program(), std::max<std::uint64_t>(min_horizon(env.program()), 16)))
      if (r.component == "Top") sim = r.categories();
    EXPECT_EQ(tc, sim) << text;
  }
}
