#include <gtest/gtest.h>

#include "pfil/elaborate.hpp"
#include "pfil/emit.hpp"
#include "pfil/eval.hpp"
#include "support.hpp"

using namespace pfil;
using namespace pfil::testing;

namespace {

const char* kLat = R"(
comp Lat[N]<'G:1>(in: ['G, 'G+1] 32) -> (out: ['G+L, 'G+L+1] 32) with { some L; } {
  out = in;
  L <- 0;
}
)";

std::string kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const CompileError& e) {
    return e.kind() + ": " + e.message();
  }
  return "";
}

std::vector<const Instantiate*> instances(const Component& c) {
  std::vector<const Instantiate*> out;
  for (const auto& cmd : c.body)
    if (const auto* i = cmd.as<Instantiate>()) out.push_back(i);
  return out;
}

}  // namespace

TEST(TopoOrder, DefinitionsFollowOutputParamUses) {
  const Env env = load_text(std::string(kLat) + R"(
comp Top<'G:1>(in: ['G, 'G+1] 32) -> (out: ['G, 'G+1] 32) {
  A := new Lat[B::L + 1];
  B := new Lat[2];
  a := A<'G>(in);
  b := B<'G>(in);
  out = in;
}
)");
  const auto& body = env.program().find_component("Top")->body;
  const auto order = topo_order(body);
  auto pos = [&](std::size_t idx) {
    return std::find(order.begin(), order.end(), idx) - order.begin();
  };
  EXPECT_LT(pos(1), pos(0));
}

TEST(TopoOrder, CycleIsReported) {
  const Env env = load({"muladd_cycle.pfil"});
  const auto msg = kind_of([&] { topo_order(env.program().find_component("Cycle")->body); });
  EXPECT_NE(msg.find("elaboration error"), std::string::npos) << msg;
  EXPECT_NE(msg.find("A -> B -> A"), std::string::npos) << msg;
}

TEST(Eval, SmartMulPicksLatencyByWidth) {
  const Env env = load({"smartmul.pfil"});
  for (const auto& [w, l, inst] : std::vector<std::tuple<std::uint64_t, std::uint64_t, std::string>>{
           {2, 0, "CombMult_2"}, {8, 2, "FastMult_8"}, {9, 4, "SlowMult_9"}, {32, 4, "SlowMult_32"}}) {
    const auto cp = elaborate(env, "SmartMul", {{"W", w}}, nullptr);
    const auto& top = cp.units.back();
    EXPECT_EQ(top.out.at("L"), l) << w;
    const auto insts = instances(*cp.program.find_component(top.name));
    ASSERT_EQ(insts.size(), 1u);
    EXPECT_EQ(insts[0]->component, inst);
  }
}

TEST(Eval, PermUnrollsStridePermutation) {
  const Env env = load({"perm.pfil"});
  const auto cp = elaborate(env, "Perm", {{"Stages", 2}, {"W", 8}}, nullptr);
  const Component* c = cp.program.find_component("Perm_2_8");
  ASSERT_NE(c, nullptr);
  EXPECT_TRUE(is_concrete(*c));
  std::map<std::uint64_t, std::uint64_t> wiring;
  for (const auto& cmd : c->body)
    if (const auto* k = cmd.as<Connect>())
      wiring[*k->dst.indices[0].lo->as_nat()] = *k->src.indices[0].lo->as_nat();
  EXPECT_EQ(wiring, (std::map<std::uint64_t, std::uint64_t>{{0, 0}, {1, 2}, {2, 1}, {3, 3}}));
}

TEST(Eval, WhereClauseRecheckedWithConcreteArgs) {
  const Env env = load({"shift.pfil"});
  const auto msg = kind_of([&] { elaborate(env, "Shift", {{"N", 0}}, nullptr); });
  EXPECT_NE(msg.find("N > 0"), std::string::npos) << msg;
}

TEST(Eval, MissingParameterIsAnError) {
  const Env env = load({"shift.pfil"});
  EXPECT_NE(kind_of([&] { elaborate(env, "Shift", {}, nullptr); }), "");
}

TEST(Eval, DefaultParameterIsFilledIn) {
  const Env env = load({"iterfft.pfil"});
  const auto cp = elaborate(env, "IterFFT", {{"N", 8}}, nullptr);
  EXPECT_EQ(cp.units.back().name, "IterFFT_8_4");
}

TEST(Eval, MangleAndConcretize) {
  EXPECT_EQ(mangle("Shift", {32, 3}), "Shift_32_3");
  EXPECT_EQ(mangle("mulgen.Mul", {32}), "mulgen_Mul_32");
  const Env env = load({"shift.pfil"});
  const Signature sig =
      concretize(*env.program().find_external("Reg"), {{"W", 32}}, {}, "Reg_32");
  EXPECT_EQ(print_external(sig),
            "ext comp Reg_32<'T:1>(in: ['T, 'T+1] 32) -> (out: ['T+1, 'T+2] 32);\n");
}

TEST(Elaborate, ShiftChainsRegisters) {
  const Env env = load({"shift.pfil"});
  for (std::uint64_t n : {1, 4, 16}) {
    const auto cp = elaborate(env, "Shift", {{"N", n}}, nullptr);
    const Component* c = cp.program.find_component("Shift_" + std::to_string(n));
    ASSERT_NE(c, nullptr);
    std::map<std::string, std::uint64_t> invoked_at;
    std::size_t regs = 0;
    for (const auto& cmd : c->body) {
      if (const auto* i = cmd.as<Instantiate>()) regs += i->component == "Reg_32";
      if (const auto* v = cmd.as<Invoke>())
        invoked_at[v->instance] = *normalize(v->events[0].offset).as_nat();
    }
    EXPECT_EQ(regs, n);
    for (std::uint64_t k = 0; k < n; ++k) EXPECT_EQ(invoked_at.at("R_" + std::to_string(k)), k);
  }
}

TEST(Elaborate, UnitsAreSharedAcrossInstances) {
  const Env env = load_text(R"(
ext comp Reg[W]<'T:1>(in: ['T, 'T+1] W) -> (out: ['T+1, 'T+2] W);
comp Two<'G:1>(a: ['G, 'G+1] 32) -> (o: ['G+2, 'G+3] 32) {
  A := new Reg[32]; B := new Reg[32];
  x := A<'G>(a); y := B<'G+1>(x.out); o = y.out;
}
)");
  const auto cp = elaborate(env, "Two", {}, nullptr);
  EXPECT_EQ(cp.units.size(), 2u);
  EXPECT_EQ(cp.program.externals.size(), 1u);
}

TEST(Elaborate, DepthLimitStopsRunawayRecursion) {
  const Env env = load_text(R"(
comp Deep[N]<'G:1>(in: ['G, 'G+1] 32) -> (out: ['G, 'G+1] 32) {
  D := new Deep[N+1]; d := D<'G>(in); out = d.out;
}
)");
  ElabOptions opts;
  opts.depth_limit = 8;
  const auto msg = kind_of([&] { elaborate(env, "Deep", {{"N", 0}}, nullptr, opts); });
  EXPECT_NE(msg.find("elaboration error"), std::string::npos) << msg;
  EXPECT_NE(msg.find("Deep[7]"), std::string::npos) << msg;
}

TEST(Elaborate, ExternalWithOutputParamsIsRejected) {
  const Env env = load({"wrap_loose.pfil"});
  EXPECT_NE(kind_of([&] { elaborate(env, "WrapLoose", {{"W", 8}}, nullptr); }), "");
}

TEST(Elaborate, CycleBetweenInstancesIsRejected) {
  const Env env = load({"muladd_cycle.pfil"});
  const auto msg = kind_of([&] { elaborate(env, "Cycle", {}, nullptr); });
  EXPECT_NE(msg.find("cyclic output parameter dependency"), std::string::npos) << msg;
}

TEST(Elaborate, GeneratedModuleThreadsLatency) {
  use_fixture_path();
  const auto dir = scratch("elab-muladd");
  GenOptions go;
  go.cache_dir = (dir / "cache").string();
  go.out_dir = (dir / "out").string();
  Generator gen(go);
  const Env env = load({"muladd.pfil"});
  const auto cp = elaborate(env, "MulAdd", {}, &gen);
  EXPECT_NE(cp.program.find_component("Shift_32_3"), nullptr);
  const std::string m = manifest(cp);
  EXPECT_NE(m.find("binding M::L = 3"), std::string::npos) << m;
  EXPECT_TRUE(fs::exists(dir / "out" / "Mul_32.v"));
  EXPECT_EQ(gen.executions(), 1u);
}

TEST(Elaborate, GeneratedModuleNeedsGenerator) {
  const Env env = load({"muladd.pfil"});
  EXPECT_NE(kind_of([&] { elaborate(env, "MulAdd", {}, nullptr); }), "");
}
