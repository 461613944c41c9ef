#include <gtest/gtest.h>

#include "pfil/elaborate.hpp"
#include "pfil/emit.hpp"
#include "pfil/gen.hpp"
#include "support.hpp"

using namespace pfil;
using namespace pfil::testing;

namespace {

std::string config_error(const std::string& text) {
  try {
    parse_config(text, "t.toml");
  } catch (const CompileError& e) {
    return e.message();
  }
  return "";
}

GenOptions opts_in(const fs::path& dir) {
  GenOptions go;
  go.cache_dir = (dir / "cache").string();
  go.out_dir = (dir / "out").string();
  return go;
}

std::string gen_error(Generator& g, const ToolConfig& t, const std::string& m, const Binding& b) {
  try {
    g.generate(t, m, b);
  } catch (const CompileError& e) {
    EXPECT_EQ(e.kind(), "generator error");
    return e.message();
  }
  return "";
}

}  // namespace

TEST(GenConfig, ParsesToolDescription) {
  const ToolConfig t = load_config(corpus("flopoco.toml"));
  EXPECT_EQ(t.tool, "flopoco");
  EXPECT_EQ(t.path, "flopoco");
  ASSERT_EQ(t.modules.count("FPExp"), 1u);
  const auto& m = t.modules.at("FPExp");
  EXPECT_EQ(m.parameters, (std::vector<std::string>{"E", "M"}));
  EXPECT_EQ(m.cli, "FPExp ${M} ${E}");
  EXPECT_EQ(m.name_template, "FPE${E}_${M}");
  EXPECT_EQ(m.outputs.at("L"), "depth");
}

TEST(GenConfig, RejectsMalformedConfigs) {
  EXPECT_NE(config_error("[modules.A]\ncli = \"x\"\n"), "");  // no path
  EXPECT_NE(config_error("path = \"t\"\nbogus = 1\n"), "");
  EXPECT_NE(config_error("path = \"t\"\npath = \"u\"\n"), "");
  EXPECT_NE(config_error("path = \"t\"\n[modules.A]\nparameters = [\"W\"]\ncli = \"${X}\"\n"), "");
  EXPECT_NE(config_error("path = \"t\n"), "");
}

TEST(GenConfig, Interpolate) {
  EXPECT_EQ(interpolate("FPE${E}_${M}", {{"E", "16"}, {"M", "4"}}), "FPE16_4");
  EXPECT_THROW(interpolate("${Q}", {}), CompileError);
}

TEST(Generator, RunsToolAndCaches) {
  use_fixture_path();
  const auto dir = scratch("gen-cache");
  const ToolConfig t = load_config(corpus("mul.toml"));
  {
    Generator g(opts_in(dir));
    const GenResult r = g.generate(t, "Mul", {{"W", 40}});
    EXPECT_EQ(r.module_name, "Mul_40");
    EXPECT_EQ(r.out_bindings.at("L"), 4u);
    EXPECT_FALSE(r.cache_hit);
    EXPECT_TRUE(fs::exists(r.verilog_path));
    // Same request in one run: no second execution.
    EXPECT_EQ(g.generate(t, "Mul", {{"W", 40}}).out_bindings.at("L"), 4u);
    EXPECT_EQ(g.executions(), 1u);
  }
  {
    Generator g(opts_in(dir));
    const GenResult r = g.generate(t, "Mul", {{"W", 40}});
    EXPECT_TRUE(r.cache_hit);
    EXPECT_EQ(r.out_bindings.at("L"), 4u);
    EXPECT_EQ(g.executions(), 0u);
  }
  {
    GenOptions go = opts_in(dir);
    go.use_cache = false;
    Generator g(go);
    EXPECT_FALSE(g.generate(t, "Mul", {{"W", 40}}).cache_hit);
    EXPECT_EQ(g.executions(), 1u);
  }
}

TEST(Generator, CacheKeyDependsOnConfigAndParams) {
  const ToolConfig a = load_config(corpus("mul.toml"));
  ToolConfig b = a;
  b.content += "\n# edited\n";
  EXPECT_NE(gen_cache_key(a, "Mul", {{"W", 8}}), gen_cache_key(a, "Mul", {{"W", 9}}));
  EXPECT_NE(gen_cache_key(a, "Mul", {{"W", 8}}), gen_cache_key(b, "Mul", {{"W", 8}}));
  EXPECT_EQ(gen_cache_key(a, "Mul", {{"W", 8}}), gen_cache_key(a, "Mul", {{"W", 8}}));
}

TEST(Generator, ErrorPaths) {
  use_fixture_path();
  const auto dir = scratch("gen-errors");
  Generator g(opts_in(dir));

  ToolConfig missing = parse_config(
      "path = \"no-such-generator-tool\"\n[modules.A]\nparameters = [\"W\"]\ncli = \"${W}\"\n"
      "name = \"A_${W}\"\noutputs.L = \"depth\"\n",
      "missing.toml");
  EXPECT_NE(gen_error(g, missing, "A", {{"W", 1}}), "");

  ToolConfig failing = parse_config(
      "path = \"flopoco\"\n[modules.A]\nparameters = [\"W\"]\ncli = \"Bogus ${W}\"\n"
      "name = \"A_${W}\"\noutputs.L = \"depth\"\n",
      "failing.toml");
  const std::string nonzero = gen_error(g, failing, "A", {{"W", 1}});
  EXPECT_NE(nonzero.find("exited with status"), std::string::npos) << nonzero;

  ToolConfig silent = parse_config(
      "path = \"mock_pipeline\"\n[modules.A]\nparameters = [\"W\"]\ncli = \"A ${W}\"\n"
      "name = \"A_${W}\"\noutputs.L = \"depth\"\n",
      "silent.toml");
  const std::string noscrape = gen_error(g, silent, "A", {{"W", 1}});
  EXPECT_NE(noscrape.find("depth"), std::string::npos) << noscrape;

  const ToolConfig mul = load_config(corpus("mul.toml"));
  EXPECT_NE(gen_error(g, mul, "Nope", {{"W", 1}}), "");
}

TEST(Generator, ConcretizesFPExpSignature) {
  use_fixture_path();
  const auto dir = scratch("gen-fpexp");
  Generator g(opts_in(dir));
  const Env env = load({"fpexp.pfil"});
  const auto cp = elaborate(env, "ExpUse", {}, &g);
  const Signature* s = cp.find_signature("FPE16_4");
  ASSERT_NE(s, nullptr);
  EXPECT_EQ(print_external(*s),
            "ext comp FPE16_4<'G:1>(clk: 1, X: ['G, 'G+1] 23, Y: ['G, 'G+1] 23) -> "
            "(R: ['G+3, 'G+4] 23);\n");
  EXPECT_TRUE(fs::exists(dir / "out" / "FPE16_4.v"));
}
