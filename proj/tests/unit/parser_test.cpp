#include <gtest/gtest.h>

#include "pfil/emit.hpp"
#include "support.hpp"

using namespace pfil;
using namespace pfil::testing;

TEST(Parser, CorpusRoundTrips) {
  int files = 0;
  for (const auto& entry : fs::directory_iterator(PFIL_CORPUS_DIR)) {
    if (entry.path().extension() != ".pfil") continue;
    ++files;
    const std::string text = slurp(entry.path());
    const Program p = parse(text, entry.path().string());
    const std::string printed = print_program(p);
    const Program again = parse(printed, "printed");
    EXPECT_EQ(p, again) << entry.path() << "\n" << printed;
    EXPECT_EQ(print_program(again), printed) << entry.path();
  }
  EXPECT_GE(files, 20);
}

TEST(Parser, SyntaxErrorCarriesLocation) {
  try {
    parse("comp A<'G:1>(x: ['G, 'G+1] 32) -> () {\n  y := ;\n}", "bad.pfil");
    FAIL() << "expected a syntax error";
  } catch (const CompileError& e) {
    EXPECT_EQ(e.kind(), "syntax error");
    EXPECT_EQ(e.loc().file, "bad.pfil");
    EXPECT_EQ(e.loc().line, 2);
  }
}

TEST(Parser, BundleAndLoopSyntax) {
  const Program p = parse(slurp(corpus("shift.pfil")));
  const Component* c = p.find_component("Shift");
  ASSERT_NE(c, nullptr);
  ASSERT_EQ(c->sig.params.size(), 1u);
  EXPECT_EQ(c->sig.where.size(), 1u);
  const auto* b = c->body.front().as<BundleDecl>();
  ASSERT_NE(b, nullptr);
  EXPECT_EQ(b->port.index_vars, std::vector<std::string>{"i"});
  bool saw_loop = false;
  for (const auto& cmd : c->body) saw_loop |= cmd.as<ForLoop>() != nullptr;
  EXPECT_TRUE(saw_loop);
}

TEST(Parser, DefaultParamsAndSomeConstraints) {
  const Program p = parse(slurp(corpus("iterfft.pfil")));
  const Component* c = p.find_component("IterFFT");
  ASSERT_NE(c, nullptr);
  ASSERT_EQ(c->sig.params.size(), 2u);
  ASSERT_TRUE(c->sig.params[1].default_value.has_value());
  EXPECT_EQ(to_string(*c->sig.params[1].default_value), "N/2");
  EXPECT_EQ(c->sig.out_params(), std::vector<std::string>{"L"});
}

TEST(Resolve, UnknownComponentIsRejected) {
  try {
    load_text("comp A<'G:1>(x: ['G, 'G+1] 32) -> () { B := new Missing; }");
    FAIL() << "expected a resolution error";
  } catch (const CompileError& e) {
    EXPECT_NE(e.message().find("Missing"), std::string::npos);
  }
}

TEST(Resolve, GeneratedModulesAreQualified) {
  const Env env = load({"muladd.pfil"});
  const auto m = env.lookup("mulgen.Mul");
  ASSERT_TRUE(m.has_value());
  EXPECT_EQ(m->kind, ModuleRef::Kind::Generated);
  EXPECT_TRUE(env.lookup("Mul").has_value());
}
