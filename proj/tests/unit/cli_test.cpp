#include <gtest/gtest.h>

#include <sys/wait.h>

#include "support.hpp"

using namespace pfil::testing;

namespace {

int run(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(PFIL_PFILC) + " " + args + " > " + log.string() + " 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string solver_flag() { return z3_path().empty() ? "" : " --solver " + z3_path(); }

}  // namespace

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli");
  const auto log = dir / "log.txt";
  if (!z3_path().empty()) {
    EXPECT_EQ(run("check " + corpus("shift.pfil") + solver_flag(), log), 0) << slurp(log);
    EXPECT_EQ(run("check " + corpus("alu_avail_bug.pfil") + solver_flag(), log), 1);
  }
  EXPECT_EQ(run("check " + corpus("shift.pfil"), log), 2) << slurp(log);
  EXPECT_NE(slurp(log).find("--solver"), std::string::npos);
  EXPECT_EQ(run("check /no/such/file.pfil", log), 3);
  EXPECT_EQ(run("elaborate " + corpus("shift.pfil") + " --entry Nope --out " + (dir / "o").string(),
                log),
            3);
  EXPECT_EQ(run("elaborate " + corpus("muladd_cycle.pfil") + " --entry Cycle --out " +
                    (dir / "o").string(),
                log),
            4);
}

TEST(Cli, ElaborateThenSimulate) {
  const auto dir = scratch("cli-elab");
  const auto log = dir / "log.txt";
  const auto out = dir / "out";
  ASSERT_EQ(run("elaborate " + corpus("shift.pfil") + " --entry Shift --param N=4 --out " +
                    out.string(),
                log),
            0)
      << slurp(log);
  EXPECT_TRUE(fs::exists(out / "Shift.concrete.pfil"));
  EXPECT_TRUE(fs::exists(out / "externals.pfil"));
  EXPECT_NE(slurp(out / "manifest.txt").find("unit Shift_4"), std::string::npos);
  const std::string files = (out / "Shift.concrete.pfil").string() + " " + (out / "externals.pfil").string();
  EXPECT_EQ(run("simulate " + files + " --horizon 32", log), 0) << slurp(log);
  EXPECT_EQ(run("simulate " + files + " --horizon 0", log), 3);
}

TEST(Cli, JsonReport) {
  if (z3_path().empty()) GTEST_SKIP();
  const auto dir = scratch("cli-report");
  const auto rep = dir / "r.jsonl";
  run("check " + corpus("sq2_intra_bug.pfil") + solver_flag() + " --report " + rep.string(),
      dir / "log.txt");
  const std::string text = slurp(rep);
  EXPECT_NE(text.find("\"category\":\"instance-conflict\""), std::string::npos) << text;
  EXPECT_NE(text.find("\"verdict\":\"refuted\""), std::string::npos) << text;
}
