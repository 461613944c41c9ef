#include <gtest/gtest.h>

#include <regex>
#include <sys/wait.h>

#include "support.hpp"

using namespace pfil::testing;

namespace {

struct ToolRun {
  int status;
  std::string out;
};

ToolRun mock(const std::string& args, const fs::path& work) {
  const std::string cmd = "cd " + work.string() + " && GEN_WORKDIR=" + work.string() + " " +
                          PFIL_FIXTURE_BIN + "/flopoco " + args + " > stdout.txt 2>/dev/null";
  const int st = std::system(cmd.c_str());
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, slurp(work / "stdout.txt")};
}

int depth(const std::string& out) {
  std::smatch m;
  static const std::regex re("(^|\n)depth = ([0-9]+)\n");
  EXPECT_TRUE(std::regex_search(out, m, re)) << out;
  return std::stoi(m[2]);
}

}  // namespace

TEST(MockFpcore, CalibratedAndDeterministic) {
  const auto dir = scratch("mock-fp");
  const ToolRun a = mock("FPExp 4 16", dir);
  ASSERT_EQ(a.status, 0);
  EXPECT_EQ(depth(a.out), 3);
  const std::string v1 = slurp(dir / "FPE16_4.v");
  EXPECT_FALSE(v1.empty());
  const ToolRun b = mock("FPExp 4 16", dir);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(v1, slurp(dir / "FPE16_4.v"));
}

TEST(MockFpcore, DepthGrowsWithFrequency) {
  const auto dir = scratch("mock-freq");
  int last = 0;
  for (int f : {100, 200, 400, 800}) {
    const ToolRun r = mock("FPAdd 23 8 " + std::to_string(f), dir);
    ASSERT_EQ(r.status, 0);
    const int d = depth(r.out);
    EXPECT_LE(last, d) << f;
    last = d;
  }
}

TEST(MockFpcore, UnknownOpFails) {
  const auto dir = scratch("mock-bad");
  EXPECT_NE(mock("Nonsense 4 16", dir).status, 0);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir)) files += e.path().extension() == ".v";
  EXPECT_EQ(files, 0u);
}
