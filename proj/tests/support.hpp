#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pfil/parser.hpp"
#include "pfil/resolve.hpp"
#include "pfil/typecheck.hpp"

namespace pfil::testing {

namespace fs = std::filesystem;

inline std::string corpus(const std::string& name) { return std::string(PFIL_CORPUS_DIR) + "/" + name; }

inline std::string z3_path() { return PFIL_Z3; }

inline Env load(const std::vector<std::string>& names) {
  std::vector<std::string> paths;
  for (const auto& n : names) paths.push_back(corpus(n));
  return resolve_program(parse_files(paths));
}

inline Env load_text(const std::string& text) { return resolve_program(parse(text)); }

inline std::vector<ComponentReport> check(const Env& env, bool symbolic = true) {
  CheckOptions o;
  if (symbolic) o.solver = z3_path();
  return check_program(env, o);
}

inline const ComponentReport& report_for(const std::vector<ComponentReport>& rs,
                                         const std::string& name) {
  for (const auto& r : rs)
    if (r.component == name) return r;
  throw std::runtime_error("no report for " + name);
}

// Fresh directory for one test's files.
inline fs::path scratch(const std::string& name) {
  const char* base = std::getenv("PFIL_TEST_TMP");
  fs::path dir = base ? fs::path(base) : fs::temp_directory_path() / "pfil-tests";
  dir /= name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return fs::absolute(dir);
}

// Puts the mock generators first on PATH (idempotent).
inline void use_fixture_path() {
  const std::string bin = PFIL_FIXTURE_BIN;
  const char* cur = std::getenv("PATH");
  std::string path = cur ? cur : "";
  if (path.rfind(bin + ":", 0) == 0) return;
  setenv("PATH", (bin + ":" + path).c_str(), 1);
}

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace pfil::testing
