// pfilc: check, elaborate and simulate parametric hardware components.
//
// Exit codes: 0 ok; 1 program rejected (refuted obligation, syntax or name
// error, failed simulation); 2 undecided obligations only; 3 usage or I/O
// error; 4 elaboration failure.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "pfil/bundle_elim.hpp"
#include "pfil/elaborate.hpp"
#include "pfil/emit.hpp"
#include "pfil/parser.hpp"
#include "pfil/resolve.hpp"
#include "pfil/simulate.hpp"
#include "pfil/typecheck.hpp"

namespace fs = std::filesystem;
using namespace pfil;

namespace {

enum Exit { kOk = 0, kRejected = 1, kUnknown = 2, kUsage = 3, kElab = 4 };

int exit_for(const CompileError& e) {
  const auto& k = e.kind();
  if (k == "usage error" || k == "io error") return kUsage;
  if (k == "elaboration error" || k == "evaluation error" || k == "generator error" ||
      k == "config error" || k == "bundle error")
    return kElab;
  return kRejected;
}

void print_error(const CompileError& e) {
  std::cerr << (e.loc().file.empty() ? "" : e.loc().str() + ": ") << e.kind() << ": " << e.message() << "\n";
}

nlohmann::json to_json(const std::string& component, const CheckedObligation& r) {
  nlohmann::json j;
  j["component"] = component;
  j["category"] = to_string(r.obligation.category);
  j["verdict"] = to_string(r.verdict.kind);
  j["loc"] = r.obligation.loc.str();
  j["note"] = r.obligation.note;
  if (r.verdict.kind == Verdict::Kind::Refuted) j["counterexample"] = r.verdict.counterexample;
  if (r.verdict.kind == Verdict::Kind::Unknown) j["reason"] = r.verdict.reason;
  return j;
}

/// Runs the checker and prints diagnostics; returns the exit status.
int run_check(const Env& env, const CheckOptions& opts, const std::string& report) {
  const auto reports = check_program(env, opts);
  bool refuted = false, unknown = false;
  std::ofstream rep;
  if (!report.empty()) {
    rep.open(report);
    if (!rep) throw CompileError("io error", "cannot write report `" + report + "`");
  }
  for (const auto& r : reports) {
    for (const auto& c : r.results) {
      if (rep) rep << to_json(r.component, c).dump() << "\n";
      if (c.verdict.kind == Verdict::Kind::Proven) continue;
      refuted |= c.verdict.kind == Verdict::Kind::Refuted;
      unknown |= c.verdict.kind == Verdict::Kind::Unknown;
      std::cerr << describe(c) << "\n";
    }
    for (const auto& t : r.trusted) std::cerr << "note: trusted " << t << "\n";
    std::cerr << r.component << ": " << (r.passed() ? "ok" : "failed") << " (" << r.results.size()
              << " obligations)\n";
  }
  return refuted ? kRejected : unknown ? kUnknown : kOk;
}

Binding parse_params(const std::vector<std::string>& kvs) {
  Binding b;
  for (const auto& kv : kvs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw CompileError("usage error", "expected --param NAME=VALUE, got `" + kv + "`");
    const std::string v = kv.substr(eq + 1);
    if (v.empty() || !std::all_of(v.begin(), v.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
      throw CompileError("usage error", "parameter value must be a natural number: `" + kv + "`");
    b[kv.substr(0, eq)] = std::stoull(v);
  }
  return b;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw CompileError("io error", "cannot write `" + p.string() + "`");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Type checker and elaborator for parametric hardware components"};
  app.require_subcommand(1);

  std::vector<std::string> files;
  std::string solver, report, entry, out_dir = "out";
  int timeout_ms = 10000;
  std::vector<std::string> params;
  bool unchecked = false, no_cache = false;
  int gen_jobs = 1;
  std::size_t depth_limit = 64;
  std::uint64_t horizon = 64;

  auto* check = app.add_subcommand("check", "Type-check every component");
  check->add_option("files", files, "Source files")->required();
  check->add_option("--solver", solver, "SMT-LIB solver executable (e.g. z3)");
  check->add_option("--timeout-ms", timeout_ms, "Per-obligation solver timeout");
  check->add_option("--report", report, "Write one JSON object per obligation");

  auto* elab = app.add_subcommand("elaborate", "Monomorphize from an entry component");
  elab->add_option("files", files, "Source files")->required();
  elab->add_option("--entry", entry, "Entry component")->required();
  elab->add_option("--param", params, "Entry parameter NAME=VALUE (repeatable)");
  elab->add_option("--out", out_dir, "Output directory");
  elab->add_option("--solver", solver, "SMT-LIB solver executable");
  elab->add_option("--timeout-ms", timeout_ms, "Per-obligation solver timeout");
  elab->add_option("--report", report, "Write one JSON object per obligation");
  elab->add_flag("--unchecked", unchecked, "Skip type checking");
  elab->add_option("--gen-jobs", gen_jobs, "Generator parallelism");
  elab->add_flag("--no-gen-cache", no_cache, "Always re-run generators");
  elab->add_option("--depth-limit", depth_limit, "Maximum instantiation depth");

  auto* sim = app.add_subcommand("simulate", "Cycle-level check of a parameter-free program");
  sim->add_option("files", files, "Concrete program files")->required();
  sim->add_option("--horizon", horizon, "Cycles to simulate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (check->parsed()) {
      Env env = resolve_program(parse_files(files));
      return run_check(env, {solver, timeout_ms}, report);
    }

    if (elab->parsed()) {
      (void)gen_jobs;  // elaboration runs generators one at a time
      Env env = resolve_program(parse_files(files));
      if (!env.lookup(entry) || env.lookup(entry)->kind != ModuleRef::Kind::Source)
        throw CompileError("usage error", "no component named `" + entry + "`");
      if (!unchecked && !solver.empty()) {
        const int st = run_check(env, {solver, timeout_ms}, report);
        if (st != kOk) return st;
      }
      fs::create_directories(out_dir);
      GenOptions go;
      go.cache_dir = (fs::path(out_dir) / ".gen-cache").string();
      go.use_cache = !no_cache;
      go.out_dir = out_dir;
      Generator gen(go);
      ElabOptions eo;
      eo.depth_limit = depth_limit;
      ConcreteProgram cp = elaborate(env, entry, parse_params(params), &gen, eo);
      if (!unchecked && solver.empty()) {
        // Without a solver the parametric check cannot finish, so the
        // elaborated program is checked instead.
        const int st = run_check(Env(cp.program), {}, report);
        if (st != kOk) return st;
      }
      std::vector<std::string> lints;
      ConcreteProgram flat = eliminate_bundles(cp, &lints);
      for (const auto& l : lints) std::cerr << "lint: " << l << "\n";
      Program comps;
      comps.components = flat.program.components;
      Program exts;
      exts.externals = flat.program.externals;
      write_file(fs::path(out_dir) / (entry + ".concrete.pfil"), print_program(comps));
      write_file(fs::path(out_dir) / "externals.pfil", print_program(exts));
      write_file(fs::path(out_dir) / "manifest.txt", manifest(cp));
      std::cerr << "wrote " << (fs::path(out_dir) / (entry + ".concrete.pfil")).string() << "\n";
      return kOk;
    }

    if (sim->parsed()) {
      Program p = parse_files(files);
      resolve_program(p);
      const auto reports = simulate_concrete(p, horizon);
      bool ok = true;
      for (const auto& r : reports) {
        std::cout << r.component << ":";
        for (int k = 0; k < kNumCategories; ++k) {
          const auto c = static_cast<Category>(k);
          std::cout << " " << to_string(c) << "=" << (r.failures.count(c) ? "fail" : "pass");
        }
        std::cout << "\n";
        for (const auto& [c, msgs] : r.failures)
          for (const auto& m : msgs) std::cerr << r.component << ": [" << to_string(c) << "] " << m << "\n";
        ok &= r.passed();
      }
      return ok ? kOk : kRejected;
    }
  } catch (const CompileError& e) {
    print_error(e);
    return exit_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
