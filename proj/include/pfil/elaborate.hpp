#pragma once

#include <string>
#include <vector>

#include "pfil/gen.hpp"
#include "pfil/ir.hpp"
#include "pfil/resolve.hpp"

namespace pfil {

struct ElabUnit {
  enum class Source { Evaluated, External, Generated };
  std::string name;       // concrete (mangled) name
  std::string component;  // source-level name, `alias.Mod` for generated modules
  std::vector<std::uint64_t> params;
  Source source = Source::Evaluated;
  Binding out;  // own output-parameter bindings
  std::vector<std::pair<std::string, std::uint64_t>> injected;  // `inst::P` used inside
  std::string verilog_path;  // generated units
};

const char* to_string(ElabUnit::Source s);

/// Parameter-free components plus concrete external declarations.
struct ConcreteProgram {
  Program program;
  std::string entry;
  std::vector<ElabUnit> units;

  const Signature* find_signature(const std::string& name) const;
};

struct ElabOptions {
  std::size_t depth_limit = 64;
  bool dedupe = true;
};

/// Monomorphizes the program reachable from `entry` under `params` (missing
/// params fall back to defaults). Generated modules run through `gen`; pass
/// nullptr to reject them.
ConcreteProgram elaborate(const Env& env, const std::string& entry, const Binding& params,
                          Generator* gen, const ElabOptions& opts = {});

/// `unit <name> ...` lines with per-unit bindings.
std::string manifest(const ConcreteProgram& p);

}  // namespace pfil
