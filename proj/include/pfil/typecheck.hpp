#pragma once

#include <set>
#include <string>
#include <vector>

#include "pfil/resolve.hpp"
#include "pfil/solver.hpp"

namespace pfil {

struct CheckedObligation {
  Obligation obligation;
  Verdict verdict;
};

struct GeneratedObligations {
  std::vector<Obligation> obligations;
  /// Facts available to every obligation of the component: where-clauses,
  /// children's output-parameter constraints, output assignments and assumes.
  std::vector<Formula> assumptions;
  /// `assume` statements, recorded as trusted facts ("loc: cond").
  std::vector<std::string> trusted;
};

struct ComponentReport {
  std::string component;
  std::vector<CheckedObligation> results;
  std::vector<std::string> trusted;

  bool passed() const;
  bool has_refuted() const;
  std::set<Category> failed_categories() const;
  std::set<Category> refuted_categories() const;
};

/// The encoding step: every proof obligation of one source component.
GeneratedObligations generate_obligations(const Component& c, const Env& env);

ComponentReport check_component(const Component& c, const Env& env, Prover& prover);

struct CheckOptions {
  std::string solver;  // empty: concrete-only
  int timeout_ms = 10000;
};

/// Checks every source component of the program, one prover per component.
std::vector<ComponentReport> check_program(const Env& env, const CheckOptions& opts);

/// Human-readable diagnostic for one failed obligation.
std::string describe(const CheckedObligation& r);

}  // namespace pfil
