#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "pfil/ir.hpp"
#include "pfil/solver.hpp"

namespace pfil {

struct SimReport {
  std::string component;
  std::map<Category, std::vector<std::string>> failures;

  bool passed() const { return failures.empty(); }
  std::set<Category> categories() const;
};

/// Largest cycle the program can touch: every concrete time plus the
/// largest delay. `simulate_concrete` refuses smaller horizons.
std::uint64_t min_horizon(const Program& p);

/// Brute-force cycle-level check of a parameter-free program. Each component
/// is run as repeated executions, one per event delay. Wire validity is
/// marked cycle by cycle from sources and compared against every sink's
/// required window, instance occupancy is tracked per cycle within and
/// across executions. Throws CompileError("usage error") for a parametric
/// program or a horizon below `min_horizon`.
std::vector<SimReport> simulate_concrete(const Program& p, std::uint64_t horizon);

}  // namespace pfil
