#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "pfil/ir.hpp"
#include "pfil/resolve.hpp"

namespace pfil {

/// `subst`: evaluates `e` under `s`, reporting failures as CompileError
/// ("evaluation error") that quotes the expression.
std::uint64_t subst(const Expr& e, const Binding& s, const SourceSpan& loc = {});

/// Fills in default parameter values. Throws if too few arguments remain.
std::vector<std::uint64_t> complete_args(const Signature& sig, std::vector<std::uint64_t> args,
                                         const SourceSpan& loc = {});

/// Binding of a signature's params (and lets) for `args`.
Binding bind_params(const Signature& sig, const std::vector<std::uint64_t>& args);

/// `Name` or `Name_a_b` for parameter values a, b.
std::string mangle(const std::string& name, const std::vector<std::uint64_t>& args);

/// Substitutes concrete params, lets and output params into a signature. The
/// result has no params, lets, where-clauses or `some` blocks; index
/// variables of bundle ports remain. Re-checks the where-clause and the
/// output-parameter constraints.
Signature concretize(const Signature& sig, const Binding& params, const Binding& out,
                     const std::string& name);

/// What an instance elaborates to: the concrete module name plus its
/// output-parameter bindings.
struct ChildUnit {
  std::string name;
  Binding out;
  Signature sig;  // concrete signature
};

using ChildResolver = std::function<ChildUnit(const ModuleRef& mod,
                                              const std::vector<std::uint64_t>& args,
                                              const SourceSpan& loc)>;

struct EvalResult {
  Component component;
  Binding out;
  /// `inst::P` bindings injected while evaluating, keyed by concrete
  /// instance name.
  std::vector<std::pair<std::string, std::uint64_t>> injected;
};

/// `eval`: unrolls loops, selects branches, binds output parameters and
/// renames loop-local names with their index path (`R_3`). Children are
/// resolved through `child`, in dependency order.
EvalResult eval_component(const Component& c, const std::vector<std::uint64_t>& args,
                          const Env& env, const ChildResolver& child,
                          const std::string& concrete_name);

/// Definition commands (instantiations and lets) of `body` in evaluation
/// order: each definition follows those whose output parameters or values
/// it references. Stable with respect to source order. Throws CompileError
/// ("elaboration error") on a cycle.
std::vector<std::size_t> topo_order(const Block& body);

/// True if no parameter, loop, conditional, let, assume or output
/// assignment remains.
bool is_concrete(const Component& c);

}  // namespace pfil
