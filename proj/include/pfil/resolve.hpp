#pragma once

#include <map>
#include <string>

#include "pfil/ir.hpp"

namespace pfil {

/// What an instantiated component name refers to.
struct ModuleRef {
  enum class Kind { Source, External, Generated };
  Kind kind = Kind::Source;
  const Signature* sig = nullptr;
  const Component* comp = nullptr;  // Source only
  const GenImport* gen = nullptr;   // Generated only
  std::string qualified;            // `alias.Mod` for generated modules, else the name
};

/// Module table over a program. Holds its own copy of the program so the
/// pointers it hands out stay valid for its lifetime.
class Env {
 public:
  explicit Env(Program p);

  const Program& program() const { return prog_; }
  /// Resolves `Name`, `alias.Mod`, or a bare generated-module name that is
  /// unique among all imports. Returns nullptr if unknown or ambiguous.
  std::optional<ModuleRef> lookup(const std::string& name) const;

 private:
  Program prog_;
  std::map<std::string, std::size_t> components_;
  std::map<std::string, std::size_t> externals_;
  std::map<std::string, std::pair<std::size_t, std::size_t>> gen_;  // alias.Mod
  std::map<std::string, std::vector<std::string>> gen_bare_;
};

/// Checks scoping and arity rules for every declaration. Throws
/// CompileError on the first violation.
void resolve(const Env& env);

/// Convenience: builds the env and resolves it.
Env resolve_program(Program p);

}  // namespace pfil
