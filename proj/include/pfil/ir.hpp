#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "pfil/expr.hpp"

namespace pfil {

struct SourceSpan {
  std::string file;
  int line = 0;
  int col = 0;

  std::string str() const;
};

/// Any user-facing compile error: syntax, name resolution, evaluation or
/// elaboration failure.
class CompileError : public std::runtime_error {
 public:
  CompileError(std::string kind, std::string message, SourceSpan loc = {});

  const std::string& kind() const { return kind_; }
  const std::string& message() const { return message_; }
  const SourceSpan& loc() const { return loc_; }

 private:
  std::string kind_;
  std::string message_;
  SourceSpan loc_;
};

/// `'G + offset`. Times never combine two events.
struct Time {
  std::string event;
  Expr offset;

  friend bool operator==(const Time&, const Time&) = default;
};

/// Half-open `[start, end)`; both ends reference the same event.
struct Interval {
  Time start;
  Time end;

  friend bool operator==(const Interval&, const Interval&) = default;
};

/// A signature port or local bundle. Scalar ports have no dims. A port
/// without a liveness interval is an interface port (e.g. `clk: 1`) and
/// takes no part in invocations.
struct PortDef {
  std::string name;
  std::vector<Expr> dims;
  std::vector<std::string> index_vars;  // empty, or one per dim (`_` allowed)
  std::optional<Interval> live;
  Expr width;
  SourceSpan loc;

  bool is_bundle() const { return !dims.empty(); }
  bool is_interface() const { return !live.has_value(); }

  friend bool operator==(const PortDef& a, const PortDef& b) {
    return a.name == b.name && a.dims == b.dims && a.index_vars == b.index_vars &&
           a.live == b.live && a.width == b.width;
  }
};

struct EventDef {
  std::string name;
  Expr delay;
  SourceSpan loc;

  friend bool operator==(const EventDef& a, const EventDef& b) {
    return a.name == b.name && a.delay == b.delay;
  }
};

struct ParamDef {
  std::string name;
  std::optional<Expr> default_value;

  friend bool operator==(const ParamDef&, const ParamDef&) = default;
};

struct LetDef {
  std::string name;
  Expr value;

  friend bool operator==(const LetDef&, const LetDef&) = default;
};

/// `some II, L where L >= II > 0;`
struct SomeDecl {
  std::vector<std::string> names;
  std::vector<Formula> constraints;
  SourceSpan loc;

  friend bool operator==(const SomeDecl& a, const SomeDecl& b) {
    return a.names == b.names && a.constraints == b.constraints;
  }
};

struct Signature {
  std::string name;
  std::vector<ParamDef> params;
  std::vector<EventDef> events;
  std::vector<PortDef> inputs;
  std::vector<PortDef> outputs;
  std::vector<Formula> where;
  std::vector<LetDef> lets;
  std::vector<SomeDecl> somes;
  bool is_external = false;
  SourceSpan loc;

  std::vector<std::string> out_params() const;
  bool has_out_param(const std::string& name) const;
  /// Constraints mentioning `name` among all `some` groups.
  std::vector<Formula> out_constraints() const;
  const EventDef* find_event(const std::string& name) const;
  const PortDef* find_input(const std::string& name) const;
  const PortDef* find_output(const std::string& name) const;
  /// Inputs that carry a liveness interval, i.e. the invocation arguments.
  std::vector<const PortDef*> timed_inputs() const;

  friend bool operator==(const Signature& a, const Signature& b) {
    return a.name == b.name && a.params == b.params && a.events == b.events &&
           a.inputs == b.inputs && a.outputs == b.outputs && a.where == b.where &&
           a.lets == b.lets && a.somes == b.somes && a.is_external == b.is_external;
  }
};

// ---------------------------------------------------------------------------
// Port references

/// One index position: a single index or a half-open range. A range with a
/// missing bound extends to the start/end of the dimension.
struct Index {
  bool is_range = false;
  std::optional<Expr> lo;  // for single indices, always set
  std::optional<Expr> hi;

  static Index single(Expr e) { return Index{false, std::move(e), std::nullopt}; }
  static Index range(std::optional<Expr> lo, std::optional<Expr> hi) {
    return Index{true, std::move(lo), std::move(hi)};
  }

  friend bool operator==(const Index&, const Index&) = default;
};

/// A component port, a local bundle, or the output of an invocation
/// (`invoc.port`), followed by indices; or a constant.
struct PortRef {
  enum class Kind { Local, InvocOut, Const };
  Kind kind = Kind::Local;
  std::string name;  // port/bundle name, or invocation name
  std::string port;  // for InvocOut
  std::vector<Index> indices;
  std::uint64_t value = 0;  // for Const
  SourceSpan loc;

  static PortRef local(std::string name, std::vector<Index> idx = {}) {
    PortRef r;
    r.kind = Kind::Local;
    r.name = std::move(name);
    r.indices = std::move(idx);
    return r;
  }
  static PortRef invoc(std::string invoc, std::string port, std::vector<Index> idx = {}) {
    PortRef r;
    r.kind = Kind::InvocOut;
    r.name = std::move(invoc);
    r.port = std::move(port);
    r.indices = std::move(idx);
    return r;
  }
  static PortRef constant(std::uint64_t v) {
    PortRef r;
    r.kind = Kind::Const;
    r.value = v;
    return r;
  }

  friend bool operator==(const PortRef& a, const PortRef& b) {
    return a.kind == b.kind && a.name == b.name && a.port == b.port &&
           a.indices == b.indices && a.value == b.value;
  }
};

// ---------------------------------------------------------------------------
// Commands

struct Command;
using Block = std::vector<Command>;

struct Instantiate {
  std::string name;
  std::string component;  // may be `tool.Module` for generated modules
  std::vector<Expr> args;
  std::optional<Interval> availability;

  friend bool operator==(const Instantiate&, const Instantiate&) = default;
};

struct Invoke {
  std::string name;
  std::string instance;
  std::vector<Time> events;
  std::vector<PortRef> ports;

  friend bool operator==(const Invoke&, const Invoke&) = default;
};

struct Connect {
  PortRef dst;
  PortRef src;

  friend bool operator==(const Connect&, const Connect&) = default;
};

struct BundleDecl {
  PortDef port;

  friend bool operator==(const BundleDecl&, const BundleDecl&) = default;
};

struct ForLoop {
  std::string var;
  Expr lo;
  Expr hi;
  Block body;

  friend bool operator==(const ForLoop& a, const ForLoop& b);
};

struct IfElse {
  Formula cond;
  Block then_body;
  Block else_body;

  friend bool operator==(const IfElse& a, const IfElse& b);
};

struct LetCmd {
  std::string name;
  Expr value;

  friend bool operator==(const LetCmd&, const LetCmd&) = default;
};

struct Assume {
  Formula cond;

  friend bool operator==(const Assume&, const Assume&) = default;
};

struct OutAssign {
  std::string param;
  Expr value;

  friend bool operator==(const OutAssign&, const OutAssign&) = default;
};

struct Command {
  std::variant<Instantiate, Invoke, Connect, BundleDecl, ForLoop, IfElse, LetCmd, Assume,
               OutAssign>
      v;
  SourceSpan loc;

  template <typename T>
  const T* as() const {
    return std::get_if<T>(&v);
  }

  friend bool operator==(const Command& a, const Command& b) { return a.v == b.v; }
};

inline bool operator==(const ForLoop& a, const ForLoop& b) {
  return a.var == b.var && a.lo == b.lo && a.hi == b.hi && a.body == b.body;
}
inline bool operator==(const IfElse& a, const IfElse& b) {
  return a.cond == b.cond && a.then_body == b.then_body && a.else_body == b.else_body;
}

struct Component {
  Signature sig;
  Block body;

  friend bool operator==(const Component& a, const Component& b) {
    return a.sig == b.sig && a.body == b.body;
  }
};

/// `import gen "tool.toml" as alias { <signatures> }`
struct GenImport {
  std::string config_path;  // as written in the source
  std::string alias;
  std::vector<Signature> signatures;
  std::string source_dir;  // directory of the importing file
  SourceSpan loc;

  friend bool operator==(const GenImport& a, const GenImport& b) {
    return a.config_path == b.config_path && a.alias == b.alias &&
           a.signatures == b.signatures;
  }
};

struct Program {
  std::vector<GenImport> imports;
  std::vector<Signature> externals;
  std::vector<Component> components;

  const Component* find_component(const std::string& name) const;
  const Signature* find_external(const std::string& name) const;

  friend bool operator==(const Program&, const Program&) = default;
};

/// Appends all declarations of `other` to `into` (used to combine files).
void merge_into(Program& into, Program other);

/// Every expression-valued position of a time/interval after substitution.
Time substitute(const Time& t, const std::map<std::string, Expr>& s);
Interval substitute(const Interval& i, const std::map<std::string, Expr>& s);
std::string to_string(const Time& t);
std::string to_string(const Interval& i);

}  // namespace pfil
