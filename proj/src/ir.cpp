#include "pfil/ir.hpp"

#include <algorithm>

namespace pfil {

std::string SourceSpan::str() const {
  if (file.empty() && line == 0) return "<unknown>";
  return file + ":" + std::to_string(line) + ":" + std::to_string(col);
}

CompileError::CompileError(std::string kind, std::string message, SourceSpan loc)
    : std::runtime_error(loc.str() + ": " + kind + ": " + message),
      kind_(std::move(kind)),
      message_(std::move(message)),
      loc_(std::move(loc)) {}

std::vector<std::string> Signature::out_params() const {
  std::vector<std::string> out;
  for (const auto& s : somes) out.insert(out.end(), s.names.begin(), s.names.end());
  return out;
}

bool Signature::has_out_param(const std::string& name) const {
  for (const auto& s : somes)
    if (std::find(s.names.begin(), s.names.end(), name) != s.names.end()) return true;
  return false;
}

std::vector<Formula> Signature::out_constraints() const {
  std::vector<Formula> out;
  for (const auto& s : somes) out.insert(out.end(), s.constraints.begin(), s.constraints.end());
  return out;
}

const EventDef* Signature::find_event(const std::string& n) const {
  for (const auto& e : events)
    if (e.name == n) return &e;
  return nullptr;
}

const PortDef* Signature::find_input(const std::string& n) const {
  for (const auto& p : inputs)
    if (p.name == n) return &p;
  return nullptr;
}

const PortDef* Signature::find_output(const std::string& n) const {
  for (const auto& p : outputs)
    if (p.name == n) return &p;
  return nullptr;
}

std::vector<const PortDef*> Signature::timed_inputs() const {
  std::vector<const PortDef*> out;
  for (const auto& p : inputs)
    if (!p.is_interface()) out.push_back(&p);
  return out;
}

const Component* Program::find_component(const std::string& name) const {
  for (const auto& c : components)
    if (c.sig.name == name) return &c;
  return nullptr;
}

const Signature* Program::find_external(const std::string& name) const {
  for (const auto& s : externals)
    if (s.name == name) return &s;
  return nullptr;
}

void merge_into(Program& into, Program other) {
  for (auto& i : other.imports) into.imports.push_back(std::move(i));
  for (auto& e : other.externals) into.externals.push_back(std::move(e));
  for (auto& c : other.components) into.components.push_back(std::move(c));
}

Time substitute(const Time& t, const std::map<std::string, Expr>& s) {
  return Time{t.event, substitute(t.offset, s)};
}

Interval substitute(const Interval& i, const std::map<std::string, Expr>& s) {
  return Interval{substitute(i.start, s), substitute(i.end, s)};
}

std::string to_string(const Time& t) {
  std::string out = "'" + t.event;
  if (auto c = t.offset.as_nat(); c && *c == 0) return out;
  return out + "+" + to_string(t.offset);
}

std::string to_string(const Interval& i) {
  return "[" + to_string(i.start) + ", " + to_string(i.end) + "]";
}

}  // namespace pfil
