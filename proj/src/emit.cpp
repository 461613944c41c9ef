#include "pfil/emit.hpp"

#include <sstream>

namespace pfil {
namespace {

std::string join_exprs(const std::vector<Expr>& es) {
  std::string out;
  for (std::size_t i = 0; i < es.size(); ++i) {
    if (i) out += ", ";
    out += to_string(es[i]);
  }
  return out;
}

std::string print_ports(const std::vector<PortDef>& ps) {
  std::string out;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (i) out += ", ";
    out += print_port(ps[i]);
  }
  return out;
}

std::string print_formulas(const std::vector<Formula>& fs) {
  std::string out;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    if (i) out += ", ";
    out += to_string(fs[i]);
  }
  return out;
}

std::string print_index(const Index& i) {
  if (!i.is_range) return to_string(*i.lo);
  std::string out;
  if (i.lo) out += to_string(*i.lo);
  out += "..";
  if (i.hi) out += to_string(*i.hi);
  return out;
}

void print_command(std::ostringstream& os, const Command& c, int indent) {
  const std::string pad(indent * 2, ' ');
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Instantiate>) {
          os << pad << n.name << " := new " << n.component;
          if (!n.args.empty()) os << '[' << join_exprs(n.args) << ']';
          if (n.availability) os << " in " << to_string(*n.availability);
          os << ";\n";
        } else if constexpr (std::is_same_v<T, Invoke>) {
          os << pad << n.name << " := " << n.instance << '<';
          for (std::size_t i = 0; i < n.events.size(); ++i) {
            if (i) os << ", ";
            os << to_string(n.events[i]);
          }
          os << ">(";
          for (std::size_t i = 0; i < n.ports.size(); ++i) {
            if (i) os << ", ";
            os << print_port_ref(n.ports[i]);
          }
          os << ");\n";
        } else if constexpr (std::is_same_v<T, Connect>) {
          os << pad << print_port_ref(n.dst) << " = " << print_port_ref(n.src) << ";\n";
        } else if constexpr (std::is_same_v<T, BundleDecl>) {
          os << pad << "bundle " << print_port(n.port) << ";\n";
        } else if constexpr (std::is_same_v<T, ForLoop>) {
          os << pad << "for " << n.var << " in " << to_string(n.lo) << ".." << to_string(n.hi)
             << " {\n";
          for (const auto& s : n.body) print_command(os, s, indent + 1);
          os << pad << "}\n";
        } else if constexpr (std::is_same_v<T, IfElse>) {
          os << pad << "if " << to_string(n.cond) << " {\n";
          const IfElse* cur = &n;
          for (;;) {
            for (const auto& s : cur->then_body) print_command(os, s, indent + 1);
            if (cur->else_body.empty()) {
              os << pad << "}\n";
              break;
            }
            if (cur->else_body.size() == 1 && cur->else_body[0].template as<IfElse>()) {
              cur = cur->else_body[0].template as<IfElse>();
              os << pad << "} else if " << to_string(cur->cond) << " {\n";
              continue;
            }
            os << pad << "} else {\n";
            for (const auto& s : cur->else_body) print_command(os, s, indent + 1);
            os << pad << "}\n";
            break;
          }
        } else if constexpr (std::is_same_v<T, LetCmd>) {
          os << pad << "let " << n.name << " = " << to_string(n.value) << ";\n";
        } else if constexpr (std::is_same_v<T, Assume>) {
          os << pad << "assume " << to_string(n.cond) << ";\n";
        } else if constexpr (std::is_same_v<T, OutAssign>) {
          os << pad << n.param << " <- " << to_string(n.value) << ";\n";
        }
      },
      c.v);
}

}  // namespace

std::string print_port(const PortDef& p) {
  std::string out = p.name;
  for (const auto& d : p.dims) out += "[" + to_string(d) + "]";
  out += ": ";
  if (!p.index_vars.empty()) {
    out += "for<";
    for (std::size_t i = 0; i < p.index_vars.size(); ++i) {
      if (i) out += ", ";
      out += p.index_vars[i];
    }
    out += "> ";
  }
  if (p.live) out += to_string(*p.live) + " ";
  return out + to_string(p.width);
}

std::string print_port_ref(const PortRef& r) {
  if (r.kind == PortRef::Kind::Const) return std::to_string(r.value);
  std::string out = r.name;
  if (r.kind == PortRef::Kind::InvocOut) out += "." + r.port;
  for (const auto& i : r.indices) out += "[" + print_index(i) + "]";
  return out;
}

std::string print_signature_head(const Signature& s) {
  std::ostringstream os;
  os << (s.is_external ? "ext comp " : "comp ") << s.name;
  if (!s.params.empty()) {
    os << '[';
    for (std::size_t i = 0; i < s.params.size(); ++i) {
      if (i) os << ", ";
      os << s.params[i].name;
      if (s.params[i].default_value) os << '=' << to_string(*s.params[i].default_value);
    }
    os << ']';
  }
  os << '<';
  for (std::size_t i = 0; i < s.events.size(); ++i) {
    if (i) os << ", ";
    os << '\'' << s.events[i].name << ':' << to_string(s.events[i].delay);
  }
  os << ">(" << print_ports(s.inputs) << ')';
  if (!s.outputs.empty()) os << " -> (" << print_ports(s.outputs) << ')';
  if (!s.lets.empty() || !s.somes.empty()) {
    os << " with {";
    for (const auto& l : s.lets) os << " let " << l.name << " = " << to_string(l.value) << ';';
    for (const auto& d : s.somes) {
      os << " some ";
      for (std::size_t i = 0; i < d.names.size(); ++i) os << (i ? ", " : "") << d.names[i];
      if (!d.constraints.empty()) os << " where " << print_formulas(d.constraints);
      os << ';';
    }
    os << " }";
  }
  if (!s.where.empty()) os << " where " << print_formulas(s.where);
  return os.str();
}

std::string print_external(const Signature& s) {
  Signature e = s;
  e.is_external = true;
  return print_signature_head(e) + ";\n";
}

std::string print_block(const Block& b, int indent) {
  std::ostringstream os;
  for (const auto& c : b) print_command(os, c, indent);
  return os.str();
}

std::string print_component(const Component& c) {
  Signature s = c.sig;
  s.is_external = false;
  return print_signature_head(s) + " {\n" + print_block(c.body, 1) + "}\n";
}

std::string print_program(const Program& p) {
  std::ostringstream os;
  bool first = true;
  auto sep = [&] {
    if (!first) os << '\n';
    first = false;
  };
  for (const auto& g : p.imports) {
    sep();
    os << "import gen \"" << g.config_path << "\" as " << g.alias;
    if (g.signatures.empty()) {
      os << ";\n";
      continue;
    }
    os << " {\n";
    for (const auto& s : g.signatures) {
      Signature c = s;
      c.is_external = false;
      os << "  " << print_signature_head(c) << ";\n";
    }
    os << "}\n";
  }
  for (const auto& e : p.externals) {
    sep();
    os << print_external(e);
  }
  for (const auto& c : p.components) {
    sep();
    os << print_component(c);
  }
  return os.str();
}

}  // namespace pfil
