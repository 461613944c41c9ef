#pragma once

#include <string>

#include "pfil/ir.hpp"

namespace pfil {

std::string print_port(const PortDef& p);
std::string print_port_ref(const PortRef& r);
/// `comp Name[..]<..>(..) -> (..) with {..} where ..` without body or `;`.
std::string print_signature_head(const Signature& s);
/// Full `ext comp ...;` declaration.
std::string print_external(const Signature& s);
std::string print_block(const Block& b, int indent);
std::string print_component(const Component& c);
/// Imports, externals, then components, separated by blank lines.
std::string print_program(const Program& p);

}  // namespace pfil
