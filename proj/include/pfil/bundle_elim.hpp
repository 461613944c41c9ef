#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pfil/elaborate.hpp"
#include "pfil/ir.hpp"

namespace pfil {

/// Name of one element of a bundle port: `in` + (1) -> `in1`,
/// `p` + (0, 1) -> `p0_1`. Scalars keep their name.
std::string element_name(const std::string& port, const std::vector<std::uint64_t>& index);

/// Splits every bundle port of a concrete signature into scalar ports,
/// row-major, substituting the index into each liveness interval.
Signature flatten_signature(const Signature& sig);

using SignatureLookup = std::function<const Signature*(const std::string& module)>;

/// Inlines bundle writes into their reads and expands bundle connections
/// and invocation arguments element by element. `sig_of` returns the
/// (unflattened) concrete signature of an instantiated module. Throws
/// CompileError ("bundle error") for a read of an unwritten element or a
/// doubly-written element. Written-but-unread elements are reported in
/// `lints` when given.
Component eliminate_bundles(const Component& c, const SignatureLookup& sig_of,
                            std::vector<std::string>* lints = nullptr);

/// Applies elimination to every component and flattens every signature.
ConcreteProgram eliminate_bundles(const ConcreteProgram& p, std::vector<std::string>* lints = nullptr);

}  // namespace pfil
