#include "pfil/bundle_elim.hpp"

#include <map>
#include <set>

namespace pfil {

namespace {

using Idx = std::vector<std::uint64_t>;

std::uint64_t nat(const Expr& e) {
  const auto v = e.as_nat();
  if (!v) throw CompileError("bundle error", "expected a concrete expression, found `" + to_string(e) + "`");
  return *v;
}

std::vector<std::uint64_t> dims_of(const PortDef& p) {
  std::vector<std::uint64_t> out;
  for (const auto& d : p.dims) out.push_back(nat(d));
  return out;
}

/// Row-major element tuples selected by `indices` over `dims`.
std::vector<Idx> select(const std::vector<std::uint64_t>& dims, const std::vector<Index>& indices) {
  std::vector<Idx> out{{}};
  for (std::size_t k = 0; k < dims.size(); ++k) {
    std::uint64_t lo = 0, hi = dims[k];
    if (k < indices.size()) {
      if (!indices[k].is_range) {
        lo = nat(*indices[k].lo);
        hi = lo + 1;
      } else {
        if (indices[k].lo) lo = nat(*indices[k].lo);
        if (indices[k].hi) hi = nat(*indices[k].hi);
      }
    }
    std::vector<Idx> next;
    for (const auto& prefix : out)
      for (auto v = lo; v < hi; ++v) {
        Idx i = prefix;
        i.push_back(v);
        next.push_back(std::move(i));
      }
    out = std::move(next);
  }
  return out;
}

std::string show(const std::string& name, const Idx& i) {
  std::string out = name;
  for (auto v : i) out += "[" + std::to_string(v) + "]";
  return out;
}

class Eliminator {
 public:
  Eliminator(const Component& c, const SignatureLookup& sig_of) : c_(c), sig_of_(sig_of) {
    for (const auto& p : c.sig.inputs) own_[p.name] = &p;
    for (const auto& p : c.sig.outputs) own_[p.name] = &p;
    for (const auto& cmd : c.body) {
      if (const auto* b = cmd.as<BundleDecl>()) bundles_[b->port.name] = &b->port;
      if (const auto* i = cmd.as<Instantiate>()) inst_module_[i->name] = i->component;
      if (const auto* v = cmd.as<Invoke>()) inv_inst_[v->name] = v->instance;
    }
  }

  Component run(std::vector<std::string>* lints) {
    // Record every bundle write first so reads may precede writes.
    for (const auto& cmd : c_.body) {
      const auto* cn = cmd.as<Connect>();
      if (!cn || cn->dst.kind != PortRef::Kind::Local || !bundles_.count(cn->dst.name)) continue;
      const auto dst = elements(cn->dst);
      const auto src = elements(cn->src);
      for (std::size_t k = 0; k < dst.size(); ++k) {
        const auto key = std::make_pair(cn->dst.name, dst[k].index);
        if (writes_.count(key))
          throw CompileError("bundle error", "bundle element " + show(cn->dst.name, dst[k].index) + " is written twice", cmd.loc);
        writes_[key] = src.size() == 1 ? src[0] : src.at(k);
      }
    }
    Component out;
    out.sig = c_.sig;
    for (const auto& cmd : c_.body) {
      if (cmd.as<BundleDecl>()) continue;
      if (const auto* cn = cmd.as<Connect>()) {
        if (cn->dst.kind == PortRef::Kind::Local && bundles_.count(cn->dst.name)) continue;
        const auto dst = elements(cn->dst);
        const auto src = elements(cn->src);
        for (std::size_t k = 0; k < dst.size(); ++k)
          out.body.push_back(Command{Connect{scalar(dst[k]), resolve(src.size() == 1 ? src[0] : src.at(k), cmd.loc)}, cmd.loc});
        continue;
      }
      if (const auto* v = cmd.as<Invoke>()) {
        Invoke n = *v;
        n.ports.clear();
        for (const auto& a : v->ports)
          for (const auto& e : elements(a)) n.ports.push_back(resolve(e, cmd.loc));
        out.body.push_back(Command{std::move(n), cmd.loc});
        continue;
      }
      out.body.push_back(cmd);
    }
    if (lints)
      for (const auto& [key, src] : writes_)
        if (!read_.count(key))
          lints->push_back(c_.sig.name + ": bundle element " + show(key.first, key.second) +
                           " is written but never read");
    return out;
  }

 private:
  /// An element-level reference: a PortRef with `index` holding the full
  /// element tuple (or a constant).
  struct Elem {
    PortRef ref;  // indices cleared
    Idx index;
  };

  std::vector<std::uint64_t> dims(const PortRef& r) {
    if (r.kind == PortRef::Kind::Const) return {};
    if (r.kind == PortRef::Kind::InvocOut) {
      const auto& module = inst_module_.at(inv_inst_.at(r.name));
      const Signature* s = sig_of_(module);
      if (!s) throw CompileError("bundle error", "unknown module `" + module + "`", r.loc);
      const PortDef* p = s->find_output(r.port);
      if (!p) throw CompileError("bundle error", "`" + module + "` has no output `" + r.port + "`", r.loc);
      return dims_of(*p);
    }
    if (auto it = bundles_.find(r.name); it != bundles_.end()) return dims_of(*it->second);
    if (auto it = own_.find(r.name); it != own_.end()) return dims_of(*it->second);
    throw CompileError("bundle error", "unknown port `" + r.name + "`", r.loc);
  }

  std::vector<Elem> elements(const PortRef& r) {
    if (r.kind == PortRef::Kind::Const) return {Elem{r, {}}};
    std::vector<Elem> out;
    PortRef base = r;
    base.indices.clear();
    for (auto& i : select(dims(r), r.indices)) out.push_back(Elem{base, std::move(i)});
    return out;
  }

  PortRef scalar(const Elem& e) {
    PortRef r = e.ref;
    if (r.kind == PortRef::Kind::InvocOut)
      r.port = element_name(r.port, e.index);
    else if (r.kind == PortRef::Kind::Local)
      r.name = element_name(r.name, e.index);
    return r;
  }

  PortRef resolve(const Elem& e, const SourceSpan& loc) {
    Elem cur = e;
    std::set<std::pair<std::string, Idx>> seen;
    while (cur.ref.kind == PortRef::Kind::Local && bundles_.count(cur.ref.name)) {
      const auto key = std::make_pair(cur.ref.name, cur.index);
      if (!seen.insert(key).second)
        throw CompileError("bundle error", "bundle element " + show(key.first, key.second) + " is defined in terms of itself", loc);
      read_.insert(key);
      const auto it = writes_.find(key);
      if (it == writes_.end())
        throw CompileError("bundle error", "bundle element " + show(key.first, key.second) + " is read but never written (dangling wire)", loc);
      cur = it->second;
    }
    return scalar(cur);
  }

  const Component& c_;
  const SignatureLookup& sig_of_;
  std::map<std::string, const PortDef*> own_, bundles_;
  std::map<std::string, std::string> inst_module_, inv_inst_;
  std::map<std::pair<std::string, Idx>, Elem> writes_;
  std::set<std::pair<std::string, Idx>> read_;
};

std::vector<PortDef> flatten_ports(const std::vector<PortDef>& ports) {
  std::vector<PortDef> out;
  for (const auto& p : ports) {
    if (p.dims.empty()) {
      out.push_back(p);
      continue;
    }
    for (const auto& i : select(dims_of(p), {})) {
      PortDef q = p;
      q.name = element_name(p.name, i);
      q.dims.clear();
      q.index_vars.clear();
      if (p.live) {
        std::map<std::string, Expr> m;
        for (std::size_t k = 0; k < p.index_vars.size() && k < i.size(); ++k) m[p.index_vars[k]] = Expr::nat(i[k]);
        q.live = substitute(*p.live, m);
        q.live->start.offset = normalize(q.live->start.offset);
        q.live->end.offset = normalize(q.live->end.offset);
      }
      out.push_back(std::move(q));
    }
  }
  return out;
}

}  // namespace

std::string element_name(const std::string& port, const std::vector<std::uint64_t>& index) {
  std::string out = port;
  for (std::size_t k = 0; k < index.size(); ++k) out += (k ? "_" : "") + std::to_string(index[k]);
  return out;
}

Signature flatten_signature(const Signature& sig) {
  Signature s = sig;
  s.inputs = flatten_ports(sig.inputs);
  s.outputs = flatten_ports(sig.outputs);
  return s;
}

Component eliminate_bundles(const Component& c, const SignatureLookup& sig_of,
                            std::vector<std::string>* lints) {
  Component out = Eliminator(c, sig_of).run(lints);
  out.sig = flatten_signature(out.sig);
  return out;
}

ConcreteProgram eliminate_bundles(const ConcreteProgram& p, std::vector<std::string>* lints) {
  ConcreteProgram out = p;
  const SignatureLookup lookup = [&p](const std::string& m) { return p.find_signature(m); };
  for (auto& c : out.program.components) c = eliminate_bundles(c, lookup, lints);
  for (auto& s : out.program.externals) s = flatten_signature(s);
  return out;
}

}  // namespace pfil
