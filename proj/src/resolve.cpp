#include "pfil/resolve.hpp"

#include <algorithm>
#include <set>

namespace pfil {

Env::Env(Program p) : prog_(std::move(p)) {
  for (std::size_t i = 0; i < prog_.components.size(); ++i) {
    const auto& s = prog_.components[i].sig;
    if (components_.count(s.name) || externals_.count(s.name))
      throw CompileError("duplicate definition", "component `" + s.name + "` defined twice", s.loc);
    components_[s.name] = i;
  }
  for (std::size_t i = 0; i < prog_.externals.size(); ++i) {
    const auto& s = prog_.externals[i];
    if (components_.count(s.name) || externals_.count(s.name))
      throw CompileError("duplicate definition", "component `" + s.name + "` defined twice", s.loc);
    externals_[s.name] = i;
  }
  std::set<std::string> aliases;
  for (std::size_t i = 0; i < prog_.imports.size(); ++i) {
    const auto& g = prog_.imports[i];
    if (!aliases.insert(g.alias).second)
      throw CompileError("duplicate definition", "import alias `" + g.alias + "` used twice",
                         g.loc);
    for (std::size_t j = 0; j < g.signatures.size(); ++j) {
      const auto& s = g.signatures[j];
      const std::string q = g.alias + "." + s.name;
      if (gen_.count(q))
        throw CompileError("duplicate definition", "generated module `" + q + "` declared twice",
                           s.loc);
      gen_[q] = {i, j};
      gen_bare_[s.name].push_back(q);
    }
  }
}

std::optional<ModuleRef> Env::lookup(const std::string& name) const {
  ModuleRef r;
  if (auto it = components_.find(name); it != components_.end()) {
    r.kind = ModuleRef::Kind::Source;
    r.comp = &prog_.components[it->second];
    r.sig = &r.comp->sig;
    r.qualified = name;
    return r;
  }
  if (auto it = externals_.find(name); it != externals_.end()) {
    r.kind = ModuleRef::Kind::External;
    r.sig = &prog_.externals[it->second];
    r.qualified = name;
    return r;
  }
  std::string q = name;
  if (name.find('.') == std::string::npos) {
    auto it = gen_bare_.find(name);
    if (it == gen_bare_.end() || it->second.size() != 1) return std::nullopt;
    q = it->second.front();
  }
  auto it = gen_.find(q);
  if (it == gen_.end()) return std::nullopt;
  r.kind = ModuleRef::Kind::Generated;
  r.gen = &prog_.imports[it->second.first];
  r.sig = &r.gen->signatures[it->second.second];
  r.qualified = q;
  return r;
}

namespace {

class Resolver {
 public:
  explicit Resolver(const Env& env) : env_(env) {}

  void signature(const Signature& s) {
    std::set<std::string> names;
    auto declare = [&](const std::string& n, const SourceSpan& loc) {
      if (!names.insert(n).second)
        throw CompileError("duplicate definition", "`" + n + "` defined twice in `" + s.name + "`",
                           loc);
    };
    std::set<std::string> params;
    for (const auto& p : s.params) {
      declare(p.name, s.loc);
      if (p.default_value) check_expr(*p.default_value, params, s.loc, "parameter default");
      params.insert(p.name);
    }
    std::set<std::string> pl = params;
    for (const auto& l : s.lets) {
      declare(l.name, s.loc);
      check_expr(l.value, pl, s.loc, "let");
      pl.insert(l.name);
    }
    std::set<std::string> all = pl;
    for (const auto& d : s.somes)
      for (const auto& n : d.names) {
        declare(n, d.loc);
        all.insert(n);
      }
    std::set<std::string> events;
    for (const auto& e : s.events) {
      if (!events.insert(e.name).second)
        throw CompileError("duplicate definition", "event `'" + e.name + "` defined twice", e.loc);
      check_expr(e.delay, all, e.loc, "event delay");
    }
    for (const auto& w : s.where) check_formula(w, pl, s.loc, "where clause");
    for (const auto& d : s.somes)
      for (const auto& c : d.constraints) check_formula(c, all, d.loc, "output constraint");
    std::set<std::string> ports;
    for (const auto* list : {&s.inputs, &s.outputs})
      for (const auto& p : *list) {
        if (!ports.insert(p.name).second)
          throw CompileError("duplicate definition", "port `" + p.name + "` defined twice", p.loc);
        port_def(p, pl, all, events);
      }
  }

  void component(const Component& c) {
    sig_ = &c.sig;
    base_.clear();
    for (const auto& p : c.sig.params) base_.insert(p.name);
    for (const auto& l : c.sig.lets) base_.insert(l.name);
    for (const auto& n : c.sig.out_params()) base_.insert(n);
    events_.clear();
    for (const auto& e : c.sig.events) events_.insert(e.name);
    scopes_.clear();
    block(c.body);
    out_assigned_.clear();
  }

 private:
  struct Scope {
    std::map<std::string, std::optional<ModuleRef>> instances;
    std::map<std::string, std::string> invocations;  // invoc -> instance
    std::map<std::string, const PortDef*> bundles;
    std::set<std::string> vars;                       // lets and loop vars
  };

  [[noreturn]] void unbound(const std::string& what, const std::string& n,
                            const SourceSpan& loc) const {
    throw CompileError("unbound identifier", what + " `" + n + "` is not defined", loc);
  }

  void check_expr(const Expr& e, const std::set<std::string>& scope, const SourceSpan& loc,
                  const std::string& ctx) const {
    for (const auto& v : free_vars(e)) {
      if (v.find("::") != std::string::npos) {
        if (scopes_.empty())
          throw CompileError("unbound identifier",
                             "output parameter access `" + v + "` not allowed in " + ctx, loc);
        qualified(v, loc);
        continue;
      }
      if (!scope.count(v) && !in_body_scope(v)) unbound("identifier", v, loc);
    }
    for_each_call_arity(e, loc);
  }

  void for_each_call_arity(const Expr& e, const SourceSpan& loc) const {
    const auto& n = e.node().v;
    if (const auto* b = std::get_if<BinExpr>(&n)) {
      for_each_call_arity(b->lhs, loc);
      for_each_call_arity(b->rhs, loc);
    } else if (const auto* c = std::get_if<CallExpr>(&n)) {
      if (c->args.size() != builtin_arity(c->fn))
        throw CompileError("arity mismatch", std::string(to_string(c->fn)) + " takes " +
                                                 std::to_string(builtin_arity(c->fn)) +
                                                 " argument(s)",
                           loc);
      for (const auto& a : c->args) for_each_call_arity(a, loc);
    }
  }

  void check_formula(const Formula& f, const std::set<std::string>& scope, const SourceSpan& loc,
                     const std::string& ctx) const {
    for_each_expr(f, [&](const Expr& e) { check_expr(e, scope, loc, ctx); });
  }

  bool in_body_scope(const std::string& v) const {
    for (const auto& s : scopes_)
      if (s.vars.count(v)) return true;
    return false;
  }

  void qualified(const std::string& v, const SourceSpan& loc) const {
    const auto pos = v.find("::");
    const std::string inst = v.substr(0, pos), param = v.substr(pos + 2);
    const auto* m = find_instance(inst);
    if (!m) unbound("instance", inst, loc);
    if (*m && !(*m)->sig->has_out_param(param))
      throw CompileError("unbound identifier",
                         "`" + (*m)->sig->name + "` has no output parameter `" + param + "`", loc);
  }

  const std::optional<ModuleRef>* find_instance(const std::string& n) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it)
      if (auto f = it->instances.find(n); f != it->instances.end()) return &f->second;
    return nullptr;
  }
  const std::string* find_invocation(const std::string& n) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it)
      if (auto f = it->invocations.find(n); f != it->invocations.end()) return &f->second;
    return nullptr;
  }
  const PortDef* find_bundle(const std::string& n) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it)
      if (auto f = it->bundles.find(n); f != it->bundles.end()) return f->second;
    return nullptr;
  }

  void check_time(const Time& t, const std::set<std::string>& events,
                  const std::set<std::string>& scope, const SourceSpan& loc) const {
    if (!events.count(t.event)) unbound("event", "'" + t.event, loc);
    check_expr(t.offset, scope, loc, "time");
  }

  void check_interval(const Interval& i, const std::set<std::string>& events,
                      const std::set<std::string>& scope, const SourceSpan& loc) const {
    if (i.start.event != i.end.event)
      throw CompileError("malformed interval",
                         "interval " + to_string(i) + " mixes events `'" + i.start.event +
                             "` and `'" + i.end.event + "`",
                         loc);
    check_time(i.start, events, scope, loc);
    check_time(i.end, events, scope, loc);
  }

  void port_def(const PortDef& p, const std::set<std::string>& dims_scope,
                const std::set<std::string>& scope, const std::set<std::string>& events) const {
    for (const auto& d : p.dims) check_expr(d, dims_scope, p.loc, "bundle size");
    if (!p.index_vars.empty() && p.index_vars.size() != p.dims.size())
      throw CompileError("arity mismatch",
                         "`" + p.name + "` binds " + std::to_string(p.index_vars.size()) +
                             " index variable(s) for " + std::to_string(p.dims.size()) +
                             " dimension(s)",
                         p.loc);
    std::set<std::string> inner = scope;
    for (const auto& v : p.index_vars) inner.insert(v);
    if (p.live) check_interval(*p.live, events, inner, p.loc);
    check_expr(p.width, scope, p.loc, "width");
  }

  void block(const Block& b) {
    scopes_.emplace_back();
    // Names are visible throughout their block so commands may forward-reference.
    for (const auto& c : b) declare(c);
    for (const auto& c : b) command(c);
    scopes_.pop_back();
  }

  void declare(const Command& c) {
    auto& s = scopes_.back();
    auto dup = [&](const std::string& what, const std::string& n) {
      throw CompileError("duplicate definition", what + " `" + n + "` defined twice", c.loc);
    };
    if (const auto* i = c.as<Instantiate>()) {
      auto m = env_.lookup(i->component);
      if (!m) unbound("component", i->component, c.loc);
      if (!s.instances.emplace(i->name, m).second) dup("instance", i->name);
    } else if (const auto* v = c.as<Invoke>()) {
      if (!s.invocations.emplace(v->name, v->instance).second) dup("invocation", v->name);
    } else if (const auto* bd = c.as<BundleDecl>()) {
      if (sig_->find_input(bd->port.name) || sig_->find_output(bd->port.name) ||
          !s.bundles.emplace(bd->port.name, &bd->port).second)
        dup("bundle", bd->port.name);
    } else if (const auto* l = c.as<LetCmd>()) {
      if (base_.count(l->name) || !s.vars.insert(l->name).second) dup("let", l->name);
    }
  }

  std::size_t dims_of_local(const PortRef& r, bool as_dst) const {
    if (const auto* b = find_bundle(r.name)) return b->dims.size();
    if (const auto* p = sig_->find_input(r.name)) {
      if (as_dst)
        throw CompileError("invalid connection", "cannot write to input port `" + r.name + "`",
                           r.loc);
      if (p->is_interface())
        throw CompileError("invalid connection",
                           "interface port `" + r.name + "` cannot be connected", r.loc);
      return p->dims.size();
    }
    if (const auto* p = sig_->find_output(r.name)) {
      if (!as_dst)
        throw CompileError("invalid connection", "cannot read output port `" + r.name + "`",
                           r.loc);
      return p->dims.size();
    }
    unbound("port", r.name, r.loc);
  }

  void port_ref(const PortRef& r, bool as_dst) const {
    std::size_t dims = 0;
    switch (r.kind) {
      case PortRef::Kind::Const:
        if (as_dst)
          throw CompileError("invalid connection", "cannot write to a constant", r.loc);
        return;
      case PortRef::Kind::Local:
        dims = dims_of_local(r, as_dst);
        break;
      case PortRef::Kind::InvocOut: {
        if (as_dst)
          throw CompileError("invalid connection",
                             "cannot write to invocation output `" + r.name + "." + r.port + "`",
                             r.loc);
        const auto* inst = find_invocation(r.name);
        if (!inst) unbound("invocation", r.name, r.loc);
        const auto* m = find_instance(*inst);
        if (!m) unbound("instance", *inst, r.loc);
        const auto* p = (*m)->sig->find_output(r.port);
        if (!p)
          throw CompileError("unbound identifier",
                             "`" + (*m)->sig->name + "` has no output `" + r.port + "`", r.loc);
        dims = p->dims.size();
        break;
      }
    }
    if (r.indices.size() > dims)
      throw CompileError("arity mismatch",
                         "`" + r.name + "` has " + std::to_string(dims) + " dimension(s) but " +
                             std::to_string(r.indices.size()) + " indices were given",
                         r.loc);
    for (const auto& i : r.indices) {
      if (i.lo) check_expr(*i.lo, base_, r.loc, "index");
      if (i.hi) check_expr(*i.hi, base_, r.loc, "index");
    }
  }

  void command(const Command& c) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Instantiate>) {
            const auto& m = *scopes_.back().instances.at(n.name);
            std::size_t required = 0;
            for (const auto& p : m.sig->params)
              if (!p.default_value) ++required;
            if (n.args.size() < required || n.args.size() > m.sig->params.size())
              throw CompileError("arity mismatch",
                                 "`" + m.sig->name + "` expects " +
                                     (required == m.sig->params.size()
                                          ? std::to_string(required)
                                          : std::to_string(required) + ".." +
                                                std::to_string(m.sig->params.size())) +
                                     " parameter(s), got " + std::to_string(n.args.size()),
                                 c.loc);
            for (const auto& a : n.args) check_expr(a, base_, c.loc, "parameter argument");
            if (n.availability) check_interval(*n.availability, events_, base_, c.loc);
          } else if constexpr (std::is_same_v<T, Invoke>) {
            const auto* m = find_instance(n.instance);
            if (!m) unbound("instance", n.instance, c.loc);
            const auto& sig = *(*m)->sig;
            if (n.events.size() != sig.events.size())
              throw CompileError("arity mismatch",
                                 "`" + sig.name + "` has " + std::to_string(sig.events.size()) +
                                     " event(s), invocation gives " +
                                     std::to_string(n.events.size()),
                                 c.loc);
            const auto inputs = sig.timed_inputs();
            if (n.ports.size() != inputs.size())
              throw CompileError("arity mismatch",
                                 "`" + sig.name + "` has " + std::to_string(inputs.size()) +
                                     " input(s), invocation gives " +
                                     std::to_string(n.ports.size()),
                                 c.loc);
            for (const auto& t : n.events) check_time(t, events_, base_, c.loc);
            for (const auto& p : n.ports) port_ref(p, false);
          } else if constexpr (std::is_same_v<T, Connect>) {
            port_ref(n.dst, true);
            port_ref(n.src, false);
          } else if constexpr (std::is_same_v<T, BundleDecl>) {
            port_def(n.port, with_body(base_), with_body(base_), events_);
          } else if constexpr (std::is_same_v<T, ForLoop>) {
            check_expr(n.lo, base_, c.loc, "loop bound");
            check_expr(n.hi, base_, c.loc, "loop bound");
            scopes_.emplace_back();
            scopes_.back().vars.insert(n.var);
            block(n.body);
            scopes_.pop_back();
          } else if constexpr (std::is_same_v<T, IfElse>) {
            check_formula(n.cond, base_, c.loc, "condition");
            block(n.then_body);
            block(n.else_body);
          } else if constexpr (std::is_same_v<T, LetCmd>) {
            check_expr(n.value, base_, c.loc, "let");
          } else if constexpr (std::is_same_v<T, Assume>) {
            check_formula(n.cond, base_, c.loc, "assume");
          } else if constexpr (std::is_same_v<T, OutAssign>) {
            if (!sig_->has_out_param(n.param))
              throw CompileError("invalid assignment",
                                 "`" + n.param + "` is not an output parameter of `" +
                                     sig_->name + "`",
                                 c.loc);
            check_expr(n.value, base_, c.loc, "output assignment");
          }
        },
        c.v);
  }

  std::set<std::string> with_body(std::set<std::string> s) const {
    for (const auto& sc : scopes_) s.insert(sc.vars.begin(), sc.vars.end());
    return s;
  }

  const Env& env_;
  const Signature* sig_ = nullptr;
  std::set<std::string> base_;
  std::set<std::string> events_;
  std::vector<Scope> scopes_;
  std::set<std::string> out_assigned_;
};

}  // namespace

void resolve(const Env& env) {
  Resolver r(env);
  const auto& p = env.program();
  for (const auto& e : p.externals) r.signature(e);
  for (const auto& g : p.imports)
    for (const auto& s : g.signatures) r.signature(s);
  for (const auto& c : p.components) {
    r.signature(c.sig);
    r.component(c);
  }
}

Env resolve_program(Program p) {
  Env env(std::move(p));
  resolve(env);
  return env;
}

}  // namespace pfil
