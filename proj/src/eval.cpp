#include "pfil/eval.hpp"

#include <algorithm>
#include <sstream>

namespace pfil {

namespace {

std::string show(const Binding& b) {
  std::string out;
  for (const auto& [k, v] : b) {
    if (!out.empty()) out += ", ";
    out += k + "=" + std::to_string(v);
  }
  return out.empty() ? "no parameters" : out;
}

bool holds(const Formula& f, const Binding& s, const SourceSpan& loc) {
  try {
    return evaluate(f, s);
  } catch (const EvalError& e) {
    throw CompileError("evaluation error", "`" + to_string(f) + "`: " + e.what(), loc);
  }
}

Time eval_time(const Time& t, const Binding& s, const SourceSpan& loc) {
  return Time{t.event, Expr::nat(subst(t.offset, s, loc))};
}

/// Substitutes everything bound in `s` except `keep`, then folds.
Expr partial(const Expr& e, const Binding& s, const std::vector<std::string>& keep,
             const SourceSpan& loc) {
  std::map<std::string, Expr> m;
  for (const auto& [k, v] : s)
    if (std::find(keep.begin(), keep.end(), k) == keep.end()) m[k] = Expr::nat(v);
  try {
    Expr r = normalize(substitute(e, m));
    for (const auto& v : free_vars(r))
      if (std::find(keep.begin(), keep.end(), v) == keep.end())
        throw CompileError("evaluation error", "unbound parameter `" + v + "`", loc);
    return r;
  } catch (const MalformedExpr& x) {
    throw CompileError("evaluation error", "`" + to_string(e) + "`: " + x.what(), loc);
  }
}

PortDef eval_port(const PortDef& p, const Binding& s) {
  PortDef q = p;
  for (auto& d : q.dims) d = Expr::nat(subst(d, s, p.loc));
  q.width = Expr::nat(subst(p.width, s, p.loc));
  if (p.live) {
    auto t = [&](const Time& x) {
      return Time{x.event, partial(x.offset, s, p.index_vars, p.loc)};
    };
    q.live = Interval{t(p.live->start), t(p.live->end)};
  }
  return q;
}

void check_where(const Signature& sig, const Binding& s) {
  for (const auto& w : sig.where)
    if (!holds(w, s, sig.loc))
      throw CompileError("evaluation error",
                         "where clause `" + to_string(w) + "` of `" + sig.name +
                             "` does not hold for " + show(s),
                         sig.loc);
}

class BodyEval {
 public:
  BodyEval(const Env& env, const ChildResolver& child, Binding s)
      : env_(env), child_(child), s_(std::move(s)) {}

  Block run(const Block& body) {
    Block out;
    block(body, "", out);
    return out;
  }

  Binding outs;
  std::vector<std::pair<std::string, std::uint64_t>> injected;

 private:
  struct Names {
    std::map<std::string, std::string> inst, inv, bundle;
    std::map<std::string, std::string> comp;  // instance -> concrete module
  };

  void block(const Block& b, const std::string& suffix, Block& out) {
    const Binding saved_s = s_;
    const Names saved_n = names_;
    for (const auto& c : b) {
      if (const auto* v = c.as<Invoke>()) names_.inv[v->name] = v->name + suffix;
      if (const auto* d = c.as<BundleDecl>()) names_.bundle[d->port.name] = d->port.name + suffix;
    }
    for (auto idx : topo_order(b)) {
      const Command& c = b[idx];
      if (const auto* l = c.as<LetCmd>()) {
        s_[l->name] = subst(l->value, s_, c.loc);
        continue;
      }
      const auto& i = *c.as<Instantiate>();
      const auto mod = env_.lookup(i.component);
      if (!mod) throw CompileError("elaboration error", "unknown component `" + i.component + "`", c.loc);
      std::vector<std::uint64_t> args;
      for (const auto& a : i.args) args.push_back(subst(a, s_, c.loc));
      const ChildUnit unit = child_(*mod, args, c.loc);
      const std::string cname = i.name + suffix;
      names_.inst[i.name] = cname;
      names_.comp[i.name] = unit.name;
      for (const auto& p : mod->sig->out_params()) {
        const auto it = unit.out.find(p);
        if (it == unit.out.end())
          throw CompileError("elaboration error",
                             "`" + unit.name + "` did not bind output parameter `" + p + "`", c.loc);
        s_[i.name + "::" + p] = it->second;
        injected.emplace_back(cname + "::" + p, it->second);
      }
    }
    for (const auto& c : b) command(c, suffix, out);
    s_ = saved_s;
    names_ = saved_n;
  }

  PortRef port(const PortRef& r, const SourceSpan& loc) {
    PortRef q = r;
    if (r.kind == PortRef::Kind::InvocOut) q.name = names_.inv.at(r.name);
    if (r.kind == PortRef::Kind::Local)
      if (auto it = names_.bundle.find(r.name); it != names_.bundle.end()) q.name = it->second;
    for (auto& ix : q.indices) {
      if (ix.lo) ix.lo = Expr::nat(subst(*ix.lo, s_, loc));
      if (ix.hi) ix.hi = Expr::nat(subst(*ix.hi, s_, loc));
    }
    return q;
  }

  void command(const Command& c, const std::string& suffix, Block& out) {
    auto emit = [&](auto v) { out.push_back(Command{std::move(v), c.loc}); };
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Instantiate>) {
            Instantiate ci;
            ci.name = names_.inst.at(n.name);
            ci.component = names_.comp.at(n.name);
            if (n.availability)
              ci.availability = Interval{eval_time(n.availability->start, s_, c.loc),
                                         eval_time(n.availability->end, s_, c.loc)};
            emit(std::move(ci));
          } else if constexpr (std::is_same_v<T, Invoke>) {
            Invoke v;
            v.name = names_.inv.at(n.name);
            v.instance = names_.inst.at(n.instance);
            for (const auto& t : n.events) v.events.push_back(eval_time(t, s_, c.loc));
            for (const auto& p : n.ports) v.ports.push_back(port(p, c.loc));
            emit(std::move(v));
          } else if constexpr (std::is_same_v<T, Connect>) {
            emit(Connect{port(n.dst, c.loc), port(n.src, c.loc)});
          } else if constexpr (std::is_same_v<T, BundleDecl>) {
            BundleDecl d{eval_port(n.port, s_)};
            d.port.name = names_.bundle.at(n.port.name);
            emit(std::move(d));
          } else if constexpr (std::is_same_v<T, ForLoop>) {
            const auto lo = subst(n.lo, s_, c.loc), hi = subst(n.hi, s_, c.loc);
            const bool had = s_.count(n.var);
            const auto old = had ? s_[n.var] : 0;
            for (auto k = lo; k < hi; ++k) {
              s_[n.var] = k;
              block(n.body, suffix + "_" + std::to_string(k), out);
            }
            if (had)
              s_[n.var] = old;
            else
              s_.erase(n.var);
          } else if constexpr (std::is_same_v<T, IfElse>) {
            block(holds(n.cond, s_, c.loc) ? n.then_body : n.else_body, suffix, out);
          } else if constexpr (std::is_same_v<T, Assume>) {
            if (!holds(n.cond, s_, c.loc))
              throw CompileError("evaluation error",
                                 "assumption `" + to_string(n.cond) + "` is false here", c.loc);
          } else if constexpr (std::is_same_v<T, OutAssign>) {
            if (outs.count(n.param))
              throw CompileError("evaluation error",
                                 "output parameter `" + n.param + "` assigned more than once", c.loc);
            outs[n.param] = subst(n.value, s_, c.loc);
          }
        },
        c.v);
  }

  const Env& env_;
  const ChildResolver& child_;
  Binding s_;
  Names names_;
};

}  // namespace

std::uint64_t subst(const Expr& e, const Binding& s, const SourceSpan& loc) {
  try {
    return evaluate(e, s);
  } catch (const EvalError& x) {
    throw CompileError("evaluation error", "`" + to_string(e) + "`: " + x.what(), loc);
  }
}

std::vector<std::uint64_t> complete_args(const Signature& sig, std::vector<std::uint64_t> args,
                                         const SourceSpan& loc) {
  if (args.size() > sig.params.size())
    throw CompileError("elaboration error", "too many parameters for `" + sig.name + "`", loc);
  Binding s;
  for (std::size_t k = 0; k < sig.params.size(); ++k) {
    const auto& p = sig.params[k];
    if (k >= args.size()) {
      if (!p.default_value)
        throw CompileError("elaboration error",
                           "missing parameter `" + p.name + "` of `" + sig.name + "`", loc);
      args.push_back(subst(*p.default_value, s, loc));
    }
    s[p.name] = args[k];
  }
  return args;
}

Binding bind_params(const Signature& sig, const std::vector<std::uint64_t>& args) {
  Binding s;
  for (std::size_t k = 0; k < sig.params.size() && k < args.size(); ++k)
    s[sig.params[k].name] = args[k];
  for (const auto& l : sig.lets) s[l.name] = subst(l.value, s, sig.loc);
  return s;
}

std::string mangle(const std::string& name, const std::vector<std::uint64_t>& args) {
  std::string out = name;
  std::replace(out.begin(), out.end(), '.', '_');
  for (auto a : args) out += "_" + std::to_string(a);
  return out;
}

Signature concretize(const Signature& sig, const Binding& params, const Binding& out,
                     const std::string& name) {
  Binding s = params;
  for (const auto& l : sig.lets) s[l.name] = subst(l.value, s, sig.loc);
  check_where(sig, s);
  for (const auto& p : sig.out_params()) {
    const auto it = out.find(p);
    if (it == out.end())
      throw CompileError("evaluation error",
                         "output parameter `" + p + "` of `" + sig.name + "` is unbound", sig.loc);
    s[p] = it->second;
  }
  for (const auto& c : sig.out_constraints())
    if (!holds(c, s, sig.loc))
      throw CompileError("evaluation error",
                         "output parameter constraint `" + to_string(c) + "` of `" + sig.name +
                             "` violated by " + show(out),
                         sig.loc);
  Signature r;
  r.name = name;
  r.is_external = sig.is_external;
  r.loc = sig.loc;
  for (const auto& e : sig.events) r.events.push_back({e.name, Expr::nat(subst(e.delay, s, e.loc)), e.loc});
  for (const auto& p : sig.inputs) r.inputs.push_back(eval_port(p, s));
  for (const auto& p : sig.outputs) r.outputs.push_back(eval_port(p, s));
  return r;
}

EvalResult eval_component(const Component& c, const std::vector<std::uint64_t>& args,
                          const Env& env, const ChildResolver& child,
                          const std::string& concrete_name) {
  Binding params;
  for (std::size_t k = 0; k < c.sig.params.size(); ++k) params[c.sig.params[k].name] = args.at(k);
  const Binding s = bind_params(c.sig, args);
  check_where(c.sig, s);
  BodyEval ev(env, child, s);
  EvalResult r;
  r.component.body = ev.run(c.body);
  for (const auto& p : c.sig.out_params())
    if (!ev.outs.count(p))
      throw CompileError("evaluation error",
                         "output parameter `" + p + "` of `" + c.sig.name + "` is never assigned for " +
                             show(params),
                         c.sig.loc);
  r.component.sig = concretize(c.sig, params, ev.outs, concrete_name);
  r.out = ev.outs;
  r.injected = std::move(ev.injected);
  return r;
}

std::vector<std::size_t> topo_order(const Block& body) {
  std::vector<std::size_t> defs;
  std::map<std::string, std::size_t> inst_of, let_of;  // name -> position in defs
  for (std::size_t k = 0; k < body.size(); ++k) {
    if (const auto* i = body[k].as<Instantiate>()) {
      inst_of[i->name] = defs.size();
      defs.push_back(k);
    } else if (const auto* l = body[k].as<LetCmd>()) {
      let_of[l->name] = defs.size();
      defs.push_back(k);
    }
  }
  std::vector<std::set<std::size_t>> deps(defs.size());
  auto depend = [&](std::size_t j, const std::set<std::string>& vars) {
    for (const auto& v : vars) {
      const auto sep = v.find("::");
      if (sep != std::string::npos) {
        if (auto it = inst_of.find(v.substr(0, sep)); it != inst_of.end()) deps[j].insert(it->second);
      } else if (auto it = let_of.find(v); it != let_of.end() && it->second != j) {
        deps[j].insert(it->second);
      }
    }
  };
  for (std::size_t j = 0; j < defs.size(); ++j) {
    const Command& c = body[defs[j]];
    std::set<std::string> vars;
    if (const auto* i = c.as<Instantiate>()) {
      for (const auto& a : i->args) collect_free_vars(a, vars);
      if (i->availability) {
        collect_free_vars(i->availability->start.offset, vars);
        collect_free_vars(i->availability->end.offset, vars);
      }
      for (const auto& other : body)
        if (const auto* v = other.as<Invoke>(); v && v->instance == i->name)
          for (const auto& t : v->events) collect_free_vars(t.offset, vars);
    } else {
      collect_free_vars(c.as<LetCmd>()->value, vars);
    }
    depend(j, vars);
  }
  auto name_of = [&](std::size_t j) {
    const Command& c = body[defs[j]];
    if (const auto* i = c.as<Instantiate>()) return i->name;
    return c.as<LetCmd>()->name;
  };

  std::vector<std::size_t> order;
  std::vector<bool> done(defs.size(), false);
  while (order.size() < defs.size()) {
    bool progressed = false;
    for (std::size_t j = 0; j < defs.size(); ++j) {
      if (done[j]) continue;
      if (std::all_of(deps[j].begin(), deps[j].end(), [&](std::size_t d) { return done[d]; })) {
        done[j] = true;
        order.push_back(defs[j]);
        progressed = true;
        break;  // restart so the earliest ready definition always goes first
      }
    }
    if (progressed) continue;
    // Walk unfinished dependencies until one repeats to name the cycle.
    std::size_t cur = 0;
    while (done[cur]) ++cur;
    std::vector<std::size_t> path;
    while (std::find(path.begin(), path.end(), cur) == path.end()) {
      path.push_back(cur);
      for (auto d : deps[cur])
        if (!done[d]) {
          cur = d;
          break;
        }
    }
    std::string msg = "cyclic output parameter dependency: ";
    auto start = std::find(path.begin(), path.end(), cur);
    for (auto it = start; it != path.end(); ++it) msg += name_of(*it) + " -> ";
    msg += name_of(cur);
    throw CompileError("elaboration error", msg, body[defs[cur]].loc);
  }
  return order;
}

bool is_concrete(const Component& c) {
  if (!c.sig.params.empty() || !c.sig.lets.empty() || !c.sig.somes.empty() ||
      !c.sig.where.empty())
    return false;
  for (const auto& cmd : c.body) {
    if (const auto* i = cmd.as<Instantiate>()) {
      if (!i->args.empty()) return false;
    } else if (!cmd.as<Invoke>() && !cmd.as<Connect>() && !cmd.as<BundleDecl>()) {
      return false;
    }
  }
  return true;
}

}  // namespace pfil
