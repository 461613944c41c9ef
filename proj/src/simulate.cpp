#include "pfil/simulate.hpp"

#include <algorithm>

#include "pfil/bundle_elim.hpp"
#include "pfil/eval.hpp"

namespace pfil {

namespace {

using Cycle = std::pair<std::string, std::uint64_t>;  // (event, cycle)

std::uint64_t nat(const Expr& e) {
  const auto v = e.as_nat();
  if (!v) throw CompileError("usage error", "simulation needs a parameter-free program; found `" + to_string(e) + "`");
  return *v;
}

struct Window {
  std::string event;
  std::uint64_t lo = 0, hi = 0;

  std::string str() const {
    return "['" + event + "+" + std::to_string(lo) + ", '" + event + "+" + std::to_string(hi) + "]";
  }
};

Window window(const Interval& i) { return {i.start.event, nat(i.start.offset), nat(i.end.offset)}; }

struct Child {
  Signature sig;  // flattened, concrete
};

class ComponentSim {
 public:
  ComponentSim(const Component& c, const std::map<std::string, Child>& children,
               std::map<std::string, std::string> inst_module, std::uint64_t horizon)
      : c_(c), children_(children), inst_module_(std::move(inst_module)), horizon_(horizon) {}

  SimReport run() {
    rep_.component = c_.sig.name;
    for (const auto& e : c_.sig.events) delay_[e.name] = nat(e.delay);
    for (const auto* ps : {&c_.sig.inputs, &c_.sig.outputs})
      for (const auto& p : *ps)
        if (p.live) wellformed(window(*p.live), "port `" + p.name + "`");
    for (const auto& cmd : c_.body) {
      if (const auto* v = cmd.as<Invoke>()) invocs_[v->name] = v;
      if (const auto* i = cmd.as<Instantiate>()) insts_.push_back(i);
    }
    for (const auto& cmd : c_.body) {
      if (const auto* cn = cmd.as<Connect>()) {
        const PortDef* dst = c_.sig.find_output(cn->dst.name);
        if (!dst || !dst->live) continue;
        flow(*dst, window(*dst->live), cn->src, "`" + cn->dst.name + "`");
      } else if (const auto* v = cmd.as<Invoke>()) {
        const Signature& s = child_of(v->instance);
        const auto ins = s.timed_inputs();
        for (std::size_t k = 0; k < ins.size() && k < v->ports.size(); ++k) {
          const Window w = mapped(*v, window(*ins[k]->live));
          wellformed(w, "argument `" + v->name + "." + ins[k]->name + "`");
          flow(*ins[k], w, v->ports[k], "`" + v->name + "." + ins[k]->name + "`");
        }
      }
    }
    for (const auto* i : insts_) occupancy(*i);
    return rep_;
  }

 private:
  void fail(Category c, std::string msg) { rep_.failures[c].push_back(std::move(msg)); }

  const Signature& child_of(const std::string& inst) { return children_.at(inst_module_.at(inst)).sig; }

  /// Child time `'T+n` -> parent window via the invocation's event binding.
  Window mapped(const Invoke& v, const Window& w) {
    const Signature& s = child_of(v.instance);
    for (std::size_t k = 0; k < s.events.size(); ++k)
      if (s.events[k].name == w.event) {
        const Time& t = v.events.at(k);
        const auto base = nat(t.offset);
        return {t.event, base + w.lo, base + w.hi};
      }
    throw CompileError("usage error", "unknown event `" + w.event + "`");
  }

  void wellformed(const Window& w, const std::string& what) {
    if (w.lo >= w.hi) fail(Category::WellFormedInterval, what + " has empty interval " + w.str());
  }

  /// Cycles at which the source drives a valid value; nullopt for constants.
  std::optional<std::set<Cycle>> valid(const PortRef& src, Expr& width) {
    std::set<Cycle> out;
    auto mark = [&](const Window& w) {
      for (auto t = w.lo; t < w.hi; ++t) out.insert({w.event, t});
    };
    if (src.kind == PortRef::Kind::Const) return std::nullopt;
    if (src.kind == PortRef::Kind::Local) {
      const PortDef* p = c_.sig.find_input(src.name);
      if (!p) throw CompileError("usage error", "unknown source port `" + src.name + "`");
      width = p->width;
      if (p->live) mark(window(*p->live));
      return out;
    }
    const Invoke& v = *invocs_.at(src.name);
    const PortDef* p = child_of(v.instance).find_output(src.port);
    if (!p) throw CompileError("usage error", "unknown output `" + src.port + "`");
    width = p->width;
    if (p->live) mark(mapped(v, window(*p->live)));
    return out;
  }

  void flow(const PortDef& sink, const Window& req, const PortRef& src, const std::string& what) {
    Expr width;
    const auto have = valid(src, width);
    if (!have) return;
    if (nat(width) != nat(sink.width))
      fail(Category::WidthMatch, what + " expects width " + to_string(sink.width) + " but gets " + to_string(width));
    for (auto t = req.lo; t < req.hi; ++t)
      if (!have->count({req.event, t})) {
        fail(Category::IntervalAvailability,
             what + " requires a value at cycle '" + req.event + "+" + std::to_string(t) +
                 " (window " + req.str() + ") that its source does not provide");
        return;
      }
  }

  void occupancy(const Instantiate& inst) {
    const Signature& s = child_of(inst.name);
    std::vector<const Invoke*> uses;
    for (const auto& cmd : c_.body)
      if (const auto* v = cmd.as<Invoke>(); v && v->instance == inst.name) uses.push_back(v);
    std::optional<Window> declared;
    if (inst.availability) {
      declared = window(*inst.availability);
      wellformed(*declared, "availability of `" + inst.name + "`");
    }

    // Busy windows of each use, per child event.
    struct Busy {
      const Invoke* v;
      Window w;
    };
    std::vector<Busy> busy;
    for (const auto* v : uses)
      for (std::size_t k = 0; k < s.events.size(); ++k) {
        const auto t = nat(v->events.at(k).offset);
        busy.push_back({v, {v->events.at(k).event, t, t + nat(s.events[k].delay)}});
      }

    // Within one execution: two uses may not share a cycle.
    std::map<Cycle, const Invoke*> one;
    for (const auto& b : busy)
      for (auto t = b.w.lo; t < b.w.hi; ++t) {
        auto [it, fresh] = one.emplace(Cycle{b.w.event, t}, b.v);
        if (!fresh && it->second != b.v) {
          fail(Category::InstanceConflict, "`" + it->second->name + "` and `" + b.v->name + "` both use `" +
                                               inst.name + "` at cycle '" + b.w.event + "+" + std::to_string(t));
          break;
        }
      }

    if (declared)
      for (const auto& b : busy)
        for (auto t = b.w.lo; t < b.w.hi; ++t)
          if (b.w.event != declared->event || t < declared->lo || t >= declared->hi) {
            fail(Category::InstanceAvailability, "`" + b.v->name + "` uses `" + inst.name + "` at cycle '" +
                                                     b.w.event + "+" + std::to_string(t) +
                                                     " outside its availability " + declared->str());
            break;
          }

    // Across executions: each use against itself, and the instance's
    // reservation window (declared or spanning all uses).
    std::vector<Window> windows;
    for (const auto& b : busy) windows.push_back(b.w);
    if (declared) {
      windows.push_back(*declared);
    } else if (!busy.empty()) {
      Window r = busy.front().w;
      bool same = true;
      for (const auto& b : busy) {
        same &= b.w.event == r.event;
        r.lo = std::min(r.lo, b.w.lo);
        r.hi = std::max(r.hi, b.w.hi);
      }
      if (same) windows.push_back(r);
    }
    for (const auto& w : windows) {
      const auto it = delay_.find(w.event);
      if (it == delay_.end() || it->second == 0) continue;
      const auto d = it->second;
      std::map<std::uint64_t, std::uint64_t> owner;  // cycle -> execution
      bool clash = false;
      for (std::uint64_t k = 0; k * d < horizon_ && !clash; ++k)
        for (auto t = w.lo; t < w.hi && !clash; ++t) {
          auto [pos, fresh] = owner.emplace(t + k * d, k);
          if (!fresh) {
            fail(Category::DelayPipelining,
                 "executions " + std::to_string(pos->second) + " and " + std::to_string(k) +
                     " both need `" + inst.name + "` at cycle '" + w.event + "+" +
                     std::to_string(t + k * d) + " ('" + w.event + " has delay " + std::to_string(d) + ")");
            clash = true;
          }
        }
    }
  }

  const Component& c_;
  const std::map<std::string, Child>& children_;
  std::map<std::string, std::string> inst_module_;
  std::uint64_t horizon_;
  std::map<std::string, std::uint64_t> delay_;
  std::map<std::string, const Invoke*> invocs_;
  std::vector<const Instantiate*> insts_;
  SimReport rep_;
};

/// Concrete, flattened signatures of all modules, plus per-component
/// instance -> module maps with parametric externals specialised.
struct Prepared {
  std::vector<Component> components;
  std::map<std::string, Child> modules;
  std::vector<std::map<std::string, std::string>> inst_module;
};

Prepared prepare(const Program& p) {
  Prepared out;
  std::map<std::string, const Signature*> raw;
  for (const auto& s : p.externals) raw[s.name] = &s;
  for (const auto& c : p.components) {
    if (!c.sig.params.empty() || !c.sig.somes.empty())
      throw CompileError("usage error", "simulation needs a parameter-free program; `" + c.sig.name + "` has parameters");
    raw[c.sig.name] = &c.sig;
  }
  std::map<std::string, Signature> concrete;  // unflattened, by module key
  auto module_for = [&](const Instantiate& i) {
    const auto it = raw.find(i.component);
    if (it == raw.end()) throw CompileError("usage error", "unknown component `" + i.component + "`");
    std::vector<std::uint64_t> args;
    for (const auto& a : i.args) args.push_back(nat(a));
    const std::string key = args.empty() ? i.component : mangle(i.component, args);
    if (!concrete.count(key)) {
      args = complete_args(*it->second, args);
      Binding b;
      for (std::size_t k = 0; k < args.size(); ++k) b[it->second->params[k].name] = args[k];
      if (!it->second->out_params().empty())
        throw CompileError("usage error", "`" + i.component + "` has unbound output parameters");
      concrete[key] = concretize(*it->second, b, {}, key);
    }
    return key;
  };
  for (const auto& c : p.components) {
    std::map<std::string, std::string> m;
    for (const auto& cmd : c.body)
      if (const auto* i = cmd.as<Instantiate>()) m[i->name] = module_for(*i);
    const SignatureLookup lookup = [&](const std::string& inst_module) -> const Signature* {
      auto it = concrete.find(inst_module);
      return it == concrete.end() ? nullptr : &it->second;
    };
    // Bundle elimination looks modules up by instance component name.
    Component renamed = c;
    for (auto& cmd : renamed.body)
      if (auto* i = std::get_if<Instantiate>(&cmd.v)) {
        i->component = m.at(i->name);
        i->args.clear();
      }
    out.components.push_back(eliminate_bundles(renamed, lookup));
    out.inst_module.push_back(std::move(m));
  }
  for (const auto& [k, s] : concrete) out.modules[k] = Child{flatten_signature(s)};
  return out;
}

}  // namespace

std::set<Category> SimReport::categories() const {
  std::set<Category> out;
  for (const auto& [c, _] : failures) out.insert(c);
  return out;
}

std::uint64_t min_horizon(const Program& p) {
  std::uint64_t top = 0, delay = 0;
  auto see = [&](const Expr& e) {
    if (auto v = e.as_nat()) top = std::max(top, *v);
  };
  auto sig = [&](const Signature& s) {
    for (const auto& e : s.events)
      if (auto v = e.delay.as_nat()) delay = std::max(delay, *v);
    for (const auto* ps : {&s.inputs, &s.outputs})
      for (const auto& port : *ps)
        if (port.live) {
          see(port.live->start.offset);
          see(port.live->end.offset);
        }
  };
  for (const auto& s : p.externals) sig(s);
  std::uint64_t inv = 0;
  for (const auto& c : p.components) {
    sig(c.sig);
    for (const auto& cmd : c.body) {
      if (const auto* v = cmd.as<Invoke>())
        for (const auto& t : v->events)
          if (auto o = t.offset.as_nat()) inv = std::max(inv, *o);
      if (const auto* i = cmd.as<Instantiate>(); i && i->availability) see(i->availability->end.offset);
    }
  }
  return top + inv + delay;
}

std::vector<SimReport> simulate_concrete(const Program& p, std::uint64_t horizon) {
  if (horizon == 0) throw CompileError("usage error", "horizon must be positive");
  const auto need = min_horizon(p);
  if (horizon < need)
    throw CompileError("usage error", "horizon " + std::to_string(horizon) +
                                          " is smaller than the program's largest timestamp plus delay (" +
                                          std::to_string(need) + ")");
  const Prepared prep = prepare(p);
  std::vector<SimReport> out;
  for (std::size_t k = 0; k < prep.components.size(); ++k)
    out.push_back(ComponentSim(prep.components[k], prep.modules, prep.inst_module[k], horizon).run());
  return out;
}

}  // namespace pfil
