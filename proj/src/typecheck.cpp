#include "pfil/typecheck.hpp"

#include <algorithm>
#include <sstream>

namespace pfil {

namespace {

Formula conj(const std::vector<Formula>& fs) {
  std::vector<Formula> parts;
  for (const auto& f : fs)
    if (!f.is_true()) parts.push_back(f);
  if (parts.empty()) return Formula::truth(true);
  if (parts.size() == 1) return parts.front();
  return Formula::conj(std::move(parts));
}

Expr norm(const Expr& e) {
  try {
    return normalize(e);
  } catch (const MalformedExpr&) {
    return e;
  }
}

Formula norm(const Formula& f) {
  try {
    return normalize(f);
  } catch (const MalformedExpr&) {
    return f;
  }
}

struct LoopFrame {
  std::string sym;
  Expr lo;
  Expr hi;
  std::vector<std::string> owned;  // symbols introduced inside this loop
};

/// One side of a data flow: a port or bundle with its declared type, in the
/// symbols of the component under check.
struct Side {
  std::string desc;
  std::vector<Expr> dims;
  std::vector<std::string> ivars;
  std::optional<Interval> live;
  Expr width;
  bool is_const = false;
};

struct InstInfo {
  std::string key;
  std::string name;
  ModuleRef mod;
  std::map<std::string, Expr> subst;  // child params, lets and outputs
  std::optional<Interval> avail;
  std::vector<Formula> pc;
  std::vector<LoopFrame> frames;
  SourceSpan loc;
  std::vector<std::size_t> invocs;
};

struct InvInfo {
  std::string name;
  std::size_t inst = 0;
  std::map<std::string, Time> events;  // child event -> parent time
  std::vector<Formula> pc;
  std::vector<LoopFrame> frames;
  SourceSpan loc;
};

struct Assignment {
  std::string param;
  Expr value;
  std::vector<Formula> pc;
  SourceSpan loc;
};

struct Scope {
  std::map<std::string, std::size_t> instances;
  std::map<std::string, std::size_t> invocs;
  std::map<std::string, PortDef> bundles;
  std::map<std::string, Expr> subst;
};

std::string with_event(const Time& t) { return to_string(t); }

class Checker {
 public:
  Checker(const Component& c, const Env& env) : env_(env), comp_(c), sig_(c.sig) {}

  GeneratedObligations run() {
    signature();
    block(comp_.body);
    instance_checks();
    outparams();
    return std::move(out_);
  }

 private:
  // ---- obligation emission ------------------------------------------------
  void emit(Category cat, Formula goal, const SourceSpan& loc, std::string note) {
    Obligation o;
    std::vector<Formula> pc = pc_;
    pc.insert(pc.end(), extra_pc_.begin(), extra_pc_.end());
    o.pc = norm(conj(pc));
    o.goal = norm(goal);
    o.category = cat;
    o.loc = loc;
    o.note = std::move(note);
    for (const auto& f : frames_) o.domains.push_back({f.sym, f.lo, f.hi});
    o.domains.insert(o.domains.end(), extra_domains_.begin(), extra_domains_.end());
    if (cat == Category::NonnegSubtraction) {
      const std::string key = to_string(o.pc) + "|" + to_string(o.goal);
      if (!seen_.insert(key).second) return;
    }
    out_.obligations.push_back(std::move(o));
  }

  void partials(const Expr& e, const SourceSpan& loc) {
    for_each_sub(e, [&](const Expr& l, const Expr& r) {
      emit(Category::NonnegSubtraction, le(r, l), loc,
           "`" + to_string(l) + "-" + to_string(r) + "` may be negative");
    });
    for_each_partial(e, [&](const Expr& d, bool is_log2) {
      if (is_log2)
        emit(Category::NonnegSubtraction, le(Expr::nat(1), d), loc,
             "log2 argument `" + to_string(d) + "` may be zero");
      else
        emit(Category::NonnegSubtraction, Formula::cmp(CmpOp::Ne, d, Expr::nat(0)), loc,
             "divisor `" + to_string(d) + "` may be zero");
    });
  }

  Expr prep(const Expr& e, const SourceSpan& loc, const std::map<std::string, Expr>* extra = nullptr) {
    Expr s = substitute(e, scope_.subst);
    if (extra) s = substitute(s, *extra);
    partials(s, loc);
    return norm(s);
  }

  Formula prep(const Formula& f, const SourceSpan& loc) {
    Formula s = substitute(f, scope_.subst);
    for_each_expr(s, [&](const Expr& e) { partials(e, loc); });
    return norm(s);
  }

  Time prep(const Time& t, const SourceSpan& loc, const std::map<std::string, Expr>* extra = nullptr) {
    return Time{t.event, prep(t.offset, loc, extra)};
  }

  std::string fresh(const std::string& base) {
    const int n = ++counter_[base];
    return base + "#" + std::to_string(n);
  }

  // ---- ports --------------------------------------------------------------
  /// Substitutes, renames index variables to fresh symbols, and emits the
  /// well-formedness obligation of the liveness interval.
  PortDef prep_port(const PortDef& p) {
    PortDef q = p;
    std::map<std::string, Expr> ren;
    q.index_vars.clear();
    for (std::size_t k = 0; k < p.dims.size(); ++k) q.dims[k] = prep(p.dims[k], p.loc);
    std::vector<Formula> saved_pc = extra_pc_;
    std::vector<Domain> saved_dom = extra_domains_;
    for (std::size_t k = 0; k < p.index_vars.size(); ++k) {
      const std::string v = fresh("$" + p.name + "." + p.index_vars[k]);
      ren[p.index_vars[k]] = Expr::var(v);
      q.index_vars.push_back(v);
      extra_pc_.push_back(lt(Expr::var(v), q.dims[k]));
      extra_domains_.push_back({v, Expr::nat(0), q.dims[k]});
    }
    if (p.live) {
      q.live = Interval{prep(p.live->start, p.loc, &ren), prep(p.live->end, p.loc, &ren)};
      emit(Category::WellFormedInterval, lt(q.live->start.offset, q.live->end.offset), p.loc,
           "interval " + to_string(*q.live) + " of `" + p.name + "` may be empty");
    }
    q.width = prep(p.width, p.loc);
    extra_pc_ = saved_pc;
    extra_domains_ = saved_dom;
    return q;
  }

  static Side side_of(const PortDef& p, std::string desc) {
    Side s;
    s.desc = std::move(desc);
    s.dims = p.dims;
    s.ivars = p.index_vars;
    s.live = p.live;
    s.width = p.width;
    return s;
  }

  Side child_side(const PortDef& p, const InstInfo& inst, const InvInfo& inv,
                  const std::string& desc) {
    std::map<std::string, Expr> m = inst.subst;
    Side s;
    s.desc = desc;
    for (const auto& v : p.index_vars) {
      const std::string f = fresh("$" + p.name + "." + v);
      m[v] = Expr::var(f);
      s.ivars.push_back(f);
    }
    for (const auto& d : p.dims) s.dims.push_back(norm(substitute(d, inst.subst)));
    s.width = norm(substitute(p.width, inst.subst));
    if (p.live) {
      auto map_time = [&](const Time& t) {
        const Time& base = inv.events.at(t.event);
        return Time{base.event, norm(base.offset + substitute(t.offset, m))};
      };
      s.live = Interval{map_time(p.live->start), map_time(p.live->end)};
    }
    return s;
  }

  Side source_side(const PortRef& r) {
    if (r.kind == PortRef::Kind::Const) {
      Side s;
      s.desc = std::to_string(r.value);
      s.is_const = true;
      return s;
    }
    if (r.kind == PortRef::Kind::InvocOut) {
      const auto& inv = invs_[scope_.invocs.at(r.name)];
      const auto& inst = insts_[inv.inst];
      return child_side(*inst.mod.sig->find_output(r.port), inst, inv, r.name + "." + r.port);
    }
    return local_side(r.name);
  }

  Side local_side(const std::string& name) {
    if (auto it = scope_.bundles.find(name); it != scope_.bundles.end())
      return side_of(it->second, name);
    return side_of(own_ports_.at(name), name);
  }

  struct Selection {
    std::vector<Expr> elems;   // per dimension, with range positions offset by t
    std::vector<Expr> lens;    // per range position
    std::vector<Expr> starts;  // per range position
  };

  Selection select(const Side& s, const std::vector<Index>& idx, const SourceSpan& loc) {
    Selection sel;
    for (std::size_t k = 0; k < s.dims.size(); ++k) {
      if (k < idx.size() && !idx[k].is_range) {
        const Expr e = prep(*idx[k].lo, loc);
        emit(Category::BundleSize, lt(e, s.dims[k]), loc,
             "index `" + to_string(e) + "` out of bounds for `" + s.desc + "` of size " +
                 to_string(s.dims[k]));
        sel.elems.push_back(e);
        continue;
      }
      Expr lo = Expr::nat(0), hi = s.dims[k];
      if (k < idx.size()) {
        if (idx[k].lo) lo = prep(*idx[k].lo, loc);
        if (idx[k].hi) hi = prep(*idx[k].hi, loc);
        if (idx[k].lo || idx[k].hi)
          emit(Category::BundleSize, le(lo, hi) && le(hi, s.dims[k]), loc,
               "range `" + to_string(lo) + ".." + to_string(hi) + "` out of bounds for `" +
                   s.desc + "` of size " + to_string(s.dims[k]));
      }
      sel.starts.push_back(lo);
      sel.lens.push_back(norm(hi - lo));
      sel.elems.push_back(lo);  // offset added once t symbols exist
    }
    return sel;
  }

  std::optional<Interval> element_interval(const Side& s, const Selection& sel,
                                           const std::vector<Expr>& ts) {
    if (!s.live) return std::nullopt;
    std::map<std::string, Expr> m;
    std::size_t j = 0;
    for (std::size_t k = 0; k < s.dims.size(); ++k) {
      Expr e = sel.elems[k];
      const bool is_range = j < sel.starts.size() && range_pos(sel, k);
      if (is_range) e = norm(e + ts[j++]);
      if (k < s.ivars.size()) m[s.ivars[k]] = e;
    }
    return substitute(*s.live, m);
  }

  // Range positions are those whose elem is still the range start; tracked
  // explicitly to avoid confusion with single indices equal to the start.
  std::vector<std::vector<bool>> range_flags_;
  bool range_pos(const Selection&, std::size_t k) const { return cur_flags_->at(k); }
  const std::vector<bool>* cur_flags_ = nullptr;

  void check_flow(const Side& dst, const std::vector<Index>& didx, const Side& src,
                  const std::vector<Index>& sidx, const SourceSpan& loc) {
    auto flags = [](const Side& s, const std::vector<Index>& idx) {
      std::vector<bool> f;
      for (std::size_t k = 0; k < s.dims.size(); ++k) f.push_back(k >= idx.size() || idx[k].is_range);
      return f;
    };
    const auto dflags = flags(dst, didx);
    const Selection ds = select(dst, didx, loc);
    if (src.is_const) return;
    const auto sflags = flags(src, sidx);
    const Selection ss = select(src, sidx, loc);
    const bool same_rank = ds.lens.size() == ss.lens.size();
    if (!same_rank) {
      emit(Category::BundleSize, Formula::truth(false), loc,
           "connecting " + std::to_string(ss.lens.size()) + "-dimensional `" + src.desc +
               "` to " + std::to_string(ds.lens.size()) + "-dimensional `" + dst.desc + "`");
    } else {
      for (std::size_t j = 0; j < ds.lens.size(); ++j)
        emit(Category::BundleSize, eq(ds.lens[j], ss.lens[j]), loc,
             "size `" + to_string(ss.lens[j]) + "` of `" + src.desc + "` does not match size `" +
                 to_string(ds.lens[j]) + "` of `" + dst.desc + "`");
    }
    emit(Category::WidthMatch, eq(dst.width, src.width), loc,
         "`" + src.desc + "` has width " + to_string(src.width) + " but `" + dst.desc +
             "` expects " + to_string(dst.width));
    if (!same_rank || !dst.live || !src.live) return;

    std::vector<Expr> ts;
    const auto saved_pc = extra_pc_;
    const auto saved_dom = extra_domains_;
    for (std::size_t j = 0; j < ds.lens.size(); ++j) {
      const std::string t = fresh("$t");
      ts.push_back(Expr::var(t));
      extra_pc_.push_back(lt(Expr::var(t), ds.lens[j]));
      extra_domains_.push_back({t, Expr::nat(0), ds.lens[j]});
    }
    cur_flags_ = &dflags;
    const auto req = element_interval(dst, ds, ts);
    cur_flags_ = &sflags;
    const auto prov = element_interval(src, ss, ts);
    cur_flags_ = nullptr;
    const std::string note = "Signal available in interval " + to_string(*prov) +
                             " but required in " + to_string(*req);
    if (req->start.event != prov->start.event) {
      emit(Category::IntervalAvailability, Formula::truth(false), loc, note);
    } else {
      emit(Category::IntervalAvailability,
           le(prov->start.offset, req->start.offset) && le(req->end.offset, prov->end.offset),
           loc, note);
    }
    extra_pc_ = saved_pc;
    extra_domains_ = saved_dom;
  }

  // ---- signature ----------------------------------------------------------
  void signature() {
    for (const auto& l : sig_.lets) scope_.subst[l.name] = prep(l.value, sig_.loc);
    for (const auto& w : sig_.where) out_.assumptions.push_back(prep(w, sig_.loc));
    for (const auto& e : sig_.events) own_delay_[e.name] = prep(e.delay, e.loc);
    for (const auto* list : {&sig_.inputs, &sig_.outputs})
      for (const auto& p : *list) own_ports_[p.name] = prep_port(p);
    for (const auto& d : sig_.somes)
      for (const auto& c : d.constraints) own_constraints_.push_back({prep(c, d.loc), d.loc});
  }

  // ---- body ---------------------------------------------------------------
  void block(const Block& b) {
    const Scope saved = scope_;
    for (const auto& c : b)
      if (const auto* i = c.as<Instantiate>()) declare_instance(*i, c.loc);
    for (const auto& c : b)
      if (const auto* l = c.as<LetCmd>()) scope_.subst[l->name] = prep(l->value, c.loc);
    for (const auto& c : b)
      if (const auto* i = c.as<Instantiate>()) instance_info(*i, c.loc);
    for (const auto& c : b)
      if (const auto* v = c.as<Invoke>()) invocation_info(*v, c.loc);
    for (const auto& c : b)
      if (const auto* bd = c.as<BundleDecl>()) scope_.bundles[bd->port.name] = prep_port(bd->port);
    for (const auto& c : b) command(c);
    scope_ = saved;
  }

  void declare_instance(const Instantiate& i, const SourceSpan& loc) {
    InstInfo info;
    info.key = counter_.count("inst:" + i.name) ? fresh(i.name) : i.name;
    ++counter_["inst:" + i.name];
    info.name = i.name;
    info.mod = *env_.lookup(i.component);
    info.loc = loc;
    scope_.instances[i.name] = insts_.size();
    for (const auto& p : info.mod.sig->out_params()) {
      const std::string q = info.key + "::" + p;
      scope_.subst[i.name + "::" + p] = Expr::var(q);
      if (!frames_.empty()) frames_.back().owned.push_back(q);
    }
    insts_.push_back(std::move(info));
  }

  void instance_info(const Instantiate& i, const SourceSpan& loc) {
    auto& info = insts_[scope_.instances.at(i.name)];
    const Signature& child = *info.mod.sig;
    for (std::size_t k = 0; k < child.params.size(); ++k) {
      const auto& p = child.params[k];
      info.subst[p.name] = k < i.args.size() ? prep(i.args[k], loc)
                                             : norm(substitute(*p.default_value, info.subst));
    }
    for (const auto& l : child.lets) info.subst[l.name] = norm(substitute(l.value, info.subst));
    for (const auto& p : child.out_params()) info.subst[p] = Expr::var(info.key + "::" + p);
    if (i.availability)
      info.avail = Interval{prep(i.availability->start, loc), prep(i.availability->end, loc)};
    info.pc = pc_;
    info.frames = frames_;
    for (const auto& w : child.where) {
      const Formula g = norm(substitute(w, info.subst));
      emit(Category::WhereClause, g, loc,
           "`" + child.name + "` requires " + to_string(w) + " (here " + to_string(g) + ")");
    }
    for (const auto& c : child.out_constraints())
      out_.assumptions.push_back(
          norm(Formula::implies(conj(pc_), substitute(c, info.subst))));
  }

  void invocation_info(const Invoke& v, const SourceSpan& loc) {
    InvInfo info;
    info.name = v.name;
    info.inst = scope_.instances.at(v.instance);
    const Signature& child = *insts_[info.inst].mod.sig;
    for (std::size_t k = 0; k < child.events.size(); ++k)
      info.events[child.events[k].name] = prep(v.events[k], loc);
    info.pc = pc_;
    info.frames = frames_;
    info.loc = loc;
    scope_.invocs[v.name] = invs_.size();
    insts_[info.inst].invocs.push_back(invs_.size());
    invs_.push_back(std::move(info));
  }

  Expr child_delay(const InstInfo& inst, const EventDef& e) {
    return norm(substitute(e.delay, inst.subst));
  }

  void command(const Command& c) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Instantiate>) {
            const auto& inst = insts_[scope_.instances.at(n.name)];
            if (inst.avail)
              emit(Category::WellFormedInterval,
                   lt(inst.avail->start.offset, inst.avail->end.offset), c.loc,
                   "availability " + to_string(*inst.avail) + " of `" + n.name +
                       "` may be empty");
          } else if constexpr (std::is_same_v<T, Invoke>) {
            invoke(n, c.loc);
          } else if constexpr (std::is_same_v<T, Connect>) {
            check_flow(local_side(n.dst.name), n.dst.indices, source_side(n.src), n.src.indices,
                       c.loc);
          } else if constexpr (std::is_same_v<T, ForLoop>) {
            const Expr lo = prep(n.lo, c.loc), hi = prep(n.hi, c.loc);
            const std::string sym = fresh(n.var);
            const auto saved = scope_.subst;
            scope_.subst[n.var] = Expr::var(sym);
            frames_.push_back({sym, lo, hi, {sym}});
            pc_.push_back(le(lo, Expr::var(sym)) && lt(Expr::var(sym), hi));
            block(n.body);
            pc_.pop_back();
            frames_.pop_back();
            scope_.subst = saved;
          } else if constexpr (std::is_same_v<T, IfElse>) {
            const Formula cond = prep(n.cond, c.loc);
            pc_.push_back(cond);
            block(n.then_body);
            pc_.back() = norm(!cond);
            block(n.else_body);
            pc_.pop_back();
          } else if constexpr (std::is_same_v<T, Assume>) {
            const Formula cond = prep(n.cond, c.loc);
            out_.assumptions.push_back(norm(Formula::implies(conj(pc_), cond)));
            out_.trusted.push_back(c.loc.str() + ": assume " + to_string(n.cond));
          } else if constexpr (std::is_same_v<T, OutAssign>) {
            const Expr v = prep(n.value, c.loc);
            if (!frames_.empty()) {
              emit(Category::OutparamConstraint, Formula::truth(false), c.loc,
                   "output parameter `" + n.param + "` assigned inside a loop");
              return;
            }
            out_.assumptions.push_back(
                norm(Formula::implies(conj(pc_), eq(Expr::var(n.param), v))));
            assignments_.push_back({n.param, v, pc_, c.loc});
          }
        },
        c.v);
  }

  void invoke(const Invoke& n, const SourceSpan& loc) {
    const auto& inv = invs_[scope_.invocs.at(n.name)];
    const auto& inst = insts_[inv.inst];
    const Signature& child = *inst.mod.sig;
    const auto inputs = child.timed_inputs();
    for (std::size_t k = 0; k < inputs.size(); ++k) {
      const Side dst = child_side(*inputs[k], inst, inv, n.name + "." + inputs[k]->name);
      check_flow(dst, {}, source_side(n.ports[k]), n.ports[k].indices, loc);
    }
    for (const auto& e : child.events) {
      const Time& t = inv.events.at(e.name);
      const Expr d = child_delay(inst, e);
      const Expr& pd = own_delay_.at(t.event);
      emit(Category::DelayPipelining, le(d, pd), loc,
           "Cannot safely pipeline: `" + child.name + "` accepts inputs every " + to_string(d) +
               " cycle(s) but `'" + t.event + "` of `" + sig_.name + "` accepts inputs every " +
               to_string(pd) + " cycle(s)");
      if (inst.avail) {
        const Interval& a = *inst.avail;
        const std::string note = "invocation `" + n.name + "` uses `" + inst.name + "` in [" +
                                 with_event(t) + ", " +
                                 with_event(Time{t.event, norm(t.offset + d)}) +
                                 ") outside its availability " + to_string(a);
        if (a.start.event != t.event)
          emit(Category::InstanceAvailability, Formula::truth(false), loc, note);
        else
          emit(Category::InstanceAvailability,
               le(a.start.offset, t.offset) && le(norm(t.offset + d), a.end.offset), loc, note);
      }
    }
  }

  // ---- per-instance checks --------------------------------------------------
  std::map<std::string, Expr> renaming(const InvInfo& inv, std::size_t depth,
                                       const std::string& tag) {
    std::map<std::string, Expr> m;
    for (std::size_t k = depth; k < inv.frames.size(); ++k)
      for (const auto& s : inv.frames[k].owned) m[s] = Expr::var(s + "@" + tag);
    return m;
  }

  void instance_checks() {
    for (const auto& inst : insts_) {
      const Signature& child = *inst.mod.sig;
      pc_ = inst.pc;
      frames_ = inst.frames;
      const std::size_t depth = inst.frames.size();
      if (inst.avail) {
        const Expr len = norm(inst.avail->end.offset - inst.avail->start.offset);
        const Expr& pd = own_delay_.at(inst.avail->start.event);
        emit(Category::DelayPipelining, le(len, pd), inst.loc,
             "event's delay must be greater than availability: `" + inst.name +
                 "` is available for " + to_string(len) + " cycle(s) but `'" +
                 inst.avail->start.event + "` has delay " + to_string(pd));
      } else if (!inst.invocs.empty()) {
        infer_availability(inst, depth);
      }
      pairwise_conflicts(inst, child, depth);
    }
    pc_.clear();
    frames_.clear();
  }

  void infer_availability(const InstInfo& inst, std::size_t depth) {
    const Signature& child = *inst.mod.sig;
    bool deeper = false, concrete = true;
    std::optional<std::string> event;
    std::uint64_t lo = UINT64_MAX, hi = 0;
    for (auto k : inst.invocs) {
      const auto& inv = invs_[k];
      if (inv.frames.size() > depth) deeper = true;
      for (const auto& e : child.events) {
        const Time& t = inv.events.at(e.name);
        const auto off = t.offset.as_nat();
        const auto d = child_delay(inst, e).as_nat();
        if (!off || !d || (event && *event != t.event)) {
          concrete = false;
          continue;
        }
        event = t.event;
        lo = std::min(lo, *off);
        hi = std::max(hi, *off + *d);
      }
    }
    if (!deeper && concrete && event) {
      const Expr& pd = own_delay_.at(*event);
      const Interval inferred{{*event, Expr::nat(lo)}, {*event, Expr::nat(hi)}};
      emit(Category::DelayPipelining, le(Expr::nat(hi - lo), pd), inst.loc,
           "delay allows new inputs every " + to_string(pd) + " cycle(s) but instance `" +
               inst.name + "` used for " + std::to_string(hi - lo) +
               " cycles (inferred availability " + to_string(inferred) + ")");
      return;
    }
    if (!deeper && inst.invocs.size() == 1) return;
    emit(Category::InstanceAvailability, Formula::truth(false), inst.loc,
         "cannot infer the availability of instance `" + inst.name +
             "` used by several invocations with parametric times; annotate it with "
             "`in [...]`");
  }

  void pairwise_conflicts(const InstInfo& inst, const Signature& child, std::size_t depth) {
    const auto& ids = inst.invocs;
    for (std::size_t a = 0; a < ids.size(); ++a)
      for (std::size_t b = a; b < ids.size(); ++b) {
        const auto& ia = invs_[ids[a]];
        const auto& ib = invs_[ids[b]];
        const bool self = a == b;
        if (self && ia.frames.size() <= depth) continue;
        const auto ra = renaming(ia, depth, "1");
        const auto rb = renaming(ib, depth, "2");
        std::vector<Formula> pc;
        for (const auto& f : ia.pc) pc.push_back(substitute(f, ra));
        for (const auto& f : ib.pc) pc.push_back(substitute(f, rb));
        if (self) {
          std::vector<Formula> differ;
          for (std::size_t k = depth; k < ia.frames.size(); ++k)
            differ.push_back(Formula::cmp(CmpOp::Ne, Expr::var(ia.frames[k].sym + "@1"),
                                          Expr::var(ia.frames[k].sym + "@2")));
          pc.push_back(differ.size() == 1 ? differ[0] : Formula::disj(differ));
        }
        std::vector<Domain> doms;
        auto add_frames = [&](const InvInfo& inv, const std::map<std::string, Expr>& r) {
          for (std::size_t k = depth; k < inv.frames.size(); ++k)
            doms.push_back({inv.frames[k].sym + "@" + (&r == &ra ? "1" : "2"),
                            substitute(inv.frames[k].lo, r), substitute(inv.frames[k].hi, r)});
        };
        add_frames(ia, ra);
        add_frames(ib, rb);
        for (const auto& e : child.events) {
          const Time ta{ia.events.at(e.name).event, substitute(ia.events.at(e.name).offset, ra)};
          const Time tb{ib.events.at(e.name).event, substitute(ib.events.at(e.name).offset, rb)};
          if (ta.event != tb.event) continue;
          const Expr d = child_delay(inst, e);
          const auto saved_pc = pc_;
          const auto saved_dom = extra_domains_;
          pc_ = pc;
          frames_ = inst.frames;
          extra_domains_ = doms;
          emit(Category::InstanceConflict, le(norm(ta.offset + d), tb.offset) ||
                                               le(norm(tb.offset + d), ta.offset),
               ib.loc,
               "delay requires uses of `" + inst.name + "` to be " + to_string(d) +
                   " cycle(s) apart: `" + ia.name + "` uses it at " + to_string(ta) + ", `" +
                   ib.name + "` at " + to_string(tb));
          pc_ = saved_pc;
          extra_domains_ = saved_dom;
        }
      }
  }

  // ---- output parameters ---------------------------------------------------
  struct Count {
    int lo = 0;
    int hi = 0;
  };

  std::map<std::string, Count> count(const Block& b) {
    std::map<std::string, Count> total;
    for (const auto& c : b) {
      std::map<std::string, Count> here;
      if (const auto* a = c.as<OutAssign>()) {
        here[a->param] = {1, 1};
      } else if (const auto* ie = c.as<IfElse>()) {
        auto t = count(ie->then_body), e = count(ie->else_body);
        for (const auto& p : sig_.out_params()) {
          const Count ct = t.count(p) ? t[p] : Count{}, ce = e.count(p) ? e[p] : Count{};
          if (ct.hi || ce.hi) here[p] = {std::min(ct.lo, ce.lo), std::max(ct.hi, ce.hi)};
        }
      }
      for (const auto& [p, n] : here) {
        total[p].lo += n.lo;
        total[p].hi += n.hi;
      }
    }
    return total;
  }

  void outparams() {
    const auto counts = count(comp_.body);
    for (const auto& p : sig_.out_params()) {
      const Count n = counts.count(p) ? counts.at(p) : Count{};
      std::string problem;
      if (n.hi == 0)
        problem = "is never assigned";
      else if (n.lo == 0)
        problem = "is not assigned on every path";
      else if (n.hi > 1)
        problem = "may be assigned more than once";
      if (!problem.empty())
        emit(Category::OutparamConstraint, Formula::truth(false), sig_.loc,
             "output parameter `" + p + "` " + problem);
    }
    std::set<std::string> seen;
    for (const auto& a : assignments_) {
      pc_ = a.pc;
      for (const auto& [c, loc] : own_constraints_) {
        if (!free_vars(c).count(a.param)) continue;
        const std::string key = to_string(c) + "|" + to_string(conj(a.pc));
        if (!seen.insert(key).second) continue;
        // Name every assignment on this path that the constraint mentions.
        std::string after;
        SourceSpan at = a.loc;
        for (const auto& b : assignments_) {
          if (!free_vars(c).count(b.param) || to_string(conj(b.pc)) != to_string(conj(a.pc)))
            continue;
          after += std::string(after.empty() ? "" : ", ") + "`" + b.param + " <- " +
                   to_string(b.value) + "`";
          at = b.loc;
        }
        emit(Category::OutparamConstraint, c, at,
             "constraint `" + to_string(c) + "` may not hold after " + after);
      }
    }
    pc_.clear();
  }

  const Env& env_;
  const Component& comp_;
  const Signature& sig_;
  GeneratedObligations out_;
  Scope scope_;
  std::vector<Formula> pc_;
  std::vector<LoopFrame> frames_;
  std::vector<Formula> extra_pc_;
  std::vector<Domain> extra_domains_;
  std::map<std::string, int> counter_;
  std::set<std::string> seen_;
  std::map<std::string, Expr> own_delay_;
  std::map<std::string, PortDef> own_ports_;
  std::vector<std::pair<Formula, SourceSpan>> own_constraints_;
  std::vector<InstInfo> insts_;
  std::vector<InvInfo> invs_;
  std::vector<Assignment> assignments_;
};

}  // namespace

bool ComponentReport::passed() const {
  return std::all_of(results.begin(), results.end(), [](const CheckedObligation& r) {
    return r.verdict.kind == Verdict::Kind::Proven;
  });
}

bool ComponentReport::has_refuted() const {
  return std::any_of(results.begin(), results.end(), [](const CheckedObligation& r) {
    return r.verdict.kind == Verdict::Kind::Refuted;
  });
}

std::set<Category> ComponentReport::failed_categories() const {
  std::set<Category> out;
  for (const auto& r : results)
    if (r.verdict.kind != Verdict::Kind::Proven) out.insert(r.obligation.category);
  return out;
}

std::set<Category> ComponentReport::refuted_categories() const {
  std::set<Category> out;
  for (const auto& r : results)
    if (r.verdict.kind == Verdict::Kind::Refuted) out.insert(r.obligation.category);
  return out;
}

GeneratedObligations generate_obligations(const Component& c, const Env& env) {
  return Checker(c, env).run();
}

ComponentReport check_component(const Component& c, const Env& env, Prover& prover) {
  auto gen = generate_obligations(c, env);
  ComponentReport rep;
  rep.component = c.sig.name;
  rep.trusted = gen.trusted;
  for (auto& o : gen.obligations) {
    Verdict v = prover.discharge(o, gen.assumptions);
    rep.results.push_back({std::move(o), std::move(v)});
  }
  return rep;
}

std::vector<ComponentReport> check_program(const Env& env, const CheckOptions& opts) {
  std::vector<ComponentReport> out;
  for (const auto& c : env.program().components) {
    Prover prover(opts.solver, opts.timeout_ms);
    out.push_back(check_component(c, env, prover));
  }
  return out;
}

std::string describe(const CheckedObligation& r) {
  std::ostringstream os;
  os << r.obligation.loc.str() << ": " << to_string(r.verdict.kind) << " ["
     << to_string(r.obligation.category) << "] " << r.obligation.note;
  if (r.verdict.kind == Verdict::Kind::Refuted && !r.verdict.counterexample.empty()) {
    os << "\n    counterexample:";
    for (const auto& [k, v] : r.verdict.counterexample) os << ' ' << k << '=' << v;
  }
  if (r.verdict.kind == Verdict::Kind::Unknown) {
    os << "\n    could not decide: " << r.verdict.reason;
    os << "\n    hint: add an `assume` stating the needed fact, or pass --solver";
  }
  return os.str();
}

}  // namespace pfil
