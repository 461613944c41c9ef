#include "pfil/elaborate.hpp"

#include <filesystem>

#include "pfil/eval.hpp"

namespace pfil {

namespace {

std::string key_of(const std::string& name, const std::vector<std::uint64_t>& args) {
  std::string k = name + "[";
  for (std::size_t i = 0; i < args.size(); ++i) k += (i ? "," : "") + std::to_string(args[i]);
  return k + "]";
}

class Elaborator {
 public:
  Elaborator(const Env& env, Generator* gen, const ElabOptions& opts)
      : env_(env), gen_(gen), opts_(opts) {}

  ConcreteProgram run(const std::string& entry, const Binding& params) {
    const auto mod = env_.lookup(entry);
    if (!mod || mod->kind != ModuleRef::Kind::Source)
      throw CompileError("usage error", "no component named `" + entry + "`");
    const Signature& sig = *mod->sig;
    for (const auto& [k, v] : params) {
      bool known = false;
      for (const auto& p : sig.params) known |= p.name == k;
      if (!known) throw CompileError("usage error", "`" + entry + "` has no parameter `" + k + "`");
    }
    std::vector<std::uint64_t> args;
    for (const auto& p : sig.params) {
      if (!params.count(p.name)) break;
      args.push_back(params.at(p.name));
    }
    if (args.size() < params.size())
      throw CompileError("usage error", "parameters of `" + entry + "` must be given in order; a parameter before a given one is missing");
    const ChildUnit u = unit(*mod, args, sig.loc);
    out_.entry = u.name;
    return std::move(out_);
  }

 private:
  ChildUnit unit(const ModuleRef& mod, std::vector<std::uint64_t> args, const SourceSpan& loc) {
    args = complete_args(*mod.sig, std::move(args), loc);
    std::string key = key_of(mod.qualified, args);
    if (mod.kind == ModuleRef::Kind::Generated) key += "@" + config(mod).content;
    if (opts_.dedupe)
      if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    std::string name = mangle(mod.qualified, args);
    if (!opts_.dedupe && ++uses_[name] > 1) name += "__" + std::to_string(uses_[name]);
    ChildUnit result;
    ElabUnit rec;
    rec.component = mod.qualified;
    rec.params = args;
    const Binding params = [&] {
      Binding b;
      for (std::size_t k = 0; k < mod.sig->params.size(); ++k) b[mod.sig->params[k].name] = args[k];
      return b;
    }();

    switch (mod.kind) {
      case ModuleRef::Kind::Source: {
        if (stack_.size() >= opts_.depth_limit) {
          std::string chain;
          for (const auto& s : stack_) chain += s + " -> ";
          throw CompileError("elaboration error",
                             "instantiation depth limit (" + std::to_string(opts_.depth_limit) +
                                 ") exceeded: " + chain + key_of(mod.qualified, args),
                             loc);
        }
        stack_.push_back(key_of(mod.qualified, args));
        EvalResult r = eval_component(
            *mod.comp, args, env_,
            [this](const ModuleRef& m, const std::vector<std::uint64_t>& a, const SourceSpan& l) {
              return unit(m, a, l);
            },
            name);
        stack_.pop_back();
        rec.source = ElabUnit::Source::Evaluated;
        rec.out = r.out;
        rec.injected = r.injected;
        result = {name, r.out, r.component.sig};
        out_.program.components.push_back(std::move(r.component));
        break;
      }
      case ModuleRef::Kind::External: {
        if (!mod.sig->out_params().empty())
          throw CompileError("elaboration error",
                             "external component `" + mod.sig->name +
                                 "` has output parameters, which only generated modules can bind",
                             loc);
        rec.source = ElabUnit::Source::External;
        result = {name, {}, concretize(*mod.sig, params, {}, name)};
        out_.program.externals.push_back(result.sig);
        break;
      }
      case ModuleRef::Kind::Generated: {
        if (!gen_)
          throw CompileError("elaboration error",
                             "`" + mod.qualified + "` needs its generator, which is disabled", loc);
        const ToolConfig& cfg = config(mod);
        GenResult g;
        try {
          g = gen_->generate(cfg, mod.sig->name, params);
        } catch (const CompileError& e) {
          throw CompileError(e.kind(), key_of(mod.qualified, args) + ": " + e.message(), loc);
        }
        name = g.module_name;
        rec.source = ElabUnit::Source::Generated;
        rec.out = g.out_bindings;
        rec.verilog_path = g.verilog_path;
        Signature sig;
        try {
          sig = concretize_signature(*mod.sig, params, g.out_bindings, name);
        } catch (const CompileError& e) {
          throw CompileError("generator error",
                             "generated module `" + name + "` does not fit its interface: " + e.message(),
                             loc);
        }
        result = {name, g.out_bindings, sig};
        out_.program.externals.push_back(std::move(sig));
        break;
      }
    }
    rec.name = name;
    out_.units.push_back(std::move(rec));
    if (opts_.dedupe) memo_[key] = result;
    return result;
  }

  const ToolConfig& config(const ModuleRef& mod) {
    namespace fs = std::filesystem;
    const std::string path = (fs::path(mod.gen->source_dir) / mod.gen->config_path).lexically_normal().string();
    auto it = configs_.find(path);
    if (it == configs_.end()) it = configs_.emplace(path, load_config(path)).first;
    return it->second;
  }

  const Env& env_;
  Generator* gen_;
  ElabOptions opts_;
  ConcreteProgram out_;
  std::map<std::string, ChildUnit> memo_;
  std::map<std::string, int> uses_;
  std::map<std::string, ToolConfig> configs_;
  std::vector<std::string> stack_;
};

}  // namespace

const char* to_string(ElabUnit::Source s) {
  switch (s) {
    case ElabUnit::Source::Evaluated: return "evaluated";
    case ElabUnit::Source::External: return "external";
    case ElabUnit::Source::Generated: return "generated";
  }
  return "?";
}

const Signature* ConcreteProgram::find_signature(const std::string& name) const {
  if (const auto* c = program.find_component(name)) return &c->sig;
  return program.find_external(name);
}

ConcreteProgram elaborate(const Env& env, const std::string& entry, const Binding& params,
                          Generator* gen, const ElabOptions& opts) {
  return Elaborator(env, gen, opts).run(entry, params);
}

std::string manifest(const ConcreteProgram& p) {
  std::string out = "entry " + p.entry + "\n";
  for (const auto& u : p.units) {
    out += "unit " + u.name + " source=" + to_string(u.source) + " component=" + u.component +
           " params=" + key_of("", u.params).substr(0);
    if (!u.verilog_path.empty()) out += " file=" + u.verilog_path;
    out += "\n";
    for (const auto& [k, v] : u.out) out += "  out " + k + " = " + std::to_string(v) + "\n";
    for (const auto& [k, v] : u.injected) out += "  binding " + k + " = " + std::to_string(v) + "\n";
  }
  return out;
}

}  // namespace pfil
