#pragma once

#include <cstdint>
#include <future>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "pfil/ir.hpp"

namespace pfil {

/// One `[modules.X]` table of a tool config.
struct ModuleSpec {
  std::string name;  // table key; the name visible in source
  std::string op;    // optional tool-side operation selector
  std::vector<std::string> parameters;
  std::string cli;
  std::string name_template;
  std::string file_template;  // default `${name}.v`
  std::map<std::string, std::string> outputs;  // output param -> scrape key
};

struct ToolConfig {
  std::string tool;         // config file stem
  std::string path;         // executable (searched on PATH if it has no `/`)
  std::string config_path;  // file it was loaded from
  std::string content;      // raw text, part of the cache key
  std::map<std::string, ModuleSpec> modules;
};

/// Parses and validates a config. Throws CompileError("config error").
ToolConfig parse_config(std::string_view text, const std::string& filename = "<config>");
ToolConfig load_config(const std::string& path);

/// Replaces `${P}` with the bound value. Throws on an unbound name.
std::string interpolate(const std::string& tmpl, const std::map<std::string, std::string>& vars);

struct GenResult {
  std::string verilog_path;
  std::string module_name;
  Binding out_bindings;
  std::string tool_stdout;
  std::string tool_stderr;
  std::string cache_key;
  bool cache_hit = false;
};

struct GenOptions {
  std::string cache_dir = ".pfil-gen-cache";
  bool use_cache = true;
  std::string out_dir;  // generated Verilog is copied here when set
};

/// Runs generator tools with a per-key single-flight cache. Thread-safe.
class Generator {
 public:
  explicit Generator(GenOptions opts = {});

  /// Interpolates the module's cli, runs the tool in a scratch directory
  /// (exported as GEN_WORKDIR), scrapes `key = <n>` lines from stdout and
  /// locates the produced Verilog file. Throws CompileError("generator
  /// error") on tool failure, missing scrape line or missing file.
  GenResult generate(const ToolConfig& tool, const std::string& module, const Binding& params);

  /// Number of tool processes actually started.
  std::size_t executions() const;

  const GenOptions& options() const { return opts_; }

 private:
  GenResult run(const ToolConfig& tool, const ModuleSpec& spec, const Binding& params,
                const std::string& key);

  GenOptions opts_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_future<GenResult>> inflight_;
  std::size_t executions_ = 0;
};

/// Key used for caching: hash of tool path, module, params and config text.
std::string gen_cache_key(const ToolConfig& tool, const std::string& module, const Binding& params);

/// Partially evaluates a generated module's type signature into an
/// `ext comp` named `module_name`. Throws if the bindings violate the
/// signature's output-parameter constraints.
Signature concretize_signature(const Signature& sig, const Binding& params, const Binding& out,
                               const std::string& module_name);

}  // namespace pfil
