#include "pfil/gen.hpp"

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <regex>
#include <sstream>
#include <variant>

#include "pfil/eval.hpp"

namespace fs = std::filesystem;

namespace pfil {

namespace {

[[noreturn]] void config_error(const std::string& file, int line, const std::string& msg) {
  throw CompileError("config error", msg, SourceSpan{file, line, 1});
}

using TomlValue = std::variant<std::string, std::int64_t, bool, std::vector<std::string>>;

struct TomlEntry {
  TomlValue value;
  int line;
};

/// Minimal TOML: comments, `[dotted.table]` headers, dotted bare keys,
/// basic/literal strings, integers, booleans and arrays of strings.
class TomlParser {
 public:
  TomlParser(std::string_view text, std::string file) : text_(text), file_(std::move(file)) {}

  std::map<std::string, TomlEntry> parse() {
    std::map<std::string, TomlEntry> out;
    std::string table;
    while (pos_ < text_.size()) {
      skip_ws_and_comments(true);
      if (pos_ >= text_.size()) break;
      if (text_[pos_] == '[') {
        ++pos_;
        skip_ws();
        table = key();
        skip_ws();
        expect(']');
        end_of_line();
        continue;
      }
      std::string k = key();
      skip_ws();
      expect('=');
      skip_ws();
      const int at = line_;
      TomlValue v = value();
      end_of_line();
      const std::string full = table.empty() ? k : table + "." + k;
      if (out.count(full)) fail("duplicate key `" + k + "`" + (table.empty() ? "" : " in [" + table + "]"));
      out[full] = {std::move(v), at};
    }
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) { config_error(file_, line_, msg); }

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  void skip_ws_and_comments(bool newlines) {
    for (;;) {
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == '#')
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      if (newlines && pos_ < text_.size() && (text_[pos_] == '\n' || text_[pos_] == '\r')) {
        if (text_[pos_] == '\n') ++line_;
        ++pos_;
        continue;
      }
      return;
    }
  }

  void end_of_line() {
    skip_ws_and_comments(false);
    if (pos_ < text_.size() && text_[pos_] == '\r') ++pos_;
    if (pos_ < text_.size() && text_[pos_] != '\n') fail("expected end of line");
  }

  void expect(char c) {
    if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected `") + c + "`");
    ++pos_;
  }

  std::string key() {
    std::string out;
    for (;;) {
      skip_ws();
      if (pos_ < text_.size() && (text_[pos_] == '"' || text_[pos_] == '\'')) {
        out += string();
      } else {
        const auto start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
                text_[pos_] == '-'))
          ++pos_;
        if (start == pos_) fail("expected a key");
        out += std::string(text_.substr(start, pos_ - start));
      }
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == '.') {
        ++pos_;
        out += '.';
        continue;
      }
      return out;
    }
  }

  std::string string() {
    const char q = text_[pos_++];
    std::string out;
    while (pos_ < text_.size() && text_[pos_] != q) {
      char c = text_[pos_++];
      if (c == '\n') fail("unterminated string");
      if (c == '\\' && q == '"') {
        if (pos_ >= text_.size()) fail("unterminated string");
        const char e = text_[pos_++];
        switch (e) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: fail(std::string("unsupported escape `\\") + e + "`");
        }
      }
      out += c;
    }
    if (pos_ >= text_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  TomlValue value() {
    if (pos_ >= text_.size()) fail("expected a value");
    const char c = text_[pos_];
    if (c == '"' || c == '\'') return string();
    if (c == '[') {
      ++pos_;
      std::vector<std::string> items;
      for (;;) {
        skip_ws_and_comments(true);
        if (pos_ < text_.size() && text_[pos_] == ']') {
          ++pos_;
          return items;
        }
        if (pos_ >= text_.size() || (text_[pos_] != '"' && text_[pos_] != '\''))
          fail("arrays may only contain strings");
        items.push_back(string());
        skip_ws_and_comments(true);
        if (pos_ < text_.size() && text_[pos_] == ',') ++pos_;
      }
    }
    const auto start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
           text_[pos_] != '#')
      ++pos_;
    const std::string word(text_.substr(start, pos_ - start));
    if (word == "true") return true;
    if (word == "false") return false;
    if (!word.empty() && std::all_of(word.begin(), word.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); }))
      return static_cast<std::int64_t>(std::stoll(word));
    fail("unsupported value `" + word + "`");
  }

  std::string_view text_;
  std::string file_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

std::set<std::string> placeholders(const std::string& tmpl) {
  std::set<std::string> out;
  static const std::regex re(R"(\$\{([^}]*)\})");
  for (auto it = std::sregex_iterator(tmpl.begin(), tmpl.end(), re); it != std::sregex_iterator(); ++it)
    out.insert((*it)[1].str());
  return out;
}

std::string fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::map<std::string, std::string> vars_of(const Binding& b) {
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : b) out[k] = std::to_string(v);
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

[[noreturn]] void gen_error(const std::string& msg) { throw CompileError("generator error", msg); }

nlohmann::json to_json(const GenResult& r) {
  nlohmann::json j;
  j["module_name"] = r.module_name;
  j["verilog_file"] = fs::path(r.verilog_path).filename().string();
  j["out_bindings"] = r.out_bindings;
  j["stdout"] = r.tool_stdout;
  j["stderr"] = r.tool_stderr;
  return j;
}

}  // namespace

ToolConfig parse_config(std::string_view text, const std::string& filename) {
  const auto entries = TomlParser(text, filename).parse();
  ToolConfig cfg;
  cfg.config_path = filename;
  cfg.content = std::string(text);
  cfg.tool = fs::path(filename).stem().string();

  auto as_string = [&](const std::string& key, const TomlEntry& e) {
    if (const auto* s = std::get_if<std::string>(&e.value)) return *s;
    config_error(filename, e.line, "`" + key + "` must be a string");
  };
  for (const auto& [key, e] : entries) {
    if (key == "path") {
      cfg.path = as_string(key, e);
      continue;
    }
    if (key == "name") {
      cfg.tool = as_string(key, e);
      continue;
    }
    if (key.rfind("modules.", 0) != 0) config_error(filename, e.line, "unknown key `" + key + "`");
    const std::string rest = key.substr(8);
    const auto dot = rest.find('.');
    if (dot == std::string::npos) config_error(filename, e.line, "unknown key `" + key + "`");
    const std::string mod = rest.substr(0, dot), field = rest.substr(dot + 1);
    ModuleSpec& spec = cfg.modules[mod];
    spec.name = mod;
    if (field == "op") {
      spec.op = as_string(key, e);
    } else if (field == "cli") {
      spec.cli = as_string(key, e);
    } else if (field == "name") {
      spec.name_template = as_string(key, e);
    } else if (field == "file") {
      spec.file_template = as_string(key, e);
    } else if (field == "parameters") {
      const auto* a = std::get_if<std::vector<std::string>>(&e.value);
      if (!a) config_error(filename, e.line, "`parameters` must be an array of strings");
      spec.parameters = *a;
    } else if (field.rfind("outputs.", 0) == 0 && field.size() > 8) {
      spec.outputs[field.substr(8)] = as_string(key, e);
    } else {
      config_error(filename, e.line, "unknown key `" + key + "`");
    }
  }
  if (cfg.path.empty()) config_error(filename, 1, "missing required key `path`");
  for (auto& [name, spec] : cfg.modules) {
    if (spec.cli.empty()) config_error(filename, 1, "module `" + name + "` is missing `cli`");
    if (spec.name_template.empty()) config_error(filename, 1, "module `" + name + "` is missing `name`");
    if (spec.file_template.empty()) spec.file_template = "${name}.v";
    std::set<std::string> declared(spec.parameters.begin(), spec.parameters.end());
    auto check = [&](const std::string& field, const std::string& tmpl, bool allow_name) {
      for (const auto& p : placeholders(tmpl))
        if (!declared.count(p) && !(allow_name && p == "name"))
          config_error(filename, 1,
                       "`" + field + "` of module `" + name + "` references undeclared parameter `" + p + "`");
    };
    check("cli", spec.cli, false);
    check("name", spec.name_template, false);
    check("file", spec.file_template, true);
  }
  return cfg;
}

ToolConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CompileError("config error", "cannot read tool config `" + path + "`");
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str(), path);
}

std::string interpolate(const std::string& tmpl, const std::map<std::string, std::string>& vars) {
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl.compare(i, 2, "${") == 0) {
      const auto end = tmpl.find('}', i);
      if (end == std::string::npos) throw CompileError("config error", "unterminated `${` in `" + tmpl + "`");
      const std::string name = tmpl.substr(i + 2, end - i - 2);
      const auto it = vars.find(name);
      if (it == vars.end()) throw CompileError("config error", "unbound `${" + name + "}` in `" + tmpl + "`");
      out += it->second;
      i = end + 1;
    } else {
      out += tmpl[i++];
    }
  }
  return out;
}

std::string gen_cache_key(const ToolConfig& tool, const std::string& module, const Binding& params) {
  std::string s = tool.path + '\0' + module + '\0';
  for (const auto& [k, v] : params) s += k + "=" + std::to_string(v) + ";";
  s += '\0' + tool.content;
  return fnv1a(s);
}

Generator::Generator(GenOptions opts) : opts_(std::move(opts)) {}

std::size_t Generator::executions() const {
  std::lock_guard<std::mutex> lock(mu_);
  return executions_;
}

GenResult Generator::generate(const ToolConfig& tool, const std::string& module,
                              const Binding& params) {
  const auto it = tool.modules.find(module);
  if (it == tool.modules.end())
    gen_error("tool config `" + tool.config_path + "` has no module `" + module + "`");
  const ModuleSpec& spec = it->second;
  for (const auto& p : spec.parameters)
    if (!params.count(p)) gen_error("missing parameter `" + p + "` for `" + module + "`");
  const std::string key = gen_cache_key(tool, module, params);

  std::promise<GenResult> promise;
  std::shared_future<GenResult> fut;
  bool owner = false;
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto f = inflight_.find(key);
    if (f != inflight_.end()) {
      fut = f->second;
    } else {
      fut = promise.get_future().share();
      inflight_[key] = fut;
      owner = true;
    }
  }
  if (!owner) {
    GenResult r = fut.get();
    r.cache_hit = true;
    return r;
  }
  try {
    GenResult r = run(tool, spec, params, key);
    promise.set_value(r);
    return r;
  } catch (...) {
    promise.set_exception(std::current_exception());
    std::lock_guard<std::mutex> lock(mu_);
    inflight_.erase(key);
    throw;
  }
}

GenResult Generator::run(const ToolConfig& tool, const ModuleSpec& spec, const Binding& params,
                         const std::string& key) {
  const auto vars = vars_of(params);
  const std::string module_name = interpolate(spec.name_template, vars);
  auto file_vars = vars;
  file_vars["name"] = module_name;
  const std::string file_name = interpolate(spec.file_template, file_vars);

  auto deliver = [&](GenResult r, const fs::path& produced) {
    if (!opts_.out_dir.empty()) {
      fs::create_directories(opts_.out_dir);
      const fs::path dst = fs::absolute(fs::path(opts_.out_dir)) / produced.filename();
      fs::copy_file(produced, dst, fs::copy_options::overwrite_existing);
      r.verilog_path = dst.string();
    } else {
      r.verilog_path = produced.string();
    }
    return r;
  };

  const fs::path entry = fs::absolute(fs::path(opts_.cache_dir)) / key;
  if (opts_.use_cache && fs::exists(entry / "result.json")) {
    const auto j = nlohmann::json::parse(slurp(entry / "result.json"));
    GenResult r;
    r.module_name = j.at("module_name").get<std::string>();
    r.out_bindings = j.at("out_bindings").get<Binding>();
    r.tool_stdout = j.at("stdout").get<std::string>();
    r.tool_stderr = j.at("stderr").get<std::string>();
    r.cache_key = key;
    r.cache_hit = true;
    return deliver(r, entry / j.at("verilog_file").get<std::string>());
  }

  fs::path work;
  if (opts_.use_cache) {
    work = entry / "work";
    fs::remove_all(work);
    fs::create_directories(work);
  } else {
    std::string tmpl = (fs::temp_directory_path() / "pfil-gen-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) gen_error("cannot create scratch directory");
    work = tmpl;
  }

  // Executable: bare names go through PATH, relative paths are relative to
  // the config file.
  std::string exe = tool.path;
  if (exe.find('/') != std::string::npos && fs::path(exe).is_relative())
    exe = (fs::absolute(fs::path(tool.config_path).parent_path()) / exe).string();
  std::vector<std::string> args{exe};
  {
    std::istringstream cli(interpolate(spec.cli, vars));
    for (std::string a; cli >> a;) args.push_back(a);
  }
  const fs::path out_file = work / ".stdout", err_file = work / ".stderr";
  {
    std::lock_guard<std::mutex> lock(mu_);
    ++executions_;
  }
  const pid_t pid = fork();
  if (pid < 0) gen_error("fork failed");
  if (pid == 0) {
    const int o = ::open(out_file.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    const int e = ::open(err_file.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    const int nul = ::open("/dev/null", O_RDONLY);
    if (o < 0 || e < 0 || chdir(work.c_str()) != 0) _exit(126);
    dup2(nul, 0);
    dup2(o, 1);
    dup2(e, 2);
    setenv("GEN_WORKDIR", work.c_str(), 1);
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);
    execvp(argv[0], argv.data());
    std::fprintf(stderr, "cannot execute `%s`\n", argv[0]);
    _exit(127);
  }
  int status = 0;
  while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  GenResult r;
  r.module_name = module_name;
  r.cache_key = key;
  r.tool_stdout = slurp(out_file);
  r.tool_stderr = slurp(err_file);
  fs::remove(out_file);
  fs::remove(err_file);
  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  if (code != 0)
    gen_error("`" + tool.path + " " + interpolate(spec.cli, vars) + "` exited with status " +
              std::to_string(code) + (r.tool_stderr.empty() ? "" : ": " + r.tool_stderr));

  for (const auto& [param, scrape] : spec.outputs) {
    std::optional<std::string> found;
    std::istringstream lines(r.tool_stdout);
    for (std::string line; std::getline(lines, line);) {
      std::size_t i = line.find_first_not_of(" \t");
      if (i == std::string::npos || line.compare(i, scrape.size(), scrape) != 0) continue;
      i = line.find_first_not_of(" \t", i + scrape.size());
      if (i == std::string::npos || line[i] != '=') continue;
      const auto b = line.find_first_not_of(" \t", i + 1);
      const auto e = line.find_last_not_of(" \t\r");
      found = b == std::string::npos || e < b ? "" : line.substr(b, e - b + 1);
      break;
    }
    if (!found) gen_error("tool output has no line `" + scrape + " = <n>` (for output parameter `" + param + "`)");
    if (found->empty() || !std::all_of(found->begin(), found->end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
      gen_error("scraped value `" + *found + "` for `" + scrape + "` is not a natural number");
    r.out_bindings[param] = std::stoull(*found);
  }
  const fs::path produced = work / file_name;
  if (!fs::exists(produced)) gen_error("tool did not produce `" + file_name + "`");

  if (opts_.use_cache) {
    fs::copy_file(produced, entry / produced.filename(), fs::copy_options::overwrite_existing);
    r.verilog_path = (entry / produced.filename()).string();
    std::ofstream(entry / "result.json") << to_json(r).dump(2) << "\n";
    fs::remove_all(work);
    return deliver(r, entry / produced.filename());
  }
  GenResult d = deliver(r, produced);
  if (!opts_.out_dir.empty()) fs::remove_all(work);
  return d;
}

Signature concretize_signature(const Signature& sig, const Binding& params, const Binding& out,
                               const std::string& module_name) {
  Signature r = concretize(sig, params, out, module_name);
  r.is_external = true;
  return r;
}

}  // namespace pfil
