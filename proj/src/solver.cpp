#include "pfil/solver.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstring>
#include <filesystem>
#include <functional>
#include <sstream>

namespace pfil {

namespace {
const char* const kCategoryNames[kNumCategories] = {
    "interval-availability", "well-formed-interval", "delay-pipelining",
    "instance-availability", "instance-conflict",    "where-clause",
    "width-match",           "bundle-size",          "nonneg-subtraction",
    "outparam-constraint"};
}

const char* to_string(Category c) { return kCategoryNames[static_cast<int>(c)]; }

std::optional<Category> category_from_string(const std::string& s) {
  for (int i = 0; i < kNumCategories; ++i)
    if (s == kCategoryNames[i]) return static_cast<Category>(i);
  return std::nullopt;
}

const char* to_string(Verdict::Kind k) {
  switch (k) {
    case Verdict::Kind::Proven: return "proven";
    case Verdict::Kind::Refuted: return "refuted";
    case Verdict::Kind::Unknown: return "unknown";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Encoding

namespace {

std::string sym(const std::string& name) { return "|" + name + "|"; }

void emit(std::ostream& os, const Expr& e) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, NatLit>) {
          os << n.value;
        } else if constexpr (std::is_same_v<T, VarRef>) {
          os << sym(n.name);
        } else if constexpr (std::is_same_v<T, BinExpr>) {
          static const char* ops[] = {"+", "-", "*", "div", "mod"};
          os << '(' << ops[static_cast<int>(n.op)] << ' ';
          emit(os, n.lhs);
          os << ' ';
          emit(os, n.rhs);
          os << ')';
        } else {
          static const char* fns[] = {"pow2", "log2", "bit_rev"};
          os << '(' << fns[static_cast<int>(n.fn)];
          for (const auto& a : n.args) {
            os << ' ';
            emit(os, a);
          }
          os << ')';
        }
      },
      e.node().v);
}

void emit(std::ostream& os, const Formula& f) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, BoolLit>) {
          os << (n.value ? "true" : "false");
        } else if constexpr (std::is_same_v<T, CmpF>) {
          const bool ne = n.op == CmpOp::Ne;
          static const char* ops[] = {"<", "<=", ">", ">=", "=", "="};
          if (ne) os << "(not ";
          os << '(' << ops[static_cast<int>(n.op)] << ' ';
          emit(os, n.lhs);
          os << ' ';
          emit(os, n.rhs);
          os << ')';
          if (ne) os << ')';
        } else if constexpr (std::is_same_v<T, AndF> || std::is_same_v<T, OrF>) {
          if (n.parts.empty()) {
            os << (std::is_same_v<T, AndF> ? "true" : "false");
            return;
          }
          os << (std::is_same_v<T, AndF> ? "(and" : "(or");
          for (const auto& p : n.parts) {
            os << ' ';
            emit(os, p);
          }
          os << ')';
        } else if constexpr (std::is_same_v<T, NotF>) {
          os << "(not ";
          emit(os, n.inner);
          os << ')';
        } else {
          os << "(=> ";
          emit(os, n.lhs);
          os << ' ';
          emit(os, n.rhs);
          os << ')';
        }
      },
      f.node().v);
}

void collect_calls(const Expr& e, std::map<std::string, Expr>& out) {
  const auto& n = e.node().v;
  if (const auto* b = std::get_if<BinExpr>(&n)) {
    collect_calls(b->lhs, out);
    collect_calls(b->rhs, out);
  } else if (const auto* c = std::get_if<CallExpr>(&n)) {
    out.emplace(to_string(e), e);
    for (const auto& a : c->args) collect_calls(a, out);
  }
}

void collect_calls(const Formula& f, std::map<std::string, Expr>& out) {
  for_each_expr(f, [&](const Expr& e) { collect_calls(e, out); });
}

const CallExpr* as_call(const Expr& e, Builtin fn) {
  const auto* c = std::get_if<CallExpr>(&e.node().v);
  return c && c->fn == fn ? c : nullptr;
}

Expr pow2(const Expr& a) { return normalize(Expr::call(Builtin::Pow2, {a})); }

std::vector<Formula> axioms_for(const std::map<std::string, Expr>& calls) {
  std::vector<Formula> ax;
  std::map<std::string, Expr> pow2_terms;
  auto basic_pow2 = [&](const Expr& t) {
    const auto* c = as_call(t, Builtin::Pow2);
    if (!c) return;
    const Expr& a = c->args[0];
    pow2_terms.emplace(to_string(t), t);
    ax.push_back(le(Expr::nat(1), t));
    ax.push_back(lt(a, t));
    ax.push_back(Formula::implies(eq(a, Expr::nat(0)), eq(t, Expr::nat(1))));
  };
  for (const auto& [_, t] : calls) {
    if (const auto* c = as_call(t, Builtin::Pow2)) {
      const Expr& a = c->args[0];
      basic_pow2(t);
      const Expr next = pow2(normalize(a + Expr::nat(1)));
      if (!next.is_nat()) {
        basic_pow2(next);
        ax.push_back(eq(next, Expr::nat(2) * t));
      }
      const Expr lg = Expr::call(Builtin::Log2, {t});
      ax.push_back(eq(lg, a));
    } else if (const auto* c = as_call(t, Builtin::Log2)) {
      const Expr& a = c->args[0];
      ax.push_back(le(Expr::nat(0), t));
      if (const auto* inner = as_call(a, Builtin::Pow2)) ax.push_back(eq(t, inner->args[0]));
      const Expr p = pow2(t);
      basic_pow2(p);
      ax.push_back(Formula::implies(le(Expr::nat(1), a),
                                    le(a, p) && lt(p, Expr::nat(2) * a)));
    } else if (const auto* c = as_call(t, Builtin::BitRev)) {
      const Expr p = pow2(c->args[1]);
      ax.push_back(le(Expr::nat(0), t));
      if (p.is_nat()) {
        ax.push_back(lt(t, p));
      } else {
        basic_pow2(p);
        ax.push_back(lt(t, p));
      }
    }
  }
  std::vector<Expr> ps;
  for (const auto& [_, t] : pow2_terms) ps.push_back(t);
  for (std::size_t i = 0; i < ps.size(); ++i)
    for (std::size_t j = 0; j < ps.size(); ++j) {
      if (i == j) continue;
      const Expr& a = std::get<CallExpr>(ps[i].node().v).args[0];
      const Expr& b = std::get<CallExpr>(ps[j].node().v).args[0];
      ax.push_back(Formula::implies(lt(a, b), lt(ps[i], ps[j])));
    }
  return ax;
}

}  // namespace

std::string smt_encode(const std::vector<Formula>& facts, std::vector<std::string>& vars) {
  std::vector<Formula> all;
  for (const auto& f : facts) all.push_back(normalize(f));
  std::map<std::string, Expr> calls;
  for (const auto& f : all) collect_calls(f, calls);
  for (auto& a : axioms_for(calls)) all.push_back(std::move(a));

  std::set<std::string> fv;
  for (const auto& f : all) collect_free_vars(f, fv);
  vars.assign(fv.begin(), fv.end());

  std::ostringstream os;
  for (const auto& v : vars) {
    os << "(declare-const " << sym(v) << " Int)\n";
    os << "(assert (>= " << sym(v) << " 0))\n";
  }
  for (const auto& f : all) {
    os << "(assert ";
    emit(os, f);
    os << ")\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Solver process

SmtSession::SmtSession(std::string solver_path, int timeout_ms)
    : path_(std::move(solver_path)), timeout_ms_(timeout_ms) {}

SmtSession::~SmtSession() { kill(); }

void SmtSession::kill() {
  if (in_fd_ >= 0) {
    ::close(in_fd_);
    in_fd_ = -1;
  }
  if (out_fd_ >= 0) {
    ::close(out_fd_);
    out_fd_ = -1;
  }
  if (pid_ > 0) {
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
    pid_ = -1;
  }
  buffer_.clear();
}

void SmtSession::start() {
  ::signal(SIGPIPE, SIG_IGN);
  int to_child[2], from_child[2], err_pipe[2];
  if (::pipe(to_child) != 0 || ::pipe(from_child) != 0 || ::pipe(err_pipe) != 0)
    throw std::runtime_error("pipe failed");
  ::fcntl(err_pipe[1], F_SETFD, FD_CLOEXEC);
  const std::string base = std::filesystem::path(path_).filename().string();
  std::vector<std::string> args{path_};
  if (base.find("z3") != std::string::npos) {
    args.push_back("-in");
  } else if (base.find("cvc") != std::string::npos) {
    args.insert(args.end(), {"--incremental", "--produce-models", "--lang=smt2"});
  }
  const pid_t pid = ::fork();
  if (pid < 0) throw std::runtime_error("fork failed");
  if (pid == 0) {
    ::dup2(to_child[0], 0);
    ::dup2(from_child[1], 1);
    const int devnull = ::open("/dev/null", O_WRONLY);
    if (devnull >= 0) ::dup2(devnull, 2);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(err_pipe[0]);
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);
    ::execvp(argv[0], argv.data());
    const int err = errno;
    [[maybe_unused]] auto w = ::write(err_pipe[1], &err, sizeof err);
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  ::close(err_pipe[1]);
  int err = 0;
  const auto n = ::read(err_pipe[0], &err, sizeof err);
  ::close(err_pipe[0]);
  pid_ = pid;
  in_fd_ = to_child[1];
  out_fd_ = from_child[0];
  if (n == sizeof err) {
    kill();
    throw std::runtime_error("cannot execute solver `" + path_ + "`: " + std::strerror(err));
  }
  std::ostringstream os;
  os << "(set-option :produce-models true)\n(set-logic ALL)\n";
  if (timeout_ms_ > 0) os << "(set-option :timeout " << timeout_ms_ << ")\n";
  os << "(declare-fun pow2 (Int) Int)\n(declare-fun log2 (Int) Int)\n"
        "(declare-fun bit_rev (Int Int) Int)\n";
  send(os.str());
}

void SmtSession::send(const std::string& text) {
  std::size_t off = 0;
  while (off < text.size()) {
    const auto n = ::write(in_fd_, text.data() + off, text.size() - off);
    if (n <= 0) {
      if (errno == EINTR) continue;
      throw std::runtime_error("solver process closed its input");
    }
    off += static_cast<std::size_t>(n);
  }
}

// Reads one response: a parenthesized s-expression or a bare line.
std::string SmtSession::read_response() {
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::milliseconds(timeout_ms_ > 0 ? timeout_ms_ + 5000 : 600000);
  for (;;) {
    std::size_t i = 0;
    while (i < buffer_.size() && std::isspace(static_cast<unsigned char>(buffer_[i]))) ++i;
    if (i < buffer_.size()) {
      if (buffer_[i] == '(') {
        int depth = 0;
        bool quoted = false, str = false;
        for (std::size_t j = i; j < buffer_.size(); ++j) {
          const char c = buffer_[j];
          if (str) {
            if (c == '"') str = false;
            continue;
          }
          if (quoted) {
            if (c == '|') quoted = false;
            continue;
          }
          if (c == '"') str = true;
          else if (c == '|') quoted = true;
          else if (c == '(') ++depth;
          else if (c == ')' && --depth == 0) {
            std::string out = buffer_.substr(i, j + 1 - i);
            buffer_.erase(0, j + 1);
            return out;
          }
        }
      } else {
        const auto nl = buffer_.find('\n', i);
        if (nl != std::string::npos) {
          std::string out = buffer_.substr(i, nl - i);
          buffer_.erase(0, nl + 1);
          while (!out.empty() && std::isspace(static_cast<unsigned char>(out.back())))
            out.pop_back();
          return out;
        }
      }
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                          deadline - std::chrono::steady_clock::now())
                          .count();
    if (left <= 0) throw std::runtime_error("solver did not answer within the timeout");
    pollfd p{out_fd_, POLLIN, 0};
    const int r = ::poll(&p, 1, static_cast<int>(left));
    if (r < 0 && errno == EINTR) continue;
    if (r <= 0) throw std::runtime_error("solver did not answer within the timeout");
    char chunk[4096];
    const auto n = ::read(out_fd_, chunk, sizeof chunk);
    if (n <= 0) throw std::runtime_error("solver process exited unexpectedly");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

namespace {

// Parses `((|x| 3) (|y| (- 1)) ...)`.
Binding parse_model(const std::string& text) {
  Binding out;
  std::size_t i = 0;
  auto skip = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  auto token = [&]() -> std::string {
    skip();
    if (i >= text.size()) return {};
    if (text[i] == '(' || text[i] == ')') return std::string(1, text[i++]);
    if (text[i] == '|') {
      const auto end = text.find('|', i + 1);
      std::string s = text.substr(i + 1, end - i - 1);
      i = end + 1;
      return s;
    }
    const std::size_t st = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) &&
           text[i] != '(' && text[i] != ')')
      ++i;
    return text.substr(st, i - st);
  };
  if (token() != "(") return out;
  for (;;) {
    const std::string open = token();
    if (open != "(") break;
    const std::string name = token();
    std::string v = token();
    bool neg = false;
    if (v == "(") {
      const std::string op = token();
      v = token();
      neg = op == "-";
      token();
    }
    token();  // ')'
    if (!neg && !v.empty() && std::isdigit(static_cast<unsigned char>(v[0]))) {
      try {
        out[name] = std::stoull(v);
      } catch (...) {
      }
    } else {
      out[name] = 0;
    }
  }
  return out;
}

}  // namespace

Verdict SmtSession::check_unsat(const std::vector<Formula>& facts) {
  try {
    if (pid_ < 0) start();
    std::vector<std::string> vars;
    const std::string body = smt_encode(facts, vars);
    ++queries_;
    send("(push 1)\n" + body + "(check-sat)\n");
    std::string resp;
    bool had_error = false;
    std::string error_text;
    for (;;) {
      resp = read_response();
      if (resp.rfind("(error", 0) == 0) {
        had_error = true;
        error_text = resp;
        continue;
      }
      break;
    }
    Verdict v;
    if (had_error) {
      v = Verdict::unknown("solver error: " + error_text);
    } else if (resp == "unsat") {
      v = Verdict::proven();
    } else if (resp == "sat") {
      Binding model;
      if (!vars.empty()) {
        std::string q = "(get-value (";
        for (std::size_t i = 0; i < vars.size(); ++i) q += (i ? " " : "") + sym(vars[i]);
        send(q + "))\n");
        model = parse_model(read_response());
      }
      v = Verdict::refuted(std::move(model));
    } else {
      v = Verdict::unknown("solver answered `" + resp + "`");
    }
    send("(pop 1)\n");
    return v;
  } catch (const std::exception& e) {
    kill();
    return Verdict::unknown(e.what());
  }
}

// ---------------------------------------------------------------------------
// Prover

Prover::Prover(std::string solver_path, int timeout_ms)
    : path_(std::move(solver_path)), timeout_ms_(timeout_ms) {}

Prover::~Prover() = default;

namespace {

std::map<std::string, __int128> widen(const Binding& b) {
  std::map<std::string, __int128> out;
  for (const auto& [k, v] : b) out[k] = static_cast<__int128>(v);
  return out;
}

bool covered(const Formula& f, const Binding& b) {
  for (const auto& v : free_vars(f))
    if (!b.count(v)) return false;
  return true;
}

}  // namespace

bool is_counterexample(const Obligation& o, const std::vector<Formula>& assumptions,
                       const Binding& b) {
  const auto w = widen(b);
  try {
    for (const auto& a : assumptions)
      if (covered(a, b) && !evaluate_int(a, w)) return false;
    return evaluate_int(o.pc, w) && !evaluate_int(o.goal, w);
  } catch (const std::exception&) {
    return false;
  }
}

Verdict Prover::discharge(const Obligation& o, const std::vector<Formula>& assumptions) {
  std::set<std::string> fv;
  collect_free_vars(o.pc, fv);
  collect_free_vars(o.goal, fv);

  if (fv.empty()) {
    try {
      const std::map<std::string, __int128> none;
      if (!evaluate_int(o.pc, none)) return Verdict::proven();
      for (const auto& a : assumptions)
        if (free_vars(a).empty() && !evaluate_int(a, none)) return Verdict::proven();
      return evaluate_int(o.goal, none) ? Verdict::proven() : Verdict::refuted({});
    } catch (const std::exception& e) {
      return Verdict::unknown(std::string("evaluation failed: ") + e.what());
    }
  }

  if (!path_.empty()) {
    if (!session_) session_ = std::make_unique<SmtSession>(path_, timeout_ms_);
    std::vector<Formula> facts = assumptions;
    facts.push_back(o.pc);
    facts.push_back(!o.goal);
    Verdict v = session_->check_unsat(facts);
    if (v.kind == Verdict::Kind::Refuted) {
      // Keep only the symbols of the obligation itself in the reported model.
      Binding cex;
      for (const auto& [k, val] : v.counterexample)
        if (fv.count(k)) cex[k] = val;
      if (!is_counterexample(o, assumptions, v.counterexample))
        return Verdict::unknown(
            "solver model does not falsify the obligation under exact arithmetic "
            "(nonlinear or builtin terms); add an `assume` to help the checker");
      return Verdict::refuted(std::move(cex));
    }
    return v;
  }

  // No solver: enumerate bounded domains.
  std::set<std::string> dom;
  for (const auto& d : o.domains) dom.insert(d.var);
  for (const auto& v : fv)
    if (!dom.count(v))
      return Verdict::unknown("obligation mentions symbolic `" + v +
                              "` and no solver is configured (pass --solver)");
  std::size_t budget = 1000000;
  Binding b;
  std::optional<Verdict> result;
  std::function<bool(std::size_t)> walk = [&](std::size_t k) -> bool {
    if (k == o.domains.size()) {
      if (budget-- == 0) {
        result = Verdict::unknown("enumeration budget exhausted");
        return false;
      }
      const auto w = widen(b);
      try {
        if (!evaluate_int(o.pc, w)) return true;
        for (const auto& a : assumptions)
          if (covered(a, b) && !evaluate_int(a, w)) return true;
        if (!evaluate_int(o.goal, w)) {
          Binding cex;
          for (const auto& [name, val] : b)
            if (fv.count(name)) cex[name] = val;
          result = Verdict::refuted(std::move(cex));
          return false;
        }
      } catch (const std::exception& e) {
        result = Verdict::unknown(std::string("evaluation failed: ") + e.what());
        return false;
      }
      return true;
    }
    const auto& d = o.domains[k];
    std::uint64_t lo, hi;
    try {
      lo = evaluate(d.lo, b);
      hi = evaluate(d.hi, b);
    } catch (const std::exception& e) {
      result = Verdict::unknown("cannot enumerate `" + d.var + "`: " + e.what());
      return false;
    }
    for (std::uint64_t x = lo; x < hi; ++x) {
      b[d.var] = x;
      if (!walk(k + 1)) return false;
    }
    b.erase(d.var);
    return true;
  };
  walk(0);
  return result ? *result : Verdict::proven();
}

}  // namespace pfil
