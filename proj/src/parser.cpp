#include "pfil/parser.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace pfil {
namespace {

enum class Tok { Ident, Number, String, Event, Punct, End };

struct Token {
  Tok kind;
  std::string text;
  int line;
  int col;
};

const char* const kPuncts[] = {":=", "<-", "->", "::", "..", "==", "!=", "<=", ">=", "&&",
                               "||", "(",  ")",  "[",  "]",  "{",  "}",  "<",  ">",  ",",
                               ";",  ":",  ".",  "+",  "-",  "*",  "/",  "%",  "=",  "!"};

std::vector<Token> lex(std::string_view src, const std::string& file) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (src.substr(i, 2) == "//") {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (src.substr(i, 2) == "/*") {
      const auto end = src.find("*/", i + 2);
      if (end == std::string_view::npos)
        throw CompileError("syntax error", "unterminated block comment", {file, line, col});
      advance(end + 2 - i);
      continue;
    }
    const int tl = line, tc = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        ++j;
      out.push_back({Tok::Ident, std::string(src.substr(i, j - i)), tl, tc});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      out.push_back({Tok::Number, std::string(src.substr(i, j - i)), tl, tc});
      advance(j - i);
      continue;
    }
    if (c == '\'') {
      std::size_t j = i + 1;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        ++j;
      if (j == i + 1)
        throw CompileError("syntax error", "expected event name after `'`", {file, tl, tc});
      out.push_back({Tok::Event, std::string(src.substr(i + 1, j - i - 1)), tl, tc});
      advance(j - i);
      continue;
    }
    if (c == '"') {
      std::size_t j = i + 1;
      while (j < src.size() && src[j] != '"' && src[j] != '\n') ++j;
      if (j >= src.size() || src[j] != '"')
        throw CompileError("syntax error", "unterminated string literal", {file, tl, tc});
      out.push_back({Tok::String, std::string(src.substr(i + 1, j - i - 1)), tl, tc});
      advance(j + 1 - i);
      continue;
    }
    bool matched = false;
    for (const char* p : kPuncts) {
      const std::string_view ps(p);
      if (src.substr(i, ps.size()) == ps) {
        out.push_back({Tok::Punct, std::string(ps), tl, tc});
        advance(ps.size());
        matched = true;
        break;
      }
    }
    if (!matched)
      throw CompileError("syntax error", std::string("unexpected character `") + c + "`",
                         {file, tl, tc});
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

class Parser {
 public:
  Parser(std::vector<Token> toks, std::string file, std::string dir)
      : toks_(std::move(toks)), file_(std::move(file)), dir_(std::move(dir)) {}

  Program program() {
    Program p;
    while (!at_end()) {
      if (accept_kw("import")) {
        p.imports.push_back(import_decl());
      } else if (accept_kw("ext")) {
        expect_kw("comp");
        auto sig = signature(true);
        accept(";");
        p.externals.push_back(std::move(sig));
      } else if (accept_kw("comp")) {
        Component c;
        c.sig = signature(false);
        c.body = block();
        p.components.push_back(std::move(c));
      } else {
        fail({"comp", "ext", "import"});
      }
    }
    return p;
  }

  Expr expr_only() {
    auto e = expr();
    if (!at_end()) fail({"end of input"});
    return e;
  }

  Formula formula_only() {
    auto f = formula();
    if (!at_end()) fail({"end of input"});
    return f;
  }

 private:
  // ---- token helpers ------------------------------------------------------
  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  bool at_end() const { return peek().kind == Tok::End; }
  SourceSpan here() const { return {file_, peek().line, peek().col}; }

  bool is(const char* p, std::size_t k = 0) const {
    return peek(k).kind == Tok::Punct && peek(k).text == p;
  }
  bool is_kw(const char* kw, std::size_t k = 0) const {
    return peek(k).kind == Tok::Ident && peek(k).text == kw;
  }
  bool accept(const char* p) {
    if (is(p)) {
      ++pos_;
      return true;
    }
    return false;
  }
  bool accept_kw(const char* kw) {
    if (is_kw(kw)) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(const char* p) {
    if (!accept(p)) fail({std::string("`") + p + "`"});
  }
  void expect_kw(const char* kw) {
    if (!accept_kw(kw)) fail({std::string("`") + kw + "`"});
  }

  [[noreturn]] void fail(const std::vector<std::string>& expected) const {
    std::ostringstream os;
    os << "expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i) os << (i + 1 == expected.size() ? " or " : ", ");
      os << expected[i];
    }
    const auto& t = peek();
    os << ", found ";
    switch (t.kind) {
      case Tok::End: os << "end of input"; break;
      case Tok::Event: os << "`'" << t.text << "`"; break;
      case Tok::String: os << "string \"" << t.text << "\""; break;
      default: os << "`" << t.text << "`";
    }
    throw CompileError("syntax error", os.str(), here());
  }

  static bool is_keyword(const std::string& s) {
    static const char* const kws[] = {"comp",   "ext",   "new",  "bundle", "for",  "if",
                                      "else",   "let",   "assume", "where", "with", "some",
                                      "in",     "import", "gen",  "as"};
    for (const char* k : kws)
      if (s == k) return true;
    return false;
  }

  std::string ident() {
    if (peek().kind != Tok::Ident || is_keyword(peek().text)) fail({"identifier"});
    return toks_[pos_++].text;
  }

  // Port names may reuse `in`, as in `in: ['G, 'G+1] 32`.
  std::string port_name() {
    if (peek().kind == Tok::Ident && peek().text == "in") return toks_[pos_++].text;
    return ident();
  }

  std::uint64_t number() {
    if (peek().kind != Tok::Number) fail({"number"});
    const auto& t = toks_[pos_++];
    try {
      return std::stoull(t.text);
    } catch (...) {
      throw CompileError("syntax error", "number out of range: " + t.text,
                         {file_, t.line, t.col});
    }
  }

  // ---- declarations -------------------------------------------------------
  GenImport import_decl() {
    GenImport g;
    g.loc = here();
    expect_kw("gen");
    if (peek().kind != Tok::String) fail({"config path string"});
    g.config_path = toks_[pos_++].text;
    expect_kw("as");
    g.alias = ident();
    g.source_dir = dir_;
    if (accept("{")) {
      while (!accept("}")) {
        accept_kw("ext");
        expect_kw("comp");
        auto sig = signature(true);
        accept(";");
        g.signatures.push_back(std::move(sig));
      }
    }
    accept(";");
    return g;
  }

  Signature signature(bool external) {
    Signature s;
    s.loc = here();
    s.is_external = external;
    s.name = ident();
    if (accept("[")) {
      if (!is("]")) {
        do {
          ParamDef p;
          p.name = ident();
          if (accept("=")) p.default_value = expr();
          s.params.push_back(std::move(p));
        } while (accept(","));
      }
      expect("]");
    }
    expect("<");
    if (!is(">")) {
      do {
        EventDef e;
        e.loc = here();
        if (peek().kind != Tok::Event) fail({"event (`'G`)"});
        e.name = toks_[pos_++].text;
        expect(":");
        e.delay = expr();
        s.events.push_back(std::move(e));
      } while (accept(","));
    }
    expect(">");
    expect("(");
    s.inputs = ports();
    expect(")");
    if (accept("->")) {
      expect("(");
      s.outputs = ports();
      expect(")");
    }
    for (;;) {
      if (accept_kw("with")) {
        expect("{");
        while (!accept("}")) {
          if (accept_kw("let")) {
            LetDef l;
            l.name = ident();
            expect("=");
            l.value = expr();
            s.lets.push_back(std::move(l));
          } else if (is_kw("some")) {
            SomeDecl d;
            d.loc = here();
            ++pos_;
            do d.names.push_back(ident());
            while (accept(","));
            if (accept_kw("where")) d.constraints = formula_list();
            s.somes.push_back(std::move(d));
          } else {
            fail({"`let`", "`some`", "`}`"});
          }
          accept(";");
        }
      } else if (accept_kw("where")) {
        auto fs = formula_list();
        s.where.insert(s.where.end(), fs.begin(), fs.end());
      } else {
        break;
      }
    }
    return s;
  }

  std::vector<PortDef> ports() {
    std::vector<PortDef> out;
    while (!is(")")) {
      out.push_back(port_def());
      if (!accept(",")) break;
    }
    return out;
  }

  PortDef port_def() {
    PortDef p;
    p.loc = here();
    p.name = port_name();
    while (accept("[")) {
      p.dims.push_back(expr());
      expect("]");
    }
    expect(":");
    port_type(p);
    return p;
  }

  void port_type(PortDef& p) {
    if (accept_kw("for")) {
      expect("<");
      do {
        if (peek().kind != Tok::Ident) fail({"index variable"});
        p.index_vars.push_back(toks_[pos_++].text);
      } while (accept(","));
      expect(">");
    }
    if (is("[")) p.live = interval();
    p.width = expr();
  }

  Interval interval() {
    expect("[");
    Interval i;
    i.start = time();
    expect(",");
    i.end = time();
    expect("]");
    return i;
  }

  Time time() {
    Time t;
    if (peek().kind == Tok::Event || peek().kind == Tok::Ident) {
      if (peek().kind == Tok::Ident && is_keyword(peek().text)) fail({"event"});
      t.event = toks_[pos_++].text;
    } else {
      fail({"event (`'G`)"});
    }
    t.offset = accept("+") ? expr() : Expr::nat(0);
    return t;
  }

  // ---- body ---------------------------------------------------------------
  Block block() {
    expect("{");
    Block out;
    while (!accept("}")) {
      if (at_end()) fail({"`}`"});
      command(out);
      accept(";");
    }
    return out;
  }

  void command(Block& out) {
    const SourceSpan loc = here();
    auto push = [&](auto&& v) { out.push_back(Command{std::forward<decltype(v)>(v), loc}); };

    if (accept_kw("bundle")) {
      BundleDecl b;
      b.port.loc = loc;
      b.port.name = ident();
      while (accept("[")) {
        b.port.dims.push_back(expr());
        expect("]");
      }
      expect(":");
      port_type(b.port);
      if (!b.port.live) throw CompileError("syntax error", "bundles need a liveness interval", loc);
      push(std::move(b));
      return;
    }
    if (accept_kw("for")) {
      ForLoop f;
      f.var = ident();
      expect_kw("in");
      f.lo = expr();
      expect("..");
      f.hi = expr();
      f.body = block();
      push(std::move(f));
      return;
    }
    if (is_kw("if")) {
      push(if_else());
      return;
    }
    if (accept_kw("let")) {
      LetCmd l;
      l.name = ident();
      expect("=");
      l.value = expr();
      push(std::move(l));
      return;
    }
    if (accept_kw("assume")) {
      push(Assume{formula()});
      return;
    }
    if (peek().kind == Tok::Ident && is(":=", 1)) {
      const std::string name = ident();
      expect(":=");
      if (accept_kw("new")) {
        Instantiate inst;
        inst.name = name;
        inst.component = ident();
        if (accept(".")) inst.component += "." + ident();
        if (accept("[")) {
          if (!is("]")) {
            do inst.args.push_back(expr());
            while (accept(","));
          }
          expect("]");
        }
        if (accept_kw("in")) inst.availability = interval();
        const bool fused = is("<");
        push(std::move(inst));
        if (fused) push(invoke_tail(name, name));
        return;
      }
      const std::string instance = ident();
      push(invoke_tail(name, instance));
      return;
    }
    if (peek().kind == Tok::Ident && is("<-", 1)) {
      OutAssign a;
      a.param = ident();
      expect("<-");
      a.value = expr();
      push(std::move(a));
      return;
    }
    if (peek().kind == Tok::Ident && !is_keyword(peek().text)) {
      Connect c;
      c.dst = port_ref();
      expect("=");
      c.src = port_ref();
      push(std::move(c));
      return;
    }
    fail({"command"});
  }

  IfElse if_else() {
    expect_kw("if");
    IfElse ie;
    ie.cond = formula();
    ie.then_body = block();
    if (accept_kw("else")) {
      if (is_kw("if")) {
        const SourceSpan loc = here();
        ie.else_body.push_back(Command{if_else(), loc});
      } else {
        ie.else_body = block();
      }
    }
    return ie;
  }

  Invoke invoke_tail(std::string name, std::string instance) {
    Invoke inv;
    inv.name = std::move(name);
    inv.instance = std::move(instance);
    expect("<");
    if (!is(">")) {
      do inv.events.push_back(time());
      while (accept(","));
    }
    expect(">");
    expect("(");
    if (!is(")")) {
      do inv.ports.push_back(port_ref());
      while (accept(","));
    }
    expect(")");
    return inv;
  }

  PortRef port_ref() {
    const SourceSpan loc = here();
    if (peek().kind == Tok::Number) {
      auto r = PortRef::constant(number());
      r.loc = loc;
      return r;
    }
    const std::string first = port_name();
    PortRef r;
    if (accept(".")) {
      r = PortRef::invoc(first, port_name());
    } else {
      r = PortRef::local(first);
    }
    for (;;) {
      if (accept("[")) {
        r.indices.push_back(index());
        expect("]");
      } else if (accept("{")) {
        r.indices.push_back(index());
        expect("}");
      } else {
        break;
      }
    }
    r.loc = loc;
    return r;
  }

  Index index() {
    if (accept("..")) {
      std::optional<Expr> hi;
      if (!is("]") && !is("}")) hi = expr();
      return Index::range(std::nullopt, hi);
    }
    auto lo = expr();
    if (accept("..")) {
      std::optional<Expr> hi;
      if (!is("]") && !is("}")) hi = expr();
      return Index::range(lo, hi);
    }
    return Index::single(lo);
  }

  // ---- expressions --------------------------------------------------------
  Expr expr() {
    auto lhs = term();
    for (;;) {
      if (accept("+"))
        lhs = Expr::bin(BinOp::Add, lhs, term());
      else if (accept("-"))
        lhs = Expr::bin(BinOp::Sub, lhs, term());
      else
        return lhs;
    }
  }

  Expr term() {
    auto lhs = factor();
    for (;;) {
      if (accept("*"))
        lhs = Expr::bin(BinOp::Mul, lhs, factor());
      else if (accept("/"))
        lhs = Expr::bin(BinOp::Div, lhs, factor());
      else if (accept("%"))
        lhs = Expr::bin(BinOp::Mod, lhs, factor());
      else
        return lhs;
    }
  }

  Expr factor() {
    if (peek().kind == Tok::Number) return Expr::nat(number());
    if (accept("(")) {
      auto e = expr();
      expect(")");
      return e;
    }
    if (peek().kind == Tok::Ident && !is_keyword(peek().text)) {
      const SourceSpan loc = here();
      std::string name = toks_[pos_++].text;
      if (accept("::")) return Expr::var(name + "::" + ident());
      if (is("(")) {
        auto fn = builtin_from_name(name);
        if (!fn) throw CompileError("syntax error", "unknown function `" + name + "`", loc);
        ++pos_;
        std::vector<Expr> args;
        if (!is(")")) {
          do args.push_back(expr());
          while (accept(","));
        }
        expect(")");
        if (args.size() != builtin_arity(*fn))
          throw CompileError("syntax error",
                             name + " takes " + std::to_string(builtin_arity(*fn)) +
                                 " argument(s), got " + std::to_string(args.size()),
                             loc);
        return Expr::call(*fn, std::move(args));
      }
      return Expr::var(std::move(name));
    }
    fail({"expression"});
  }

  // ---- formulas -----------------------------------------------------------
  std::vector<Formula> formula_list() {
    std::vector<Formula> out;
    do out.push_back(formula());
    while (accept(","));
    return out;
  }

  Formula formula() {
    std::vector<Formula> parts{conjunction()};
    while (accept("||")) parts.push_back(conjunction());
    return parts.size() == 1 ? parts.front() : Formula::disj(std::move(parts));
  }

  Formula conjunction() {
    std::vector<Formula> parts{negation()};
    while (accept("&&")) parts.push_back(negation());
    return parts.size() == 1 ? parts.front() : Formula::conj(std::move(parts));
  }

  Formula negation() {
    if (accept("!")) return Formula::negate(negation());
    return comparison_or_group();
  }

  std::optional<CmpOp> cmp_op() {
    static const std::pair<const char*, CmpOp> ops[] = {
        {"<=", CmpOp::Le}, {">=", CmpOp::Ge}, {"==", CmpOp::Eq},
        {"!=", CmpOp::Ne}, {"<", CmpOp::Lt},  {">", CmpOp::Gt}};
    for (const auto& [p, op] : ops)
      if (accept(p)) return op;
    return std::nullopt;
  }

  Formula comparison_or_group() {
    const std::size_t save = pos_;
    try {
      auto lhs = expr();
      auto op = cmp_op();
      if (!op) fail({"comparison operator"});
      std::vector<Formula> chain;
      auto rhs = expr();
      chain.push_back(Formula::cmp(*op, lhs, rhs));
      while (auto next = cmp_op()) {
        auto r2 = expr();
        chain.push_back(Formula::cmp(*next, rhs, r2));
        rhs = r2;
      }
      return chain.size() == 1 ? chain.front() : Formula::conj(std::move(chain));
    } catch (const CompileError&) {
      if (toks_[save].kind != Tok::Punct || toks_[save].text != "(") throw;
      pos_ = save + 1;
      auto f = formula();
      expect(")");
      return f;
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::string file_;
  std::string dir_;
};

}  // namespace

Program parse(std::string_view text, const std::string& filename) {
  const auto dir = std::filesystem::path(filename).parent_path().string();
  Parser p(lex(text, filename), filename, dir);
  return p.program();
}

Program parse_files(const std::vector<std::string>& paths) {
  Program out;
  for (const auto& path : paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CompileError("io error", "cannot read `" + path + "`");
    std::stringstream ss;
    ss << in.rdbuf();
    merge_into(out, parse(ss.str(), path));
  }
  return out;
}

Expr parse_expr(std::string_view text) {
  Parser p(lex(text, "<expr>"), "<expr>", "");
  return p.expr_only();
}

Formula parse_formula(std::string_view text) {
  Parser p(lex(text, "<formula>"), "<formula>", "");
  return p.formula_only();
}

}  // namespace pfil
