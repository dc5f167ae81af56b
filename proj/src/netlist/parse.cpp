// Recursive-descent reader for the structural Verilog subset documented in
// docs/netlist-format.md.

#include <cctype>
#include <set>
#include <algorithm>

#include <fmt/format.h>

#include "lutscope/netlist.hpp"

namespace lutscope {

ParseError::ParseError(int line, int column, const std::string& what)
    : Error(fmt::format("line {}, column {}: {}", line, column, what)), line_(line), column_(column) {}

namespace {

enum class Tok { Ident, Number, Literal, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 1;
  int col = 1;
  // Literal payload.
  int lit_width = -1;
  std::uint64_t lit_value = 0;
  bool lit_has_xz = false;
};

class Lexer {
public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_space();
    Token t;
    t.line = line_;
    t.col = col_;
    if (pos_ >= src_.size()) return t;
    char c = src_[pos_];
    if (c == '\\') {
      advance();
      std::size_t start = pos_;
      while (pos_ < src_.size() && !std::isspace(static_cast<unsigned char>(src_[pos_]))) advance();
      if (pos_ == start) throw ParseError(t.line, t.col, "empty escaped identifier");
      t.kind = Tok::Ident;
      t.text = std::string(src_.substr(start, pos_ - start));
      return t;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
      std::size_t start = pos_;
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_' ||
                                    src_[pos_] == '$'))
        advance();
      t.kind = Tok::Ident;
      t.text = std::string(src_.substr(start, pos_ - start));
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '\'') {
      std::size_t start = pos_;
      while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        advance();
      std::string width_text;
      for (char d : src_.substr(start, pos_ - start))
        if (d != '_') width_text += d;
      if (pos_ < src_.size() && src_[pos_] == '\'') {
        advance();
        lex_based_literal(t, width_text);
        return t;
      }
      t.kind = Tok::Number;
      t.text = width_text;
      return t;
    }
    advance();
    t.kind = Tok::Punct;
    t.text = std::string(1, c);
    if (std::string_view("()[]{},;:#.=").find(c) == std::string_view::npos)
      throw ParseError(t.line, t.col, fmt::format("unexpected character '{}'", c));
    return t;
  }

private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    for (;;) {
      while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) advance();
      if (src_.substr(pos_, 2) == "//") {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (src_.substr(pos_, 2) == "/*") {
        int l = line_, c = col_;
        advance();
        advance();
        while (pos_ < src_.size() && src_.substr(pos_, 2) != "*/") advance();
        if (pos_ >= src_.size()) throw ParseError(l, c, "unterminated block comment");
        advance();
        advance();
      } else if (src_.substr(pos_, 2) == "(*") {
        // attribute instance, ignored
        int l = line_, c = col_;
        while (pos_ < src_.size() && src_.substr(pos_, 2) != "*)") advance();
        if (pos_ >= src_.size()) throw ParseError(l, c, "unterminated attribute");
        advance();
        advance();
      } else {
        return;
      }
    }
  }

  void lex_based_literal(Token& t, const std::string& width_text) {
    if (pos_ < src_.size() && (src_[pos_] == 's' || src_[pos_] == 'S')) advance();
    if (pos_ >= src_.size()) throw ParseError(t.line, t.col, "truncated literal");
    char base = static_cast<char>(std::tolower(static_cast<unsigned char>(src_[pos_])));
    unsigned shift;
    switch (base) {
    case 'b': shift = 1; break;
    case 'o': shift = 3; break;
    case 'h': shift = 4; break;
    case 'd': shift = 0; break;
    default: throw ParseError(t.line, t.col, fmt::format("bad literal base '{}'", src_[pos_]));
    }
    advance();
    std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      advance();
    std::string_view digits = src_.substr(start, pos_ - start);
    if (digits.empty()) throw ParseError(t.line, t.col, "literal without digits");
    std::uint64_t v = 0;
    unsigned used_bits = 0;
    for (char d : digits) {
      if (d == '_') continue;
      char lower = static_cast<char>(std::tolower(static_cast<unsigned char>(d)));
      if (lower == 'x' || lower == 'z' || lower == '?') {
        t.lit_has_xz = true;
        continue;
      }
      unsigned dv;
      if (lower >= '0' && lower <= '9') dv = static_cast<unsigned>(lower - '0');
      else if (lower >= 'a' && lower <= 'f') dv = static_cast<unsigned>(lower - 'a' + 10);
      else throw ParseError(t.line, t.col, fmt::format("bad digit '{}' in literal", d));
      if (shift == 0) {
        if (dv > 9) throw ParseError(t.line, t.col, fmt::format("bad digit '{}' in decimal literal", d));
        if (v > (~std::uint64_t{0} - dv) / 10) throw ParseError(t.line, t.col, "literal exceeds 64 bits");
        v = v * 10 + dv;
      } else {
        if (dv >= (1u << shift)) throw ParseError(t.line, t.col, fmt::format("bad digit '{}' for base", d));
        if (used_bits + shift > 64 && (v >> (64 - shift)) != 0)
          throw ParseError(t.line, t.col, "literal exceeds 64 bits");
        v = (v << shift) | dv;
        used_bits += shift;
      }
    }
    t.kind = Tok::Literal;
    t.text = width_text + "'" + base + std::string(digits);
    t.lit_value = v;
    if (!width_text.empty()) {
      int w = std::stoi(width_text);
      if (w <= 0 || w > 64) throw ParseError(t.line, t.col, fmt::format("unsupported literal width {}", w));
      if (v & ~width_mask(static_cast<unsigned>(w)))
        throw ParseError(t.line, t.col, fmt::format("literal {} does not fit in {} bits", t.text, w));
      t.lit_width = w;
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

// Expression atoms are kept unexpanded until the module's declarations are
// all known.
struct Atom {
  bool is_literal = false;
  std::string name;
  std::optional<std::pair<int, int>> select; // msb, lsb (equal for bit-select)
  int lit_width = -1;
  std::uint64_t lit_value = 0;
  int line = 0;
  int col = 0;
};
using Expr = std::vector<Atom>; // concatenation, msb first

struct PendingInstance {
  std::string type;
  std::string name;
  std::vector<std::pair<std::string, Token>> params;
  std::vector<std::pair<std::string, Expr>> conns;
  int line = 0;
  int col = 0;
};

struct PendingAssign {
  Expr lhs;
  Expr rhs;
  int line = 0;
};

struct PendingModule {
  Module mod;
  std::vector<PendingInstance> instances;
  std::vector<PendingAssign> assigns;
  int line = 0;
};

bool is_primitive(std::string_view t) {
  static const std::set<std::string, std::less<>> prims = {"LUT1", "LUT2", "LUT3", "LUT4", "LUT5",   "LUT6", "DFF",
                                                           "CONST0", "CONST1", "GND", "VCC", "BUF", "INV", "MUX2"};
  return prims.contains(t);
}

class Parser {
public:
  Parser(std::string_view src, const ParseOptions& opts) : lex_(src), opts_(opts) { tok_ = lex_.next(); }

  Netlist run() {
    std::vector<PendingModule> pending;
    while (tok_.kind != Tok::End) {
      if (!is_ident("module")) fail("expected 'module'");
      pending.push_back(parse_module());
    }
    Netlist n;
    std::set<std::string> defined;
    for (auto& pm : pending) {
      if (!defined.insert(pm.mod.name).second)
        throw ParseError(pm.line, 1, fmt::format("module '{}' defined twice", pm.mod.name));
    }
    // Ports of every module must be known before instance bindings resolve.
    std::map<std::string, const Module*> headers;
    for (auto& pm : pending) headers[pm.mod.name] = &pm.mod;
    for (auto& pm : pending) resolve_module(pm, headers);
    for (auto& pm : pending) n.modules.emplace(pm.mod.name, std::move(pm.mod));
    n.top = select_top(n, pending);
    return n;
  }

private:
  [[noreturn]] void fail(const std::string& what) const {
    std::string got = tok_.kind == Tok::End ? "end of input" : fmt::format("'{}'", tok_.text);
    throw ParseError(tok_.line, tok_.col, fmt::format("{}, got {}", what, got));
  }

  bool is_ident(std::string_view s) const { return tok_.kind == Tok::Ident && tok_.text == s; }
  bool is_punct(char c) const { return tok_.kind == Tok::Punct && tok_.text[0] == c; }

  Token take() {
    Token t = tok_;
    prev_ = tok_;
    tok_ = lex_.next();
    return t;
  }

  void expect(char c) {
    if (is_punct(c)) {
      take();
      return;
    }
    if (c == ';' && prev_.kind != Tok::End) {
      // A missing terminator belongs to the statement it should end.
      throw ParseError(prev_.line, prev_.col + static_cast<int>(prev_.text.size()),
                       fmt::format("expected ';' after '{}'", prev_.text));
    }
    fail(fmt::format("expected '{}'", c));
  }

  std::string expect_ident(const char* what) {
    if (tok_.kind != Tok::Ident) fail(fmt::format("expected {}", what));
    return take().text;
  }

  int expect_number() {
    if (tok_.kind != Tok::Number) fail("expected number");
    return std::stoi(take().text);
  }

  std::optional<Range> maybe_range() {
    if (!is_punct('[')) return std::nullopt;
    take();
    Range r;
    r.vector = true;
    r.msb = expect_number();
    expect(':');
    r.lsb = expect_number();
    expect(']');
    return r;
  }

  PendingModule parse_module() {
    PendingModule pm;
    pm.line = tok_.line;
    take(); // module
    pm.mod.name = expect_ident("module name");
    std::set<std::string> header_names;
    bool ansi = false;
    if (is_punct('(')) {
      take();
      if (!is_punct(')')) {
        for (;;) {
          if (is_ident("input") || is_ident("output")) {
            ansi = true;
            PortDir dir = tok_.text == "input" ? PortDir::Input : PortDir::Output;
            take();
            if (is_ident("wire")) take();
            Range r = maybe_range().value_or(Range{});
            Token at = tok_;
            std::string nm = expect_ident("port name");
            declare_name(pm, nm, at);
            pm.mod.ports.push_back({nm, dir, r});
            // Subsequent bare names inherit direction and range.
            while (is_punct(',')) {
              take();
              if (is_ident("input") || is_ident("output")) break;
              Token at2 = tok_;
              std::string nm2 = expect_ident("port name");
              declare_name(pm, nm2, at2);
              pm.mod.ports.push_back({nm2, dir, r});
            }
            if (is_ident("input") || is_ident("output")) continue;
            break;
          }
          if (ansi) fail("expected port direction");
          Token at = tok_;
          std::string nm = expect_ident("port name");
          if (!header_names.insert(nm).second) throw ParseError(at.line, at.col, fmt::format("duplicate port '{}'", nm));
          pm.mod.ports.push_back({nm, PortDir::Input, Range{}});
          if (!is_punct(',')) break;
          take();
        }
      }
      expect(')');
    }
    expect(';');
    std::set<std::string> declared_ports;
    for (;;) {
      if (tok_.kind == Tok::End) fail("expected 'endmodule'");
      if (is_ident("endmodule")) {
        take();
        break;
      }
      if (is_ident("input") || is_ident("output")) {
        if (ansi) fail("port declaration in ANSI-style module body");
        PortDir dir = tok_.text == "input" ? PortDir::Input : PortDir::Output;
        take();
        if (is_ident("wire")) take();
        Range r = maybe_range().value_or(Range{});
        for (;;) {
          Token at = tok_;
          std::string nm = expect_ident("port name");
          auto it = std::find_if(pm.mod.ports.begin(), pm.mod.ports.end(), [&](const Port& p) { return p.name == nm; });
          if (it == pm.mod.ports.end())
            throw ParseError(at.line, at.col, fmt::format("'{}' is not in the port list", nm));
          if (!declared_ports.insert(nm).second)
            throw ParseError(at.line, at.col, fmt::format("port '{}' declared twice", nm));
          it->dir = dir;
          it->range = r;
          declare_name(pm, nm, at);
          if (!is_punct(',')) break;
          take();
        }
        expect(';');
        continue;
      }
      if (is_ident("inout")) fail("inout ports are not supported");
      if (is_ident("wire")) {
        take();
        Range r = maybe_range().value_or(Range{});
        for (;;) {
          Token at = tok_;
          std::string nm = expect_ident("wire name");
          bool is_port = std::any_of(pm.mod.ports.begin(), pm.mod.ports.end(), [&](const Port& p) { return p.name == nm; });
          if (is_port) {
            // `output y; wire y;` is legal Verilog; the port declaration wins.
          } else {
            declare_name(pm, nm, at);
            pm.mod.wires.push_back({nm, r});
          }
          if (!is_punct(',')) break;
          take();
        }
        expect(';');
        continue;
      }
      if (is_ident("assign")) {
        PendingAssign a;
        a.line = tok_.line;
        take();
        a.lhs = parse_expr();
        expect('=');
        a.rhs = parse_expr();
        expect(';');
        pm.assigns.push_back(std::move(a));
        continue;
      }
      if (tok_.kind == Tok::Ident) {
        pm.instances.push_back(parse_instance());
        continue;
      }
      fail("expected declaration, assign, instance or 'endmodule'");
    }
    if (!ansi) {
      for (auto& p : pm.mod.ports)
        if (!declared_ports.contains(p.name))
          throw ParseError(pm.line, 1, fmt::format("port '{}' of module '{}' has no direction", p.name, pm.mod.name));
    }
    names_.clear();
    return pm;
  }

  void declare_name(PendingModule&, const std::string& nm, const Token& at) {
    if (!names_.insert(nm).second) throw ParseError(at.line, at.col, fmt::format("'{}' declared twice", nm));
  }

  Expr parse_expr() {
    Expr e;
    if (is_punct('{')) {
      take();
      for (;;) {
        Expr sub = parse_expr();
        e.insert(e.end(), sub.begin(), sub.end());
        if (!is_punct(',')) break;
        take();
      }
      expect('}');
      return e;
    }
    Atom a;
    a.line = tok_.line;
    a.col = tok_.col;
    if (tok_.kind == Tok::Literal) {
      Token t = take();
      if (t.lit_has_xz) throw ParseError(t.line, t.col, "x/z literals are not supported in connections");
      a.is_literal = true;
      a.lit_width = t.lit_width;
      a.lit_value = t.lit_value;
      e.push_back(a);
      return e;
    }
    if (tok_.kind == Tok::Number) {
      Token t = take();
      a.is_literal = true;
      a.lit_value = std::stoull(t.text);
      e.push_back(a);
      return e;
    }
    a.name = expect_ident("signal name");
    if (is_punct('[')) {
      take();
      int msb = expect_number();
      int lsb = msb;
      if (is_punct(':')) {
        take();
        lsb = expect_number();
      }
      expect(']');
      a.select = {msb, lsb};
    }
    e.push_back(a);
    return e;
  }

  PendingInstance parse_instance() {
    PendingInstance pi;
    pi.line = tok_.line;
    pi.col = tok_.col;
    pi.type = take().text;
    if (is_punct('#')) {
      take();
      expect('(');
      for (;;) {
        expect('.');
        std::string pname = expect_ident("parameter name");
        expect('(');
        if (tok_.kind != Tok::Literal && tok_.kind != Tok::Number) fail("expected parameter value");
        Token v = take();
        if (v.kind == Tok::Number) {
          v.lit_value = std::stoull(v.text);
          v.lit_width = -1;
        }
        if (v.lit_has_xz) throw ParseError(v.line, v.col, "x/z digits are not allowed in parameters");
        expect(')');
        pi.params.emplace_back(pname, v);
        if (!is_punct(',')) break;
        take();
      }
      expect(')');
    }
    pi.name = expect_ident("instance name");
    expect('(');
    if (!is_punct(')')) {
      for (;;) {
        if (!is_punct('.')) fail("expected named port connection '.port(...)'");
        take();
        std::string port = expect_ident("port name");
        expect('(');
        Expr e;
        if (!is_punct(')')) e = parse_expr();
        expect(')');
        for (auto& c : pi.conns)
          if (c.first == port) throw ParseError(pi.line, pi.col, fmt::format("port '{}' connected twice", port));
        pi.conns.emplace_back(port, std::move(e));
        if (!is_punct(',')) break;
        take();
      }
    }
    expect(')');
    expect(';');
    return pi;
  }

  // ---- resolution -------------------------------------------------------

  std::vector<NetBit> expand(const Module& m, const Expr& e, int want_width, bool allow_literal) {
    std::vector<NetBit> bits;
    for (const Atom& a : e) {
      if (a.is_literal) {
        if (!allow_literal) throw ParseError(a.line, a.col, "constant not allowed here");
        int w = a.lit_width;
        if (w < 0) w = (e.size() == 1 && want_width > 0) ? want_width : 32;
        if (w < 64 && (a.lit_value >> w) != 0)
          throw ParseError(a.line, a.col, fmt::format("literal does not fit in {} bits", w));
        for (int i = w - 1; i >= 0; --i) bits.push_back(NetBit::constant(i < 64 && ((a.lit_value >> i) & 1u)));
        continue;
      }
      auto range = m.find_range(a.name);
      if (!a.select) {
        if (!range || !range->vector) {
          bits.push_back(NetBit::signal(a.name));
        } else {
          for (int i : range->indices_msb_first()) bits.push_back(NetBit::signal(a.name, i));
        }
        continue;
      }
      auto [hi, lo] = *a.select;
      if (range && !range->vector)
        throw ParseError(a.line, a.col, fmt::format("bit-select on scalar '{}'", a.name));
      if (range && (!range->contains(hi) || !range->contains(lo)))
        throw ParseError(a.line, a.col, fmt::format("index out of range for '{}'", a.name));
      if (hi >= lo)
        for (int i = hi; i >= lo; --i) bits.push_back(NetBit::signal(a.name, i));
      else
        for (int i = hi; i <= lo; ++i) bits.push_back(NetBit::signal(a.name, i));
    }
    return bits;
  }

  NetBit expand_scalar(const Module& m, const Expr& e, const PendingInstance& pi, const std::string& pin) {
    auto bits = expand(m, e, 1, true);
    if (bits.size() != 1)
      throw ParseError(pi.line, pi.col,
                       fmt::format("pin {} of {} '{}' needs 1 bit, got {}", pin, pi.type, pi.name, bits.size()));
    return bits[0];
  }

  void resolve_module(PendingModule& pm, const std::map<std::string, const Module*>& headers) {
    Module& m = pm.mod;
    std::set<std::string> inst_names;
    for (const auto& pi : pm.instances) {
      if (!inst_names.insert(pi.name).second)
        throw ParseError(pi.line, pi.col, fmt::format("instance name '{}' used twice", pi.name));
      if (is_primitive(pi.type)) {
        m.cells.push_back(build_cell(m, pi));
        continue;
      }
      auto it = headers.find(pi.type);
      if (it == headers.end())
        throw ParseError(pi.line, pi.col, fmt::format("unknown primitive or module '{}'", pi.type));
      if (!pi.params.empty())
        throw ParseError(pi.line, pi.col, fmt::format("parameters on module instance '{}' are not supported", pi.name));
      const Module& child = *it->second;
      Instance inst;
      inst.name = pi.name;
      inst.module = pi.type;
      inst.line = pi.line;
      for (const auto& [port, e] : pi.conns) {
        const Port* p = child.find_port(port);
        if (!p) throw ParseError(pi.line, pi.col, fmt::format("module '{}' has no port '{}'", child.name, port));
        if (e.empty()) continue; // explicitly unconnected
        auto bits = expand(m, e, p->range.width(), p->dir == PortDir::Input);
        if (static_cast<int>(bits.size()) != p->range.width())
          throw ParseError(pi.line, pi.col,
                           fmt::format("port '{}' of '{}' is {} bits wide, connection has {}", port, pi.name,
                                       p->range.width(), bits.size()));
        inst.bindings.push_back({port, std::move(bits)});
      }
      m.instances.push_back(std::move(inst));
    }
    for (const auto& pa : pm.assigns) {
      auto lhs = expand(m, pa.lhs, -1, false);
      auto rhs = expand(m, pa.rhs, static_cast<int>(lhs.size()), true);
      if (rhs.size() < lhs.size() && pa.rhs.size() == 1 && pa.rhs[0].is_literal && pa.rhs[0].lit_width < 0) {
        rhs.insert(rhs.begin(), lhs.size() - rhs.size(), NetBit::constant(false));
      }
      if (lhs.size() != rhs.size())
        throw ParseError(pa.line, 1, fmt::format("assign width mismatch: {} vs {}", lhs.size(), rhs.size()));
      for (std::size_t i = 0; i < lhs.size(); ++i) m.assigns.push_back({lhs[i], rhs[i], pa.line});
    }
  }

  Cell build_cell(const Module& m, const PendingInstance& pi) {
    Cell c;
    c.name = pi.name;
    c.source_type = pi.type;
    c.line = pi.line;
    std::map<std::string, const Expr*> conns;
    for (const auto& [port, e] : pi.conns) conns[port] = &e;
    auto pin = [&](const std::string& name) -> NetBit {
      auto it = conns.find(name);
      if (it == conns.end() || it->second->empty())
        throw ParseError(pi.line, pi.col, fmt::format("{} '{}' is missing pin {}", pi.type, pi.name, name));
      NetBit b = expand_scalar(m, *it->second, pi, name);
      conns.erase(it);
      return b;
    };
    auto param = [&](const std::string& name) -> const Token* {
      for (const auto& [pn, tok] : pi.params)
        if (pn == name) return &tok;
      return nullptr;
    };
    auto check_params = [&](std::initializer_list<std::string_view> allowed) {
      for (const auto& [pn, tok] : pi.params)
        if (std::find(allowed.begin(), allowed.end(), pn) == allowed.end())
          throw ParseError(tok.line, tok.col, fmt::format("unknown parameter '{}' on {}", pn, pi.type));
    };
    const std::string& t = pi.type;
    if (t.starts_with("LUT")) {
      unsigned k = static_cast<unsigned>(t[3] - '0');
      check_params({"INIT"});
      const Token* init = param("INIT");
      if (!init) throw ParseError(pi.line, pi.col, fmt::format("{} '{}' has no INIT", t, pi.name));
      unsigned want = init_width(k);
      if (init->lit_width >= 0 && static_cast<unsigned>(init->lit_width) != want)
        throw ParseError(init->line, init->col,
                         fmt::format("INIT width mismatch on '{}': {} needs {} bits, got {}", pi.name, t, want,
                                     init->lit_width));
      if (init->lit_value & ~width_mask(want))
        throw ParseError(init->line, init->col, fmt::format("INIT of '{}' does not fit in {} bits", pi.name, want));
      c.kind = CellKind::Lut;
      c.init = init->lit_value;
      for (unsigned i = 0; i < k; ++i) c.inputs.push_back(pin(fmt::format("I{}", i)));
      c.output = pin("O");
    } else if (t == "BUF" || t == "INV") {
      check_params({});
      c.kind = CellKind::Lut;
      c.init = t == "BUF" ? 0b10 : 0b01;
      c.inputs.push_back(pin("I"));
      c.output = pin("O");
    } else if (t == "MUX2") {
      check_params({});
      c.kind = CellKind::Lut;
      c.init = 0xCA; // O = S ? I1 : I0 with address (I0, I1, S)
      c.inputs.push_back(pin("I0"));
      c.inputs.push_back(pin("I1"));
      c.inputs.push_back(pin("S"));
      c.output = pin("O");
    } else if (t == "CONST0" || t == "CONST1") {
      check_params({});
      c.kind = t == "CONST0" ? CellKind::Const0 : CellKind::Const1;
      c.output = pin("O");
    } else if (t == "GND" || t == "VCC") {
      check_params({});
      c.kind = t == "GND" ? CellKind::Const0 : CellKind::Const1;
      c.output = pin(t == "GND" ? "G" : "P");
    } else { // DFF
      check_params({"RESET_VALUE"});
      c.kind = CellKind::Dff;
      c.clock = pin("C");
      c.data = pin("D");
      c.output = pin("Q");
      if (conns.contains("R")) c.reset = pin("R");
      if (const Token* rv = param("RESET_VALUE")) {
        if (rv->lit_value > 1) throw ParseError(rv->line, rv->col, "RESET_VALUE must be 0 or 1");
        c.reset_value = rv->lit_value == 1;
      }
    }
    if (!conns.empty())
      throw ParseError(pi.line, pi.col, fmt::format("{} has no pin '{}'", pi.type, conns.begin()->first));
    if (c.output.is_const())
      throw ParseError(pi.line, pi.col, fmt::format("output of '{}' is tied to a constant", pi.name));
    return c;
  }

  std::string select_top(const Netlist& n, const std::vector<PendingModule>&) {
    if (n.modules.empty()) throw ParseError(1, 1, "no module found");
    if (!opts_.top.empty()) {
      if (!n.modules.contains(opts_.top)) throw ParseError(1, 1, fmt::format("top module '{}' not found", opts_.top));
      return opts_.top;
    }
    std::set<std::string> instantiated;
    for (const auto& [name, m] : n.modules)
      for (const auto& i : m.instances) instantiated.insert(i.module);
    std::vector<std::string> roots;
    for (const auto& [name, m] : n.modules)
      if (!instantiated.contains(name)) roots.push_back(name);
    if (roots.size() == 1) return roots[0];
    if (roots.empty()) throw ParseError(1, 1, "no top module: every module is instantiated (recursive hierarchy)");
    throw ParseError(1, 1, fmt::format("ambiguous top module ({} candidates); specify one", roots.size()));
  }

  Lexer lex_;
  ParseOptions opts_;
  Token tok_;
  Token prev_;
  std::set<std::string> names_;
};

} // namespace

Netlist parse_netlist(std::string_view text, const ParseOptions& opts) {
  Parser p(text, opts);
  Netlist n = p.run();
  if (opts.strict) {
    auto diags = validate(n);
    if (!diags.empty()) {
      const auto& d = diags.front();
      if (d.line > 0) throw ParseError(d.line, 1, fmt::format("{}: {}", to_string(d.kind), d.message));
      throw Error(fmt::format("invalid netlist ({}): {}", to_string(d.kind), d.message));
    }
  }
  return n;
}

} // namespace lutscope
