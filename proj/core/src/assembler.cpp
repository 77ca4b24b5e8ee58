// Copyright 2026 The chainsim authors
// SPDX-License-Identifier: Apache-2.0

#include "chainsim/assembler.hpp"

#include <cctype>
#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <map>
#include <optional>
#include <sstream>

namespace chainsim {

namespace {

struct Token {
  std::string text;
  int column = 0;  // 1-based
};

// Splits an instruction line into mnemonic and comma-separated operands.
// Comments (# and //) and the trailing newline are already stripped.
struct LineScanner {
  const std::string& line;
  size_t pos = 0;

  explicit LineScanner(const std::string& l) : line(l) {}

  void skip_ws() {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
  }
  bool at_end() {
    skip_ws();
    return pos >= line.size();
  }
  // A token runs to the next comma or whitespace; parentheses and brackets
  // glue memory operands like 8(x5) and lists like [4,2] together.
  Token next_token() {
    skip_ws();
    Token t;
    t.column = static_cast<int>(pos) + 1;
    int depth = 0;
    while (pos < line.size()) {
      char c = line[pos];
      if (depth == 0 && (c == ',' || c == ' ' || c == '\t')) break;
      if (c == '(' || c == '[') ++depth;
      if (c == ')' || c == ']') --depth;
      t.text += c;
      ++pos;
    }
    return t;
  }
  bool consume_comma() {
    skip_ws();
    if (pos < line.size() && line[pos] == ',') {
      ++pos;
      return true;
    }
    return false;
  }
};

std::string strip_comment(const std::string& line) {
  size_t hash = line.find('#');
  size_t slashes = line.find("//");
  size_t cut = std::min(hash == std::string::npos ? line.size() : hash,
                        slashes == std::string::npos ? line.size() : slashes);
  return line.substr(0, cut);
}

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}
bool is_ident(const std::string& s) {
  if (s.empty() || !is_ident_start(s[0])) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.') return false;
  return true;
}

std::optional<int64_t> parse_int(const std::string& s) {
  if (s.empty()) return std::nullopt;
  bool neg = s[0] == '-';
  size_t start = neg ? 1 : 0;
  int base = 10;
  if (s.size() > start + 2 && s[start] == '0' && (s[start + 1] == 'x' || s[start + 1] == 'X')) {
    base = 16;
    start += 2;
  }
  if (start >= s.size()) return std::nullopt;
  uint64_t mag = 0;
  auto [ptr, ec] = std::from_chars(s.data() + start, s.data() + s.size(), mag, base);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  int64_t v = static_cast<int64_t>(mag);
  return neg ? -v : v;
}

std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return std::nullopt;
  return v;
}

// Symbolic CSR names accepted next to numeric addresses.
std::optional<uint32_t> parse_csr(const std::string& s) {
  if (s == "chain_mask") return csr::kChainMask;
  if (s == "ssr_enable") return csr::kSsrEnable;
  if (s == "ssr_base_0") return csr::kSsrBase0;
  if (s == "ssr_base_1") return csr::kSsrBase0 + 1;
  if (s == "ssr_base_2") return csr::kSsrBase0 + 2;
  auto v = parse_int(s);
  if (v && *v >= 0 && *v < 0x1000) return static_cast<uint32_t>(*v);
  return std::nullopt;
}

struct PendingBranch {
  int32_t instr_index;
  std::string label;
  int line;
  int column;
};

struct Parser {
  std::vector<Diagnostic> diags;
  Program program;
  std::vector<PendingBranch> pending;
  int line_no = 0;

  void error(DiagKind kind, int column, const std::string& msg) {
    diags.push_back({line_no, column, kind, msg});
  }

  std::optional<FReg> want_freg(const Token& t) {
    auto r = parse_freg(t.text);
    if (!r) error(DiagKind::BadRegister, t.column, "bad FP register '" + t.text + "'");
    return r;
  }
  std::optional<XReg> want_xreg(const Token& t) {
    auto r = parse_xreg(t.text);
    if (!r) error(DiagKind::BadRegister, t.column, "bad integer register '" + t.text + "'");
    return r;
  }
  std::optional<int64_t> want_imm(const Token& t) {
    auto v = parse_int(t.text);
    if (!v) error(DiagKind::BadImmediate, t.column, "bad immediate '" + t.text + "'");
    return v;
  }
  // offset(xreg)
  std::optional<std::pair<int64_t, XReg>> want_mem(const Token& t) {
    size_t open = t.text.find('(');
    if (open == std::string::npos || t.text.back() != ')') {
      error(DiagKind::BadImmediate, t.column, "expected offset(reg), got '" + t.text + "'");
      return std::nullopt;
    }
    auto off = parse_int(t.text.substr(0, open));
    if (open == 0) off = 0;  // (x5) means 0(x5)
    auto reg = parse_xreg(t.text.substr(open + 1, t.text.size() - open - 2));
    if (!off) {
      error(DiagKind::BadImmediate, t.column, "bad offset in '" + t.text + "'");
      return std::nullopt;
    }
    if (!reg) {
      error(DiagKind::BadRegister, t.column, "bad base register in '" + t.text + "'");
      return std::nullopt;
    }
    return std::make_pair(*off, *reg);
  }
  void want_label(const Token& t) {
    if (!is_ident(t.text) && !parse_int(t.text)) {
      error(DiagKind::UnresolvedLabel, t.column, "bad branch target '" + t.text + "'");
      return;
    }
    pending.push_back({static_cast<int32_t>(program.instrs.size()), t.text, line_no, t.column});
  }

  std::vector<Token> gather_operands(LineScanner& sc, int expected, const std::string& mnemonic) {
    std::vector<Token> ops;
    while (!sc.at_end()) {
      ops.push_back(sc.next_token());
      if (!sc.consume_comma()) break;
    }
    if (static_cast<int>(ops.size()) != expected) {
      error(DiagKind::BadImmediate, ops.empty() ? 1 : ops[0].column,
            mnemonic + " expects " + std::to_string(expected) + " operands, got " +
                std::to_string(ops.size()));
      return {};
    }
    return ops;
  }

  void parse_instr(const std::string& mnemonic, int mcol, LineScanner& sc) {
    auto fp3 = [&](Instr (*make)(FReg, FReg, FReg)) {
      auto ops = gather_operands(sc, 3, mnemonic);
      if (ops.empty()) return;
      auto rd = want_freg(ops[0]), a = want_freg(ops[1]), b = want_freg(ops[2]);
      if (rd && a && b) program.instrs.push_back(make(*rd, *a, *b));
    };
    auto branch = [&](Instr (*make)(XReg, XReg, int32_t)) {
      auto ops = gather_operands(sc, 3, mnemonic);
      if (ops.empty()) return;
      auto a = want_xreg(ops[0]), b = want_xreg(ops[1]);
      if (a && b) {
        want_label(ops[2]);
        program.instrs.push_back(make(*a, *b, -1));
      }
    };

    if (mnemonic == "fadd.d") { fp3(&Instr::fadd_d); return; }
    if (mnemonic == "fsub.d") { fp3(&Instr::fsub_d); return; }
    if (mnemonic == "fmul.d") { fp3(&Instr::fmul_d); return; }
    if (mnemonic == "fmadd.d") {
      auto ops = gather_operands(sc, 4, mnemonic);
      if (ops.empty()) return;
      auto rd = want_freg(ops[0]), a = want_freg(ops[1]), b = want_freg(ops[2]), c = want_freg(ops[3]);
      if (rd && a && b && c) program.instrs.push_back(Instr::fmadd_d(*rd, *a, *b, *c));
      return;
    }
    if (mnemonic == "fmv.d") {
      auto ops = gather_operands(sc, 2, mnemonic);
      if (ops.empty()) return;
      auto rd = want_freg(ops[0]), a = want_freg(ops[1]);
      if (rd && a) program.instrs.push_back(Instr::fmv_d(*rd, *a));
      return;
    }
    if (mnemonic == "fld" || mnemonic == "fsd") {
      auto ops = gather_operands(sc, 2, mnemonic);
      if (ops.empty()) return;
      auto r = want_freg(ops[0]);
      auto mem = want_mem(ops[1]);
      if (r && mem) {
        program.instrs.push_back(mnemonic == "fld" ? Instr::fld(*r, mem->first, mem->second)
                                                   : Instr::fsd(*r, mem->first, mem->second));
      }
      return;
    }
    if (mnemonic == "addi") {
      auto ops = gather_operands(sc, 3, mnemonic);
      if (ops.empty()) return;
      auto rd = want_xreg(ops[0]), rs = want_xreg(ops[1]);
      auto imm = want_imm(ops[2]);
      if (rd && rs && imm) program.instrs.push_back(Instr::addi(*rd, *rs, *imm));
      return;
    }
    if (mnemonic == "add" || mnemonic == "sub") {
      auto ops = gather_operands(sc, 3, mnemonic);
      if (ops.empty()) return;
      auto rd = want_xreg(ops[0]), a = want_xreg(ops[1]), b = want_xreg(ops[2]);
      if (rd && a && b)
        program.instrs.push_back(mnemonic == "add" ? Instr::add(*rd, *a, *b)
                                                   : Instr::sub(*rd, *a, *b));
      return;
    }
    if (mnemonic == "li") {
      auto ops = gather_operands(sc, 2, mnemonic);
      if (ops.empty()) return;
      auto rd = want_xreg(ops[0]);
      auto imm = want_imm(ops[1]);
      if (rd && imm) program.instrs.push_back(Instr::li(*rd, *imm));
      return;
    }
    if (mnemonic == "bne") { branch(&Instr::bne); return; }
    if (mnemonic == "beq") { branch(&Instr::beq); return; }
    if (mnemonic == "blt") { branch(&Instr::blt); return; }
    if (mnemonic == "j" || mnemonic == "jump") {
      auto ops = gather_operands(sc, 1, mnemonic);
      if (ops.empty()) return;
      want_label(ops[0]);
      program.instrs.push_back(Instr::jump(-1));
      return;
    }
    if (mnemonic == "csrrw" || mnemonic == "csrrs" || mnemonic == "csrrc") {
      auto ops = gather_operands(sc, 3, mnemonic);
      if (ops.empty()) return;
      auto rd = want_xreg(ops[0]);
      auto c = parse_csr(ops[1].text);
      if (!c) error(DiagKind::BadImmediate, ops[1].column, "bad CSR '" + ops[1].text + "'");
      auto rs = want_xreg(ops[2]);
      if (rd && c && rs) {
        if (mnemonic == "csrrw") program.instrs.push_back(Instr::csrrw(*rd, *c, *rs));
        if (mnemonic == "csrrs") program.instrs.push_back(Instr::csrrs(*rd, *c, *rs));
        if (mnemonic == "csrrc") program.instrs.push_back(Instr::csrrc(*rd, *c, *rs));
      }
      return;
    }
    // csrw/csrs/csrc csr, rs  ==  csrr{w,s,c} x0, csr, rs
    if (mnemonic == "csrw" || mnemonic == "csrs" || mnemonic == "csrc") {
      auto ops = gather_operands(sc, 2, mnemonic);
      if (ops.empty()) return;
      auto c = parse_csr(ops[0].text);
      if (!c) error(DiagKind::BadImmediate, ops[0].column, "bad CSR '" + ops[0].text + "'");
      auto rs = want_xreg(ops[1]);
      if (c && rs) {
        if (mnemonic == "csrw") program.instrs.push_back(Instr::csrrw(XReg(0), *c, *rs));
        if (mnemonic == "csrs") program.instrs.push_back(Instr::csrrs(XReg(0), *c, *rs));
        if (mnemonic == "csrc") program.instrs.push_back(Instr::csrrc(XReg(0), *c, *rs));
      }
      return;
    }
    if (mnemonic == "hwloop") {
      auto ops = gather_operands(sc, 2, mnemonic);
      if (ops.empty()) return;
      auto n_instr = want_imm(ops[1]);
      if (!n_instr) return;
      if (auto reg = parse_xreg(ops[0].text)) {
        program.instrs.push_back(Instr::hwloop_reg(*reg, *n_instr));
        return;
      }
      auto n_iter = want_imm(ops[0]);
      if (n_iter) program.instrs.push_back(Instr::hwloop_imm(*n_iter, *n_instr));
      return;
    }
    if (mnemonic == "roi.begin") { program.instrs.push_back(Instr::roi_begin()); return; }
    if (mnemonic == "roi.end") { program.instrs.push_back(Instr::roi_end()); return; }
    if (mnemonic == "halt") { program.instrs.push_back(Instr::halt()); return; }

    error(DiagKind::UnknownMnemonic, mcol, "unknown mnemonic '" + mnemonic + "'");
  }

  // .data addr: d0, d1, ...
  void parse_data(LineScanner& sc) {
    Token addr_tok = sc.next_token();
    std::string addr_text = addr_tok.text;
    bool had_colon = false;
    if (!addr_text.empty() && addr_text.back() == ':') {
      addr_text.pop_back();
      had_colon = true;
    }
    auto addr = parse_int(addr_text);
    if (!addr || *addr < 0) {
      error(DiagKind::BadImmediate, addr_tok.column, "bad data address '" + addr_tok.text + "'");
      return;
    }
    if (!had_colon) {
      sc.skip_ws();
      if (sc.pos < sc.line.size() && sc.line[sc.pos] == ':') ++sc.pos;
    }
    DataSegment seg;
    seg.address = static_cast<uint64_t>(*addr);
    while (!sc.at_end()) {
      Token t = sc.next_token();
      auto v = parse_double(t.text);
      if (!v) {
        error(DiagKind::BadImmediate, t.column, "bad data value '" + t.text + "'");
        return;
      }
      seg.values.push_back(*v);
      if (!sc.consume_comma()) break;
    }
    program.data.push_back(std::move(seg));
  }

  // .stream idx dir=r|w base=.. dims=N bounds=[..] strides=[..] reg=ftK [repeat=M]
  void parse_stream(LineScanner& sc) {
    Token idx_tok = sc.next_token();
    auto idx = parse_int(idx_tok.text);
    if (!idx || *idx < 0 || *idx > 31) {
      error(DiagKind::BadImmediate, idx_tok.column, "bad stream index '" + idx_tok.text + "'");
      return;
    }
    StreamerConfig cfg;
    cfg.index = static_cast<int>(*idx);
    bool have_reg = false;
    while (!sc.at_end()) {
      Token t = sc.next_token();
      sc.consume_comma();
      size_t eq = t.text.find('=');
      if (eq == std::string::npos) {
        error(DiagKind::BadImmediate, t.column, "expected key=value, got '" + t.text + "'");
        return;
      }
      std::string key = t.text.substr(0, eq);
      std::string value = t.text.substr(eq + 1);
      auto parse_list = [&](std::array<uint64_t, 4>* ub, std::array<int64_t, 4>* sb) -> int {
        if (value.size() < 2 || value.front() != '[' || value.back() != ']') return -1;
        std::string inner = value.substr(1, value.size() - 2);
        std::stringstream ss(inner);
        std::string item;
        int count = 0;
        while (std::getline(ss, item, ',')) {
          auto v = parse_int(item);
          if (!v || count >= 4) return -1;
          if (ub) (*ub)[count] = static_cast<uint64_t>(*v);
          if (sb) (*sb)[count] = *v;
          ++count;
        }
        return count;
      };
      if (key == "dir") {
        if (value == "r") cfg.direction = StreamDir::Read;
        else if (value == "w") cfg.direction = StreamDir::Write;
        else { error(DiagKind::BadImmediate, t.column, "dir must be r or w"); return; }
      } else if (key == "base") {
        auto v = parse_int(value);
        if (!v || *v < 0) { error(DiagKind::BadImmediate, t.column, "bad base"); return; }
        cfg.base = static_cast<uint64_t>(*v);
      } else if (key == "dims") {
        auto v = parse_int(value);
        if (!v || *v < 1 || *v > 4) { error(DiagKind::BadImmediate, t.column, "dims must be 1..4"); return; }
        cfg.dims = static_cast<int>(*v);
      } else if (key == "bounds") {
        if (parse_list(&cfg.bounds, nullptr) < 1) {
          error(DiagKind::BadImmediate, t.column, "bad bounds list");
          return;
        }
      } else if (key == "strides") {
        if (parse_list(nullptr, &cfg.strides) < 1) {
          error(DiagKind::BadImmediate, t.column, "bad strides list");
          return;
        }
      } else if (key == "reg") {
        auto r = parse_freg(value);
        if (!r) { error(DiagKind::BadRegister, t.column, "bad stream register"); return; }
        cfg.reg = *r;
        have_reg = true;
      } else if (key == "repeat") {
        auto v = parse_int(value);
        if (!v || *v < 1) { error(DiagKind::BadImmediate, t.column, "repeat must be >= 1"); return; }
        cfg.repeat = static_cast<uint64_t>(*v);
      } else {
        error(DiagKind::BadImmediate, t.column, "unknown stream attribute '" + key + "'");
        return;
      }
    }
    if (!have_reg) {
      error(DiagKind::BadRegister, idx_tok.column, "stream descriptor missing reg=");
      return;
    }
    program.streamers.push_back(cfg);
  }
};

}  // namespace

ParseResult parse_program(const std::string& source) {
  Parser p;
  std::stringstream ss(source);
  std::string raw;
  while (std::getline(ss, raw)) {
    ++p.line_no;
    std::string line = strip_comment(raw);
    LineScanner sc(line);
    if (sc.at_end()) continue;

    // Optional leading label.
    size_t save = sc.pos;
    Token first = sc.next_token();
    if (!first.text.empty() && first.text.back() == ':' && first.text[0] != '.') {
      std::string label = first.text.substr(0, first.text.size() - 1);
      if (!is_ident(label)) {
        p.error(DiagKind::UnresolvedLabel, first.column, "bad label '" + label + "'");
        continue;
      }
      if (p.program.labels.count(label)) {
        p.error(DiagKind::DuplicateLabel, first.column, "duplicate label '" + label + "'");
      } else {
        p.program.labels[label] = static_cast<int32_t>(p.program.instrs.size());
      }
      if (sc.at_end()) continue;
      save = sc.pos;
      first = sc.next_token();
    }

    if (first.text == ".data") {
      p.parse_data(sc);
      continue;
    }
    if (first.text == ".stream") {
      p.parse_stream(sc);
      continue;
    }
    if (first.text == ".mem") {
      Token t = sc.next_token();
      auto v = parse_int(t.text);
      if (!v || *v < 0) p.error(DiagKind::BadImmediate, t.column, "bad memory size");
      else p.program.mem_hint = static_cast<uint64_t>(*v);
      continue;
    }
    if (!first.text.empty() && first.text[0] == '.') {
      p.error(DiagKind::UnknownMnemonic, first.column, "unknown directive '" + first.text + "'");
      continue;
    }
    (void)save;
    p.parse_instr(first.text, first.column, sc);
  }

  // Resolve branch labels; numeric targets (@n form emitted as plain numbers)
  // are accepted directly.
  for (const PendingBranch& b : p.pending) {
    int32_t target = -1;
    auto it = p.program.labels.find(b.label);
    if (it != p.program.labels.end()) {
      target = it->second;
    } else if (auto v = parse_int(b.label)) {
      target = static_cast<int32_t>(*v);
    }
    if (target < 0 || target > static_cast<int32_t>(p.program.instrs.size())) {
      p.diags.push_back({b.line, b.column, DiagKind::UnresolvedLabel,
                         "unresolved branch target '" + b.label + "'"});
      continue;
    }
    p.program.instrs[b.instr_index].target = target;
  }

  if (!p.diags.empty()) return p.diags;

  auto vdiags = validate_program(p.program);
  if (!vdiags.empty()) return vdiags;
  return std::move(p.program);
}

namespace {

std::string format_double(double v) {
  char buf[48];
  // Hex float keeps round trips bit-exact.
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

std::string csr_text(uint32_t c) {
  if (c == csr::kChainMask) return "chain_mask";
  if (c == csr::kSsrEnable) return "ssr_enable";
  if (c >= csr::kSsrBase0 && c < csr::kSsrBase0 + 3)
    return "ssr_base_" + std::to_string(c - csr::kSsrBase0);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "0x%X", c);
  return buf;
}

}  // namespace

std::string instr_text(const Instr& i, const Program* program) {
  auto f = [](FReg r) { return freg_name(r); };
  auto x = [](XReg r) { return xreg_name(r); };
  auto tgt = [&](int32_t t) -> std::string {
    if (program) {
      for (const auto& [name, idx] : program->labels)
        if (idx == t) return name;
    }
    return std::to_string(t);
  };
  switch (i.op) {
    case Op::FAddD: return "fadd.d " + f(i.frd) + ", " + f(i.frs1) + ", " + f(i.frs2);
    case Op::FSubD: return "fsub.d " + f(i.frd) + ", " + f(i.frs1) + ", " + f(i.frs2);
    case Op::FMulD: return "fmul.d " + f(i.frd) + ", " + f(i.frs1) + ", " + f(i.frs2);
    case Op::FMaddD:
      return "fmadd.d " + f(i.frd) + ", " + f(i.frs1) + ", " + f(i.frs2) + ", " + f(i.frs3);
    case Op::FMvD: return "fmv.d " + f(i.frd) + ", " + f(i.frs1);
    case Op::Fld: return "fld " + f(i.frd) + ", " + std::to_string(i.imm) + "(" + x(i.rs1) + ")";
    case Op::Fsd: return "fsd " + f(i.frs1) + ", " + std::to_string(i.imm) + "(" + x(i.rs1) + ")";
    case Op::Addi: return "addi " + x(i.rd) + ", " + x(i.rs1) + ", " + std::to_string(i.imm);
    case Op::Add: return "add " + x(i.rd) + ", " + x(i.rs1) + ", " + x(i.rs2);
    case Op::Sub: return "sub " + x(i.rd) + ", " + x(i.rs1) + ", " + x(i.rs2);
    case Op::Li: return "li " + x(i.rd) + ", " + std::to_string(i.imm);
    case Op::Bne: return "bne " + x(i.rs1) + ", " + x(i.rs2) + ", " + tgt(i.target);
    case Op::Beq: return "beq " + x(i.rs1) + ", " + x(i.rs2) + ", " + tgt(i.target);
    case Op::Blt: return "blt " + x(i.rs1) + ", " + x(i.rs2) + ", " + tgt(i.target);
    case Op::Jump: return "j " + tgt(i.target);
    case Op::CsrRw:
      if (i.rd.index == 0) return "csrw " + csr_text(i.csr) + ", " + x(i.rs1);
      return "csrrw " + x(i.rd) + ", " + csr_text(i.csr) + ", " + x(i.rs1);
    case Op::CsrRs:
      if (i.rd.index == 0) return "csrs " + csr_text(i.csr) + ", " + x(i.rs1);
      return "csrrs " + x(i.rd) + ", " + csr_text(i.csr) + ", " + x(i.rs1);
    case Op::CsrRc:
      if (i.rd.index == 0) return "csrc " + csr_text(i.csr) + ", " + x(i.rs1);
      return "csrrc " + x(i.rd) + ", " + csr_text(i.csr) + ", " + x(i.rs1);
    case Op::HwLoop:
      return "hwloop " + (i.iter_is_reg ? x(i.rs1) : std::to_string(i.imm2)) + ", " +
             std::to_string(i.imm);
    case Op::RoiBegin: return "roi.begin";
    case Op::RoiEnd: return "roi.end";
    case Op::Halt: return "halt";
  }
  return "?";
}

std::string emit_text(const Program& program) {
  std::string out;
  char buf[64];

  if (program.mem_hint) {
    std::snprintf(buf, sizeof(buf), ".mem 0x%" PRIX64 "\n", program.mem_hint);
    out += buf;
  }
  for (const StreamerConfig& s : program.streamers) {
    std::string bounds, strides;
    for (int d = 0; d < s.dims; ++d) {
      if (d) {
        bounds += ",";
        strides += ",";
      }
      bounds += std::to_string(s.bounds[d]);
      strides += std::to_string(s.strides[d]);
    }
    std::snprintf(buf, sizeof(buf), "0x%" PRIX64, s.base);
    out += ".stream " + std::to_string(s.index) + " dir=" +
           (s.direction == StreamDir::Read ? "r" : "w") + " base=" + buf +
           " dims=" + std::to_string(s.dims) + " bounds=[" + bounds + "] strides=[" + strides +
           "] reg=" + freg_name(s.reg);
    if (s.repeat != 1) out += " repeat=" + std::to_string(s.repeat);
    out += "\n";
  }
  for (const DataSegment& seg : program.data) {
    std::snprintf(buf, sizeof(buf), "0x%" PRIX64, seg.address);
    out += ".data ";
    out += buf;
    out += ":";
    for (size_t i = 0; i < seg.values.size(); ++i) {
      out += (i ? ", " : " ") + format_double(seg.values[i]);
    }
    out += "\n";
  }

  // Canonical labels at every branch target.
  std::map<int32_t, std::string> canon;
  for (const Instr& i : program.instrs) {
    if (i.op == Op::Bne || i.op == Op::Beq || i.op == Op::Blt || i.op == Op::Jump)
      if (!canon.count(i.target)) canon[i.target] = "";
  }
  int next = 0;
  for (auto& [idx, name] : canon) name = "L" + std::to_string(next++);

  Program relabeled = Program{};  // only labels needed by instr_text
  for (auto& [idx, name] : canon) relabeled.labels[name] = idx;

  for (int32_t idx = 0; idx < static_cast<int32_t>(program.instrs.size()); ++idx) {
    auto it = canon.find(idx);
    if (it != canon.end()) out += it->second + ":\n";
    out += "  " + instr_text(program.instrs[idx], &relabeled) + "\n";
  }
  auto tail = canon.find(static_cast<int32_t>(program.instrs.size()));
  if (tail != canon.end()) out += tail->second + ":\n";
  return out;
}

}  // namespace chainsim
