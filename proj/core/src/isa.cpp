// Copyright 2026 The chainsim authors
// SPDX-License-Identifier: Apache-2.0

#include "chainsim/isa.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "chainsim/program.hpp"

namespace chainsim {

InstrClass classify(const Instr& instr) {
  switch (instr.op) {
    case Op::FAddD:
    case Op::FSubD:
    case Op::FMulD:
    case Op::FMaddD:
    case Op::FMvD:
      return InstrClass::FpCompute;
    case Op::Fld:
    case Op::Fsd:
      return InstrClass::FpMem;
    case Op::Addi:
    case Op::Add:
    case Op::Sub:
    case Op::Li:
    case Op::CsrRw:
    case Op::CsrRs:
    case Op::CsrRc:
      return InstrClass::Int;
    case Op::Bne:
    case Op::Beq:
    case Op::Blt:
    case Op::Jump:
      return InstrClass::Control;
    case Op::HwLoop:
    case Op::RoiBegin:
    case Op::RoiEnd:
    case Op::Halt:
      return InstrClass::Meta;
  }
  return InstrClass::Meta;
}

std::vector<FReg> fp_reads(const Instr& instr) {
  switch (instr.op) {
    case Op::FAddD:
    case Op::FSubD:
    case Op::FMulD:
      return {instr.frs1, instr.frs2};
    case Op::FMaddD:
      return {instr.frs1, instr.frs2, instr.frs3};
    case Op::FMvD:
      return {instr.frs1};
    case Op::Fsd:
      return {instr.frs1};
    default:
      return {};
  }
}

std::optional<FReg> fp_writes(const Instr& instr) {
  switch (instr.op) {
    case Op::FAddD:
    case Op::FSubD:
    case Op::FMulD:
    case Op::FMaddD:
    case Op::FMvD:
    case Op::Fld:
      return instr.frd;
    default:
      return std::nullopt;
  }
}

std::string freg_name(FReg r) {
  // RISC-V FP ABI: ft0-7 = f0-7, fs0-1 = f8-9, fa0-7 = f10-17,
  // fs2-11 = f18-27, ft8-11 = f28-31.
  int i = r.index;
  if (i <= 7) return "ft" + std::to_string(i);
  if (i <= 9) return "fs" + std::to_string(i - 8);
  if (i <= 17) return "fa" + std::to_string(i - 10);
  if (i <= 27) return "fs" + std::to_string(i - 16);
  return "ft" + std::to_string(i - 20);
}

std::string xreg_name(XReg r) { return "x" + std::to_string(r.index); }

namespace {

std::optional<int> parse_reg_number(const std::string& s, size_t pos) {
  if (pos >= s.size()) return std::nullopt;
  int value = 0;
  for (size_t i = pos; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
    value = value * 10 + (s[i] - '0');
    if (value > 99) return std::nullopt;
  }
  return value;
}

}  // namespace

std::optional<FReg> parse_freg(const std::string& name) {
  if (name.size() < 2 || name[0] != 'f') return std::nullopt;
  if (std::isdigit(static_cast<unsigned char>(name[1]))) {
    auto n = parse_reg_number(name, 1);
    if (n && *n <= 31) return FReg(static_cast<uint8_t>(*n));
    return std::nullopt;
  }
  auto n = parse_reg_number(name, 2);
  if (!n) return std::nullopt;
  switch (name[1]) {
    case 't':
      if (*n <= 7) return FReg(static_cast<uint8_t>(*n));
      if (*n <= 11) return FReg(static_cast<uint8_t>(*n + 20));
      return std::nullopt;
    case 's':
      if (*n <= 1) return FReg(static_cast<uint8_t>(*n + 8));
      if (*n <= 11) return FReg(static_cast<uint8_t>(*n + 16));
      return std::nullopt;
    case 'a':
      if (*n <= 7) return FReg(static_cast<uint8_t>(*n + 10));
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

std::optional<XReg> parse_xreg(const std::string& name) {
  if (name == "zero") return XReg(0);
  if (name == "ra") return XReg(1);
  if (name == "sp") return XReg(2);
  if (name == "gp") return XReg(3);
  if (name == "tp") return XReg(4);
  if (name == "fp") return XReg(8);
  if (name.size() >= 2) {
    auto n = parse_reg_number(name, 1);
    if (n) {
      switch (name[0]) {
        case 'x':
          if (*n <= 31) return XReg(static_cast<uint8_t>(*n));
          break;
        case 't':
          if (*n <= 2) return XReg(static_cast<uint8_t>(*n + 5));
          if (*n <= 6) return XReg(static_cast<uint8_t>(*n + 25));
          break;
        case 's':
          if (*n <= 1) return XReg(static_cast<uint8_t>(*n + 8));
          if (*n <= 11) return XReg(static_cast<uint8_t>(*n + 16));
          break;
        case 'a':
          if (*n <= 7) return XReg(static_cast<uint8_t>(*n + 10));
          break;
        default:
          break;
      }
    }
  }
  return std::nullopt;
}

std::string diag_kind_name(DiagKind k) {
  switch (k) {
    case DiagKind::UnknownMnemonic: return "UnknownMnemonic";
    case DiagKind::BadRegister: return "BadRegister";
    case DiagKind::BadImmediate: return "BadImmediate";
    case DiagKind::DuplicateLabel: return "DuplicateLabel";
    case DiagKind::UnresolvedLabel: return "UnresolvedLabel";
    case DiagKind::IllegalLoopBody: return "IllegalLoopBody";
    case DiagKind::OverlappingData: return "OverlappingData";
    case DiagKind::NoHaltPath: return "NoHaltPath";
  }
  return "?";
}

std::string format_diagnostic(const Diagnostic& d) {
  return "line " + std::to_string(d.line) + ":" + std::to_string(d.column) + ": " +
         diag_kind_name(d.kind) + ": " + d.message;
}

namespace {

bool is_branch(const Instr& i) {
  return i.op == Op::Bne || i.op == Op::Beq || i.op == Op::Blt || i.op == Op::Jump;
}

}  // namespace

std::vector<Diagnostic> validate_program(const Program& program) {
  std::vector<Diagnostic> diags;
  const int32_t n = static_cast<int32_t>(program.instrs.size());
  auto report = [&](DiagKind kind, int32_t index, const std::string& msg) {
    diags.push_back({index + 1, 1, kind, msg});
  };

  // Branch targets in range.
  for (int32_t i = 0; i < n; ++i) {
    const Instr& instr = program.instrs[i];
    if (is_branch(instr) && (instr.target < 0 || instr.target > n))
      report(DiagKind::UnresolvedLabel, i,
             "branch target " + std::to_string(instr.target) + " out of range");
  }

  // Hardware loop bodies: contained, branch-free, no nested loops or meta,
  // not targeted by outside branches.
  std::vector<std::pair<int32_t, int32_t>> bodies;  // [first, last]
  for (int32_t i = 0; i < n; ++i) {
    const Instr& instr = program.instrs[i];
    if (instr.op != Op::HwLoop) continue;
    if (instr.imm < 1) {
      report(DiagKind::IllegalLoopBody, i, "loop body length must be >= 1");
      continue;
    }
    if (!instr.iter_is_reg && instr.imm2 < 1) {
      report(DiagKind::BadImmediate, i, "loop iteration count must be >= 1");
    }
    int32_t first = i + 1;
    int32_t last = i + static_cast<int32_t>(instr.imm);
    if (last >= n) {
      report(DiagKind::IllegalLoopBody, i, "loop body extends past end of program");
      continue;
    }
    bodies.emplace_back(first, last);
    for (int32_t b = first; b <= last; ++b) {
      InstrClass cls = classify(program.instrs[b]);
      if (is_branch(program.instrs[b]) || cls == InstrClass::Meta)
        report(DiagKind::IllegalLoopBody, b, "loop body may only contain FP and integer ALU instructions");
    }
  }
  for (int32_t i = 0; i < n; ++i) {
    const Instr& instr = program.instrs[i];
    if (!is_branch(instr)) continue;
    for (auto [first, last] : bodies) {
      if (instr.target >= first && instr.target <= last && (i < first - 1 || i > last))
        report(DiagKind::IllegalLoopBody, i, "branch into a hardware loop body");
    }
  }

  // Stream-mapped register references require a stream descriptor when the
  // program enables streaming anywhere.
  bool enables_streams = false;
  for (const Instr& instr : program.instrs)
    if ((instr.op == Op::CsrRw || instr.op == Op::CsrRs) && instr.csr == csr::kSsrEnable)
      enables_streams = true;
  if (enables_streams) {
    std::set<uint8_t> configured;
    int max_stream_reg = -1;
    for (const StreamerConfig& s : program.streamers) {
      configured.insert(s.reg.index);
      max_stream_reg = std::max(max_stream_reg, static_cast<int>(s.index));
    }
    // Registers f0..f2 are the conventional stream registers; reject
    // references to unconfigured ones while streaming is on.
    for (int32_t i = 0; i < n; ++i) {
      const Instr& instr = program.instrs[i];
      auto check = [&](FReg r) {
        if (r.index <= 2 && !configured.count(r.index))
          report(DiagKind::BadRegister, i,
                 freg_name(r) + " referenced with streaming enabled but no stream descriptor");
      };
      for (FReg r : fp_reads(instr)) check(r);
      if (auto w = fp_writes(instr)) check(*w);
    }
  }

  // A halt must be reachable from the entry point.
  if (n > 0) {
    std::vector<bool> seen(static_cast<size_t>(n) + 1, false);
    std::vector<int32_t> work{program.entry};
    bool halt_reachable = false;
    while (!work.empty()) {
      int32_t pc = work.back();
      work.pop_back();
      if (pc < 0 || pc >= n || seen[pc]) continue;
      seen[pc] = true;
      const Instr& instr = program.instrs[pc];
      if (instr.op == Op::Halt) {
        halt_reachable = true;
        break;
      }
      if (instr.op == Op::Jump) {
        work.push_back(instr.target);
      } else if (is_branch(instr)) {
        work.push_back(instr.target);
        work.push_back(pc + 1);
      } else if (instr.op == Op::HwLoop) {
        work.push_back(pc + 1);  // falls through the body
      } else {
        work.push_back(pc + 1);
      }
    }
    if (!halt_reachable) report(DiagKind::NoHaltPath, 0, "no halt reachable from entry");
  }

  // Data segments: 8-byte aligned, non-overlapping.
  std::vector<std::pair<uint64_t, uint64_t>> ranges;
  for (const DataSegment& seg : program.data) {
    if (seg.address % 8 != 0)
      report(DiagKind::OverlappingData, 0, "data segment not 8-byte aligned");
    ranges.emplace_back(seg.address, seg.address + 8 * seg.values.size());
  }
  std::sort(ranges.begin(), ranges.end());
  for (size_t i = 1; i < ranges.size(); ++i)
    if (ranges[i].first < ranges[i - 1].second)
      report(DiagKind::OverlappingData, 0, "data segments overlap");

  return diags;
}

}  // namespace chainsim
