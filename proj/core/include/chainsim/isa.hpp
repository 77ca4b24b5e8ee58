// Copyright 2026 The chainsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace chainsim {

/// Architectural FP register f0..f31. ABI aliases (ft0..ft11, fa0..fa7,
/// fs0..fs11) normalize onto the flat index at parse time.
struct FReg {
  uint8_t index = 0;

  constexpr FReg() = default;
  constexpr explicit FReg(uint8_t i) : index(i) {}

  friend constexpr bool operator==(FReg a, FReg b) { return a.index == b.index; }
  friend constexpr bool operator!=(FReg a, FReg b) { return a.index != b.index; }
};

/// Integer register x0..x31; writes to x0 are discarded, reads yield zero.
struct XReg {
  uint8_t index = 0;

  constexpr XReg() = default;
  constexpr explicit XReg(uint8_t i) : index(i) {}

  friend constexpr bool operator==(XReg a, XReg b) { return a.index == b.index; }
  friend constexpr bool operator!=(XReg a, XReg b) { return a.index != b.index; }
};

namespace csr {
// Chaining mask: bit i gives f_i FIFO semantics while set.
inline constexpr uint32_t kChainMask = 0x7C3;
// Global stream enable, bit 0. Simulator convention; the streams themselves
// come from the program's stream descriptors.
inline constexpr uint32_t kSsrEnable = 0x7C0;
// Per-streamer base address; a write also rewinds the stream cursor.
// kSsrBase0 + i addresses streamer i.
inline constexpr uint32_t kSsrBase0 = 0x7D0;
}  // namespace csr

enum class Op : uint8_t {
  FAddD,
  FSubD,
  FMulD,
  FMaddD,
  FMvD,
  Fld,
  Fsd,
  Addi,
  Add,
  Sub,
  Li,
  Bne,
  Beq,
  Blt,
  Jump,
  CsrRw,
  CsrRs,
  CsrRc,
  HwLoop,
  RoiBegin,
  RoiEnd,
  Halt,
};

/// One decoded instruction. Flat form: only the fields implied by `op` are
/// meaningful. Branch/jump targets are resolved instruction indices.
struct Instr {
  Op op = Op::Halt;
  FReg frd{}, frs1{}, frs2{}, frs3{};
  XReg rd{}, rs1{}, rs2{};
  int64_t imm = 0;       // addi/li immediate, fld/fsd offset, hwloop body length
  uint32_t csr = 0;      // csr address
  int32_t target = 0;    // branch/jump target (instruction index)
  bool iter_is_reg = false;  // hwloop: iteration count in rs1 instead of imm2
  int64_t imm2 = 0;      // hwloop immediate iteration count

  static Instr fadd_d(FReg rd, FReg a, FReg b) { return fp3(Op::FAddD, rd, a, b); }
  static Instr fsub_d(FReg rd, FReg a, FReg b) { return fp3(Op::FSubD, rd, a, b); }
  static Instr fmul_d(FReg rd, FReg a, FReg b) { return fp3(Op::FMulD, rd, a, b); }
  static Instr fmadd_d(FReg rd, FReg a, FReg b, FReg c) {
    Instr i = fp3(Op::FMaddD, rd, a, b);
    i.frs3 = c;
    return i;
  }
  static Instr fmv_d(FReg rd, FReg a) {
    Instr i;
    i.op = Op::FMvD;
    i.frd = rd;
    i.frs1 = a;
    return i;
  }
  static Instr fld(FReg rd, int64_t offset, XReg base) {
    Instr i;
    i.op = Op::Fld;
    i.frd = rd;
    i.imm = offset;
    i.rs1 = base;
    return i;
  }
  static Instr fsd(FReg rs, int64_t offset, XReg base) {
    Instr i;
    i.op = Op::Fsd;
    i.frs1 = rs;
    i.imm = offset;
    i.rs1 = base;
    return i;
  }
  static Instr addi(XReg rd, XReg rs, int64_t imm) {
    Instr i;
    i.op = Op::Addi;
    i.rd = rd;
    i.rs1 = rs;
    i.imm = imm;
    return i;
  }
  static Instr add(XReg rd, XReg a, XReg b) { return int3(Op::Add, rd, a, b); }
  static Instr sub(XReg rd, XReg a, XReg b) { return int3(Op::Sub, rd, a, b); }
  static Instr li(XReg rd, int64_t imm) {
    Instr i;
    i.op = Op::Li;
    i.rd = rd;
    i.imm = imm;
    return i;
  }
  static Instr bne(XReg a, XReg b, int32_t target) { return branch(Op::Bne, a, b, target); }
  static Instr beq(XReg a, XReg b, int32_t target) { return branch(Op::Beq, a, b, target); }
  static Instr blt(XReg a, XReg b, int32_t target) { return branch(Op::Blt, a, b, target); }
  static Instr jump(int32_t target) {
    Instr i;
    i.op = Op::Jump;
    i.target = target;
    return i;
  }
  static Instr csrrw(XReg rd, uint32_t csr, XReg rs) { return csrop(Op::CsrRw, rd, csr, rs); }
  static Instr csrrs(XReg rd, uint32_t csr, XReg rs) { return csrop(Op::CsrRs, rd, csr, rs); }
  static Instr csrrc(XReg rd, uint32_t csr, XReg rs) { return csrop(Op::CsrRc, rd, csr, rs); }
  static Instr hwloop_reg(XReg n_iter, int64_t n_instr) {
    Instr i;
    i.op = Op::HwLoop;
    i.rs1 = n_iter;
    i.iter_is_reg = true;
    i.imm = n_instr;
    return i;
  }
  static Instr hwloop_imm(int64_t n_iter, int64_t n_instr) {
    Instr i;
    i.op = Op::HwLoop;
    i.imm2 = n_iter;
    i.iter_is_reg = false;
    i.imm = n_instr;
    return i;
  }
  static Instr roi_begin() { return plain(Op::RoiBegin); }
  static Instr roi_end() { return plain(Op::RoiEnd); }
  static Instr halt() { return plain(Op::Halt); }

 private:
  static Instr fp3(Op op, FReg rd, FReg a, FReg b) {
    Instr i;
    i.op = op;
    i.frd = rd;
    i.frs1 = a;
    i.frs2 = b;
    return i;
  }
  static Instr int3(Op op, XReg rd, XReg a, XReg b) {
    Instr i;
    i.op = op;
    i.rd = rd;
    i.rs1 = a;
    i.rs2 = b;
    return i;
  }
  static Instr branch(Op op, XReg a, XReg b, int32_t target) {
    Instr i;
    i.op = op;
    i.rs1 = a;
    i.rs2 = b;
    i.target = target;
    return i;
  }
  static Instr csrop(Op op, XReg rd, uint32_t csr, XReg rs) {
    Instr i;
    i.op = op;
    i.rd = rd;
    i.csr = csr;
    i.rs1 = rs;
    return i;
  }
  static Instr plain(Op op) {
    Instr i;
    i.op = op;
    return i;
  }
};

enum class InstrClass : uint8_t { FpCompute, FpMem, Int, Control, Meta };

InstrClass classify(const Instr& instr);

/// FP source registers in operand order (rs1, rs2, rs3).
std::vector<FReg> fp_reads(const Instr& instr);

/// FP destination, at most one (single writeback port).
std::optional<FReg> fp_writes(const Instr& instr);

/// 32-bit chaining mask; bit i enables FIFO semantics on f_i.
struct ChainMask {
  uint32_t bits = 0;

  constexpr bool enabled(FReg r) const { return (bits >> r.index) & 1u; }
  constexpr void set(FReg r) { bits |= 1u << r.index; }
  constexpr void clear(FReg r) { bits &= ~(1u << r.index); }

  friend constexpr bool operator==(ChainMask a, ChainMask b) { return a.bits == b.bits; }
};

/// Canonical ABI name for an FP register (f3 -> "ft3").
std::string freg_name(FReg r);
/// Canonical name for an integer register ("x5").
std::string xreg_name(XReg r);
/// Parse an FP register name in any accepted alias form; nullopt if unknown.
std::optional<FReg> parse_freg(const std::string& name);
std::optional<XReg> parse_xreg(const std::string& name);

}  // namespace chainsim
