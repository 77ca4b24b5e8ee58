// Copyright 2026 The chainsim authors
// SPDX-License-Identifier: Apache-2.0

#include "chainsim/oracle.hpp"

#include <cmath>
#include <cstring>
#include <deque>

#include "chainsim/machine.hpp"

namespace chainsim {

namespace {

struct Interp {
  const Program& program;
  OracleResult out;
  bool log_stores;

  std::array<uint64_t, 32> x{};
  std::array<double, 32> f{};
  std::array<std::deque<double>, 32> fifo;
  uint32_t chain_mask = 0;
  uint64_t ssr_enable = 0;
  std::vector<StreamCursor> streams;
  int32_t pc = 0;
  bool stop = false;

  explicit Interp(const Program& p, const OracleOptions& opts) : program(p) {
    log_stores = opts.log_stores;
    out.mem = initial_memory(p, opts.mem_size);
    for (const StreamerConfig& cfg : p.streamers) {
      StreamCursor c;
      c.cfg = cfg;
      streams.push_back(c);
    }
    pc = p.entry;
  }

  void fault(const std::string& reason) {
    out.faulted = true;
    out.fault_reason = reason;
    stop = true;
  }

  StreamCursor* stream_for(FReg r, StreamDir dir) {
    if (!(ssr_enable & 1)) return nullptr;
    for (StreamCursor& c : streams)
      if (c.cfg.reg == r && c.cfg.direction == dir) return &c;
    return nullptr;
  }

  bool chained(FReg r) {
    if (!((chain_mask >> r.index) & 1u)) return false;
    return !stream_for(r, StreamDir::Read) && !stream_for(r, StreamDir::Write);
  }

  bool mem_ok(uint64_t addr) const { return addr % 8 == 0 && addr + 8 <= out.mem.size(); }

  double load(uint64_t addr) {
    double v;
    std::memcpy(&v, out.mem.data() + addr, 8);
    return v;
  }
  void store(uint64_t addr, double v) {
    std::memcpy(out.mem.data() + addr, &v, 8);
    if (log_stores) out.stores.emplace_back(addr, v);
  }

  double read_f(FReg r) {
    if (StreamCursor* cur = stream_for(r, StreamDir::Read)) {
      if (cur->exhausted()) {
        fault("read stream exhausted");
        return 0.0;
      }
      uint64_t addr = cur->address();
      if (!mem_ok(addr)) {
        fault("stream access out of range");
        return 0.0;
      }
      double v = load(addr);
      cur->advance();
      return v;
    }
    if (chained(r)) {
      auto& q = fifo[r.index];
      if (q.empty()) {
        fault("fifo pop from empty " + freg_name(r));
        return 0.0;
      }
      double v = q.front();
      q.pop_front();
      f[r.index] = v;  // the head register keeps the last popped value
      return v;
    }
    return f[r.index];
  }

  void write_f(FReg r, double v) {
    if (StreamCursor* cur = stream_for(r, StreamDir::Write)) {
      if (cur->exhausted()) {
        fault("write stream exhausted");
        return;
      }
      uint64_t addr = cur->address();
      if (!mem_ok(addr)) {
        fault("stream access out of range");
        return;
      }
      store(addr, v);
      cur->advance();
      return;
    }
    if (chained(r)) {
      fifo[r.index].push_back(v);
      return;
    }
    f[r.index] = v;
  }

  void write_x(XReg r, uint64_t v) {
    if (r.index != 0) x[r.index] = v;
  }

  // Executes one instruction; returns false when control leaves it (branch).
  void exec(const Instr& i) {
    switch (i.op) {
      case Op::FAddD: {
        double a = read_f(i.frs1), b = read_f(i.frs2);
        if (!stop) write_f(i.frd, a + b);
        break;
      }
      case Op::FSubD: {
        double a = read_f(i.frs1), b = read_f(i.frs2);
        if (!stop) write_f(i.frd, a - b);
        break;
      }
      case Op::FMulD: {
        double a = read_f(i.frs1), b = read_f(i.frs2);
        if (!stop) write_f(i.frd, a * b);
        break;
      }
      case Op::FMaddD: {
        double a = read_f(i.frs1), b = read_f(i.frs2), c = read_f(i.frs3);
        if (!stop) write_f(i.frd, std::fma(a, b, c));
        break;
      }
      case Op::FMvD: {
        double a = read_f(i.frs1);
        if (!stop) write_f(i.frd, a);
        break;
      }
      case Op::Fld: {
        uint64_t addr = x[i.rs1.index] + static_cast<uint64_t>(i.imm);
        if (!mem_ok(addr)) {
          fault("fld access out of range");
          break;
        }
        write_f(i.frd, load(addr));
        break;
      }
      case Op::Fsd: {
        double v = read_f(i.frs1);
        if (stop) break;
        uint64_t addr = x[i.rs1.index] + static_cast<uint64_t>(i.imm);
        if (!mem_ok(addr)) {
          fault("fsd access out of range");
          break;
        }
        store(addr, v);
        break;
      }
      case Op::Addi: write_x(i.rd, x[i.rs1.index] + static_cast<uint64_t>(i.imm)); break;
      case Op::Add: write_x(i.rd, x[i.rs1.index] + x[i.rs2.index]); break;
      case Op::Sub: write_x(i.rd, x[i.rs1.index] - x[i.rs2.index]); break;
      case Op::Li: write_x(i.rd, static_cast<uint64_t>(i.imm)); break;
      case Op::CsrRw:
      case Op::CsrRs:
      case Op::CsrRc: {
        uint64_t old = 0;
        StreamCursor* stream = nullptr;
        if (i.csr == csr::kChainMask) {
          old = chain_mask;
        } else if (i.csr == csr::kSsrEnable) {
          old = ssr_enable;
        } else if (i.csr >= csr::kSsrBase0 && i.csr < csr::kSsrBase0 + 32) {
          int idx = static_cast<int>(i.csr - csr::kSsrBase0);
          for (StreamCursor& c : streams)
            if (c.cfg.index == idx) stream = &c;
          if (!stream) {
            fault("csr maps no configured streamer");
            break;
          }
          old = stream->cfg.base;
        } else {
          fault("unknown csr");
          break;
        }
        bool write = i.op == Op::CsrRw || i.rs1.index != 0;
        uint64_t rsval = x[i.rs1.index];
        uint64_t next = i.op == Op::CsrRw ? rsval
                        : i.op == Op::CsrRs ? (old | rsval)
                                            : (old & ~rsval);
        if (write) {
          if (i.csr == csr::kChainMask) {
            uint32_t cleared = static_cast<uint32_t>(old) & ~static_cast<uint32_t>(next);
            for (int b = 0; b < 32; ++b) {
              if (((cleared >> b) & 1u) && !fifo[b].empty()) {
                fault("chain drain violation");
                return;
              }
            }
            chain_mask = static_cast<uint32_t>(next);
          } else if (i.csr == csr::kSsrEnable) {
            ssr_enable = next;
          } else {
            stream->rebase(next);
          }
        }
        write_x(i.rd, old);
        break;
      }
      default:
        break;
    }
  }

  void run(uint64_t max_steps) {
    const int32_t n = static_cast<int32_t>(program.instrs.size());
    uint64_t steps = 0;
    while (!stop) {
      if (++steps > max_steps) {
        fault("oracle step limit exceeded");
        return;
      }
      if (pc < 0 || pc >= n) {
        fault("control ran past the end of the program");
        return;
      }
      const Instr& i = program.instrs[pc];
      switch (i.op) {
        case Op::Bne:
          pc = (x[i.rs1.index] != x[i.rs2.index]) ? i.target : pc + 1;
          break;
        case Op::Beq:
          pc = (x[i.rs1.index] == x[i.rs2.index]) ? i.target : pc + 1;
          break;
        case Op::Blt:
          pc = (static_cast<int64_t>(x[i.rs1.index]) < static_cast<int64_t>(x[i.rs2.index]))
                   ? i.target
                   : pc + 1;
          break;
        case Op::Jump:
          pc = i.target;
          break;
        case Op::HwLoop: {
          uint64_t iters = i.iter_is_reg ? x[i.rs1.index] : static_cast<uint64_t>(i.imm2);
          int32_t start = pc + 1;
          int32_t len = static_cast<int32_t>(i.imm);
          for (uint64_t it = 0; it < iters && !stop; ++it) {
            for (int32_t k = 0; k < len && !stop; ++k) {
              if (++steps > max_steps) {
                fault("oracle step limit exceeded");
                return;
              }
              exec(program.instrs[start + k]);
            }
          }
          pc = start + len;
          break;
        }
        case Op::RoiBegin:
        case Op::RoiEnd:
          ++pc;
          break;
        case Op::Halt:
          out.halted = true;
          return;
        default:
          exec(i);
          ++pc;
          break;
      }
    }
  }
};

}  // namespace

OracleResult functional_reference(const Program& program, const OracleOptions& opts) {
  Interp interp(program, opts);
  interp.run(opts.max_steps);
  return std::move(interp.out);
}

}  // namespace chainsim
