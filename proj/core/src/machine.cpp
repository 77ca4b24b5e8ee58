// Copyright 2026 The chainsim authors
// SPDX-License-Identifier: Apache-2.0

#include "chainsim/machine.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstring>

namespace chainsim {

std::string stall_reason_name(StallReason r) {
  switch (r) {
    case StallReason::RawHazard: return "raw";
    case StallReason::FifoEmpty: return "fifo_empty";
    case StallReason::Backpressure: return "backpressure";
    case StallReason::MemBusy: return "mem";
    case StallReason::LoopSetup: return "loop_setup";
  }
  return "?";
}

std::string outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Halted: return "halted";
    case Outcome::Watchdog: return "watchdog";
    case Outcome::Deadlock: return "deadlock";
    case Outcome::Fault: return "fault";
  }
  return "?";
}

int MachineState::fifo_occupancy(FReg r) const {
  int occ = (valid[r.index] || pending[r.index]) ? 1 : 0;
  for (const FpuStage& st : fpu)
    if (st.occupied && st.chained && st.dest == r) ++occ;
  for (const LoadEntry& ld : loads)
    if (ld.chained && ld.dest == r) ++occ;
  return occ;
}

double MachineState::mem_read_f64(uint64_t addr) const {
  double v;
  std::memcpy(&v, mem.data() + addr, 8);
  return v;
}

void MachineState::mem_write_f64(uint64_t addr, double v) {
  std::memcpy(mem.data() + addr, &v, 8);
}

namespace {

bool streaming_on(const MachineState& state) { return (state.ssr_enable & 1) != 0; }

const StreamCursor* find_stream(const MachineState& state, FReg r, StreamDir dir) {
  if (!streaming_on(state)) return nullptr;
  for (const StreamCursor& c : state.streams)
    if (c.cfg.reg == r && c.cfg.direction == dir) return &c;
  return nullptr;
}

StreamCursor* find_stream(MachineState& state, FReg r, StreamDir dir) {
  return const_cast<StreamCursor*>(find_stream(static_cast<const MachineState&>(state), r, dir));
}

// Any stream mapping takes precedence over the chain mask for a register.
bool chained(const MachineState& state, const CoreConfig& config, FReg r) {
  if (!config.chaining_paths || !state.chain_mask.enabled(r)) return false;
  return !find_stream(state, r, StreamDir::Read) && !find_stream(state, r, StreamDir::Write);
}

bool pops_reg(const MachineState& state, const CoreConfig& config, const Instr& instr, FReg r) {
  if (!chained(state, config, r)) return false;
  for (FReg s : fp_reads(instr))
    if (s == r) return true;
  return false;
}

}  // namespace

IssueVerdict can_issue(const Instr& instr, const MachineState& state, const CoreConfig& config) {
  InstrClass cls = classify(instr);
  if (cls != InstrClass::FpCompute && cls != InstrClass::FpMem) return IssueVerdict::issue();

  // Source hazards, in operand order.
  auto reads = fp_reads(instr);
  for (size_t i = 0; i < reads.size(); ++i) {
    FReg s = reads[i];
    if (find_stream(state, s, StreamDir::Read)) continue;  // streams are always ready
    if (find_stream(state, s, StreamDir::Write)) continue;  // in-flight writes go to memory
    if (chained(state, config, s)) {
      // Two pops of one FIFO in a single instruction can never be satisfied:
      // the head exposes one element per cycle.
      for (size_t j = 0; j < i; ++j)
        if (reads[j] == s) return IssueVerdict::stall(StallReason::FifoEmpty);
      if (!state.valid[s.index]) return IssueVerdict::stall(StallReason::FifoEmpty);
      continue;
    }
    for (const FpuStage& st : state.fpu)
      if (st.occupied && !st.chained && st.dest == s)
        return IssueVerdict::stall(StallReason::RawHazard);
    for (const LoadEntry& ld : state.loads)
      if (ld.dest == s) return IssueVerdict::stall(StallReason::MemBusy);
  }

  // Destination hazards.
  if (auto wopt = fp_writes(instr)) {
    FReg d = *wopt;
    bool to_stream = find_stream(state, d, StreamDir::Write) != nullptr;
    if (chained(state, config, d)) {
      // FIFO pushes from the pipeline and from the load path must retire in
      // program order; keep the two paths mutually exclusive per register.
      bool pipe_in_flight = false, load_in_flight = false;
      for (const FpuStage& st : state.fpu)
        if (st.occupied && st.chained && st.dest == d) pipe_in_flight = true;
      for (const LoadEntry& ld : state.loads)
        if (ld.chained && ld.dest == d) load_in_flight = true;
      if (instr.op == Op::Fld) {
        if (pipe_in_flight || load_in_flight) return IssueVerdict::stall(StallReason::MemBusy);
      } else if (load_in_flight) {
        return IssueVerdict::stall(StallReason::MemBusy);
      }
      int occ = state.fifo_occupancy(d);
      if (pops_reg(state, config, instr, d)) --occ;
      if (occ >= config.fpu_depth + 1) return IssueVerdict::stall(StallReason::Backpressure);
    } else if (!to_stream) {
      // Conservative WAW interlock on conventional destinations.
      for (const FpuStage& st : state.fpu)
        if (st.occupied && st.dest == d) return IssueVerdict::stall(StallReason::RawHazard);
      for (const LoadEntry& ld : state.loads)
        if (ld.dest == d) return IssueVerdict::stall(StallReason::MemBusy);
    }
  }

  // Pipeline acceptance: compute ops need the first stage to come free this
  // cycle. A bubble anywhere lets the pipe compact; otherwise the last stage
  // must drain, which for a chained value needs a free (or popped) head.
  if (cls == InstrClass::FpCompute) {
    bool any_free = false;
    for (const FpuStage& st : state.fpu)
      if (!st.occupied) any_free = true;
    if (!any_free) {
      const FpuStage& last = state.fpu.back();
      bool drains = true;
      if (last.chained) {
        FReg d = last.dest;
        bool head_empty = !state.valid[d.index] && !state.pending[d.index];
        drains = head_empty || (state.valid[d.index] && pops_reg(state, config, instr, d));
      }
      if (!drains) return IssueVerdict::stall(StallReason::Backpressure);
    }
  }

  return IssueVerdict::issue();
}

std::vector<uint8_t> initial_memory(const Program& program, uint64_t override_size) {
  uint64_t top = std::max<uint64_t>(64 * 1024, program.mem_hint);
  for (const DataSegment& seg : program.data)
    top = std::max(top, seg.address + 8 * seg.values.size());
  for (const StreamerConfig& cfg : program.streamers) {
    int64_t hi = 0;
    for (int d = 0; d < cfg.dims; ++d) {
      int64_t span = static_cast<int64_t>(cfg.bounds[d] - 1) * cfg.strides[d];
      if (span > 0) hi += span;
    }
    top = std::max(top, cfg.base + static_cast<uint64_t>(hi) + 8);
  }
  uint64_t size = override_size ? override_size : (top + 4096 + 7) / 8 * 8;
  std::vector<uint8_t> mem(size, 0);
  for (const DataSegment& seg : program.data) {
    for (size_t i = 0; i < seg.values.size(); ++i) {
      uint64_t addr = seg.address + 8 * i;
      if (addr + 8 <= mem.size()) std::memcpy(mem.data() + addr, &seg.values[i], 8);
    }
  }
  return mem;
}

Machine::Machine(const Program& program, const CoreConfig& config)
    : program_(program), config_(config) {
  state_.fpu.assign(static_cast<size_t>(config.fpu_depth), FpuStage{});
  state_.pc = program.entry;
  state_.mem = initial_memory(program, config.mem_size);

  for (const StreamerConfig& cfg : program.streamers) {
    StreamCursor c;
    c.cfg = cfg;
    state_.streams.push_back(c);
  }
  std::sort(state_.streams.begin(), state_.streams.end(),
            [](const StreamCursor& a, const StreamCursor& b) { return a.cfg.index < b.cfg.index; });

  for (const Instr& i : program.instrs)
    if (i.op == Op::RoiBegin) program_has_roi_ = true;
}

void Machine::count(uint64_t Counters::* field, uint64_t n) {
  total_.*field += n;
  if (state_.roi_active || !program_has_roi_) roi_.*field += n;
}

bool Machine::fp_side_idle() const {
  if (!state_.fp_queue.empty() || state_.seq.active || state_.seq_current) return false;
  for (const FpuStage& st : state_.fpu)
    if (st.occupied) return false;
  return state_.loads.empty();
}

bool Machine::csr_wait_ok(uint32_t c) const {
  // Rebasing a read stream only has to wait until no undispatched FP work
  // could still consume the old pattern; in-flight pipeline values already
  // read their elements. Everything else drains the FP side completely.
  if (c >= csr::kSsrBase0 && c < csr::kSsrBase0 + static_cast<uint32_t>(config_.ssr_count)) {
    int idx = static_cast<int>(c - csr::kSsrBase0);
    for (const StreamCursor& cur : state_.streams) {
      if (cur.cfg.index == idx && cur.cfg.direction == StreamDir::Read)
        return state_.fp_queue.empty() && !state_.seq.active && !state_.seq_current;
    }
  }
  return fp_side_idle();
}

void Machine::fault(const std::string& reason) {
  if (done_) return;
  done_ = true;
  outcome_ = Outcome::Fault;
  fault_reason_ = reason;
}

const PendingFp* Machine::fp_candidate() {
  if (state_.seq_current) return &*state_.seq_current;
  if (state_.seq.active) {
    // Materialize the next sequenced instruction; integer operands are read
    // live (loop bodies are FP-only, bases must be loop-invariant).
    const Instr& instr = program_.instrs[state_.seq.start + state_.seq.pos];
    PendingFp p;
    p.instr = instr;
    p.pc = state_.seq.start + state_.seq.pos;
    if (instr.op == Op::Fld || instr.op == Op::Fsd)
      p.base_addr = state_.xregs[instr.rs1.index] + static_cast<uint64_t>(instr.imm);
    state_.seq_current = p;
    return &*state_.seq_current;
  }
  if (!state_.fp_queue.empty()) return &state_.fp_queue.front();
  if (!config_.pseudo_dual_issue && state_.pc >= 0 &&
      state_.pc < static_cast<int32_t>(program_.instrs.size())) {
    // Strict single issue pulls FP instructions straight from the front end.
    const Instr& instr = program_.instrs[state_.pc];
    InstrClass cls = classify(instr);
    if (cls == InstrClass::FpCompute || cls == InstrClass::FpMem) {
      inline_cand_ = PendingFp{instr, state_.pc, 0};
      if (instr.op == Op::Fld || instr.op == Op::Fsd)
        inline_cand_->base_addr = state_.xregs[instr.rs1.index] + static_cast<uint64_t>(instr.imm);
      return &*inline_cand_;
    }
  }
  return nullptr;
}

void Machine::consume_fp_candidate() {
  if (state_.seq_current) {
    state_.seq_current.reset();
    Sequencer& sq = state_.seq;
    if (++sq.pos >= sq.len) {
      sq.pos = 0;
      if (--sq.remaining == 0) sq.active = false;
    }
    return;
  }
  if (!state_.fp_queue.empty()) {
    state_.fp_queue.pop_front();
    return;
  }
  // Inline (single-issue) candidate.
  inline_cand_.reset();
  ++state_.pc;
}

double Machine::read_fp_operand(FReg r, CycleScratch& s) {
  if (StreamCursor* cur = find_stream(state_, r, StreamDir::Read)) {
    if (cur->exhausted()) {
      fault("read stream " + std::to_string(cur->cfg.index) + " exhausted");
      return 0.0;
    }
    uint64_t addr = cur->address();
    if (!state_.mem_ok(addr)) {
      fault("stream access out of range at address " + std::to_string(addr));
      return 0.0;
    }
    double v = state_.mem_read_f64(addr);
    cur->advance();
    count(&Counters::l1_reads);
    count(&Counters::ssr_elem_reads);
    return v;
  }
  double v = state_.fregs[r.index];
  count(&Counters::rf_reads);
  if (chained(state_, config_, r)) {
    s.popped[r.index] = true;
    if (config_.collect_fifo_events) {
      uint64_t bits;
      std::memcpy(&bits, &v, 8);
      fifo_events_.push_back({state_.cycle, r.index, FifoEventKind::Pop, bits});
    }
  }
  return v;
}

void Machine::do_fp_issue(CycleScratch& s) {
  const PendingFp* cand = fp_candidate();
  if (!cand) return;

  IssueVerdict verdict = can_issue(cand->instr, state_, config_);
  if (!verdict.ok) {
    row_.fp_stall = verdict.reason;
    switch (verdict.reason) {
      case StallReason::RawHazard: count(&Counters::stall_raw); break;
      case StallReason::FifoEmpty: count(&Counters::stall_fifo_empty); break;
      case StallReason::Backpressure: count(&Counters::stall_backpressure); break;
      case StallReason::MemBusy: count(&Counters::stall_mem); break;
      case StallReason::LoopSetup: break;
    }
    if (last_stall_ && *last_stall_ == verdict.reason) ++stall_streak_; else stall_streak_ = 1;
    last_stall_ = verdict.reason;
    return;
  }

  const Instr instr = cand->instr;
  const uint64_t base_addr = cand->base_addr;
  row_.fp_pc = cand->pc;
  row_.fp_instr = instr;
  consume_fp_candidate();
  s.fp_issued_this_cycle = true;
  s.fp_progress = true;

  switch (instr.op) {
    case Op::FAddD:
    case Op::FSubD:
    case Op::FMulD:
    case Op::FMaddD:
    case Op::FMvD: {
      double a = read_fp_operand(instr.frs1, s);
      double b = 0.0, c = 0.0;
      if (instr.op != Op::FMvD) b = read_fp_operand(instr.frs2, s);
      if (instr.op == Op::FMaddD) c = read_fp_operand(instr.frs3, s);
      if (done_) return;
      double result = 0.0;
      switch (instr.op) {
        case Op::FAddD: result = a + b; break;
        case Op::FSubD: result = a - b; break;
        case Op::FMulD: result = a * b; break;
        case Op::FMaddD: result = std::fma(a, b, c); break;
        case Op::FMvD: result = a; break;
        default: break;
      }
      count(&Counters::fp_issued);
      s.entering = PendingFp{instr, row_.fp_pc, 0};
      s.entering_value = result;
      bool dest_chained = chained(state_, config_, instr.frd);
      if (dest_chained && config_.collect_fifo_events) {
        uint64_t bits;
        std::memcpy(&bits, &result, 8);
        fifo_events_.push_back({state_.cycle, instr.frd.index, FifoEventKind::Push, bits});
      }
      break;
    }
    case Op::Fld: {
      if (!state_.mem_ok(base_addr)) {
        fault("fld access out of range or misaligned at address " + std::to_string(base_addr));
        return;
      }
      double v = state_.mem_read_f64(base_addr);
      count(&Counters::l1_reads);
      bool dest_chained = chained(state_, config_, instr.frd);
      state_.loads.push_back(
          {instr.frd, v, state_.cycle + static_cast<uint64_t>(config_.mem_latency) - 1,
           dest_chained});
      if (dest_chained && config_.collect_fifo_events) {
        uint64_t bits;
        std::memcpy(&bits, &v, 8);
        fifo_events_.push_back({state_.cycle, instr.frd.index, FifoEventKind::Push, bits});
      }
      break;
    }
    case Op::Fsd: {
      double v = read_fp_operand(instr.frs1, s);
      if (done_) return;
      if (!state_.mem_ok(base_addr)) {
        fault("fsd access out of range or misaligned at address " + std::to_string(base_addr));
        return;
      }
      state_.mem_write_f64(base_addr, v);
      count(&Counters::l1_writes);
      break;
    }
    default:
      break;
  }
}

bool Machine::head_write(FReg dest, double value, CycleScratch& s) {
  uint8_t r = dest.index;
  bool valid_at_start = state_.valid[r];
  if (valid_at_start && s.popped[r]) {
    // Pop-and-replace: the head register is read and rewritten in the same
    // cycle, valid stays set.
    state_.fregs[r] = value;
    s.popped[r] = false;
    count(&Counters::rf_writes);
  } else if (!valid_at_start && !state_.pending[r]) {
    state_.fregs[r] = value;
    count(&Counters::rf_writes);
    if (config_.same_cycle_refill) {
      state_.valid[r] = true;
    } else {
      state_.pending[r] = true;
      s.landed[r] = true;
    }
  } else {
    return false;  // head occupied; the value holds upstream
  }
  if (config_.collect_fifo_events) {
    uint64_t bits;
    std::memcpy(&bits, &value, 8);
    fifo_events_.push_back({state_.cycle, r, FifoEventKind::Refill, bits});
  }
  return true;
}

void Machine::advance_pipeline(CycleScratch& s) {
  const int L = config_.fpu_depth;
  for (int i = L - 1; i >= 0; --i) {
    FpuStage& st = state_.fpu[static_cast<size_t>(i)];
    if (!st.occupied) continue;
    if (i == L - 1) {
      if (StreamCursor* cur = find_stream(state_, st.dest, StreamDir::Write)) {
        if (cur->exhausted()) {
          fault("write stream " + std::to_string(cur->cfg.index) + " exhausted");
          return;
        }
        uint64_t addr = cur->address();
        if (!state_.mem_ok(addr)) {
          fault("stream access out of range at address " + std::to_string(addr));
          return;
        }
        state_.mem_write_f64(addr, st.value);
        cur->advance();
        count(&Counters::l1_writes);
        count(&Counters::ssr_elem_writes);
        st.occupied = false;
        s.fp_progress = true;
      } else if (st.chained) {
        if (head_write(st.dest, st.value, s)) {
          st.occupied = false;
          s.fp_progress = true;
        }
      } else {
        state_.fregs[st.dest.index] = st.value;
        count(&Counters::rf_writes);
        st.occupied = false;
        s.fp_progress = true;
      }
    } else {
      FpuStage& next = state_.fpu[static_cast<size_t>(i) + 1];
      if (!next.occupied) {
        next = st;
        st.occupied = false;
      }
    }
  }
  if (s.entering) {
    FpuStage& first = state_.fpu.front();
    if (first.occupied) {
      fault("internal: pipeline entry blocked after issue");
      return;
    }
    const Instr& instr = s.entering->instr;
    first.occupied = true;
    first.value = s.entering_value;
    first.dest = instr.frd;
    first.chained = chained(state_, config_, instr.frd);
  }
}

void Machine::complete_loads(CycleScratch& s) {
  // Entries retire in issue order; a blocked chained entry also blocks later
  // entries to keep per-register FIFO order.
  std::array<bool, 32> blocked{};
  for (auto it = state_.loads.begin(); it != state_.loads.end();) {
    LoadEntry& ld = *it;
    if (state_.cycle < ld.ready_cycle || blocked[ld.dest.index]) {
      blocked[ld.dest.index] = true;
      ++it;
      continue;
    }
    if (StreamCursor* cur = find_stream(state_, ld.dest, StreamDir::Write)) {
      if (cur->exhausted()) {
        fault("write stream " + std::to_string(cur->cfg.index) + " exhausted");
        return;
      }
      uint64_t addr = cur->address();
      if (!state_.mem_ok(addr)) {
        fault("stream access out of range");
        return;
      }
      state_.mem_write_f64(addr, ld.value);
      cur->advance();
      count(&Counters::l1_writes);
      count(&Counters::ssr_elem_writes);
    } else if (ld.chained) {
      if (!head_write(ld.dest, ld.value, s)) {
        blocked[ld.dest.index] = true;
        ++it;
        continue;
      }
    } else {
      state_.fregs[ld.dest.index] = ld.value;
      count(&Counters::rf_writes);
    }
    s.fp_progress = true;
    it = state_.loads.erase(it);
  }
}

bool Machine::exec_int(const Instr& instr, CycleScratch& s) {
  auto& x = state_.xregs;
  auto wr = [&](XReg r, uint64_t v) {
    if (r.index != 0) x[r.index] = v;
  };
  switch (instr.op) {
    case Op::Addi:
      wr(instr.rd, x[instr.rs1.index] + static_cast<uint64_t>(instr.imm));
      break;
    case Op::Add:
      wr(instr.rd, x[instr.rs1.index] + x[instr.rs2.index]);
      break;
    case Op::Sub:
      wr(instr.rd, x[instr.rs1.index] - x[instr.rs2.index]);
      break;
    case Op::Li:
      wr(instr.rd, static_cast<uint64_t>(instr.imm));
      break;
    case Op::Bne:
      if (x[instr.rs1.index] != x[instr.rs2.index]) {
        state_.pc = instr.target;
        return true;
      }
      break;
    case Op::Beq:
      if (x[instr.rs1.index] == x[instr.rs2.index]) {
        state_.pc = instr.target;
        return true;
      }
      break;
    case Op::Blt:
      if (static_cast<int64_t>(x[instr.rs1.index]) < static_cast<int64_t>(x[instr.rs2.index])) {
        state_.pc = instr.target;
        return true;
      }
      break;
    case Op::Jump:
      state_.pc = instr.target;
      return true;
    case Op::CsrRw:
    case Op::CsrRc:
    case Op::CsrRs: {
      uint64_t old = 0;
      StreamCursor* stream = nullptr;
      if (instr.csr == csr::kChainMask) {
        old = state_.chain_mask.bits;
      } else if (instr.csr == csr::kSsrEnable) {
        old = state_.ssr_enable;
      } else if (instr.csr >= csr::kSsrBase0 &&
                 instr.csr < csr::kSsrBase0 + static_cast<uint32_t>(config_.ssr_count)) {
        int idx = static_cast<int>(instr.csr - csr::kSsrBase0);
        for (StreamCursor& c : state_.streams)
          if (c.cfg.index == idx) stream = &c;
        if (!stream) {
          fault("csr " + std::to_string(instr.csr) + " maps no configured streamer");
          return false;
        }
        old = stream->cfg.base;
      } else {
        fault("unknown csr");
        return false;
      }
      bool write = instr.op == Op::CsrRw || instr.rs1.index != 0;
      uint64_t rsval = x[instr.rs1.index];
      uint64_t next = instr.op == Op::CsrRw   ? rsval
                      : instr.op == Op::CsrRs ? (old | rsval)
                                              : (old & ~rsval);
      if (write) {
        if (instr.csr == csr::kChainMask) {
          uint32_t cleared = static_cast<uint32_t>(old) & ~static_cast<uint32_t>(next);
          for (int b = 0; b < 32; ++b) {
            if (!((cleared >> b) & 1u)) continue;
            // End-of-cycle occupancy: a pop issued earlier this cycle counts.
            int occ = state_.fifo_occupancy(FReg(static_cast<uint8_t>(b)));
            if (s.popped[b]) --occ;
            if (occ > 0) {
              fault("chain drain violation: disabling " + freg_name(FReg(static_cast<uint8_t>(b))) +
                    " with a non-empty FIFO");
              return false;
            }
          }
          state_.chain_mask.bits = static_cast<uint32_t>(next);
        } else if (instr.csr == csr::kSsrEnable) {
          state_.ssr_enable = next;
        } else {
          stream->rebase(next);
        }
      }
      wr(instr.rd, old);
      break;
    }
    default:
      break;
  }
  return false;
}

void Machine::front_end(CycleScratch& s) {
  int fp_budget = 1;
  int int_budget = 1;
  if (!config_.pseudo_dual_issue) {
    // Strict single issue: the FP stream owns the slot whenever an FP
    // instruction contends for it.
    if (s.fp_issued_this_cycle || row_.fp_stall) return;
    fp_budget = 0;
  }

  const int32_t n = static_cast<int32_t>(program_.instrs.size());
  while (!done_ && !state_.halted) {
    if (state_.pc < 0 || state_.pc >= n) {
      if (state_.pc == n && fp_side_idle()) fault("control ran past the end of the program");
      return;
    }
    const Instr& instr = program_.instrs[state_.pc];
    InstrClass cls = classify(instr);

    if (cls == InstrClass::FpCompute || cls == InstrClass::FpMem) {
      if (fp_budget == 0) return;  // single issue: handled by the issue phase
      PendingFp p;
      p.instr = instr;
      p.pc = state_.pc;
      if (instr.op == Op::Fld || instr.op == Op::Fsd)
        p.base_addr = state_.xregs[instr.rs1.index] + static_cast<uint64_t>(instr.imm);
      state_.fp_queue.push_back(p);
      ++state_.pc;
      --fp_budget;
      continue;
    }

    if (cls == InstrClass::Int || cls == InstrClass::Control) {
      if (int_budget == 0) return;
      bool is_csr = instr.op == Op::CsrRw || instr.op == Op::CsrRs || instr.op == Op::CsrRc;
      if (is_csr && !csr_wait_ok(instr.csr)) return;  // CSR side effects serialize
      row_.int_pc = state_.pc;
      row_.int_instr = instr;
      count(&Counters::int_issued);
      int32_t cur = state_.pc;
      bool redirected = exec_int(instr, s);
      if (done_) return;
      if (!redirected) state_.pc = cur + 1;
      --int_budget;
      continue;
    }

    // Meta.
    switch (instr.op) {
      case Op::HwLoop: {
        if (state_.seq.active || state_.seq_current || !state_.fp_queue.empty()) return;
        uint64_t iters = instr.iter_is_reg ? state_.xregs[instr.rs1.index]
                                           : static_cast<uint64_t>(instr.imm2);
        int32_t body_start = state_.pc + 1;
        int32_t body_len = static_cast<int32_t>(instr.imm);
        if (iters > 0) {
          state_.seq.active = true;
          state_.seq.start = body_start;
          state_.seq.len = body_len;
          state_.seq.remaining = iters;
          state_.seq.pos = 0;
        }
        state_.pc = body_start + body_len;
        return;  // setup occupies the rest of the cycle
      }
      case Op::RoiBegin:
        if (!fp_side_idle()) return;
        state_.roi_active = true;
        ++state_.pc;
        return;
      case Op::RoiEnd:
        if (!fp_side_idle()) return;
        state_.roi_active = false;
        ++state_.pc;
        return;
      case Op::Halt:
        if (!fp_side_idle()) return;
        state_.halted = true;
        done_ = true;
        outcome_ = Outcome::Halted;
        ++state_.pc;
        return;
      default:
        return;
    }
  }
}

void Machine::step() {
  if (done_) return;
  bool roi_gate = state_.roi_active || !program_has_roi_;
  bool was_halted = state_.halted;
  row_ = TraceRow{};
  row_.cycle = state_.cycle;

  CycleScratch s;
  do_fp_issue(s);
  if (!done_) advance_pipeline(s);
  if (!done_) complete_loads(s);
  if (!done_) front_end(s);

  // End-of-cycle resolution: pops clear valid bits, landed registered
  // refills mature one cycle later.
  for (int r = 0; r < 32; ++r) {
    if (s.popped[r]) state_.valid[r] = false;
    if (state_.pending[r] && !s.landed[r]) {
      state_.pending[r] = false;
      state_.valid[r] = true;
    }
  }

  // The halt retirement cycle never counts toward the measured region.
  bool halted_now = state_.halted && !was_halted;
  if (roi_gate && !halted_now) ++roi_.cycles_roi;
  ++total_.cycles_roi;

  if (config_.collect_trace && roi_gate) {
    for (int r = 0; r < 32; ++r)
      if (state_.chain_mask.enabled(FReg(static_cast<uint8_t>(r))))
        row_.fifo_occ.emplace_back(static_cast<uint8_t>(r),
                                   static_cast<uint8_t>(state_.fifo_occupancy(FReg(static_cast<uint8_t>(r)))));
    trace_.push_back(row_);
  }

  if (!s.fp_progress) {
    bool fp_pending = row_.fp_stall.has_value() || !state_.loads.empty();
    for (const FpuStage& st : state_.fpu)
      if (st.occupied) fp_pending = true;
    if (fp_pending) {
      if (!row_.fp_stall) {
        // Wedged pipeline without an issue candidate.
        if (last_stall_ && *last_stall_ == StallReason::Backpressure) ++stall_streak_;
        else stall_streak_ = 1;
        last_stall_ = StallReason::Backpressure;
      }
      if (stall_streak_ >= config_.stall_deadlock_threshold && !done_) {
        done_ = true;
        outcome_ = Outcome::Deadlock;
        fault_reason_ = "no FP progress for " + std::to_string(stall_streak_) +
                        " cycles (" + stall_reason_name(*last_stall_) + ")";
      }
    } else {
      stall_streak_ = 0;
      last_stall_.reset();
    }
  } else {
    stall_streak_ = 0;
    last_stall_.reset();
  }

  ++state_.cycle;
  if (!done_ && state_.cycle > config_.max_cycles) {
    done_ = true;
    outcome_ = Outcome::Watchdog;
  }
}

SimResult Machine::take_result() {
  SimResult r;
  r.final_state = std::move(state_);
  r.counters = roi_;
  r.counters_total = total_;
  r.trace = std::move(trace_);
  r.fifo_events = std::move(fifo_events_);
  r.outcome = outcome_;
  r.fault_reason = fault_reason_;
  return r;
}

SimResult run(const Program& program, const CoreConfig& config) {
  auto diags = validate_program(program);
  if (!diags.empty()) {
    SimResult r;
    r.outcome = Outcome::Fault;
    r.fault_reason = "invalid program: " + format_diagnostic(diags.front());
    return r;
  }
  Machine m(program, config);
  while (!m.done()) m.step();
  return m.take_result();
}

}  // namespace chainsim
