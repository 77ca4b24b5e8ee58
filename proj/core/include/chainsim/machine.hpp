// Copyright 2026 The chainsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "chainsim/program.hpp"

namespace chainsim {

struct CoreConfig {
  int fpu_depth = 3;                  // FPU pipeline stages
  bool pseudo_dual_issue = true;      // integer stream runs beside the FP stream
  bool same_cycle_refill = true;      // empty-head refill valid in the landing cycle
  int mem_latency = 2;                // load-use distance in cycles
  int ssr_count = 3;
  uint64_t max_cycles = 50'000'000;   // watchdog
  int stall_deadlock_threshold = 1000;

  // API-only knobs, not part of the config file surface.
  bool chaining_paths = true;    // false routes around every chaining code path
  bool collect_trace = false;    // per-cycle rows inside the ROI
  bool collect_fifo_events = false;
  uint64_t mem_size = 0;         // 0 = sized from program data/stream extents
};

/// Event counters; one set accumulated inside the ROI (whole run when the
/// program has no ROI markers), one for the whole run.
struct Counters {
  uint64_t cycles_roi = 0;
  uint64_t fp_issued = 0;   // FP compute only
  uint64_t int_issued = 0;
  uint64_t stall_raw = 0;
  uint64_t stall_fifo_empty = 0;
  uint64_t stall_backpressure = 0;
  uint64_t stall_mem = 0;
  uint64_t l1_reads = 0;
  uint64_t l1_writes = 0;
  uint64_t rf_reads = 0;    // FP register file
  uint64_t rf_writes = 0;
  uint64_t ssr_elem_reads = 0;
  uint64_t ssr_elem_writes = 0;

  friend bool operator==(const Counters&, const Counters&) = default;
};

enum class StallReason : uint8_t { RawHazard, FifoEmpty, Backpressure, MemBusy, LoopSetup };

std::string stall_reason_name(StallReason r);

struct IssueVerdict {
  bool ok = true;
  StallReason reason = StallReason::RawHazard;

  static IssueVerdict issue() { return {true, StallReason::RawHazard}; }
  static IssueVerdict stall(StallReason r) { return {false, r}; }
};

/// One in-flight value inside the FPU pipeline.
struct FpuStage {
  bool occupied = false;
  double value = 0.0;
  FReg dest{};
  bool chained = false;  // dest had its chain bit set at issue
};

/// Pending load writeback.
struct LoadEntry {
  FReg dest{};
  double value = 0.0;
  uint64_t ready_cycle = 0;
  bool chained = false;
};

/// An FP instruction waiting to issue; integer operands (memory base
/// address) are captured when the front end hands the instruction over.
struct PendingFp {
  Instr instr;
  int32_t pc = 0;
  uint64_t base_addr = 0;  // resolved base+offset for fld/fsd
};

/// Hardware loop state: replays instrs [start, start+len) `remaining` times
/// with no front-end involvement.
struct Sequencer {
  bool active = false;
  int32_t start = 0;
  int32_t len = 0;
  uint64_t remaining = 0;
  int32_t pos = 0;
};

/// Runtime cursor over a StreamerConfig.
struct StreamCursor {
  StreamerConfig cfg;
  std::array<uint64_t, 4> idx{};
  uint64_t rep = 0;
  uint64_t delivered = 0;

  bool exhausted() const { return delivered >= cfg.total_elements(); }
  uint64_t address() const {
    int64_t off = 0;
    for (int d = 0; d < cfg.dims; ++d) off += static_cast<int64_t>(idx[d]) * cfg.strides[d];
    return cfg.base + static_cast<uint64_t>(off);
  }
  void advance() {
    ++delivered;
    if (++rep < cfg.repeat) return;
    rep = 0;
    for (int d = 0; d < cfg.dims; ++d) {
      if (++idx[d] < cfg.bounds[d]) return;
      idx[d] = 0;
    }
  }
  void rebase(uint64_t base) {
    cfg.base = base;
    idx = {};
    rep = 0;
    delivered = 0;
  }
};

struct TraceRow {
  uint64_t cycle = 0;
  int32_t fp_pc = -1;        // issued FP instruction, -1 if none
  std::optional<Instr> fp_instr;
  std::optional<StallReason> fp_stall;
  int32_t int_pc = -1;       // integer/control slot
  std::optional<Instr> int_instr;
  std::vector<std::pair<uint8_t, uint8_t>> fifo_occ;  // (reg, occupancy) per chained reg
};

enum class FifoEventKind : uint8_t { Push, Pop, Refill };

/// Logical-FIFO bookkeeping event, for property checks: Push when a chained
/// producer issues, Refill when a value lands in the head register, Pop when
/// a consumer reads the head.
struct FifoEvent {
  uint64_t cycle = 0;
  uint8_t reg = 0;
  FifoEventKind kind = FifoEventKind::Push;
  uint64_t bits = 0;  // value payload
};

enum class Outcome : uint8_t { Halted, Watchdog, Deadlock, Fault };

std::string outcome_name(Outcome o);

struct MachineState {
  int32_t pc = 0;
  bool halted = false;
  std::array<uint64_t, 32> xregs{};
  std::array<double, 32> fregs{};
  // Chained-head bookkeeping: valid marks an unconsumed head; pending marks a
  // landed refill whose valid bit sets one cycle later (registered
  // empty-head refill when same_cycle_refill is off).
  std::array<bool, 32> valid{};
  std::array<bool, 32> pending{};
  ChainMask chain_mask{};
  uint64_t ssr_enable = 0;
  std::vector<FpuStage> fpu;
  std::vector<LoadEntry> loads;
  std::vector<StreamCursor> streams;
  std::vector<uint8_t> mem;
  std::deque<PendingFp> fp_queue;
  Sequencer seq;
  std::optional<PendingFp> seq_current;
  uint64_t cycle = 0;
  bool roi_active = false;

  /// Logical FIFO occupancy of a chained register: head (valid or pending)
  /// plus in-flight chained values destined for it.
  int fifo_occupancy(FReg r) const;

  double mem_read_f64(uint64_t addr) const;
  void mem_write_f64(uint64_t addr, double v);
  bool mem_ok(uint64_t addr) const { return addr % 8 == 0 && addr + 8 <= mem.size(); }
};

struct SimResult {
  MachineState final_state;
  Counters counters;        // ROI-scoped (whole run if no markers)
  Counters counters_total;  // whole run
  std::vector<TraceRow> trace;
  std::vector<FifoEvent> fifo_events;
  Outcome outcome = Outcome::Halted;
  std::string fault_reason;
};

/// Issue verdict for the next FP-stream instruction, a pure function of the
/// start-of-cycle state. Checked in order: source hazards, destination
/// hazards, pipeline acceptance.
IssueVerdict can_issue(const Instr& instr, const MachineState& state, const CoreConfig& config);

class Machine {
 public:
  Machine(const Program& program, const CoreConfig& config);

  /// Advance exactly one cycle.
  void step();

  bool done() const { return done_; }
  const MachineState& state() const { return state_; }
  MachineState& state() { return state_; }
  SimResult take_result();

 private:
  struct CycleScratch {
    std::array<bool, 32> popped{};
    std::array<bool, 32> landed{};
    bool fp_issued_this_cycle = false;
    bool fp_progress = false;
    std::optional<PendingFp> entering;  // compute result entering stage 0
    double entering_value = 0.0;
  };

  const PendingFp* fp_candidate();
  void consume_fp_candidate();
  double read_fp_operand(FReg r, CycleScratch& s);
  void do_fp_issue(CycleScratch& s);
  void advance_pipeline(CycleScratch& s);
  void complete_loads(CycleScratch& s);
  void front_end(CycleScratch& s);
  bool exec_int(const Instr& instr, CycleScratch& s);
  bool head_write(FReg dest, double value, CycleScratch& s);
  void fault(const std::string& reason);
  void count(uint64_t Counters::* field, uint64_t n = 1);
  bool fp_side_idle() const;
  bool csr_wait_ok(uint32_t c) const;

  const Program& program_;
  CoreConfig config_;
  MachineState state_;
  Counters roi_{}, total_{};
  std::vector<TraceRow> trace_;
  std::vector<FifoEvent> fifo_events_;
  bool program_has_roi_ = false;
  bool done_ = false;
  Outcome outcome_ = Outcome::Halted;
  std::string fault_reason_;
  int stall_streak_ = 0;
  std::optional<StallReason> last_stall_;
  std::optional<PendingFp> inline_cand_;
  TraceRow row_;
};

/// Run a validated program to completion (halt, watchdog, fault or deadlock).
SimResult run(const Program& program, const CoreConfig& config);

/// Flat memory image sized from the program's data segments and stream
/// extents (or `override_size`), with data segments applied.
std::vector<uint8_t> initial_memory(const Program& program, uint64_t override_size = 0);

}  // namespace chainsim
