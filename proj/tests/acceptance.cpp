// Copyright 2026 The chainsim authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one check per shipped claim, one PASS/FAIL line each.
// Exit code is the number of failed criteria.

#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <string>
#include <vector>

#include "chainsim/assembler.hpp"
#include "chainsim/kernels.hpp"
#include "chainsim/machine.hpp"
#include "chainsim/oracle.hpp"
#include "chainsim/report.hpp"
#include "support/generators.hpp"
#include "support/naive_interp.hpp"

using namespace chainsim;

namespace {

int g_failures = 0;

void report(int criterion, bool ok, const std::string& detail) {
  std::printf("%s  criterion %2d: %s\n", ok ? "PASS" : "FAIL", criterion, detail.c_str());
  if (!ok) ++g_failures;
}

std::vector<int64_t> fp_issue_cycles(const SimResult& r, Op op) {
  std::vector<int64_t> out;
  for (const TraceRow& row : r.trace)
    if (row.fp_instr && row.fp_instr->op == op) out.push_back(static_cast<int64_t>(row.cycle));
  return out;
}

uint64_t stall_rows(const SimResult& r) {
  uint64_t n = 0;
  for (const TraceRow& row : r.trace)
    if (row.fp_stall) ++n;
  return n;
}

bool outputs_bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  return std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

std::vector<double> read_expected_region(const SimResult& r, const KernelBundle& bundle) {
  std::vector<double> out;
  for (const auto& [base, values] : bundle.expected_memory)
    for (size_t i = 0; i < values.size(); ++i)
      out.push_back(r.final_state.mem_read_f64(base + 8 * i));
  return out;
}

bool matches_expected(const SimResult& r, const KernelBundle& bundle) {
  for (const auto& [base, values] : bundle.expected_memory) {
    for (size_t i = 0; i < values.size(); ++i) {
      double got = r.final_state.mem_read_f64(base + 8 * i);
      uint64_t gb, eb;
      std::memcpy(&gb, &got, 8);
      std::memcpy(&eb, &values[i], 8);
      if (gb != eb) return false;
    }
  }
  return true;
}

// ---- criterion 1: base vecop stalls exactly fpu_depth cycles per fmul ----
void criterion_1() {
  CoreConfig c;
  c.collect_trace = true;
  VecopSpec spec;
  spec.n = 256;
  spec.variant = VecopVariant::Base;
  KernelBundle bundle = build_vecop(spec, c);
  SimResult r = run(bundle.program, c);
  auto adds = fp_issue_cycles(r, Op::FAddD);
  auto muls = fp_issue_cycles(r, Op::FMulD);
  bool ok = r.outcome == Outcome::Halted && adds.size() == 256 && muls.size() == 256;
  int64_t lo = 1 << 30, hi = -1;
  for (size_t i = 0; ok && i < 256; ++i) {
    int64_t late = muls[i] - adds[i] - 1;  // vs the no-hazard slot
    lo = std::min(lo, late);
    hi = std::max(hi, late);
    if (late != c.fpu_depth) ok = false;
  }
  report(1, ok,
         "base vecop fmul issues exactly fpu_depth=3 cycles late over 256 iterations "
         "(min=" + std::to_string(lo) + " max=" + std::to_string(hi) + ")");
}

// ---- criterion 2: unroll-by-four sufficiency ----
void criterion_2() {
  auto stalls_for = [](int unroll, int depth) {
    CoreConfig c;
    c.collect_trace = true;
    c.fpu_depth = depth;
    VecopSpec spec;
    spec.n = 1280;  // divisible by 4 and 5
    spec.variant = VecopVariant::Unroll4;
    spec.unroll = unroll;
    KernelBundle bundle = build_vecop(spec, c);
    SimResult r = run(bundle.program, c);
    if (r.outcome != Outcome::Halted) return static_cast<uint64_t>(-1);
    return stall_rows(r);
  };
  uint64_t u4d3 = stalls_for(4, 3);
  uint64_t u4d4 = stalls_for(4, 4);
  uint64_t u5d4 = stalls_for(5, 4);
  bool ok = u4d3 == 0 && u4d4 > 0 && u5d4 == 0;
  report(2, ok,
         "unroll4/depth3 stalls=" + std::to_string(u4d3) + ", unroll4/depth4 stalls=" +
             std::to_string(u4d4) + " (>0), unroll5/depth4 stalls=" + std::to_string(u5d4));
}

// ---- criterion 3: register-pressure delta ----
void criterion_3() {
  CoreConfig c;
  VecopSpec spec;
  spec.n = 256;
  spec.variant = VecopVariant::Unroll4;
  int unrolled = build_vecop(spec, c).fp_regs_used;
  spec.variant = VecopVariant::Chained;
  int chained = build_vecop(spec, c).fp_regs_used;
  bool ok = unrolled == 7 && chained == 4 && unrolled - chained == c.fpu_depth;
  report(3, ok,
         "fp_regs_used unroll4=" + std::to_string(unrolled) + " chained=" +
             std::to_string(chained) + ", delta=" + std::to_string(unrolled - chained) +
             " == fpu_depth=3");
}

// ---- criterion 4: chained steady-state issue slots per iteration ----
void criterion_4() {
  std::string detail;
  bool ok = true;
  for (bool refill : {true, false}) {
    CoreConfig c;
    c.collect_trace = true;
    c.same_cycle_refill = refill;
    VecopSpec spec;
    spec.n = 1024;  // 256 groups of four
    spec.variant = VecopVariant::Chained;
    KernelBundle bundle = build_vecop(spec, c);
    SimResult r = run(bundle.program, c);
    if (r.outcome != Outcome::Halted) {
      ok = false;
      continue;
    }
    auto adds = fp_issue_cycles(r, Op::FAddD);
    // Group-leading fadds are 4 apart in the stream: group k starts at
    // adds[4*k]. Use a steady-state window.
    int64_t worst = 0, best = 1 << 30;
    for (int k = 10; k < 250; ++k) {
      int64_t period = adds[static_cast<size_t>(4 * (k + 1))] - adds[static_cast<size_t>(4 * k)];
      worst = std::max(worst, period);
      best = std::min(best, period);
    }
    bool within = best >= 8 && worst <= 9;
    bool exact = refill ? (best == 8 && worst == 8) : (best == 9 && worst == 9);
    ok = ok && within && exact;
    detail += std::string(refill ? "refill-on" : "refill-off") + ": " + std::to_string(best) +
              (best == worst ? "" : "-" + std::to_string(worst)) + " slots/iter  ";
  }
  report(4, ok, "chained vecop steady state in [8,9]: " + detail);
}

struct MatrixCell {
  std::string kernel, variant;
  KernelBundle bundle;
  SimResult result;
};

std::vector<MatrixCell> run_matrix(const CoreConfig& config) {
  std::vector<MatrixCell> cells;
  for (VecopVariant v : {VecopVariant::Base, VecopVariant::Unroll4, VecopVariant::Chained}) {
    VecopSpec spec;
    spec.n = 1024;
    spec.variant = v;
    MatrixCell cell;
    cell.kernel = "vecop";
    cell.variant = vecop_variant_name(v);
    cell.bundle = build_vecop(spec, config);
    cell.result = run(cell.bundle.program, config);
    cells.push_back(std::move(cell));
  }
  for (StencilKind k : {StencilKind::Box3d1r, StencilKind::J3d27pt}) {
    for (StencilVariant v : {StencilVariant::BaseMM, StencilVariant::BaseM, StencilVariant::Base,
                             StencilVariant::Chaining, StencilVariant::ChainingPlus}) {
      StencilSpec spec;
      spec.kind = k;
      spec.coeffs = default_coeffs(k);
      spec.nx = spec.ny = spec.nz = 16;
      spec.variant = v;
      MatrixCell cell;
      cell.kernel = stencil_kind_name(k);
      cell.variant = stencil_variant_name(v);
      cell.bundle = build_stencil(spec, config);
      cell.result = run(cell.bundle.program, config);
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

// ---- criterion 5: functional correctness across the bench matrix ----
void criterion_5(const std::vector<MatrixCell>& cells) {
  bool ok = true;
  std::string fail_at;
  std::map<std::string, std::vector<double>> first_output;
  for (const MatrixCell& cell : cells) {
    bool cell_ok = cell.result.outcome == Outcome::Halted && matches_expected(cell.result, cell.bundle);
    if (cell_ok) {
      OracleResult oracle = functional_reference(cell.bundle.program);
      cell_ok = oracle.halted && oracle.mem == cell.result.final_state.mem;
    }
    if (cell_ok) {
      std::vector<double> out = read_expected_region(cell.result, cell.bundle);
      auto [it, inserted] = first_output.emplace(cell.kernel, out);
      if (!inserted && !outputs_bitwise_equal(it->second, out)) cell_ok = false;
    }
    if (!cell_ok && fail_at.empty()) fail_at = cell.kernel + "/" + cell.variant;
    ok = ok && cell_ok;
  }
  report(5, ok,
         "all 13 matrix cells bit-identical to the oracle and across variants" +
             (fail_at.empty() ? "" : " (first failure: " + fail_at + ")"));
}

// ---- criterion 6: baseline equivalence with chaining paths disabled ----
void criterion_6(const std::vector<MatrixCell>& cells) {
  bool ok = true;
  std::string detail;
  CoreConfig off;
  off.chaining_paths = false;
  int compared = 0;
  for (const MatrixCell& cell : cells) {
    if (cell.variant == "chained" || cell.variant == "chaining" || cell.variant == "chaining+")
      continue;  // those runs set mask bits
    SimResult r2 = run(cell.bundle.program, off);
    bool same = r2.outcome == cell.result.outcome &&
                r2.final_state.cycle == cell.result.final_state.cycle &&
                r2.counters == cell.result.counters &&
                r2.final_state.mem == cell.result.final_state.mem;
    if (!same) detail += " matrix:" + cell.kernel + "/" + cell.variant;
    ok = ok && same;
    ++compared;
  }
  testing::RandomProgramOptions opt;
  opt.use_chaining = false;
  int random_fail = 0;
  for (uint64_t seed = 10000; seed < 11000; ++seed) {
    testing::GeneratedProgram g = testing::random_program(seed, opt);
    CoreConfig on;
    SimResult r1 = run(g.program, on);
    SimResult r2 = run(g.program, off);
    bool same = r1.outcome == Outcome::Halted && r2.outcome == Outcome::Halted &&
                r1.final_state.cycle == r2.final_state.cycle && r1.counters == r2.counters &&
                r1.final_state.mem == r2.final_state.mem &&
                std::memcmp(r1.final_state.fregs.data(), r2.final_state.fregs.data(),
                            sizeof(r1.final_state.fregs)) == 0 &&
                r1.final_state.xregs == r2.final_state.xregs;
    if (!same) ++random_fail;
  }
  ok = ok && random_fail == 0;
  report(6, ok,
         "mask-free runs identical to the chaining-disabled build (" + std::to_string(compared) +
             " matrix cells + 1000 random programs, " + std::to_string(random_fail) +
             " mismatches)" + detail);
}

// ---- criterion 7: FIFO semantics property suite ----
void criterion_7() {
  CoreConfig c;
  c.collect_fifo_events = true;
  int violations = 0;
  int exercised = 0;
  for (uint64_t seed = 20000; seed < 30000; ++seed) {
    testing::GeneratedProgram g = testing::random_program(seed);
    SimResult r = run(g.program, c);
    if (r.outcome != Outcome::Halted) {
      ++violations;
      continue;
    }
    std::map<int, std::vector<uint64_t>> pushes, pops;
    std::map<int, int> occ;
    bool bad = false;
    for (const FifoEvent& e : r.fifo_events) {
      if (e.kind == FifoEventKind::Push) {
        pushes[e.reg].push_back(e.bits);
        if (++occ[e.reg] > c.fpu_depth + 1) bad = true;  // capacity
      } else if (e.kind == FifoEventKind::Pop) {
        pops[e.reg].push_back(e.bits);
        --occ[e.reg];
      }
    }
    for (auto& [reg, ps] : pops) {
      auto& qs = pushes[reg];
      if (ps.size() != qs.size()) bad = true;  // lost or duplicated update
      for (size_t i = 0; !bad && i < ps.size(); ++i)
        if (ps[i] != qs[i]) bad = true;  // order preservation
    }
    if (!r.fifo_events.empty()) ++exercised;
    if (bad) ++violations;
  }

  // Deadlock detection on rate imbalance, both directions.
  CoreConfig dl;
  dl.stall_deadlock_threshold = 100;
  ParseResult under = parse_program(
      "li x7, 8\ncsrs chain_mask, x7\nfsd ft3, 0(x7)\nhalt\n");
  ParseResult over = parse_program(
      ".data 0x1000: 1.0\nli x5, 0x1000\nfld f8, 0(x5)\nli x7, 8\ncsrs chain_mask, x7\n"
      "fadd.d ft3, f8, f8\nfadd.d ft3, f8, f8\nfadd.d ft3, f8, f8\n"
      "fadd.d ft3, f8, f8\nfadd.d ft3, f8, f8\nhalt\n");
  bool dl_ok = run(std::get<Program>(under), dl).outcome == Outcome::Deadlock &&
               run(std::get<Program>(over), dl).outcome == Outcome::Deadlock;

  bool ok = violations == 0 && exercised > 7000 && dl_ok;
  report(7, ok,
         "10000 random programs: order/no-lost-update/capacity violations=" +
             std::to_string(violations) + ", exercised=" + std::to_string(exercised) +
             ", imbalance deadlocks detected=" + (dl_ok ? "yes" : "no"));
}

// ---- criterion 8: stencil utilization ----
void criterion_8(const std::vector<MatrixCell>& cells) {
  bool ok = true;
  bool goal = true;
  std::string detail;
  for (const MatrixCell& cell : cells) {
    if (cell.variant != "chaining" && cell.variant != "chaining+") continue;
    if (cell.kernel == "vecop") continue;
    double util = fpu_utilization(cell.result.counters);
    ok = ok && util >= 0.90;
    goal = goal && util >= 0.93;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s/%s=%.4f ", cell.kernel.c_str(), cell.variant.c_str(),
                  util);
    detail += buf;
  }
  report(8, ok,
         "chaining utilization >= 0.90 (goal 0.93 " + std::string(goal ? "met" : "missed") +
             "): " + detail);
}

// ---- criterion 9: speedup direction ----
void criterion_9(const std::vector<MatrixCell>& cells) {
  std::map<std::string, std::map<std::string, uint64_t>> cycles;
  for (const MatrixCell& cell : cells)
    cycles[cell.kernel][cell.variant] = cell.result.counters.cycles_roi;
  bool ok = true;
  double geo = 1.0;
  int n = 0;
  std::string detail;
  for (const char* k : {"box3d1r", "j3d27pt"}) {
    uint64_t plus = cycles[k]["chaining+"], basem = cycles[k]["base-"], base = cycles[k]["base"];
    ok = ok && plus <= basem && plus <= base;
    double s = static_cast<double>(basem) / static_cast<double>(plus);
    geo *= s;
    ++n;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%s: %llu<=%llu,%llu ", k,
                  static_cast<unsigned long long>(plus), static_cast<unsigned long long>(basem),
                  static_cast<unsigned long long>(base));
    detail += buf;
  }
  geo = std::pow(geo, 1.0 / n);
  ok = ok && geo >= 1.00;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "geomean speedup chaining+/base- = %.3f", geo);
  report(9, ok, detail + buf);
}

// ---- criterion 10: coefficient L1 traffic ----
void criterion_10(const std::vector<MatrixCell>& cells) {
  const uint64_t pts = 16 * 16 * 16;
  bool ok = true;
  std::string detail;
  const MatrixCell* chain_cell = nullptr;
  const MatrixCell* base_cell = nullptr;
  for (const MatrixCell& cell : cells) {
    if (cell.kernel != "box3d1r") continue;
    const Counters& c = cell.result.counters;
    uint64_t coeff_reads = c.l1_reads - 27 * pts;  // input stream accounts for 27/pt
    if (cell.variant == "base--" || cell.variant == "base-" || cell.variant == "base") {
      ok = ok && coeff_reads == 27 * pts;
      if (cell.variant == "base") base_cell = &cell;
    } else {
      ok = ok && coeff_reads == 0;
      // The 27-load preload sits outside the ROI but inside the run totals.
      uint64_t preload = cell.result.counters_total.l1_reads - c.l1_reads;
      ok = ok && preload == 27;
      if (cell.variant == "chaining") chain_cell = &cell;
    }
    detail += cell.variant + "=" + std::to_string(coeff_reads / pts) + "/pt ";
  }
  // Energy direction for any positive L1 weight.
  bool energy_ok = chain_cell && base_cell;
  if (energy_ok) {
    for (double w : {0.01, 15.0, 1000.0}) {
      EnergyParams p;
      p.e_l1_access = w;
      double ratio = energy_efficiency(chain_cell->result.counters, p) /
                     energy_efficiency(base_cell->result.counters, p);
      energy_ok = energy_ok && ratio > 1.0;
    }
  }
  ok = ok && energy_ok;
  report(10, ok,
         "coefficient L1 reads per point: " + detail +
             "(chaining preload=27 total); efficiency ratio chaining/base > 1 for e_l1 in "
             "{0.01,15,1000}: " + (energy_ok ? "yes" : "no"));
}

// ---- criterion 11: oracle cross-check ----
void criterion_11() {
  int mismatches = 0;
  for (uint64_t seed = 40000; seed < 41000; ++seed) {
    testing::GeneratedProgram g = testing::random_program(seed);
    OracleResult a = functional_reference(g.program);
    testing::NaiveResult b = testing::naive_interpret(g.program);
    if (!a.halted || !b.halted || a.mem != b.mem) ++mismatches;
  }
  report(11, mismatches == 0,
         "functional reference vs independent interpreter on 1000 random programs, mismatches=" +
             std::to_string(mismatches));
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  CoreConfig config;
  std::vector<MatrixCell> cells = run_matrix(config);
  criterion_5(cells);
  criterion_6(cells);
  criterion_7();
  criterion_8(cells);
  criterion_9(cells);
  criterion_10(cells);
  criterion_11();
  if (g_failures == 0) std::puts("all acceptance criteria passed");
  else std::printf("%d criteria FAILED\n", g_failures);
  return g_failures;
}
