// Copyright 2026 The chainsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "chainsim/machine.hpp"

namespace chainsim {

/// Per-event energy weights, arbitrary units. Defaults keep L1 accesses an
/// order of magnitude above register file accesses; only ratios and counted
/// events are meaningful, never absolute figures.
struct EnergyParams {
  double e_fpu_op = 10.0;
  double e_rf_access = 1.0;
  double e_l1_access = 15.0;
  double e_ssr_access = 3.0;
  double e_issue = 2.0;
  double e_cycle_static = 5.0;
};

/// FP compute issues per ROI cycle. Throws on a zero-cycle ROI.
double fpu_utilization(const Counters& c);

/// Linear event-weighted energy.
double energy(const Counters& c, const EnergyParams& p);

/// Useful FP operations per unit energy.
double energy_efficiency(const Counters& c, const EnergyParams& p);

struct BenchEntry {
  std::string label;    // variant
  std::string kernel;   // vecop / box3d1r / j3d27pt
  std::string baseline; // label of this kernel's baseline row
  Counters counters;
};

struct ComparisonRow {
  std::string label;
  std::string kernel;
  uint64_t cycles = 0;
  uint64_t fp_issued = 0;
  double utilization = 0.0;
  uint64_t stall_raw = 0;
  uint64_t stall_fifo_empty = 0;
  uint64_t stall_backpressure = 0;
  uint64_t l1_reads = 0;
  uint64_t l1_writes = 0;
  double energy = 0.0;
  double speedup = 1.0;    // baseline cycles / cycles
  double eff_ratio = 1.0;  // efficiency / baseline efficiency
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;      // one per entry, stable kernel/label order
  std::vector<ComparisonRow> geomeans;  // per label, across stencil kernels
};

/// Builds the comparison table. Every entry's `baseline` label must be
/// present within the same kernel group.
ComparisonTable compare(const std::vector<BenchEntry>& entries, const EnergyParams& params);

std::string comparison_csv(const ComparisonTable& table);
std::string comparison_json(const ComparisonTable& table, const CoreConfig& config,
                            bool with_meta);

}  // namespace chainsim
