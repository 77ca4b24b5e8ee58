// Copyright 2026 The chainsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chainsim/program.hpp"

namespace chainsim {

struct OracleOptions {
  uint64_t max_steps = 100'000'000;
  uint64_t mem_size = 0;       // 0 = same auto-sizing as the machine
  bool log_stores = false;     // record every memory write in program order
};

struct OracleResult {
  std::vector<uint8_t> mem;
  bool halted = false;
  bool faulted = false;
  std::string fault_reason;
  std::vector<std::pair<uint64_t, double>> stores;
};

/// Timing-free semantic reference: a sequential interpreter where each
/// chain-enabled register is an unbounded FIFO (write = enqueue, read =
/// dequeue, dequeue-from-empty faults), conventional registers are plain
/// cells and streams are iterators. For any program the cycle-accurate model
/// halts on, the final memory images are bit-identical.
OracleResult functional_reference(const Program& program, const OracleOptions& opts = {});

}  // namespace chainsim
