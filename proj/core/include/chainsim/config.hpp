// Copyright 2026 The chainsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "chainsim/machine.hpp"

namespace chainsim {

/// Parse a JSON config document. Accepted keys, all optional: fpu_depth,
/// pseudo_dual_issue, same_cycle_refill, mem_latency, ssr_count, max_cycles,
/// stall_deadlock_threshold. Unknown keys or out-of-range values throw.
CoreConfig load_core_config(const std::string& json_text);

std::string core_config_json(const CoreConfig& config);

}  // namespace chainsim
