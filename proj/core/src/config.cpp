// Copyright 2026 The chainsim authors
// SPDX-License-Identifier: Apache-2.0

#include "chainsim/config.hpp"

#include <stdexcept>

#include "json.hpp"

namespace chainsim {

CoreConfig load_core_config(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);  // throws on bad JSON
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");

  CoreConfig c;
  for (auto& [key, value] : j.items()) {
    if (key == "fpu_depth") c.fpu_depth = value.get<int>();
    else if (key == "pseudo_dual_issue") c.pseudo_dual_issue = value.get<bool>();
    else if (key == "same_cycle_refill") c.same_cycle_refill = value.get<bool>();
    else if (key == "mem_latency") c.mem_latency = value.get<int>();
    else if (key == "ssr_count") c.ssr_count = value.get<int>();
    else if (key == "max_cycles") c.max_cycles = value.get<uint64_t>();
    else if (key == "stall_deadlock_threshold") c.stall_deadlock_threshold = value.get<int>();
    else throw std::invalid_argument("unknown config key '" + key + "'");
  }
  if (c.fpu_depth < 1) throw std::invalid_argument("fpu_depth must be >= 1");
  if (c.mem_latency < 1) throw std::invalid_argument("mem_latency must be >= 1");
  if (c.ssr_count < 0 || c.ssr_count > 16) throw std::invalid_argument("ssr_count out of range");
  if (c.stall_deadlock_threshold < 1)
    throw std::invalid_argument("stall_deadlock_threshold must be >= 1");
  return c;
}

std::string core_config_json(const CoreConfig& c) {
  nlohmann::json j;
  j["fpu_depth"] = c.fpu_depth;
  j["pseudo_dual_issue"] = c.pseudo_dual_issue;
  j["same_cycle_refill"] = c.same_cycle_refill;
  j["mem_latency"] = c.mem_latency;
  j["ssr_count"] = c.ssr_count;
  j["max_cycles"] = c.max_cycles;
  j["stall_deadlock_threshold"] = c.stall_deadlock_threshold;
  return j.dump(2) + "\n";
}

}  // namespace chainsim
