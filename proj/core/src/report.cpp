// Copyright 2026 The chainsim authors
// SPDX-License-Identifier: Apache-2.0

#include "chainsim/report.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

#include "json.hpp"

namespace chainsim {

double fpu_utilization(const Counters& c) {
  if (c.cycles_roi == 0) throw std::domain_error("utilization of a zero-cycle region");
  return static_cast<double>(c.fp_issued) / static_cast<double>(c.cycles_roi);
}

double energy(const Counters& c, const EnergyParams& p) {
  double e = 0.0;
  e += p.e_fpu_op * static_cast<double>(c.fp_issued);
  e += p.e_rf_access * static_cast<double>(c.rf_reads + c.rf_writes);
  e += p.e_l1_access * static_cast<double>(c.l1_reads + c.l1_writes);
  e += p.e_ssr_access * static_cast<double>(c.ssr_elem_reads + c.ssr_elem_writes);
  e += p.e_issue * static_cast<double>(c.fp_issued + c.int_issued);
  e += p.e_cycle_static * static_cast<double>(c.cycles_roi);
  return e;
}

double energy_efficiency(const Counters& c, const EnergyParams& p) {
  double e = energy(c, p);
  if (e <= 0.0) throw std::domain_error("efficiency of a zero-energy run");
  return static_cast<double>(c.fp_issued) / e;
}

ComparisonTable compare(const std::vector<BenchEntry>& entries, const EnergyParams& params) {
  if (entries.empty()) throw std::invalid_argument("compare: no entries");

  // Baseline lookup per (kernel, label).
  std::map<std::pair<std::string, std::string>, const BenchEntry*> by_key;
  for (const BenchEntry& e : entries) by_key[{e.kernel, e.label}] = &e;

  ComparisonTable table;
  for (const BenchEntry& e : entries) {
    auto base_it = by_key.find({e.kernel, e.baseline});
    if (base_it == by_key.end())
      throw std::invalid_argument("compare: missing baseline '" + e.baseline + "' for kernel '" +
                                  e.kernel + "'");
    const Counters& bc = base_it->second->counters;
    ComparisonRow r;
    r.label = e.label;
    r.kernel = e.kernel;
    r.cycles = e.counters.cycles_roi;
    r.fp_issued = e.counters.fp_issued;
    r.utilization = fpu_utilization(e.counters);
    r.stall_raw = e.counters.stall_raw;
    r.stall_fifo_empty = e.counters.stall_fifo_empty;
    r.stall_backpressure = e.counters.stall_backpressure;
    r.l1_reads = e.counters.l1_reads;
    r.l1_writes = e.counters.l1_writes;
    r.energy = energy(e.counters, params);
    r.speedup = static_cast<double>(bc.cycles_roi) / static_cast<double>(e.counters.cycles_roi);
    r.eff_ratio = energy_efficiency(e.counters, params) / energy_efficiency(bc, params);
    table.rows.push_back(r);
  }

  // Geomeans across the stencil kernels, one row per label present in all of
  // them.
  std::map<std::string, std::vector<const ComparisonRow*>> stencil_rows;
  size_t stencil_kernels = 0;
  {
    std::map<std::string, bool> kernels_seen;
    for (const ComparisonRow& r : table.rows)
      if (r.kernel != "vecop") kernels_seen[r.kernel] = true;
    stencil_kernels = kernels_seen.size();
  }
  for (const ComparisonRow& r : table.rows)
    if (r.kernel != "vecop") stencil_rows[r.label].push_back(&r);
  for (const auto& [label, rows] : stencil_rows) {
    if (rows.size() != stencil_kernels || stencil_kernels == 0) continue;
    ComparisonRow g;
    g.label = label;
    g.kernel = "geomean";
    double su = 1.0, er = 1.0, ut = 1.0;
    for (const ComparisonRow* r : rows) {
      su *= r->speedup;
      er *= r->eff_ratio;
      ut *= r->utilization;
    }
    double inv = 1.0 / static_cast<double>(rows.size());
    g.speedup = std::pow(su, inv);
    g.eff_ratio = std::pow(er, inv);
    g.utilization = std::pow(ut, inv);
    table.geomeans.push_back(g);
  }
  return table;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

std::string comparison_csv(const ComparisonTable& table) {
  std::string out =
      "label,kernel,cycles,fp_issued,utilization,stall_raw,stall_fifo_empty,"
      "stall_backpressure,l1_reads,l1_writes,energy,speedup,eff_ratio\n";
  auto emit = [&](const ComparisonRow& r, bool geo) {
    out += r.label + "," + r.kernel + ",";
    if (geo) {
      out += ",,";
      out += fmt(r.utilization) + ",,,,,,,";
    } else {
      out += std::to_string(r.cycles) + "," + std::to_string(r.fp_issued) + "," +
             fmt(r.utilization) + "," + std::to_string(r.stall_raw) + "," +
             std::to_string(r.stall_fifo_empty) + "," + std::to_string(r.stall_backpressure) +
             "," + std::to_string(r.l1_reads) + "," + std::to_string(r.l1_writes) + "," +
             fmt(r.energy) + ",";
    }
    out += fmt(r.speedup) + "," + fmt(r.eff_ratio) + "\n";
  };
  for (const ComparisonRow& r : table.rows) emit(r, false);
  for (const ComparisonRow& r : table.geomeans) emit(r, true);
  return out;
}

std::string comparison_json(const ComparisonTable& table, const CoreConfig& config,
                            bool with_meta) {
  nlohmann::json j;
  auto row_json = [](const ComparisonRow& r) {
    nlohmann::json o;
    o["label"] = r.label;
    o["kernel"] = r.kernel;
    o["cycles"] = r.cycles;
    o["fp_issued"] = r.fp_issued;
    o["utilization"] = r.utilization;
    o["stall_raw"] = r.stall_raw;
    o["stall_fifo_empty"] = r.stall_fifo_empty;
    o["stall_backpressure"] = r.stall_backpressure;
    o["l1_reads"] = r.l1_reads;
    o["l1_writes"] = r.l1_writes;
    o["energy"] = r.energy;
    o["speedup"] = r.speedup;
    o["eff_ratio"] = r.eff_ratio;
    return o;
  };
  j["rows"] = nlohmann::json::array();
  for (const ComparisonRow& r : table.rows) j["rows"].push_back(row_json(r));
  j["geomeans"] = nlohmann::json::array();
  for (const ComparisonRow& r : table.geomeans) j["geomeans"].push_back(row_json(r));
  if (with_meta) {
    nlohmann::json meta;
    meta["version"] = "0.1.0";
    meta["config"] = {{"fpu_depth", config.fpu_depth},
                      {"pseudo_dual_issue", config.pseudo_dual_issue},
                      {"same_cycle_refill", config.same_cycle_refill},
                      {"mem_latency", config.mem_latency},
                      {"ssr_count", config.ssr_count},
                      {"max_cycles", config.max_cycles},
                      {"stall_deadlock_threshold", config.stall_deadlock_threshold}};
    j["meta"] = meta;
  }
  return j.dump(2) + "\n";
}

}  // namespace chainsim
