// Copyright 2026 The chainsim authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <random>

#include "doctest.h"

#include "chainsim/report.hpp"

using namespace chainsim;

TEST_CASE("utilization is issues over region cycles") {
  Counters c;
  c.fp_issued = 93;
  c.cycles_roi = 100;
  CHECK(fpu_utilization(c) == doctest::Approx(0.93));
  c.cycles_roi = 0;
  CHECK_THROWS_AS((void)fpu_utilization(c), std::domain_error);
}

TEST_CASE("utilization decreases when pure stall cycles are added") {
  Counters c;
  c.fp_issued = 50;
  c.cycles_roi = 60;
  double before = fpu_utilization(c);
  c.cycles_roi += 7;  // stalls only
  c.stall_raw += 7;
  CHECK(fpu_utilization(c) < before);
}

TEST_CASE("energy of all-zero counters is zero") {
  Counters c;
  CHECK(energy(c, EnergyParams{}) == 0.0);
}

TEST_CASE("energy difference is exactly linear in one event count") {
  EnergyParams p;
  Counters a;
  a.fp_issued = 1000;
  a.cycles_roi = 1200;
  a.l1_reads = 27 * 4096;
  a.rf_reads = 5000;
  Counters b = a;
  b.l1_reads = 0;
  CHECK(energy(a, p) - energy(b, p) == doctest::Approx(27 * 4096 * p.e_l1_access));
}

TEST_CASE("scaling all weights scales energy and preserves ratios") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    auto r = [&] { return static_cast<double>(rng() % 10000); };
    Counters a, b;
    a.fp_issued = 100 + rng() % 1000;
    a.cycles_roi = a.fp_issued + rng() % 1000;
    a.l1_reads = rng() % 5000;
    a.rf_reads = rng() % 5000;
    a.ssr_elem_reads = rng() % 5000;
    a.int_issued = rng() % 500;
    b.fp_issued = 100 + rng() % 1000;
    b.cycles_roi = b.fp_issued + rng() % 1000;
    b.l1_reads = rng() % 5000;
    b.rf_writes = rng() % 5000;
    EnergyParams p;
    p.e_fpu_op = r();
    p.e_rf_access = r();
    p.e_l1_access = r() + 1;
    p.e_ssr_access = r();
    p.e_issue = r();
    p.e_cycle_static = r() + 1;
    double alpha = 3.25;
    EnergyParams q = p;
    q.e_fpu_op *= alpha;
    q.e_rf_access *= alpha;
    q.e_l1_access *= alpha;
    q.e_ssr_access *= alpha;
    q.e_issue *= alpha;
    q.e_cycle_static *= alpha;
    CHECK(energy(a, q) == doctest::Approx(alpha * energy(a, p)));
    double ratio_p = energy_efficiency(a, p) / energy_efficiency(b, p);
    double ratio_q = energy_efficiency(a, q) / energy_efficiency(b, q);
    CHECK(ratio_q == doctest::Approx(ratio_p));
  }
}

namespace {

BenchEntry entry(const std::string& label, const std::string& kernel, uint64_t cycles,
                 uint64_t fp, const std::string& baseline) {
  BenchEntry e;
  e.label = label;
  e.kernel = kernel;
  e.baseline = baseline;
  e.counters.cycles_roi = cycles;
  e.counters.fp_issued = fp;
  e.counters.rf_reads = fp;
  return e;
}

}  // namespace

TEST_CASE("single entry compares to itself with speedup one") {
  auto table = compare({entry("base", "vecop", 100, 40, "base")}, EnergyParams{});
  REQUIRE(table.rows.size() == 1);
  CHECK(table.rows[0].speedup == doctest::Approx(1.0));
  CHECK(table.rows[0].eff_ratio == doctest::Approx(1.0));
}

TEST_CASE("speedup arithmetic") {
  auto table = compare({entry("base", "k", 100, 40, "base"), entry("opt", "k", 96, 40, "base")},
                       EnergyParams{});
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[1].speedup == doctest::Approx(100.0 / 96.0));
}

TEST_CASE("missing baseline label throws") {
  CHECK_THROWS_AS((void)compare({entry("opt", "k", 96, 40, "base")}, EnergyParams{}),
                  std::invalid_argument);
}

TEST_CASE("comparison is invariant under entry permutation") {
  std::vector<BenchEntry> entries = {
      entry("base", "s1", 200, 100, "base"), entry("opt", "s1", 150, 100, "base"),
      entry("base", "s2", 400, 200, "base"), entry("opt", "s2", 300, 200, "base")};
  auto t1 = compare(entries, EnergyParams{});
  std::reverse(entries.begin(), entries.end());
  auto t2 = compare(entries, EnergyParams{});
  REQUIRE(t1.rows.size() == t2.rows.size());
  for (const ComparisonRow& r1 : t1.rows) {
    bool found = false;
    for (const ComparisonRow& r2 : t2.rows)
      if (r1.label == r2.label && r1.kernel == r2.kernel && r1.speedup == r2.speedup &&
          r1.energy == r2.energy)
        found = true;
    CHECK(found);
  }
  // Geomeans are identical as sets as well.
  REQUIRE(t1.geomeans.size() == t2.geomeans.size());
  for (size_t i = 0; i < t1.geomeans.size(); ++i) {
    CHECK(t1.geomeans[i].label == t2.geomeans[i].label);
    CHECK(t1.geomeans[i].speedup == doctest::Approx(t2.geomeans[i].speedup));
  }
}

TEST_CASE("geomean spans the stencil kernels") {
  std::vector<BenchEntry> entries = {
      entry("base", "s1", 200, 100, "base"), entry("opt", "s1", 100, 100, "base"),
      entry("base", "s2", 400, 200, "base"), entry("opt", "s2", 100, 200, "base")};
  auto t = compare(entries, EnergyParams{});
  double opt_geo = 0;
  for (const ComparisonRow& g : t.geomeans)
    if (g.label == "opt") opt_geo = g.speedup;
  CHECK(opt_geo == doctest::Approx(std::sqrt(2.0 * 4.0)));
}

TEST_CASE("csv has the exact column header") {
  auto t = compare({entry("base", "k", 100, 40, "base")}, EnergyParams{});
  std::string csv = comparison_csv(t);
  CHECK(csv.rfind("label,kernel,cycles,fp_issued,utilization,stall_raw,stall_fifo_empty,"
                  "stall_backpressure,l1_reads,l1_writes,energy,speedup,eff_ratio\n",
                  0) == 0);
}

TEST_CASE("json omits meta when asked") {
  auto t = compare({entry("base", "k", 100, 40, "base")}, EnergyParams{});
  CoreConfig c;
  CHECK(comparison_json(t, c, true).find("\"meta\"") != std::string::npos);
  CHECK(comparison_json(t, c, false).find("\"meta\"") == std::string::npos);
}
