// Copyright 2026 The chainsim authors
// SPDX-License-Identifier: Apache-2.0

#include <map>

#include <algorithm>
#include <cstring>

#include "doctest.h"

#include "chainsim/machine.hpp"
#include "chainsim/oracle.hpp"
#include "support/generators.hpp"

using namespace chainsim;

namespace {

struct FifoCheck {
  bool order_ok = true;
  bool no_lost_update = true;
  int max_occupancy = 0;
};

// Replays the FIFO event log: pops must consume push tokens in order and
// exactly once; running occupancy must stay within capacity.
FifoCheck check_fifo_events(const std::vector<FifoEvent>& events) {
  FifoCheck out;
  std::map<int, std::vector<uint64_t>> pushed, popped;
  std::map<int, int> occ;
  for (const FifoEvent& e : events) {
    if (e.kind == FifoEventKind::Push) {
      pushed[e.reg].push_back(e.bits);
      out.max_occupancy = std::max(out.max_occupancy, ++occ[e.reg]);
    } else if (e.kind == FifoEventKind::Pop) {
      popped[e.reg].push_back(e.bits);
      --occ[e.reg];
    }
  }
  for (auto& [reg, pops] : popped) {
    auto& pushes = pushed[reg];
    if (pops.size() > pushes.size()) {
      out.no_lost_update = false;
      continue;
    }
    for (size_t i = 0; i < pops.size(); ++i)
      if (pops[i] != pushes[i]) out.order_ok = false;
  }
  for (auto& [reg, pushes] : pushed)
    if (popped[reg].size() != pushes.size()) out.no_lost_update = false;  // drained programs
  return out;
}

}  // namespace

TEST_CASE("fifo ordering, no lost updates and bounded occupancy hold on random programs") {
  CoreConfig c;
  c.collect_fifo_events = true;
  int with_chaining = 0;
  for (uint64_t seed = 2000; seed < 2400; ++seed) {
    testing::GeneratedProgram g = testing::random_program(seed);
    SimResult r = run(g.program, c);
    REQUIRE(r.outcome == Outcome::Halted);
    FifoCheck chk = check_fifo_events(r.fifo_events);
    CHECK(chk.order_ok);
    CHECK(chk.no_lost_update);
    CHECK(chk.max_occupancy <= c.fpu_depth + 1);
    if (!r.fifo_events.empty()) ++with_chaining;
  }
  CHECK(with_chaining > 300);  // the property actually got exercised
}

TEST_CASE("baseline equivalence: mask-free runs match the chaining-disabled build") {
  testing::RandomProgramOptions opt;
  opt.use_chaining = false;
  for (uint64_t seed = 3000; seed < 3200; ++seed) {
    testing::GeneratedProgram g = testing::random_program(seed, opt);
    CoreConfig on;
    CoreConfig off;
    off.chaining_paths = false;
    SimResult r1 = run(g.program, on);
    SimResult r2 = run(g.program, off);
    REQUIRE(r1.outcome == Outcome::Halted);
    REQUIRE(r2.outcome == Outcome::Halted);
    CHECK(r1.final_state.cycle == r2.final_state.cycle);
    CHECK(r1.counters == r2.counters);
    CHECK(r1.final_state.mem == r2.final_state.mem);
    bool regs_equal = true;
    for (int i = 0; i < 32; ++i) {
      uint64_t a, b;
      std::memcpy(&a, &r1.final_state.fregs[i], 8);
      std::memcpy(&b, &r2.final_state.fregs[i], 8);
      if (a != b) regs_equal = false;
      if (r1.final_state.xregs[i] != r2.final_state.xregs[i]) regs_equal = false;
    }
    CHECK(regs_equal);
  }
}

TEST_CASE("simulation is deterministic across repeated runs") {
  CoreConfig c;
  c.collect_fifo_events = true;
  for (uint64_t seed = 4000; seed < 4020; ++seed) {
    testing::GeneratedProgram g = testing::random_program(seed);
    SimResult r1 = run(g.program, c);
    SimResult r2 = run(g.program, c);
    CHECK(r1.final_state.cycle == r2.final_state.cycle);
    CHECK(r1.counters == r2.counters);
    CHECK(r1.final_state.mem == r2.final_state.mem);
    CHECK(r1.fifo_events.size() == r2.fifo_events.size());
  }
}
