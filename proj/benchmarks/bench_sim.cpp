// Copyright 2026 The chainsim authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "chainsim/assembler.hpp"
#include "chainsim/kernels.hpp"
#include "chainsim/machine.hpp"
#include "chainsim/oracle.hpp"

using namespace chainsim;

namespace {

void BM_VecopChainedRun(benchmark::State& state) {
  CoreConfig config;
  VecopSpec spec;
  spec.n = static_cast<uint64_t>(state.range(0));
  spec.variant = VecopVariant::Chained;
  KernelBundle bundle = build_vecop(spec, config);
  for (auto _ : state) {
    SimResult r = run(bundle.program, config);
    benchmark::DoNotOptimize(r.counters.cycles_roi);
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * state.range(0) * 2);
}
BENCHMARK(BM_VecopChainedRun)->Arg(256)->Arg(4096);

void BM_StencilChainingPlusRun(benchmark::State& state) {
  CoreConfig config;
  StencilSpec spec;
  spec.nx = spec.ny = spec.nz = static_cast<int>(state.range(0));
  spec.coeffs = j3d27pt_coeffs();
  spec.variant = StencilVariant::ChainingPlus;
  KernelBundle bundle = build_stencil(spec, config);
  for (auto _ : state) {
    SimResult r = run(bundle.program, config);
    benchmark::DoNotOptimize(r.counters.cycles_roi);
  }
  int64_t pts = static_cast<int64_t>(state.range(0));
  state.SetItemsProcessed(state.iterations() * pts * pts * pts * 27);
}
BENCHMARK(BM_StencilChainingPlusRun)->Arg(8)->Arg(16);

void BM_ParseEmittedStencil(benchmark::State& state) {
  CoreConfig config;
  StencilSpec spec;
  spec.nx = spec.ny = spec.nz = 8;
  spec.coeffs = box3d1r_coeffs();
  spec.variant = StencilVariant::Base;
  std::string text = emit_text(build_stencil(spec, config).program);
  for (auto _ : state) {
    ParseResult r = parse_program(text);
    benchmark::DoNotOptimize(std::get_if<Program>(&r));
  }
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) *
                          static_cast<int64_t>(text.size()));
}
BENCHMARK(BM_ParseEmittedStencil);

void BM_FunctionalReference(benchmark::State& state) {
  CoreConfig config;
  StencilSpec spec;
  spec.nx = spec.ny = spec.nz = static_cast<int>(state.range(0));
  spec.coeffs = j3d27pt_coeffs();
  spec.variant = StencilVariant::ChainingPlus;
  KernelBundle bundle = build_stencil(spec, config);
  for (auto _ : state) {
    OracleResult r = functional_reference(bundle.program);
    benchmark::DoNotOptimize(r.mem.data());
  }
}
BENCHMARK(BM_FunctionalReference)->Arg(8)->Arg(16);

}  // namespace

BENCHMARK_MAIN();
