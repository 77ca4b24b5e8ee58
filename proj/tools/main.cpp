// Copyright 2026 The chainsim authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "chainsim/assembler.hpp"
#include "chainsim/config.hpp"
#include "chainsim/kernels.hpp"
#include "chainsim/machine.hpp"
#include "chainsim/oracle.hpp"
#include "chainsim/report.hpp"

namespace {

using namespace chainsim;

constexpr int kExitOk = 0;
constexpr int kExitMismatch = 1;
constexpr int kExitSimError = 2;
constexpr int kExitUsage = 3;

struct CommonOpts {
  std::string program_path;
  std::string kernel;
  std::string variant = "base";
  uint64_t n = 1024;
  int nx = 16, ny = 16, nz = 16;
  std::string config_path;
  uint64_t seed = 1;
  std::string out_path;
  std::string trace_out;
  std::string emit_asm_path;
  bool no_meta = false;
  int fpu_depth_override = 0;
  bool no_dual_issue = false;
  bool no_same_cycle_refill = false;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_kernel) {
  if (with_kernel) {
    cmd->add_option("--program", o.program_path, "assembly source file");
    cmd->add_option("--kernel", o.kernel, "generated kernel: vecop|box3d1r|j3d27pt");
    cmd->add_option("--variant", o.variant,
                    "vecop: base|unroll4|chained; stencil: base--|base-|base|chaining|chaining+");
    cmd->add_option("--n", o.n, "vecop element count");
    cmd->add_option("--nx", o.nx, "stencil interior x");
    cmd->add_option("--ny", o.ny, "stencil interior y");
    cmd->add_option("--nz", o.nz, "stencil interior z");
    cmd->add_option("--seed", o.seed, "input data seed");
  }
  cmd->add_option("--config", o.config_path, "JSON core config file");
  cmd->add_option("--fpu-depth", o.fpu_depth_override, "override the FPU pipeline depth");
  cmd->add_flag("--no-dual-issue", o.no_dual_issue, "strict single-issue front end");
  cmd->add_flag("--no-same-cycle-refill", o.no_same_cycle_refill,
                "register the empty-head FIFO refill");
}

CoreConfig make_config(const CommonOpts& o) {
  CoreConfig c;
  if (!o.config_path.empty()) {
    std::ifstream f(o.config_path);
    if (!f) throw std::invalid_argument("cannot open config file " + o.config_path);
    std::stringstream ss;
    ss << f.rdbuf();
    c = load_core_config(ss.str());
  }
  if (o.fpu_depth_override > 0) c.fpu_depth = o.fpu_depth_override;
  if (o.no_dual_issue) c.pseudo_dual_issue = false;
  if (o.no_same_cycle_refill) c.same_cycle_refill = false;
  return c;
}

struct Job {
  KernelBundle bundle;  // expected_memory empty when running a source file
  std::string kernel_name;
};

Job make_job(const CommonOpts& o, const CoreConfig& config) {
  if (!o.program_path.empty() && !o.kernel.empty())
    throw std::invalid_argument("--program and --kernel are mutually exclusive");
  Job job;
  if (!o.program_path.empty()) {
    std::ifstream f(o.program_path);
    if (!f) throw std::invalid_argument("cannot open " + o.program_path);
    std::stringstream ss;
    ss << f.rdbuf();
    ParseResult r = parse_program(ss.str());
    if (auto* diags = std::get_if<std::vector<Diagnostic>>(&r)) {
      for (const Diagnostic& d : *diags) std::cerr << o.program_path << ": " << format_diagnostic(d) << "\n";
      throw std::invalid_argument("assembly failed");
    }
    job.bundle.program = std::move(std::get<Program>(r));
    job.kernel_name = o.program_path;
    return job;
  }
  if (o.kernel == "vecop") {
    VecopSpec spec;
    spec.n = o.n;
    spec.seed = o.seed;
    auto v = parse_vecop_variant(o.variant);
    if (!v) throw std::invalid_argument("unknown vecop variant '" + o.variant + "'");
    spec.variant = *v;
    job.bundle = build_vecop(spec, config);
    job.kernel_name = "vecop";
    return job;
  }
  if (o.kernel == "box3d1r" || o.kernel == "j3d27pt") {
    StencilSpec spec;
    spec.kind = o.kernel == "box3d1r" ? StencilKind::Box3d1r : StencilKind::J3d27pt;
    spec.coeffs = default_coeffs(spec.kind);
    spec.nx = o.nx;
    spec.ny = o.ny;
    spec.nz = o.nz;
    spec.seed = o.seed;
    auto v = parse_stencil_variant(o.variant);
    if (!v) throw std::invalid_argument("unknown stencil variant '" + o.variant + "'");
    spec.variant = *v;
    job.bundle = build_stencil(spec, config);
    job.kernel_name = o.kernel;
    return job;
  }
  throw std::invalid_argument("need --program or --kernel vecop|box3d1r|j3d27pt");
}

bool verify_memory(const SimResult& result, const KernelBundle& bundle, std::string* why) {
  for (const auto& [base, values] : bundle.expected_memory) {
    for (size_t i = 0; i < values.size(); ++i) {
      uint64_t addr = base + 8 * i;
      if (!result.final_state.mem_ok(addr)) {
        *why = "expected memory out of range";
        return false;
      }
      double got = result.final_state.mem_read_f64(addr);
      uint64_t gb, eb;
      std::memcpy(&gb, &got, 8);
      std::memcpy(&eb, &values[i], 8);
      if (gb != eb) {
        *why = "mismatch at 0x" + std::to_string(addr) + ": got " + std::to_string(got) +
               ", expected " + std::to_string(values[i]);
        return false;
      }
    }
  }
  return true;
}

bool oracle_matches(const Program& program, const SimResult& result, std::string* why) {
  OracleResult oracle = functional_reference(program);
  if (oracle.faulted) {
    *why = "oracle faulted: " + oracle.fault_reason;
    return false;
  }
  if (oracle.mem.size() != result.final_state.mem.size()) {
    *why = "memory size mismatch vs oracle";
    return false;
  }
  if (oracle.mem != result.final_state.mem) {
    *why = "final memory differs from the functional reference";
    return false;
  }
  return true;
}

void print_summary(const Job& job, const SimResult& r) {
  const Counters& c = r.counters;
  std::printf("program:   %s\n", job.kernel_name.c_str());
  std::printf("outcome:   %s%s%s\n", outcome_name(r.outcome).c_str(),
              r.fault_reason.empty() ? "" : " — ", r.fault_reason.c_str());
  std::printf("cycles:    %llu (roi) / %llu (total)\n",
              static_cast<unsigned long long>(c.cycles_roi),
              static_cast<unsigned long long>(r.counters_total.cycles_roi));
  std::printf("fp_issued: %llu\n", static_cast<unsigned long long>(c.fp_issued));
  if (c.cycles_roi > 0) std::printf("fpu_util:  %.4f\n", fpu_utilization(c));
  std::printf("stalls:    raw=%llu fifo_empty=%llu backpressure=%llu mem=%llu\n",
              static_cast<unsigned long long>(c.stall_raw),
              static_cast<unsigned long long>(c.stall_fifo_empty),
              static_cast<unsigned long long>(c.stall_backpressure),
              static_cast<unsigned long long>(c.stall_mem));
  std::printf("l1:        reads=%llu writes=%llu  ssr: reads=%llu writes=%llu\n",
              static_cast<unsigned long long>(c.l1_reads),
              static_cast<unsigned long long>(c.l1_writes),
              static_cast<unsigned long long>(c.ssr_elem_reads),
              static_cast<unsigned long long>(c.ssr_elem_writes));
}

std::string trace_text(const SimResult& r, const Program& program) {
  std::string out = "cycle\tfp_slot\tint_slot\tfifo_occ\tstall\n";
  for (const TraceRow& row : r.trace) {
    out += std::to_string(row.cycle) + "\t";
    if (row.fp_instr) out += instr_text(*row.fp_instr, &program);
    else if (row.fp_stall) out += "-";
    else out += "-";
    out += "\t";
    out += row.int_instr ? instr_text(*row.int_instr, &program) : "-";
    out += "\t";
    if (row.fifo_occ.empty()) {
      out += "-";
    } else {
      bool first = true;
      for (auto [reg, occ] : row.fifo_occ) {
        if (!first) out += ",";
        out += freg_name(FReg(reg)) + ":" + std::to_string(occ);
        first = false;
      }
    }
    out += "\t";
    out += row.fp_stall ? stall_reason_name(*row.fp_stall) : "-";
    out += "\n";
  }
  return out;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::invalid_argument("cannot write " + path);
  f << text;
}

int cmd_run(const CommonOpts& o, bool tracing) {
  CoreConfig config = make_config(o);
  config.collect_trace = tracing;
  Job job = make_job(o, config);
  if (!o.emit_asm_path.empty()) write_file(o.emit_asm_path, emit_text(job.bundle.program));

  SimResult result = run(job.bundle.program, config);
  print_summary(job, result);

  if (tracing) {
    std::string text = trace_text(result, job.bundle.program);
    if (!o.trace_out.empty()) write_file(o.trace_out, text);
    else std::fputs(text.c_str(), stdout);
  }

  if (result.outcome != Outcome::Halted) {
    std::cerr << "error: simulation ended with " << outcome_name(result.outcome)
              << (result.fault_reason.empty() ? "" : ": " + result.fault_reason) << "\n";
    return kExitSimError;
  }
  std::string why;
  if (!verify_memory(result, job.bundle, &why) ||
      !oracle_matches(job.bundle.program, result, &why)) {
    std::cerr << "error: " << why << "\n";
    return kExitMismatch;
  }
  std::printf("oracle:    match\n");
  return kExitOk;
}

int cmd_bench(const CommonOpts& o) {
  CoreConfig config = make_config(o);
  std::vector<BenchEntry> entries;
  std::vector<std::pair<std::string, std::string>> commands;

  auto run_cell = [&](const std::string& kernel, const std::string& variant,
                      const std::string& baseline) {
    CommonOpts cell = o;
    cell.kernel = kernel;
    cell.variant = variant;
    Job job = make_job(cell, config);
    SimResult r = run(job.bundle.program, config);
    if (r.outcome != Outcome::Halted)
      throw std::runtime_error(kernel + "/" + variant + " ended with " + outcome_name(r.outcome) +
                               (r.fault_reason.empty() ? "" : ": " + r.fault_reason));
    std::string why;
    if (!verify_memory(r, job.bundle, &why))
      throw std::runtime_error(kernel + "/" + variant + ": " + why);
    entries.push_back({variant, kernel, baseline, r.counters});
    std::string cmd = "chainsim run --kernel " + kernel + " --variant " + variant;
    if (kernel == "vecop") cmd += " --n " + std::to_string(o.n);
    else cmd += " --nx " + std::to_string(o.nx) + " --ny " + std::to_string(o.ny) + " --nz " +
                std::to_string(o.nz);
    cmd += " --seed " + std::to_string(o.seed);
    commands.emplace_back(kernel + "/" + variant, cmd);
  };

  for (const char* v : {"base", "unroll4", "chained"}) run_cell("vecop", v, "base");
  for (const char* k : {"box3d1r", "j3d27pt"})
    for (const char* v : {"base--", "base-", "base", "chaining", "chaining+"})
      run_cell(k, v, "base-");

  ComparisonTable table = compare(entries, EnergyParams{});
  std::string csv = comparison_csv(table);
  if (!o.out_path.empty()) {
    write_file(o.out_path, csv);
    std::string json_path = o.out_path;
    size_t dot = json_path.find_last_of('.');
    json_path = (dot == std::string::npos ? json_path : json_path.substr(0, dot)) + ".json";
    write_file(json_path, comparison_json(table, config, !o.no_meta));
    std::printf("wrote %s and %s\n", o.out_path.c_str(), json_path.c_str());
  } else {
    std::fputs(csv.c_str(), stdout);
  }
  std::puts("reproduce any row with:");
  for (auto& [label, cmd] : commands) std::printf("  %-20s %s\n", label.c_str(), cmd.c_str());
  return kExitOk;
}

int cmd_emit_asm(const CommonOpts& o) {
  CoreConfig config = make_config(o);
  Job job = make_job(o, config);
  std::string text = emit_text(job.bundle.program);
  if (!o.out_path.empty()) write_file(o.out_path, text);
  else std::fputs(text.c_str(), stdout);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cycle-accurate core model with stream registers and register chaining"};
  app.require_subcommand(1);

  CommonOpts run_opts, trace_opts, bench_opts, emit_opts;

  CLI::App* c_run = app.add_subcommand("run", "run a program and verify against the oracle");
  add_common(c_run, run_opts, true);
  c_run->add_option("--emit-asm", run_opts.emit_asm_path, "also dump the program text");

  CLI::App* c_trace = app.add_subcommand("trace", "run and emit the per-cycle issue trace");
  add_common(c_trace, trace_opts, true);
  c_trace->add_option("--trace-out", trace_opts.trace_out, "trace output path (default stdout)");

  CLI::App* c_bench = app.add_subcommand("bench", "run the full kernel/variant matrix");
  add_common(c_bench, bench_opts, true);
  c_bench->add_option("--out", bench_opts.out_path, "CSV output path (JSON written beside it)");
  c_bench->add_flag("--no-meta", bench_opts.no_meta, "omit the meta block from the JSON output");

  CLI::App* c_emit = app.add_subcommand("emit-asm", "dump a generated kernel as assembly");
  add_common(c_emit, emit_opts, true);
  c_emit->add_option("--out", emit_opts.out_path, "output path (default stdout)");

  try {
    app.parse(argc, argv);
    if (c_run->parsed()) return cmd_run(run_opts, false);
    if (c_trace->parsed()) return cmd_run(trace_opts, true);
    if (c_bench->parsed()) return cmd_bench(bench_opts);
    if (c_emit->parsed()) return cmd_emit_asm(emit_opts);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? kExitUsage : kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
