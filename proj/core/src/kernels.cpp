// Copyright 2026 The chainsim authors
// SPDX-License-Identifier: Apache-2.0

#include "chainsim/kernels.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace chainsim {

namespace {

// Memory layout shared by all generated kernels.
constexpr uint64_t kScalarBase = 0x8000;   // vecop b / stencil coefficients
constexpr uint64_t kArrayBase = 0x10000;

constexpr uint8_t kStreamIn0 = 0;   // ft0
constexpr uint8_t kStreamIn1 = 1;   // ft1
constexpr uint8_t kStreamOut = 2;   // ft2

}  // namespace

std::string vecop_variant_name(VecopVariant v) {
  switch (v) {
    case VecopVariant::Base: return "base";
    case VecopVariant::Unroll4: return "unroll4";
    case VecopVariant::Chained: return "chained";
  }
  return "?";
}

std::string stencil_variant_name(StencilVariant v) {
  switch (v) {
    case StencilVariant::BaseMM: return "base--";
    case StencilVariant::BaseM: return "base-";
    case StencilVariant::Base: return "base";
    case StencilVariant::Chaining: return "chaining";
    case StencilVariant::ChainingPlus: return "chaining+";
  }
  return "?";
}

std::string stencil_kind_name(StencilKind k) {
  return k == StencilKind::Box3d1r ? "box3d1r" : "j3d27pt";
}

std::optional<VecopVariant> parse_vecop_variant(const std::string& name) {
  if (name == "base") return VecopVariant::Base;
  if (name == "unroll4" || name == "unroll") return VecopVariant::Unroll4;
  if (name == "chained" || name == "chaining") return VecopVariant::Chained;
  return std::nullopt;
}

std::optional<StencilVariant> parse_stencil_variant(const std::string& name) {
  if (name == "base--" || name == "basemm") return StencilVariant::BaseMM;
  if (name == "base-" || name == "basem") return StencilVariant::BaseM;
  if (name == "base") return StencilVariant::Base;
  if (name == "chaining") return StencilVariant::Chaining;
  if (name == "chaining+" || name == "chainingplus") return StencilVariant::ChainingPlus;
  return std::nullopt;
}

std::array<double, 27> box3d1r_coeffs() {
  std::array<double, 27> c;
  c.fill(1.0 / 27.0);
  return c;
}

std::array<double, 27> j3d27pt_coeffs() {
  std::array<double, 27> c;
  for (int k = 0; k < 27; ++k) {
    int dx = k % 3 - 1, dy = (k / 3) % 3 - 1, dz = k / 9 - 1;
    int dist = std::abs(dx) + std::abs(dy) + std::abs(dz);
    c[k] = (dist == 0 ? 8.0 : dist == 1 ? 4.0 : dist == 2 ? 2.0 : 1.0) / 64.0;
  }
  return c;
}

std::array<double, 27> default_coeffs(StencilKind kind) {
  return kind == StencilKind::Box3d1r ? box3d1r_coeffs() : j3d27pt_coeffs();
}

std::vector<double> seeded_doubles(uint64_t seed, size_t count) {
  std::mt19937_64 rng(seed);
  std::vector<double> out(count);
  for (size_t i = 0; i < count; ++i) {
    // Top 53 bits mapped to [-1, 1); bit-stable across platforms.
    out[i] = static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
  }
  return out;
}

std::vector<double> reference_vecop(const VecopSpec& spec) {
  std::vector<double> c = spec.c_data ? *spec.c_data : seeded_doubles(spec.seed, spec.n);
  std::vector<double> d = spec.d_data ? *spec.d_data : seeded_doubles(spec.seed + 1, spec.n);
  std::vector<double> a(spec.n);
  for (uint64_t i = 0; i < spec.n; ++i) {
    double s = c[i] + d[i];
    a[i] = s * spec.b;
  }
  return a;
}

std::vector<double> stencil_input(const StencilSpec& spec) {
  size_t total = static_cast<size_t>(spec.nx + 2) * (spec.ny + 2) * (spec.nz + 2);
  if (spec.input) {
    if (spec.input->size() != total)
      throw std::invalid_argument("stencil input size mismatch");
    return *spec.input;
  }
  return seeded_doubles(spec.seed, total);
}

std::vector<double> reference_stencil(const StencilSpec& spec, const std::vector<double>& input) {
  const int px = spec.nx + 2, py = spec.ny + 2;
  auto at = [&](int x, int y, int z) -> double {
    return input[static_cast<size_t>(x) + static_cast<size_t>(y) * px +
                 static_cast<size_t>(z) * px * py];
  };
  std::vector<double> out(static_cast<size_t>(spec.nx) * spec.ny * spec.nz);
  size_t o = 0;
  for (int z = 1; z <= spec.nz; ++z) {
    for (int y = 1; y <= spec.ny; ++y) {
      for (int x = 1; x <= spec.nx; ++x) {
        // k=0 is a plain multiply, then fused multiply-adds in ascending k,
        // matching the generated instruction stream exactly.
        double acc = at(x - 1, y - 1, z - 1) * spec.coeffs[0];
        for (int k = 1; k < 27; ++k) {
          int dx = k % 3 - 1, dy = (k / 3) % 3 - 1, dz = k / 9 - 1;
          acc = std::fma(at(x + dx, y + dy, z + dz), spec.coeffs[k], acc);
        }
        out[o++] = acc;
      }
    }
  }
  return out;
}

namespace {

struct Asm {
  Program prog;
  std::map<std::string, int32_t> marks;

  int32_t here() const { return static_cast<int32_t>(prog.instrs.size()); }
  void emit(const Instr& i) { prog.instrs.push_back(i); }
  void label(const std::string& name) {
    prog.labels[name] = here();
    marks[name] = here();
  }
  // Branch back to a previously marked label.
  void bne_to(XReg a, XReg b, const std::string& name) {
    emit(Instr::bne(a, b, marks.at(name)));
  }
};

StreamerConfig read_stream_1d(int index, FReg reg, uint64_t base, uint64_t n) {
  StreamerConfig s;
  s.index = index;
  s.reg = reg;
  s.direction = StreamDir::Read;
  s.base = base;
  s.dims = 1;
  s.bounds = {n, 1, 1, 1};
  s.strides = {8, 0, 0, 0};
  return s;
}

StreamerConfig write_stream_1d(int index, FReg reg, uint64_t base, uint64_t n) {
  StreamerConfig s = read_stream_1d(index, reg, base, n);
  s.direction = StreamDir::Write;
  return s;
}

}  // namespace

KernelBundle build_vecop(const VecopSpec& spec, const CoreConfig& config) {
  if (spec.n < 1) throw std::invalid_argument("vecop: n must be >= 1");
  if (config.ssr_count < 3) throw std::invalid_argument("vecop: needs 3 streamers");

  int group = 1;
  if (spec.variant == VecopVariant::Unroll4) group = spec.unroll;
  if (spec.variant == VecopVariant::Chained) group = config.fpu_depth + 1;
  if (group < 1 || group > 16) throw std::invalid_argument("vecop: bad unroll");
  if (spec.n % static_cast<uint64_t>(group) != 0)
    throw std::invalid_argument("vecop: n must be divisible by the unroll factor " +
                                std::to_string(group));

  const uint64_t n = spec.n;
  const uint64_t c_base = kArrayBase;
  const uint64_t d_base = c_base + 8 * n;
  const uint64_t a_base = d_base + 8 * n;

  std::vector<double> c = spec.c_data ? *spec.c_data : seeded_doubles(spec.seed, n);
  std::vector<double> d = spec.d_data ? *spec.d_data : seeded_doubles(spec.seed + 1, n);
  if (c.size() != n || d.size() != n) throw std::invalid_argument("vecop: input size mismatch");

  Asm a;
  a.prog.streamers.push_back(read_stream_1d(kStreamIn0, FReg(0), c_base, n));
  a.prog.streamers.push_back(read_stream_1d(kStreamIn1, FReg(1), d_base, n));
  a.prog.streamers.push_back(write_stream_1d(kStreamOut, FReg(2), a_base, n));
  a.prog.data.push_back({kScalarBase, {spec.b}});
  a.prog.data.push_back({c_base, c});
  a.prog.data.push_back({d_base, d});

  const XReg x_i(5), x_n(6), x_tmp(7), x_mask(28);
  const FReg f_b(10);  // fa0, loop-invariant scalar

  a.emit(Instr::li(x_tmp, static_cast<int64_t>(kScalarBase)));
  a.emit(Instr::fld(f_b, 0, x_tmp));
  a.emit(Instr::li(x_tmp, 1));
  a.emit(Instr::csrrw(XReg(0), csr::kSsrEnable, x_tmp));
  if (spec.variant == VecopVariant::Chained) {
    a.emit(Instr::li(x_mask, 0x8));  // ft3
    a.emit(Instr::csrrs(XReg(0), csr::kChainMask, x_mask));
  }
  a.emit(Instr::li(x_i, 0));
  a.emit(Instr::li(x_n, static_cast<int64_t>(n / static_cast<uint64_t>(group))));
  a.emit(Instr::roi_begin());
  a.label("loop");
  switch (spec.variant) {
    case VecopVariant::Base:
      a.emit(Instr::fadd_d(FReg(3), FReg(0), FReg(1)));
      a.emit(Instr::fmul_d(FReg(2), FReg(3), f_b));
      break;
    case VecopVariant::Unroll4:
      for (int k = 0; k < group; ++k)
        a.emit(Instr::fadd_d(FReg(static_cast<uint8_t>(3 + k)), FReg(0), FReg(1)));
      for (int k = 0; k < group; ++k)
        a.emit(Instr::fmul_d(FReg(2), FReg(static_cast<uint8_t>(3 + k)), f_b));
      break;
    case VecopVariant::Chained:
      for (int k = 0; k < group; ++k) a.emit(Instr::fadd_d(FReg(3), FReg(0), FReg(1)));
      for (int k = 0; k < group; ++k) a.emit(Instr::fmul_d(FReg(2), FReg(3), f_b));
      break;
  }
  a.emit(Instr::addi(x_i, x_i, 1));
  a.bne_to(x_i, x_n, "loop");
  a.emit(Instr::roi_end());
  if (spec.variant == VecopVariant::Chained)
    a.emit(Instr::csrrc(XReg(0), csr::kChainMask, x_mask));
  a.emit(Instr::halt());

  KernelBundle bundle;
  bundle.program = std::move(a.prog);
  bundle.expected_memory.emplace_back(a_base, reference_vecop(spec));
  switch (spec.variant) {
    case VecopVariant::Base: bundle.fp_regs_used = 4; break;
    case VecopVariant::Unroll4: bundle.fp_regs_used = 3 + group; break;
    case VecopVariant::Chained: bundle.fp_regs_used = 4; break;
  }
  bundle.meta["kernel"] = "vecop";
  bundle.meta["variant"] = vecop_variant_name(spec.variant);
  bundle.meta["n"] = std::to_string(n);
  bundle.meta["unroll"] = std::to_string(group);
  bundle.meta["scalar_regs_excluded"] = "1";  // fa0 holds the loop-invariant b
  return bundle;
}

StencilRegisterPlan plan_stencil_registers(StencilVariant variant, CoeffPlacement placement,
                                           int unroll) {
  StencilRegisterPlan p;
  bool chained = variant == StencilVariant::Chaining || variant == StencilVariant::ChainingPlus;
  bool stream_out = variant == StencilVariant::BaseM || variant == StencilVariant::ChainingPlus;
  p.accumulators = chained ? 1 : unroll;
  p.stream_regs = 1 + (stream_out ? 1 : 0) + (placement == CoeffPlacement::SSR ? 1 : 0);
  p.coeff_regs = placement == CoeffPlacement::RF ? 27 : 0;
  p.temp_regs = placement == CoeffPlacement::ExplicitLoad ? unroll : 0;
  p.fp_regs_used = p.accumulators + p.stream_regs + p.coeff_regs + p.temp_regs;
  p.feasible = p.fp_regs_used <= 32;
  return p;
}

KernelBundle build_stencil(const StencilSpec& spec, const CoreConfig& config) {
  if (spec.nx < 2 || spec.ny < 2 || spec.nz < 2)
    throw std::invalid_argument("stencil: dimensions must be >= 2");
  if (config.ssr_count < 3) throw std::invalid_argument("stencil: needs 3 streamers");
  const int u = spec.unroll;
  if (u < 1 || u > 4) throw std::invalid_argument("stencil: unroll must be in 1..4");
  if (spec.nx % u != 0)
    throw std::invalid_argument("stencil: nx must be divisible by the unroll factor");

  CoeffPlacement placement = CoeffPlacement::SSR;
  if (spec.variant == StencilVariant::BaseMM || spec.variant == StencilVariant::BaseM)
    placement = CoeffPlacement::ExplicitLoad;
  if (spec.variant == StencilVariant::Chaining || spec.variant == StencilVariant::ChainingPlus)
    placement = CoeffPlacement::RF;

  StencilRegisterPlan plan = plan_stencil_registers(spec.variant, placement, u);
  if (!plan.feasible)
    throw std::invalid_argument("stencil: register plan needs " +
                                std::to_string(plan.fp_regs_used) + " FP registers (> 32)");

  const int px = spec.nx + 2, py = spec.ny + 2, pz = spec.nz + 2;
  const uint64_t points = static_cast<uint64_t>(spec.nx) * spec.ny * spec.nz;
  const int64_t row_bytes = 8 * px;
  const int64_t plane_bytes = row_bytes * py;

  const uint64_t coeff_base = kScalarBase;
  const uint64_t in_base = kArrayBase;
  const uint64_t in_bytes = static_cast<uint64_t>(px) * py * pz * 8;
  const uint64_t out_base = (in_base + in_bytes + 0xFFF) / 0x1000 * 0x1000;

  std::vector<double> input = stencil_input(spec);

  Asm a;
  // Input window: u interleaved points along x, then the 3x3x3 neighborhood;
  // the block loop rewinds the stream at each new window base.
  StreamerConfig in_stream;
  in_stream.index = kStreamIn0;
  in_stream.reg = FReg(0);
  in_stream.direction = StreamDir::Read;
  in_stream.base = in_base;
  in_stream.dims = 4;
  in_stream.bounds = {static_cast<uint64_t>(u), 3, 3, 3};
  in_stream.strides = {8, 8, row_bytes, plane_bytes};
  a.prog.streamers.push_back(in_stream);

  if (placement == CoeffPlacement::SSR) {
    StreamerConfig cs;
    cs.index = kStreamIn1;
    cs.reg = FReg(1);
    cs.direction = StreamDir::Read;
    cs.base = coeff_base;
    cs.dims = 3;
    cs.bounds = {static_cast<uint64_t>(u), 27, points / static_cast<uint64_t>(u)};
    cs.strides = {0, 8, 0};
    a.prog.streamers.push_back(cs);
  }
  bool stream_out = spec.variant == StencilVariant::BaseM ||
                    spec.variant == StencilVariant::ChainingPlus;
  if (stream_out)
    a.prog.streamers.push_back(write_stream_1d(kStreamOut, FReg(2), out_base, points));

  a.prog.data.push_back({coeff_base, {spec.coeffs.begin(), spec.coeffs.end()}});
  a.prog.data.push_back({in_base, input});

  const XReg x_one(1), x_mask(2), x_win(11), x_out(10), x_rowend(15), x_coeff(14);
  const XReg x_y(22), x_ny(23), x_z(20), x_nz(21);
  bool chained = placement == CoeffPlacement::RF;
  bool explicit_store = !stream_out;

  a.emit(Instr::li(x_one, 1));
  a.emit(Instr::csrrw(XReg(0), csr::kSsrEnable, x_one));
  if (chained) {
    a.emit(Instr::li(x_mask, 0x8));  // ft3 is the chained accumulator
    a.emit(Instr::csrrs(XReg(0), csr::kChainMask, x_mask));
    a.emit(Instr::li(x_coeff, static_cast<int64_t>(coeff_base)));
    for (int k = 0; k < 27; ++k)
      a.emit(Instr::fld(FReg(static_cast<uint8_t>(4 + k)), 8 * k, x_coeff));
  }
  if (placement == CoeffPlacement::ExplicitLoad)
    a.emit(Instr::li(x_coeff, static_cast<int64_t>(coeff_base)));
  a.emit(Instr::li(x_win, static_cast<int64_t>(in_base)));
  if (explicit_store) a.emit(Instr::li(x_out, static_cast<int64_t>(out_base)));
  a.emit(Instr::li(x_ny, spec.ny));
  a.emit(Instr::li(x_nz, spec.nz));
  a.emit(Instr::li(x_z, 0));
  a.emit(Instr::roi_begin());

  a.label("zloop");
  a.emit(Instr::li(x_y, 0));
  a.label("yloop");
  a.emit(Instr::addi(x_rowend, x_win, 8 * spec.nx));
  a.label("blockloop");
  a.emit(Instr::csrrw(XReg(0), csr::kSsrBase0 + kStreamIn0, x_win));

  // Block body. The pointer bumps ride along after the leading FP ops so the
  // loop tail is a lone branch and FP dispatch never starves.
  std::vector<Instr> body;
  const std::array<uint8_t, 4> temps = {7, 28, 29, 30};
  for (int k = 0; k < 27; ++k) {
    FReg coeff_reg;
    if (placement == CoeffPlacement::SSR) coeff_reg = FReg(1);
    if (placement == CoeffPlacement::RF) coeff_reg = FReg(static_cast<uint8_t>(4 + k));
    for (int p = 0; p < u && placement == CoeffPlacement::ExplicitLoad; ++p)
      body.push_back(Instr::fld(FReg(temps[static_cast<size_t>(p)]), 8 * k, x_coeff));
    for (int p = 0; p < u; ++p) {
      if (placement == CoeffPlacement::ExplicitLoad)
        coeff_reg = FReg(temps[static_cast<size_t>(p)]);
      FReg acc = chained ? FReg(3) : FReg(static_cast<uint8_t>(3 + p));
      FReg dest = acc;
      if ((spec.variant == StencilVariant::ChainingPlus ||
           spec.variant == StencilVariant::BaseM) &&
          k == 26)
        dest = FReg(2);  // final accumulation goes straight to the write stream
      if (k == 0)
        body.push_back(Instr::fmul_d(dest, FReg(0), coeff_reg));
      else
        body.push_back(Instr::fmadd_d(dest, FReg(0), coeff_reg, acc));
    }
  }
  if (explicit_store) {
    // x_out is bumped up front; stores address backwards from the new value.
    for (int p = 0; p < u; ++p) {
      FReg src = chained ? FReg(3) : FReg(static_cast<uint8_t>(3 + p));
      body.push_back(Instr::fsd(src, 8 * p - 8 * u, x_out));
    }
  }
  std::vector<Instr> bumps;
  bumps.push_back(Instr::addi(x_win, x_win, 8 * u));
  if (explicit_store) bumps.push_back(Instr::addi(x_out, x_out, 8 * u));
  for (size_t i = 0; i < body.size(); ++i) {
    a.emit(body[i]);
    if (i < bumps.size()) a.emit(bumps[i]);
  }
  a.bne_to(x_win, x_rowend, "blockloop");
  a.emit(Instr::addi(x_win, x_win, 16));  // skip the two x-halo cells
  a.emit(Instr::addi(x_y, x_y, 1));
  a.bne_to(x_y, x_ny, "yloop");
  a.emit(Instr::addi(x_win, x_win, 2 * row_bytes));  // skip the two y-halo rows
  a.emit(Instr::addi(x_z, x_z, 1));
  a.bne_to(x_z, x_nz, "zloop");

  a.emit(Instr::roi_end());
  if (chained) a.emit(Instr::csrrc(XReg(0), csr::kChainMask, x_mask));
  a.emit(Instr::halt());
  a.prog.mem_hint = out_base + 8 * points + 4096;

  KernelBundle bundle;
  bundle.program = std::move(a.prog);
  bundle.expected_memory.emplace_back(out_base, reference_stencil(spec, input));
  bundle.fp_regs_used = plan.fp_regs_used;
  bundle.meta["kernel"] = stencil_kind_name(spec.kind);
  bundle.meta["variant"] = stencil_variant_name(spec.variant);
  bundle.meta["unroll"] = std::to_string(u);
  bundle.meta["points"] = std::to_string(points);
  bundle.meta["coeff_placement"] = placement == CoeffPlacement::RF           ? "RF"
                                   : placement == CoeffPlacement::SSR        ? "SSR"
                                                                             : "ExplicitLoad";
  bundle.meta["writeback"] = stream_out ? "stream" : "store";
  bundle.meta["out_base"] = std::to_string(out_base);
  return bundle;
}

}  // namespace chainsim
