// Copyright 2026 The chainsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chainsim/machine.hpp"
#include "chainsim/program.hpp"

namespace chainsim {

enum class VecopVariant : uint8_t { Base, Unroll4, Chained };
enum class StencilKind : uint8_t { Box3d1r, J3d27pt };
enum class StencilVariant : uint8_t { BaseMM, BaseM, Base, Chaining, ChainingPlus };
enum class CoeffPlacement : uint8_t { RF, SSR, ExplicitLoad };

std::string vecop_variant_name(VecopVariant v);
std::string stencil_variant_name(StencilVariant v);
std::string stencil_kind_name(StencilKind k);
std::optional<VecopVariant> parse_vecop_variant(const std::string& name);
std::optional<StencilVariant> parse_stencil_variant(const std::string& name);

/// a = b * (c + d) over n elements.
struct VecopSpec {
  uint64_t n = 256;
  double b = 2.0;
  VecopVariant variant = VecopVariant::Base;
  int unroll = 4;      // Unroll4 schedule width; Chained uses fpu_depth+1
  uint64_t seed = 1;   // input data seed
  std::optional<std::vector<double>> c_data, d_data;  // explicit inputs for tests
};

/// 27-point radius-1 stencil. Coefficient k multiplies the neighbor at
/// (dx, dy, dz) = (k%3-1, (k/3)%3-1, k/9-1); accumulation is in ascending k
/// for every variant so outputs are bit-identical across variants.
struct StencilSpec {
  StencilKind kind = StencilKind::J3d27pt;
  int nx = 16, ny = 16, nz = 16;  // interior dimensions
  std::array<double, 27> coeffs{};
  StencilVariant variant = StencilVariant::Base;
  int unroll = 4;  // independent output points in flight
  uint64_t seed = 1;
  std::optional<std::vector<double>> input;  // padded (nx+2)(ny+2)(nz+2) grid
};

/// Uniform box average: every coefficient 1/27.
std::array<double, 27> box3d1r_coeffs();
/// Symmetric distance-weighted coefficients (center 8/64, face 4/64,
/// edge 2/64, corner 1/64).
std::array<double, 27> j3d27pt_coeffs();
std::array<double, 27> default_coeffs(StencilKind kind);

struct KernelBundle {
  Program program;
  std::vector<std::pair<uint64_t, std::vector<double>>> expected_memory;
  int fp_regs_used = 0;
  std::map<std::string, std::string> meta;
};

/// Register budget of a stencil schedule; `feasible` is false when the plan
/// needs more than 32 FP registers (the generator refuses such plans).
struct StencilRegisterPlan {
  int fp_regs_used = 0;
  int coeff_regs = 0;
  int accumulators = 0;
  int stream_regs = 0;
  int temp_regs = 0;
  bool feasible = true;
};

StencilRegisterPlan plan_stencil_registers(StencilVariant variant, CoeffPlacement placement,
                                           int unroll);

KernelBundle build_vecop(const VecopSpec& spec, const CoreConfig& config);
KernelBundle build_stencil(const StencilSpec& spec, const CoreConfig& config);

/// Bit-exact references, same FP operation order as the generated kernels.
std::vector<double> reference_vecop(const VecopSpec& spec);
std::vector<double> reference_stencil(const StencilSpec& spec, const std::vector<double>& input);

/// Deterministic input data in [-1, 1), identical across platforms.
std::vector<double> seeded_doubles(uint64_t seed, size_t count);

/// Padded input grid for a stencil spec (seeded unless spec.input is set).
std::vector<double> stencil_input(const StencilSpec& spec);

}  // namespace chainsim
