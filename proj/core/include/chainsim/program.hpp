// Copyright 2026 The chainsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "chainsim/isa.hpp"

namespace chainsim {

enum class StreamDir : uint8_t { Read, Write };

/// Per-streamer affine address generator: a whole-nest walk of
///   addr = base + sum_k idx[k] * stride[k], idx[k] in [0, bounds[k]),
/// dimension 0 innermost. Read streams may deliver each element `repeat`
/// times. Writing the streamer's base CSR rewinds the cursor.
struct StreamerConfig {
  int index = 0;            // 0 .. ssr_count-1
  FReg reg{};               // conventionally ft0/ft1/ft2
  StreamDir direction = StreamDir::Read;
  uint64_t base = 0;        // byte address, 8-aligned
  int dims = 1;             // 1..4
  std::array<uint64_t, 4> bounds{1, 1, 1, 1};   // element counts
  std::array<int64_t, 4> strides{0, 0, 0, 0};   // byte strides
  uint64_t repeat = 1;      // read streams only

  uint64_t total_elements() const {
    uint64_t n = repeat;
    for (int d = 0; d < dims; ++d) n *= bounds[d];
    return n;
  }

  friend bool operator==(const StreamerConfig&, const StreamerConfig&) = default;
};

struct DataSegment {
  uint64_t address = 0;
  std::vector<double> values;  // doubles at 8-byte stride

  friend bool operator==(const DataSegment&, const DataSegment&) = default;
};

/// Assembled program: the unit of simulation.
struct Program {
  std::vector<Instr> instrs;
  std::map<std::string, int32_t> labels;  // label -> instruction index
  std::vector<DataSegment> data;
  std::vector<StreamerConfig> streamers;
  int32_t entry = 0;
  uint64_t mem_hint = 0;  // minimum memory size (`.mem`), 0 = derive
};

enum class DiagKind : uint8_t {
  UnknownMnemonic,
  BadRegister,
  BadImmediate,
  DuplicateLabel,
  UnresolvedLabel,
  IllegalLoopBody,
  OverlappingData,
  NoHaltPath,
};

struct Diagnostic {
  int line = 0;    // 1-based
  int column = 0;  // 1-based
  DiagKind kind = DiagKind::UnknownMnemonic;
  std::string message;
};

std::string diag_kind_name(DiagKind k);
std::string format_diagnostic(const Diagnostic& d);

/// Static checks: branch targets in range, hw-loop bodies contained and
/// branch-free, stream configs present for stream-mapped registers when
/// streaming is enabled anywhere, and a halt reachable from entry.
std::vector<Diagnostic> validate_program(const Program& program);

}  // namespace chainsim
