// Copyright 2026 The chainsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <variant>
#include <vector>

#include "chainsim/program.hpp"

namespace chainsim {

using ParseResult = std::variant<Program, std::vector<Diagnostic>>;

/// Assemble source text. Returns a Program that passes validate_program, or
/// every diagnostic found. Never throws on malformed input.
ParseResult parse_program(const std::string& source);

/// Render a program back to source text. parse_program(emit_text(p)) is
/// structurally identical to p (labels are regenerated canonically).
std::string emit_text(const Program& program);

/// Render one instruction in assembly syntax. Branch targets are shown as
/// the label for `target` if `program` provides one, else as @index.
std::string instr_text(const Instr& instr, const Program* program = nullptr);

}  // namespace chainsim
