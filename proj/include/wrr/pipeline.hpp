// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "wrr/codegen.hpp"
#include "wrr/error.hpp"
#include "wrr/harness.hpp"
#include "wrr/reduce.hpp"
#include "wrr/replay_ir.hpp"

#include <optional>
#include <string>

namespace wrr
{
enum class RecordMode
{
    Raw,
    Reduced,
};

/// Instruments `original` (unless it already is) and runs the scenario. Reduced mode reduces
/// online while recording.
Trace record(const wasm::Module& original, const HostScenario& scenario, RecordMode mode,
    ReduceStats* stats = nullptr);

struct GenerateOptions
{
    OutputFormat format = OutputFormat::SelfContainedWasm;
    bool merge = true;
    /// Zero disables splitting.
    std::size_t split_threshold = ir::default_split_threshold;
    std::size_t body_size_limit = wasm::default_body_size_limit;
};

/// translate, then the enabled optimizations.
ir::Replay build_replay(const Trace& reduced, const wasm::Module& original, const GenerateOptions& options);

ReplayBundle generate_bundle(const Trace& reduced, const wasm::Module& original, const GenerateOptions& options);

/// Scenario that runs a replay module: no imports, one `_start` call.
HostScenario replay_scenario();

struct TraceDiff
{
    bool identical = true;
    std::size_t index = 0;
    std::string expected;
    std::string actual;
};

TraceDiff diff_traces(const Trace& expected, const Trace& actual);

struct ValidateResult
{
    Trace source;
    Trace replayed;
    TraceDiff diff;
    ir::IrStats ir;
    std::size_t module_size = 0;
};

/// record, reduce, generate a self-contained replay, re-record it and compare. When `source`
/// is given it replaces the recorded reduced trace.
ValidateResult validate(const wasm::Module& original, const HostScenario& scenario,
    const GenerateOptions& options = {}, const std::optional<Trace>& source = std::nullopt);

/// Exit status of the CLI for an error class.
int exit_code(ErrorClass cls) noexcept;

}  // namespace wrr
