// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "wrr/interpreter.hpp"
#include "wrr/scenario.hpp"
#include "wrr/trace.hpp"
#include "wrr/wasm.hpp"

#include <string>
#include <vector>

namespace wrr
{
/// Receives recorder output as it happens.
class TraceSink
{
public:
    virtual ~TraceSink() = default;
    virtual void event(const TraceEvent& e) = 0;
    /// Memory `memidx` now has `pages` pages.
    virtual void grow(uint32_t memidx, uint32_t pages) { (void)memidx, (void)pages; }
};

struct ExportCallRecord
{
    std::string name;
    std::vector<Value> args;
    std::vector<Value> results;
    /// Issued by a host action while an import was running.
    bool nested = false;
    friend bool operator==(const ExportCallRecord&, const ExportCallRecord&) = default;
};

struct FinalState
{
    std::vector<std::vector<uint8_t>> memories;
    std::vector<ExportCallRecord> calls;
    std::vector<uint64_t> globals;
    friend bool operator==(const FinalState&, const FinalState&) = default;
};

struct RunOptions
{
    /// When set, recorder events go here instead of into RunResult::trace.
    TraceSink* sink = nullptr;
    interp::Options interpreter{};
    std::string recorder_module = "wrr";
};

struct RunResult
{
    Trace trace;
    FinalState state;
};

Value to_value(wasm::ValType type, uint64_t raw);
uint64_t to_raw(const Value& v);

/// Instantiates `m` against `scenario` and runs its steps. Recorder imports are bound
/// automatically when present.
RunResult run_scenario(const wasm::Module& m, const HostScenario& scenario, const RunOptions& options = {});

/// FNV-1a over all memories, 16 hex digits.
std::string memory_hash(const FinalState& state);

}  // namespace wrr
