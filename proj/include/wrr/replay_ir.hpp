// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "wrr/trace.hpp"
#include "wrr/wasm.hpp"

#include <map>
#include <string>
#include <variant>
#include <vector>

namespace wrr::ir
{
/// Host calls an exported function. `idx` is in the function index space.
struct ExportCall
{
    uint32_t idx = 0;
    std::vector<Value> vals;
    friend bool operator==(const ExportCall&, const ExportCall&) = default;
};

struct MutateMem
{
    uint32_t idx = 0;
    uint32_t addr = 0;
    uint8_t val = 0;
    friend bool operator==(const MutateMem&, const MutateMem&) = default;
};

/// Produced only by merge_memory_writes. `val` is never empty.
struct BulkMutateMem
{
    uint32_t idx = 0;
    uint32_t addr = 0;
    std::vector<uint8_t> val;
    friend bool operator==(const BulkMutateMem&, const BulkMutateMem&) = default;
};

struct MutateGlobal
{
    uint32_t idx = 0;
    Value val;
    friend bool operator==(const MutateGlobal&, const MutateGlobal&) = default;
};

struct MutateTable
{
    uint32_t idx = 0;
    uint32_t elem = 0;
    uint32_t funcidx = 0;
    friend bool operator==(const MutateTable&, const MutateTable&) = default;
};

/// Produced only by split_functions: run auxiliary function `aux` at this point.
struct CallAux
{
    uint32_t aux = 0;
    friend bool operator==(const CallAux&, const CallAux&) = default;
};

using Action = std::variant<ExportCall, MutateMem, BulkMutateMem, MutateGlobal, MutateTable, CallAux>;

struct Context
{
    std::vector<Action> actions;
    friend bool operator==(const Context&, const Context&) = default;
};

struct RFunction
{
    /// contexts[i] is what the host did during the i-th invocation.
    std::vector<Context> contexts;
    /// Values the i-th invocation returned.
    std::vector<std::vector<Value>> results;
    friend bool operator==(const RFunction&, const RFunction&) = default;
};

struct Replay
{
    /// Keyed by imported function index.
    std::map<uint32_t, RFunction> functions;
    /// Holds exactly one context.
    RFunction entry{{Context{}}, {{}}};
    /// Outlined action runs created by split_functions.
    std::vector<Context> auxiliaries;
    friend bool operator==(const Replay&, const Replay&) = default;
};

Replay translate(const Trace& reduced, const wasm::Module& module);

Replay merge_memory_writes(const Replay& r);

inline constexpr std::size_t default_split_threshold = 10'000;
inline constexpr std::size_t default_max_aux = 1u << 20;

/// Every context and auxiliary ends up with at most `threshold` actions, CallAux included.
Replay split_functions(const Replay& r, std::size_t threshold = default_split_threshold,
    std::size_t max_aux = default_max_aux);

struct IrStats
{
    std::size_t functions = 0;
    std::size_t contexts = 0;
    std::size_t auxiliaries = 0;
    std::size_t export_calls = 0;
    std::size_t mutate_mem = 0;
    std::size_t bulk_mutate_mem = 0;
    std::size_t bulk_bytes = 0;
    std::size_t mutate_global = 0;
    std::size_t mutate_table = 0;
    std::size_t call_aux = 0;
    std::size_t max_context_length = 0;
    /// Rough Wasm code size of the largest context or auxiliary.
    std::size_t max_body_estimate = 0;
    std::size_t total_body_estimate = 0;

    std::size_t actions() const noexcept
    {
        return export_calls + mutate_mem + bulk_mutate_mem + mutate_global + mutate_table + call_aux;
    }
    std::string to_json() const;
};

IrStats ir_stats(const Replay& r);

std::string format_action(const Action& a);
std::string dump(const Replay& r);

}  // namespace wrr::ir
