// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "wrr/wasm.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace wrr
{
struct InstrumentationConfig
{
    bool record_loads = true;
    bool record_stores = true;
    bool record_calls = true;
    bool record_entries = true;
    bool record_globals = true;
    bool record_tables = true;
    std::string recorder_import_module = "wrr";
};

/// Index bookkeeping of an instrumented module, stored in its "wrr.instr" custom section.
///
/// Instrumented function index space:
///   [original function imports][recorder imports][wrappers][original defined functions]
struct InstrMeta
{
    uint32_t imports = 0;
    uint32_t recorders = 0;
    /// Original index wrapped by each wrapper, in wrapper order.
    std::vector<uint32_t> wrapped;
    /// Original indices of host-side functions that were left uninstrumented.
    std::vector<uint32_t> host_only;
    uint32_t original_function_count = 0;

    uint32_t wrapper_base() const noexcept { return imports + recorders; }
    uint32_t defined_shift() const noexcept
    {
        return recorders + static_cast<uint32_t>(wrapped.size());
    }
    /// Original function index denoted by an instrumented index; empty for recorder imports.
    std::optional<uint32_t> to_original(uint32_t index) const noexcept;
    /// Instrumented index of the unmodified body of an original function.
    uint32_t raw_index(uint32_t original) const noexcept;
};

/// Marks functions of a generated replay module that model host code.
/// Stand-ins replace the original imports; host-only functions are the entry and auxiliaries.
struct ReplayMeta
{
    std::vector<uint32_t> stand_ins;
    std::vector<uint32_t> host_only;
};

inline constexpr std::string_view instr_section_name = "wrr.instr";
inline constexpr std::string_view replay_section_name = "wrr.replay";

std::optional<InstrMeta> read_instr_meta(const wasm::Module& m);
std::optional<ReplayMeta> read_replay_meta(const wasm::Module& m);
wasm::CustomSection make_replay_section(const ReplayMeta& meta);

/// The fixed recorder import set, in import order.
std::vector<std::pair<std::string, wasm::FuncType>> recorder_signatures();

wasm::Module instrument(const wasm::Module& m, const InstrumentationConfig& config = {});

}  // namespace wrr
