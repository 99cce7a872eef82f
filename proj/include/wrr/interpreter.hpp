// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "wrr/wasm.hpp"

#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace wrr::interp
{
inline constexpr std::size_t page_size = 65536;

/// Host implementation of an imported function. Values are raw bits: i32/f32 zero-extended,
/// funcrefs as a function index or wasm::null_ref. The host may re-enter the instance.
using HostFunction = std::function<void(std::span<const uint64_t> args, std::span<uint64_t> results)>;

struct Hooks
{
    /// Called after a successful memory.grow, before the instruction returns.
    std::function<void(uint32_t memidx, uint32_t old_pages, uint32_t new_pages)> on_grow;
};

struct Options
{
    std::size_t max_call_depth = 1024;
};

class Instance
{
public:
    /// Allocates storage and applies active segments. `imports` is indexed by function import
    /// ordinal. The start function is not run; see run_start().
    Instance(wasm::Module module, std::vector<HostFunction> imports, Hooks hooks = {},
        Options options = {});

    Instance(const Instance&) = delete;
    Instance& operator=(const Instance&) = delete;

    void run_start();

    std::vector<uint64_t> invoke(uint32_t func_index, std::span<const uint64_t> args);
    std::vector<uint64_t> invoke_export(std::string_view name, std::span<const uint64_t> args);

    const wasm::Module& module() const noexcept { return m_module; }

    std::vector<uint8_t>& memory(uint32_t index = 0) { return m_memories.at(index); }
    const std::vector<uint8_t>& memory(uint32_t index = 0) const { return m_memories.at(index); }
    std::size_t memory_count() const noexcept { return m_memories.size(); }

    uint64_t global(uint32_t index) const { return m_globals.at(index); }
    void set_global(uint32_t index, uint64_t bits) { m_globals.at(index) = bits; }
    const std::vector<uint64_t>& globals() const noexcept { return m_globals; }

    std::vector<uint64_t>& table(uint32_t index = 0) { return m_tables.at(index); }
    const std::vector<uint64_t>& table(uint32_t index = 0) const { return m_tables.at(index); }

    std::size_t call_depth() const noexcept { return m_depth; }

private:
    struct FuncMeta
    {
        /// For block/loop/if: index of the matching end. For if: else index in `alt` (or the end).
        std::vector<uint32_t> end;
        std::vector<uint32_t> alt;
        std::vector<wasm::ValType> local_types;
        uint32_t param_count = 0;
        uint32_t result_count = 0;
    };

    void call(uint32_t func_index);
    void execute(uint32_t func_index);
    void call_host(uint32_t func_index);
    void prepare(uint32_t defined_index);

    wasm::Module m_module;
    std::vector<HostFunction> m_imports;
    Hooks m_hooks;
    Options m_options;

    std::vector<std::vector<uint8_t>> m_memories;
    std::vector<std::optional<uint32_t>> m_memory_max;
    std::vector<uint64_t> m_globals;
    std::vector<std::vector<uint64_t>> m_tables;
    std::vector<bool> m_data_dropped;
    std::vector<bool> m_elem_dropped;
    std::vector<FuncMeta> m_meta;
    std::vector<uint64_t> m_stack;
    std::size_t m_depth = 0;
    uint32_t m_import_count = 0;
};

}  // namespace wrr::interp
