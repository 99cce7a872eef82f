// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "wrr/codegen.hpp"

#include <functional>
#include <set>

namespace wrr::codegen
{
/// Rejects originals the generators cannot handle and checks the Replay against them.
void check_inputs(const wasm::Module& original, const ir::Replay& r);

/// Export name of a function called by the host.
std::string export_name(const wasm::Module& original, uint32_t funcidx);

/// Visits every action of every context and auxiliary.
void for_each_action(const ir::Replay& r, const std::function<void(const ir::Action&)>& f);

struct Uses
{
    std::set<uint32_t> export_calls;
    std::set<uint32_t> globals;
    std::set<uint32_t> tables;
    std::set<uint32_t> table_funcs;
};
Uses collect_uses(const ir::Replay& r);

/// Index translation from the original module into the module being generated.
struct IndexMap
{
    std::function<uint32_t(uint32_t)> func = [](uint32_t i) { return i; };
    std::function<uint32_t(uint32_t)> global = [](uint32_t i) { return i; };
    std::function<uint32_t(uint32_t)> table = [](uint32_t i) { return i; };
    uint32_t aux_base = 0;
    uint32_t data_base = 0;
};

/// Turns IR actions into Wasm instructions. Bulk writes longer than a word become passive
/// data segments, collected here for the caller to append.
class Lowerer
{
public:
    Lowerer(const wasm::Module& original, IndexMap map) : m_original{original}, m_map{std::move(map)} {}

    void lower(const ir::Action& a, std::vector<wasm::Instruction>& out);

    /// Counter dispatch over the recorded contexts; traps past the last one.
    wasm::Function replay_function(uint32_t type_index, const wasm::FuncType& type, const ir::RFunction& fn,
        uint32_t counter_global);
    /// Straight-line body of a context, with no parameters or results.
    wasm::Function plain_function(uint32_t type_index, const ir::Context& c);

    std::vector<wasm::DataSegment> segments;
    std::set<uint32_t> declared;

private:
    void lower_bulk(const ir::BulkMutateMem& b, std::vector<wasm::Instruction>& out);

    const wasm::Module& m_original;
    IndexMap m_map;
};

wasm::Instruction const_of(const Value& v);

/// Memory of the original reached through `orig` exports; adds exports where missing.
struct ExposedOriginal
{
    wasm::Module module;
    std::vector<std::string> memories;
    std::map<uint32_t, std::string> globals;
    std::map<uint32_t, std::string> tables;
    std::map<uint32_t, std::string> funcs;
    std::vector<std::string> notes;
    /// Export name of the start function when it was moved out of the start section.
    std::string deferred_start;
};
ExposedOriginal expose_original(const wasm::Module& original, const Uses& uses);

/// Removes the start section and exports the start function instead, so the caller can run it
/// once its imports are linked.
void defer_start(ExposedOriginal& x);

}  // namespace wrr::codegen
