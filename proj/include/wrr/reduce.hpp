// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "wrr/harness.hpp"
#include "wrr/trace.hpp"
#include "wrr/wasm.hpp"

#include <array>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace wrr
{
/// Sparse byte mirror of one linear memory. Untouched pages read as zero.
class ShadowMemory
{
public:
    static constexpr std::size_t page_bytes = 65536;

    explicit ShadowMemory(uint64_t size = 0) : m_size{size} {}

    uint64_t size() const noexcept { return m_size; }
    void resize(uint64_t size) noexcept { m_size = size; }

    uint8_t get(uint64_t addr) const;
    void set(uint64_t addr, uint8_t v);
    bool equals(uint64_t addr, std::span<const uint8_t> bytes) const;
    void write(uint64_t addr, std::span<const uint8_t> bytes);

private:
    using Page = std::array<uint8_t, page_bytes>;
    std::unordered_map<uint64_t, std::unique_ptr<Page>> m_pages;
    uint64_t m_size;
};

/// What the reducer needs to know about the module that produced a trace.
/// Indices are in the original module's function space even for instrumented modules.
struct ModuleFacts
{
    uint32_t function_count = 0;
    std::set<uint32_t> imported;
    struct MemoryFacts
    {
        uint32_t min_pages = 0;
        uint32_t max_pages = 65536;
        /// Active data segments as (offset, bytes).
        std::vector<std::pair<uint32_t, std::vector<uint8_t>>> init;
    };
    std::vector<MemoryFacts> memories;
    /// Initial value of each global whose value is known statically.
    std::vector<std::optional<Value>> globals;
    std::vector<std::vector<std::optional<uint32_t>>> tables;
};

/// Accepts original, instrumented and generated replay modules.
ModuleFacts module_facts(const wasm::Module& m);

struct ShadowState
{
    std::vector<ShadowMemory> memories;
    std::vector<std::optional<Value>> globals;
    std::vector<std::vector<std::optional<uint32_t>>> tables;

    /// Online shadows start at the initial memory size and grow on notification; offline
    /// shadows cannot see growth and span the maximum size from the start.
    enum class Sizing
    {
        Initial,
        Maximum
    };
    static ShadowState from(const ModuleFacts& facts, Sizing sizing);
};

enum class CallKind : uint8_t
{
    Int,
    Ext,
};

struct CallKindStack
{
    std::vector<CallKind> stack{CallKind::Ext};
};

/// Load/Store, GlobalGet/GlobalSet and TableGet/TableSet filter. Returns whether the event is kept.
bool shadow_step(ShadowState& state, const TraceEvent& e);

/// FuncEntry/FuncReturn/Call/CallReturn filter. Returns whether the event is kept.
bool callstack_step(CallKindStack& stack, const TraceEvent& e, const std::set<uint32_t>& imported,
    std::size_t event_index = 0);

struct ReduceStats
{
    std::array<uint64_t, event_tag_count> kept{};
    std::array<uint64_t, event_tag_count> discarded{};

    uint64_t total_kept() const noexcept;
    uint64_t total() const noexcept;
    std::string to_json() const;
    std::string to_text() const;
    friend bool operator==(const ReduceStats&, const ReduceStats&) = default;
};

/// Stateful single-pass reducer shared by the offline and online paths.
class Reducer
{
public:
    Reducer(const ModuleFacts& facts, ShadowState::Sizing sizing);

    /// Feeds one raw event; returns whether it was kept.
    bool feed(const TraceEvent& e);
    void grow(uint32_t memidx, uint32_t pages);

    const ReduceStats& stats() const noexcept { return m_stats; }

private:
    std::set<uint32_t> m_imported;
    uint32_t m_function_count;
    ShadowState m_shadow;
    CallKindStack m_stack;
    ReduceStats m_stats;
    std::size_t m_index = 0;
};

Trace reduce(const Trace& raw, const wasm::Module& m, ReduceStats* stats = nullptr);

/// Recorder sink that reduces while recording; only kept events are retained.
class OnlineReducer : public TraceSink
{
public:
    explicit OnlineReducer(const wasm::Module& m);

    void event(const TraceEvent& e) override;
    void grow(uint32_t memidx, uint32_t pages) override;

    const Trace& output() const noexcept { return m_out; }
    Trace take() { return std::move(m_out); }
    const ReduceStats& stats() const noexcept { return m_reducer.stats(); }
    /// Largest number of events held at any time.
    std::size_t peak_retained() const noexcept { return m_peak; }

private:
    Reducer m_reducer;
    Trace m_out;
    std::size_t m_peak = 0;
};

}  // namespace wrr
