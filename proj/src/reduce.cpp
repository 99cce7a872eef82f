// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "wrr/reduce.hpp"
#include "wrr/error.hpp"
#include "wrr/instrument.hpp"

#include <json.hpp>

#include <iomanip>
#include <sstream>

namespace wrr
{
uint8_t ShadowMemory::get(uint64_t addr) const
{
    const auto it = m_pages.find(addr / page_bytes);
    return it == m_pages.end() ? 0 : (*it->second)[addr % page_bytes];
}

void ShadowMemory::set(uint64_t addr, uint8_t v)
{
    const auto key = addr / page_bytes;
    if (v == 0 && !m_pages.contains(key))
        return;
    auto& page = m_pages[key];
    if (!page)
    {
        page = std::make_unique<Page>();
        page->fill(0);
    }
    (*page)[addr % page_bytes] = v;
}

bool ShadowMemory::equals(uint64_t addr, std::span<const uint8_t> bytes) const
{
    for (std::size_t i = 0; i < bytes.size(); ++i)
        if (get(addr + i) != bytes[i])
            return false;
    return true;
}

void ShadowMemory::write(uint64_t addr, std::span<const uint8_t> bytes)
{
    for (std::size_t i = 0; i < bytes.size(); ++i)
        set(addr + i, bytes[i]);
}

ModuleFacts module_facts(const wasm::Module& m)
{
    ModuleFacts facts;
    const auto instr = read_instr_meta(m);
    const auto replay = read_replay_meta(m);
    if (instr)
    {
        facts.function_count = instr->original_function_count;
        facts.imported.insert(instr->wrapped.begin(), instr->wrapped.end());
    }
    else
    {
        facts.function_count = m.function_count();
        for (uint32_t i = 0; i < m.imported_function_count(); ++i)
            facts.imported.insert(i);
        if (replay)
            facts.imported.insert(replay->stand_ins.begin(), replay->stand_ins.end());
    }

    std::vector<uint64_t> global_bits;
    for (uint32_t g = 0; g < m.global_count(); ++g)
    {
        if (g < m.imported_global_count())
        {
            facts.globals.emplace_back();
            global_bits.push_back(0);
            continue;
        }
        const auto& global = m.globals[g - m.imported_global_count()];
        const auto bits = wasm::eval_const_expr(global.init, global_bits);
        global_bits.push_back(bits);
        if (global.type.type == wasm::ValType::FuncRef || global.init.op == wasm::Opcode::global_get)
            facts.globals.emplace_back();
        else
            facts.globals.emplace_back(to_value(global.type.type, bits));
    }

    for (uint32_t i = 0; i < m.memory_count(); ++i)
    {
        const auto type = m.memory_type(i);
        facts.memories.push_back({type.limits.min, type.limits.max.value_or(65536), {}});
    }
    for (const auto& d : m.datas)
        if (d.mode == wasm::SegmentMode::Active && d.memory < facts.memories.size())
            facts.memories[d.memory].init.emplace_back(
                static_cast<uint32_t>(wasm::eval_const_expr(d.offset, global_bits)), d.bytes);

    for (uint32_t i = 0; i < m.table_count(); ++i)
        facts.tables.emplace_back(m.table_type(i).limits.min);
    for (const auto& e : m.elems)
    {
        if (e.mode != wasm::SegmentMode::Active || e.table >= facts.tables.size())
            continue;
        auto& table = facts.tables[e.table];
        const auto offset = static_cast<uint32_t>(wasm::eval_const_expr(e.offset, global_bits));
        for (std::size_t j = 0; j < e.items.size() && offset + j < table.size(); ++j)
        {
            std::optional<uint32_t> ref = e.items[j];
            if (ref && instr)
                ref = instr->to_original(*ref);
            table[offset + j] = ref;
        }
    }
    return facts;
}

ShadowState ShadowState::from(const ModuleFacts& facts, Sizing sizing)
{
    ShadowState s;
    for (const auto& mem : facts.memories)
    {
        const uint64_t pages = sizing == Sizing::Initial ? mem.min_pages : mem.max_pages;
        ShadowMemory shadow{pages * ShadowMemory::page_bytes};
        for (const auto& [offset, bytes] : mem.init)
            shadow.write(offset, bytes);
        s.memories.push_back(std::move(shadow));
    }
    s.globals = facts.globals;
    s.tables = facts.tables;
    return s;
}

namespace
{
ShadowMemory& shadow_memory(ShadowState& state, uint32_t memidx, uint32_t address, std::size_t width)
{
    if (memidx >= state.memories.size())
        throw AddressOutOfShadow{memidx, address, width};
    auto& mem = state.memories[memidx];
    if (uint64_t{address} + width > mem.size())
        throw AddressOutOfShadow{memidx, address, width};
    return mem;
}
}  // namespace

bool shadow_step(ShadowState& state, const TraceEvent& e)
{
    if (const auto* s = std::get_if<event::Store>(&e))
    {
        const auto bytes = s->value.bytes();
        shadow_memory(state, s->memidx, s->address, bytes.size()).write(s->address, bytes);
        return false;
    }
    if (const auto* l = std::get_if<event::Load>(&e))
    {
        const auto bytes = l->value.bytes();
        auto& mem = shadow_memory(state, l->memidx, l->address, bytes.size());
        if (mem.equals(l->address, bytes))
            return false;
        mem.write(l->address, bytes);
        return true;
    }
    if (const auto* g = std::get_if<event::GlobalGet>(&e))
    {
        if (g->globalidx >= state.globals.size())
            state.globals.resize(g->globalidx + 1);
        auto& cell = state.globals[g->globalidx];
        if (cell && *cell == g->value)
            return false;
        cell = g->value;
        return true;
    }
    if (const auto* g = std::get_if<event::GlobalSet>(&e))
    {
        if (g->globalidx >= state.globals.size())
            state.globals.resize(g->globalidx + 1);
        state.globals[g->globalidx] = g->value;
        return false;
    }
    if (const auto* t = std::get_if<event::TableSet>(&e))
    {
        if (t->tableidx >= state.tables.size())
            state.tables.resize(t->tableidx + 1);
        auto& table = state.tables[t->tableidx];
        if (t->elemidx >= table.size())
            table.resize(t->elemidx + 1);
        table[t->elemidx] = t->funcref;
        return false;
    }
    if (const auto* t = std::get_if<event::TableGet>(&e))
    {
        if (t->tableidx >= state.tables.size())
            state.tables.resize(t->tableidx + 1);
        auto& table = state.tables[t->tableidx];
        if (t->elemidx >= table.size())
            table.resize(t->elemidx + 1);
        auto& cell = table[t->elemidx];
        if (cell == t->funcref)
            return false;
        if (!t->funcref)
            throw ReplayabilityError{"table " + std::to_string(t->tableidx) + " element " +
                                     std::to_string(t->elemidx) +
                                     " holds a reference the host created; it cannot be replayed"};
        cell = t->funcref;
        return true;
    }
    throw Error{ErrorClass::Internal, "shadow_step on a call event"};
}

bool callstack_step(CallKindStack& stack, const TraceEvent& e, const std::set<uint32_t>& imported,
    std::size_t event_index)
{
    auto& s = stack.stack;
    auto pop = [&]() {
        if (s.size() <= 1)
            throw IllFormedTrace{event_index, "call kind stack underflow"};
        s.pop_back();
    };
    switch (tag_of(e))
    {
    case EventTag::FuncEntry:
    {
        const bool keep = s.back() == CallKind::Ext;
        s.push_back(CallKind::Int);
        return keep;
    }
    case EventTag::FuncReturn:
        pop();
        return false;
    case EventTag::Call:
        if (imported.contains(std::get<event::Call>(e).funcidx))
        {
            s.push_back(CallKind::Ext);
            return true;
        }
        return false;
    case EventTag::CallReturn:
        if (imported.contains(std::get<event::CallReturn>(e).funcidx))
        {
            pop();
            return true;
        }
        return false;
    default:
        throw Error{ErrorClass::Internal, "callstack_step on a state event"};
    }
}

uint64_t ReduceStats::total_kept() const noexcept
{
    uint64_t n = 0;
    for (const auto k : kept)
        n += k;
    return n;
}

uint64_t ReduceStats::total() const noexcept
{
    uint64_t n = total_kept();
    for (const auto d : discarded)
        n += d;
    return n;
}

std::string ReduceStats::to_json() const
{
    nlohmann::ordered_json doc;
    doc["total"] = total();
    doc["kept"] = total_kept();
    auto& by = doc["events"];
    for (std::size_t i = 0; i < kept.size(); ++i)
        by[event_name(static_cast<EventTag>(i))] = {{"kept", kept[i]}, {"discarded", discarded[i]}};
    return doc.dump(2) + "\n";
}

std::string ReduceStats::to_text() const
{
    std::ostringstream out;
    out << std::left << std::setw(12) << "event" << std::right << std::setw(10) << "kept" << std::setw(12)
        << "discarded" << '\n';
    for (std::size_t i = 0; i < kept.size(); ++i)
        out << std::left << std::setw(12) << event_name(static_cast<EventTag>(i)) << std::right << std::setw(10)
            << kept[i] << std::setw(12) << discarded[i] << '\n';
    out << std::left << std::setw(12) << "total" << total_kept() << " of " << total() << '\n';
    return out.str();
}

Reducer::Reducer(const ModuleFacts& facts, ShadowState::Sizing sizing)
  : m_imported{facts.imported},
    m_function_count{facts.function_count},
    m_shadow{ShadowState::from(facts, sizing)}
{}

bool Reducer::feed(const TraceEvent& e)
{
    const auto index = m_index++;
    const auto tag = tag_of(e);
    bool keep = false;
    switch (tag)
    {
    case EventTag::FuncEntry:
    case EventTag::FuncReturn:
    case EventTag::Call:
    case EventTag::CallReturn:
    {
        const auto funcidx = std::visit(
            [](const auto& ev) -> uint32_t {
                if constexpr (requires { ev.funcidx; })
                    return ev.funcidx;
                else
                    return 0;
            },
            e);
        if (funcidx >= m_function_count)
            throw IllFormedTrace{index, "unknown function " + std::to_string(funcidx)};
        keep = callstack_step(m_stack, e, m_imported, index);
        break;
    }
    default:
        keep = shadow_step(m_shadow, e);
        break;
    }
    auto& counter = keep ? m_stats.kept : m_stats.discarded;
    ++counter[static_cast<std::size_t>(tag)];
    return keep;
}

void Reducer::grow(uint32_t memidx, uint32_t pages)
{
    if (memidx < m_shadow.memories.size())
        m_shadow.memories[memidx].resize(uint64_t{pages} * ShadowMemory::page_bytes);
}

Trace reduce(const Trace& raw, const wasm::Module& m, ReduceStats* stats)
{
    Reducer reducer{module_facts(m), ShadowState::Sizing::Maximum};
    Trace out;
    for (const auto& e : raw.events)
        if (reducer.feed(e))
            out.events.push_back(e);
    if (stats)
        *stats = reducer.stats();
    return out;
}

OnlineReducer::OnlineReducer(const wasm::Module& m)
  : m_reducer{module_facts(m), ShadowState::Sizing::Initial}
{}

void OnlineReducer::event(const TraceEvent& e)
{
    if (m_reducer.feed(e))
    {
        m_out.events.push_back(e);
        m_peak = std::max(m_peak, m_out.events.size());
    }
}

void OnlineReducer::grow(uint32_t memidx, uint32_t pages)
{
    m_reducer.grow(memidx, pages);
}

}  // namespace wrr
