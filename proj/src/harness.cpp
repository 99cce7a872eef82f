// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "wrr/harness.hpp"
#include "wrr/error.hpp"
#include "wrr/instrument.hpp"

#include <cstdio>
#include <memory>

namespace wrr
{
Value to_value(wasm::ValType type, uint64_t raw)
{
    switch (type)
    {
    case wasm::ValType::I32:
        return Value::truncated(ValueKind::I32, raw);
    case wasm::ValType::I64:
        return Value::i64(raw);
    case wasm::ValType::F32:
        return Value::truncated(ValueKind::F32, raw);
    case wasm::ValType::F64:
        return Value::f64_bits(raw);
    case wasm::ValType::FuncRef:
        break;
    }
    throw UnsupportedFeature{"funcref values at the host boundary"};
}

uint64_t to_raw(const Value& v)
{
    return v.bits;
}

std::string memory_hash(const FinalState& state)
{
    uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& mem : state.memories)
        for (const auto b : mem)
        {
            h ^= b;
            h *= 0x100000001b3ULL;
        }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace
{
ValueKind kind_of(wasm::ValType t)
{
    switch (t)
    {
    case wasm::ValType::I32:
        return ValueKind::I32;
    case wasm::ValType::I64:
        return ValueKind::I64;
    case wasm::ValType::F32:
        return ValueKind::F32;
    case wasm::ValType::F64:
        return ValueKind::F64;
    default:
        throw UnsupportedFeature{"funcref values at the host boundary"};
    }
}

std::optional<ValueKind> suffix_kind(std::string_view suffix)
{
    if (suffix == "i32" || suffix == "i64_32")
        return ValueKind::I32;
    if (suffix == "i64")
        return ValueKind::I64;
    if (suffix == "f32")
        return ValueKind::F32;
    if (suffix == "f64")
        return ValueKind::F64;
    if (suffix == "i32_8" || suffix == "i64_8")
        return ValueKind::I8;
    if (suffix == "i32_16" || suffix == "i64_16")
        return ValueKind::I16;
    return std::nullopt;
}

class Runner
{
public:
    Runner(const wasm::Module& m, const HostScenario& scenario, const RunOptions& options)
      : m_scenario{scenario}, m_options{options}, m_meta{read_instr_meta(m)}
    {
        std::vector<interp::HostFunction> hosts;
        for (const auto& imp : m.imports)
        {
            if (imp.kind() != wasm::ExternKind::Func)
                continue;
            const auto& type = m.types.at(std::get<uint32_t>(imp.desc));
            if (imp.module == options.recorder_module)
                hosts.push_back(recorder(imp.name));
            else
                hosts.push_back(scripted(imp, type));
        }
        interp::Hooks hooks;
        hooks.on_grow = [this](uint32_t memidx, uint32_t, uint32_t pages) {
            if (m_options.sink)
                m_options.sink->grow(memidx, pages);
        };
        m_instance = std::make_unique<interp::Instance>(m, std::move(hosts), hooks, options.interpreter);
    }

    RunResult run()
    {
        m_instance->run_start();
        for (const auto& step : m_scenario.steps)
            call_export(step.name, step.args, false);

        m_result.state.memories.clear();
        for (std::size_t i = 0; i < m_instance->memory_count(); ++i)
            m_result.state.memories.push_back(m_instance->memory(static_cast<uint32_t>(i)));
        m_result.state.globals = m_instance->globals();
        return std::move(m_result);
    }

private:
    void emit(TraceEvent e)
    {
        if (m_options.sink)
            m_options.sink->event(e);
        else
            m_result.trace.events.push_back(std::move(e));
    }

    std::vector<Value> take_pending()
    {
        auto out = std::move(m_pending);
        m_pending.clear();
        return out;
    }

    void call_export(const std::string& name, const std::vector<Value>& args, bool nested)
    {
        const auto& m = m_instance->module();
        const auto* e = m.find_export(name);
        if (e == nullptr || e->kind != wasm::ExternKind::Func)
            throw ScenarioError{"scenario invokes unknown export '" + name + "'"};
        const auto& type = m.function_type(e->index);
        if (type.params.size() != args.size())
            throw SignatureMismatch{"export '" + name + "' expects " + std::to_string(type.params.size()) +
                                    " arguments"};
        std::vector<uint64_t> raw;
        for (std::size_t i = 0; i < args.size(); ++i)
        {
            if (kind_of(type.params[i]) != args[i].kind)
                throw SignatureMismatch{"argument " + std::to_string(i) + " of '" + name + "' has kind " +
                                        kind_name(args[i].kind)};
            raw.push_back(to_raw(args[i]));
        }
        const auto slot = m_result.state.calls.size();
        m_result.state.calls.push_back({name, args, {}, nested});
        const auto results = m_instance->invoke(e->index, raw);
        for (std::size_t i = 0; i < results.size(); ++i)
            m_result.state.calls[slot].results.push_back(to_value(type.results[i], results[i]));
    }

    interp::HostFunction scripted(const wasm::Import& imp, const wasm::FuncType& type)
    {
        std::string key = imp.name;
        if (!m_scenario.imports.contains(key))
            key = imp.module + "." + imp.name;
        if (!m_scenario.imports.contains(key))
            throw LinkError{imp.name};
        const auto* behaviors = &m_scenario.imports.at(key);
        auto counter = std::make_shared<std::size_t>(0);
        return [this, key, behaviors, counter, type](std::span<const uint64_t>, std::span<uint64_t> results) {
            const auto n = (*counter)++;
            if (n >= behaviors->size())
                throw ScenarioExhausted{key, n + 1};
            const auto& b = (*behaviors)[n];
            for (const auto& action : b.pre)
                perform(action);
            if (b.results.size() != type.results.size())
                throw SignatureMismatch{"scenario for '" + key + "' returns " + std::to_string(b.results.size()) +
                                        " values, import expects " + std::to_string(type.results.size())};
            for (std::size_t i = 0; i < results.size(); ++i)
            {
                if (b.results[i].kind != kind_of(type.results[i]))
                    throw SignatureMismatch{"scenario result " + std::to_string(i) + " for '" + key +
                                            "' has the wrong kind"};
                results[i] = to_raw(b.results[i]);
            }
        };
    }

    void perform(const HostAction& action)
    {
        if (const auto* w = std::get_if<host::WriteMemory>(&action))
        {
            if (w->memidx >= m_instance->memory_count())
                throw ScenarioError{"writeMem to missing memory " + std::to_string(w->memidx)};
            auto& mem = m_instance->memory(w->memidx);
            if (uint64_t{w->addr} + w->bytes.size() > mem.size())
                throw ScenarioError{"writeMem out of bounds at " + std::to_string(w->addr)};
            std::copy(w->bytes.begin(), w->bytes.end(), mem.begin() + w->addr);
        }
        else if (const auto* g = std::get_if<host::WriteGlobal>(&action))
        {
            const auto& m = m_instance->module();
            if (g->globalidx >= m.global_count())
                throw ScenarioError{"writeGlobal to missing global " + std::to_string(g->globalidx)};
            const auto type = m.global_type(g->globalidx);
            if (!type.is_mutable || kind_of(type.type) != g->value.kind)
                throw ScenarioError{"writeGlobal to immutable or differently typed global " +
                                    std::to_string(g->globalidx)};
            m_instance->set_global(g->globalidx, to_raw(g->value));
        }
        else
        {
            const auto& c = std::get<host::CallExport>(action);
            call_export(c.name, c.args, true);
        }
    }

    interp::HostFunction recorder(const std::string& name)
    {
        auto push = [this](ValueKind kind) -> interp::HostFunction {
            return [this, kind](std::span<const uint64_t> a, std::span<uint64_t>) {
                m_pending.push_back(Value::truncated(kind, a[0]));
            };
        };
        auto funcidx = [](std::span<const uint64_t> a) { return static_cast<uint32_t>(a[0]); };

        if (name == "arg_i32")
            return push(ValueKind::I32);
        if (name == "arg_i64")
            return push(ValueKind::I64);
        if (name == "arg_f32")
            return push(ValueKind::F32);
        if (name == "arg_f64")
            return push(ValueKind::F64);
        if (name == "func_entry")
            return [this, funcidx](std::span<const uint64_t> a, std::span<uint64_t>) {
                emit(event::FuncEntry{funcidx(a), take_pending()});
            };
        if (name == "func_return")
            return [this, funcidx](std::span<const uint64_t> a, std::span<uint64_t>) {
                emit(event::FuncReturn{funcidx(a), take_pending()});
            };
        if (name == "call_pre")
            return [this, funcidx](std::span<const uint64_t> a, std::span<uint64_t>) {
                emit(event::Call{funcidx(a)});
            };
        if (name == "call_post")
            return [this, funcidx](std::span<const uint64_t> a, std::span<uint64_t>) {
                emit(event::CallReturn{funcidx(a), take_pending()});
            };
        if (name == "store_bulk")
            return [this](std::span<const uint64_t> a, std::span<uint64_t>) {
                const auto memidx = static_cast<uint32_t>(a[0]);
                const auto addr = static_cast<uint32_t>(a[1]);
                const auto len = static_cast<uint32_t>(a[2]);
                const auto& mem = m_instance->memory(memidx);
                uint32_t i = 0;
                for (; i + 8 <= len; i += 8)
                {
                    uint64_t v = 0;
                    for (int b = 7; b >= 0; --b)
                        v = (v << 8) | mem[addr + i + static_cast<uint32_t>(b)];
                    emit(event::Store{memidx, addr + i, Value::i64(v)});
                }
                for (; i < len; ++i)
                    emit(event::Store{memidx, addr + i, Value::i8(mem[addr + i])});
            };
        if (name.starts_with("load_") || name.starts_with("store_"))
        {
            const bool is_load = name.starts_with("load_");
            const auto kind = suffix_kind(std::string_view{name}.substr(is_load ? 5 : 6));
            if (!kind)
                throw LinkError{m_options.recorder_module + "." + name};
            return [this, is_load, k = *kind](std::span<const uint64_t> a, std::span<uint64_t>) {
                const auto memidx = static_cast<uint32_t>(a[0]);
                const auto addr = static_cast<uint32_t>(a[1]);
                const auto value = Value::truncated(k, a[2]);
                if (is_load)
                    emit(event::Load{memidx, addr, value});
                else
                    emit(event::Store{memidx, addr, value});
            };
        }
        if (name.starts_with("global_get_") || name.starts_with("global_set_"))
        {
            const bool is_get = name.starts_with("global_get_");
            const auto kind = suffix_kind(std::string_view{name}.substr(11));
            if (!kind)
                throw LinkError{m_options.recorder_module + "." + name};
            return [this, is_get, k = *kind](std::span<const uint64_t> a, std::span<uint64_t>) {
                const auto idx = static_cast<uint32_t>(a[0]);
                const auto value = Value::truncated(k, a[1]);
                if (is_get)
                    emit(event::GlobalGet{idx, value});
                else
                    emit(event::GlobalSet{idx, value});
            };
        }
        if (name == "table_get" || name == "table_set")
            return [this, is_get = name == "table_get"](std::span<const uint64_t> a, std::span<uint64_t>) {
                std::optional<uint32_t> ref;
                if (a[2] != wasm::null_ref)
                    ref = m_meta ? m_meta->to_original(static_cast<uint32_t>(a[2]))
                                 : std::optional<uint32_t>{static_cast<uint32_t>(a[2])};
                const auto table = static_cast<uint32_t>(a[0]);
                const auto elem = static_cast<uint32_t>(a[1]);
                if (is_get)
                    emit(event::TableGet{table, elem, ref});
                else
                    emit(event::TableSet{table, elem, ref});
            };
        throw LinkError{m_options.recorder_module + "." + name};
    }

    const HostScenario& m_scenario;
    const RunOptions& m_options;
    std::optional<InstrMeta> m_meta;
    std::unique_ptr<interp::Instance> m_instance;
    std::vector<Value> m_pending;
    RunResult m_result;
};
}  // namespace

RunResult run_scenario(const wasm::Module& m, const HostScenario& scenario, const RunOptions& options)
{
    Runner runner{m, scenario, options};
    return runner.run();
}

}  // namespace wrr
