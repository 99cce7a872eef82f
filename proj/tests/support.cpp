// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "support.hpp"

#include "wrr/codegen.hpp"
#include "wrr/pipeline.hpp"

#include <algorithm>

namespace wrr::test
{
std::filesystem::path corpus_dir()
{
    return WRR_CORPUS_DIR;
}

std::vector<std::string> corpus_names()
{
    std::vector<std::string> names;
    for (const auto& entry : std::filesystem::directory_iterator{corpus_dir()})
    {
        const auto& p = entry.path();
        if (p.extension() == ".json" && std::filesystem::exists(std::filesystem::path{p}.replace_extension(".wasm")))
            names.push_back(p.stem().string());
    }
    std::sort(names.begin(), names.end());
    return names;
}

wasm::Module load_module(const std::string& name)
{
    return wasm::parse_module(read_file(corpus_dir() / (name + ".wasm")));
}

Fixture load_fixture(const std::string& name)
{
    const auto json = read_file(corpus_dir() / (name + ".json"));
    return {name, load_module(name), parse_scenario({reinterpret_cast<const char*>(json.data()), json.size()})};
}

uint32_t add_import(wasm::Module& m, const std::string& module, const std::string& name, const wasm::FuncType& type)
{
    m.imports.push_back({module, name, m.intern_type(type)});
    return m.imported_function_count() - 1;
}

uint32_t add_function(wasm::Module& m, const wasm::FuncType& type, std::vector<wasm::Instruction> body,
    std::vector<wasm::Local> locals)
{
    body.push_back(wasm::make(wasm::Opcode::end));
    m.functions.push_back({m.intern_type(type), std::move(locals), std::move(body)});
    return m.function_count() - 1;
}

wasm::Module translate_example_module()
{
    using wasm::Opcode;
    using wasm::ValType;
    wasm::Module m;
    add_import(m, "env", "f", {{}, {ValType::I32}});
    m.memories.push_back({{1, std::nullopt}});
    const auto run = add_function(m, {{}, {ValType::I32}},
        {wasm::make_index(Opcode::call, 0), wasm::make_i32(1003), wasm::make_mem(Opcode::i32_load8_u),
            wasm::make(Opcode::i32_add)});
    m.exports.push_back({"run", wasm::ExternKind::Func, run});
    m.exports.push_back({"memory", wasm::ExternKind::Memory, 0});
    return m;
}

std::vector<uint8_t> Rng::bytes(std::size_t n)
{
    std::vector<uint8_t> out(n);
    for (auto& b : out)
        b = static_cast<uint8_t>(bits());
    return out;
}

Value random_value(Rng& rng, ValueKind kind)
{
    auto raw = rng.bits();
    // Bias floats toward NaNs with payloads so bit-exactness is exercised.
    if (kind == ValueKind::F32 && rng.chance(0.2))
        raw = 0x7f800000u | (raw & 0x807fffffu) | 1u;
    if (kind == ValueKind::F64 && rng.chance(0.2))
        raw = 0x7ff0000000000000ull | (raw & 0x800fffffffffffffull) | 1u;
    return Value::truncated(kind, raw);
}

Value random_number(Rng& rng)
{
    static const std::vector kinds{ValueKind::I32, ValueKind::I64, ValueKind::F32, ValueKind::F64};
    return random_value(rng, rng.pick(kinds));
}

namespace
{
std::vector<Value> random_numbers(Rng& rng)
{
    std::vector<Value> out(rng.range(0, 4));
    for (auto& v : out)
        v = random_number(rng);
    return out;
}

uint32_t random_u32(Rng& rng)
{
    // Mix small indices with full-width ones so both encodings get covered.
    return rng.chance(0.5) ? static_cast<uint32_t>(rng.range(0, 16)) : static_cast<uint32_t>(rng.bits());
}
}  // namespace

TraceEvent random_event(Rng& rng)
{
    static const std::vector all_kinds{ValueKind::I32, ValueKind::I64, ValueKind::F32, ValueKind::F64,
        ValueKind::I8, ValueKind::I16};
    switch (rng.range(0, event_tag_count - 1))
    {
    case 0:
        return event::FuncEntry{random_u32(rng), random_numbers(rng)};
    case 1:
        return event::FuncReturn{random_u32(rng), random_numbers(rng)};
    case 2:
        return event::Call{random_u32(rng)};
    case 3:
        return event::CallReturn{random_u32(rng), random_numbers(rng)};
    case 4:
        return event::Load{random_u32(rng), random_u32(rng), random_value(rng, rng.pick(all_kinds))};
    case 5:
        return event::Store{random_u32(rng), random_u32(rng), random_value(rng, rng.pick(all_kinds))};
    case 6:
        return event::GlobalGet{random_u32(rng), random_number(rng)};
    case 7:
    {
        event::TableGet t{random_u32(rng), random_u32(rng), std::nullopt};
        if (rng.chance(0.7))
            t.funcref = random_u32(rng);
        return t;
    }
    case 8:
        return event::GlobalSet{random_u32(rng), random_number(rng)};
    default:
    {
        event::TableSet t{random_u32(rng), random_u32(rng), std::nullopt};
        if (rng.chance(0.7))
            t.funcref = random_u32(rng);
        return t;
    }
    }
}

Trace random_trace(Rng& rng, std::size_t max_events)
{
    Trace t;
    const auto n = rng.range(0, max_events);
    for (std::size_t i = 0; i < n; ++i)
        t.events.push_back(random_event(rng));
    return t;
}

HostScenario random_target_scenario(Rng& rng, bool replayable)
{
    HostScenario s;
    std::size_t host_calls = 0;
    const auto steps = rng.range(1, 6);
    for (std::size_t i = 0; i < steps; ++i)
    {
        switch (rng.range(0, 5))
        {
        case 0:
            s.steps.push_back({"peek", {Value::i32(static_cast<uint32_t>(rng.bits()))}});
            break;
        case 1:
            s.steps.push_back({"grow", {}});
            break;
        case 2:
            s.steps.push_back({"last", {}});
            break;
        default:
            s.steps.push_back({"mix", {Value::i32(static_cast<uint32_t>(rng.bits()))}});
            host_calls += 4;
            break;
        }
    }
    auto& behaviors = s.imports["host"];
    for (std::size_t i = 0; i < host_calls; ++i)
    {
        ImportBehavior b;
        const auto actions = rng.range(0, 3);
        for (std::size_t a = 0; a < actions; ++a)
        {
            switch (rng.range(0, 3))
            {
            case 0:
                b.pre.push_back(host::WriteGlobal{0, Value::i32(static_cast<uint32_t>(rng.range(0, 1000)))});
                break;
            case 1:
                if (rng.chance(0.8))
                    b.pre.push_back(host::CallExport{"peek", {Value::i32(static_cast<uint32_t>(rng.bits()))}});
                else
                    b.pre.push_back(host::CallExport{"last", {}});
                break;
            default:
            {
                const auto len = rng.range(1, 12);
                b.pre.push_back(host::WriteMemory{0, static_cast<uint32_t>(rng.range(0, 1024 - len)), rng.bytes(len)});
                break;
            }
            }
        }
        if (replayable)
            std::stable_partition(b.pre.begin(), b.pre.end(),
                [](const auto& a) { return !std::holds_alternative<host::CallExport>(a); });
        // Results steer the module's store and load addresses.
        b.results.push_back(Value::i32(static_cast<uint32_t>(rng.bits())));
        behaviors.push_back(std::move(b));
    }
    return s;
}

Trace record_raw(const wasm::Module& m, const HostScenario& s)
{
    return record(m, s, RecordMode::Raw);
}

std::vector<ir::Action> flatten(const ir::Replay& r, const ir::Context& c)
{
    std::vector<ir::Action> out;
    for (const auto& a : c.actions)
    {
        if (const auto* aux = std::get_if<ir::CallAux>(&a))
        {
            const auto inner = flatten(r, r.auxiliaries.at(aux->aux));
            out.insert(out.end(), inner.begin(), inner.end());
        }
        else
        {
            out.push_back(a);
        }
    }
    return out;
}

}  // namespace wrr::test
