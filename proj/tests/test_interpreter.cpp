// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "support.hpp"

#include "wrr/error.hpp"
#include "wrr/harness.hpp"
#include "wrr/interpreter.hpp"
#include "wrr/pipeline.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>

using namespace wrr;
using namespace wrr::wasm;

namespace
{
Module add_module()
{
    Module m;
    const auto add = test::add_function(m, {{ValType::I32, ValType::I32}, {ValType::I32}},
        {make_index(Opcode::local_get, 0), make_index(Opcode::local_get, 1), make(Opcode::i32_add)});
    m.exports.push_back({"add", ExternKind::Func, add});
    return m;
}

uint64_t run1(const Module& m, const std::string& name, std::vector<uint64_t> args)
{
    interp::Instance inst{m, {}};
    return inst.invoke_export(name, args).at(0);
}

Module unary(ValType in, ValType out, std::vector<Instruction> body)
{
    Module m;
    body.insert(body.begin(), make_index(Opcode::local_get, 0));
    const auto f = test::add_function(m, {{in}, {out}}, std::move(body));
    m.exports.push_back({"f", ExternKind::Func, f});
    return m;
}

/// Call count of the memoized fib in corpus/recursive, computed without Wasm.
int fib_invocations(int n, std::vector<int>& memo)
{
    int calls = 1;
    if (n < 2)
        return calls;
    if (memo[n])
        return calls;
    calls += fib_invocations(n - 1, memo);
    calls += fib_invocations(n - 2, memo);
    memo[n] = 1;
    return calls;
}

std::size_t count_kind(const Trace& t, EventTag tag)
{
    std::size_t n = 0;
    for (const auto& e : t.events)
        n += tag_of(e) == tag;
    return n;
}
}  // namespace

TEST_SUITE("interpreter")
{
    TEST_CASE("active data segments are applied")
    {
        Module m;
        m.memories.push_back({{1, std::nullopt}});
        m.datas.push_back({SegmentMode::Active, 0, make_i32(0), {'h', 'i'}});
        interp::Instance inst{m, {}};
        CHECK(inst.memory().size() == interp::page_size);
        CHECK(inst.memory()[0] == 'h');
        CHECK(inst.memory()[1] == 'i');
        CHECK(inst.memory()[2] == 0);
    }

    TEST_CASE("missing import binding")
    {
        Module m;
        test::add_import(m, "env", "f", {});
        try
        {
            run_scenario(m, {});
            FAIL("expected LinkError");
        }
        catch (const LinkError& e)
        {
            CHECK(e.import_name == "f");
            CHECK(e.error_class() == ErrorClass::Scenario);
        }
    }

    TEST_CASE("uninstrumented add records nothing")
    {
        HostScenario s;
        s.steps.push_back({"add", {Value::i32(2), Value::i32(3)}});
        const auto r = run_scenario(add_module(), s);
        CHECK(r.trace.events.empty());
        REQUIRE(r.state.calls.size() == 1);
        CHECK(r.state.calls[0].results == std::vector{Value::i32(5)});
        CHECK_FALSE(r.state.calls[0].nested);
    }

    TEST_CASE("identity echoes arguments bit-exactly")
    {
        const auto m = unary(ValType::F64, ValType::F64, {});
        const uint64_t nan = 0x7ff4000000000abcull;
        CHECK(run1(m, "f", {nan}) == nan);
    }

    TEST_CASE("traps")
    {
        const auto div = unary(ValType::I32, ValType::I32, {make_i32(0), make(Opcode::i32_div_s)});
        interp::Instance inst{div, {}};
        const std::vector<uint64_t> args{1};
        try
        {
            inst.invoke_export("f", args);
            FAIL("expected Trap");
        }
        catch (const Trap& t)
        {
            CHECK(t.kind == TrapKind::IntegerDivByZero);
        }

        const auto overflow = unary(ValType::I32, ValType::I32, {make_i32(~0u), make(Opcode::i32_div_s)});
        interp::Instance inst2{overflow, {}};
        const std::vector<uint64_t> min{0x80000000u};
        CHECK_THROWS_AS(inst2.invoke_export("f", min), Trap);

        Module oob;
        oob.memories.push_back({{1, std::nullopt}});
        const auto f = test::add_function(oob, {{}, {ValType::I32}}, {make_i32(65535), make_mem(Opcode::i32_load)});
        oob.exports.push_back({"f", ExternKind::Func, f});
        interp::Instance inst3{oob, {}};
        try
        {
            inst3.invoke_export("f", {});
            FAIL("expected Trap");
        }
        catch (const Trap& t)
        {
            CHECK(t.kind == TrapKind::OutOfBoundsMemory);
        }

        Module deep;
        const auto self = test::add_function(deep, {}, {make_index(Opcode::call, 0)});
        deep.exports.push_back({"f", ExternKind::Func, self});
        interp::Instance inst4{deep, {}};
        try
        {
            inst4.invoke_export("f", {});
            FAIL("expected Trap");
        }
        catch (const Trap& t)
        {
            CHECK(t.kind == TrapKind::CallStackExhausted);
        }
    }

    TEST_CASE("numeric semantics")
    {
        const auto rotl = unary(ValType::I32, ValType::I32, {make_i32(8), make(Opcode::i32_rotl)});
        CHECK(run1(rotl, "f", {0x12345678}) == 0x34567812);
        const auto clz = unary(ValType::I64, ValType::I64, {make(Opcode::i64_clz)});
        CHECK(run1(clz, "f", {1}) == 63);
        const auto sext = unary(ValType::I32, ValType::I32, {make(Opcode::i32_extend8_s)});
        CHECK(run1(sext, "f", {0x80}) == 0xffffff80u);
        const auto sat = unary(ValType::F64, ValType::I32, {make(Opcode::i32_trunc_sat_f64_s)});
        double big = 1e20;
        uint64_t bits;
        std::memcpy(&bits, &big, 8);
        CHECK(run1(sat, "f", {bits}) == 0x7fffffffu);
        const auto trunc = unary(ValType::F64, ValType::I32, {make(Opcode::i32_trunc_f64_s)});
        interp::Instance inst{trunc, {}};
        const std::vector<uint64_t> args{bits};
        CHECK_THROWS_AS(inst.invoke_export("f", args), Trap);
        const auto fmin = unary(ValType::F32, ValType::F32, {make_f32_bits(0x80000000u), make(Opcode::f32_min)});
        // min(+0, -0) is -0
        CHECK(run1(fmin, "f", {0}) == 0x80000000u);
    }

    TEST_CASE("bulk memory")
    {
        Module m;
        m.memories.push_back({{1, std::nullopt}});
        m.datas.push_back({SegmentMode::Passive, 0, {}, {1, 2, 3}});
        m.data_count = 1;
        const auto f = test::add_function(m, {{}, {ValType::I32}},
            {make_i32(10), make_i32(0), make_i32(3), make_index(Opcode::memory_init, 0),
                make_index(Opcode::data_drop, 0), make_i32(20), make_i32(10), make_i32(3),
                make(Opcode::memory_copy), make_i32(30), make_i32(9), make_i32(2), make(Opcode::memory_fill),
                make_i32(20), make_mem(Opcode::i32_load)});
        m.exports.push_back({"f", ExternKind::Func, f});
        interp::Instance inst{m, {}};
        CHECK(inst.invoke_export("f", {}).at(0) == 0x00030201u);
        CHECK(inst.memory()[30] == 9);
        CHECK(inst.memory()[31] == 9);
        // The segment was dropped, so a second non-empty init traps.
        CHECK_THROWS_AS(inst.invoke_export("f", {}), Trap);
    }

    TEST_CASE("memoized fib call count matches an analytic count")
    {
        const auto fx = test::load_fixture("recursive");
        const auto raw = test::record_raw(fx.module, fx.scenario);
        std::vector<int> memo(64, 0);
        REQUIRE(fx.scenario.steps.size() == 1);
        const auto n = static_cast<int>(fx.scenario.steps[0].args.at(0).bits);
        const auto calls = static_cast<std::size_t>(fib_invocations(n, memo));
        CHECK(count_kind(raw, EventTag::FuncEntry) == calls);
        CHECK(count_kind(raw, EventTag::FuncReturn) == calls);
        CHECK(count_kind(raw, EventTag::FuncEntry) + count_kind(raw, EventTag::FuncReturn) == 2 * calls);
    }

    TEST_CASE("shadow-memory figure raw trace")
    {
        const auto fx = test::load_fixture("shadow_mem");
        const auto raw = test::record_raw(fx.module, fx.scenario);
        const std::vector<TraceEvent> expected{
            event::Store{0, 1002, Value::i8(0x01)},
            event::Call{0},
            event::CallReturn{0, {}},
            event::Load{0, 1000, Value::i8(0xaa)},
            event::Load{0, 1002, Value::i8(0x01)},
            event::Load{0, 1003, Value::i8(0xbb)},
        };
        // The six events sit between the export's FuncEntry and FuncReturn.
        REQUIRE(raw.events.size() == expected.size() + 2);
        CHECK(tag_of(raw.events.front()) == EventTag::FuncEntry);
        CHECK(tag_of(raw.events.back()) == EventTag::FuncReturn);
        for (std::size_t i = 0; i < expected.size(); ++i)
            CHECK(raw.events[i + 1] == expected[i]);
    }

    TEST_CASE("re-entrant export is recorded between Call and CallReturn")
    {
        const auto fx = test::load_fixture("reentrant");
        const auto raw = test::record_raw(fx.module, fx.scenario);
        std::optional<std::size_t> call, entry, ret;
        for (std::size_t i = 0; i < raw.events.size(); ++i)
        {
            if (!call && tag_of(raw.events[i]) == EventTag::Call)
                call = i;
            else if (call && !entry && tag_of(raw.events[i]) == EventTag::FuncEntry)
                entry = i;
            else if (entry && !ret && tag_of(raw.events[i]) == EventTag::CallReturn)
                ret = i;
        }
        REQUIRE(call);
        REQUIRE(entry);
        REQUIRE(ret);
        CHECK(*call < *entry);
        CHECK(*entry < *ret);
    }

    TEST_CASE("runs are deterministic")
    {
        for (const auto& name : test::corpus_names())
        {
            CAPTURE(name);
            const auto fx = test::load_fixture(name);
            const auto a = run_scenario(fx.module, fx.scenario);
            const auto b = run_scenario(fx.module, fx.scenario);
            CHECK(a.state == b.state);
            CHECK(test::record_raw(fx.module, fx.scenario) == test::record_raw(fx.module, fx.scenario));
        }
    }

    TEST_CASE("scenario errors")
    {
        const auto fx = test::load_fixture("shadow_mem");
        auto s = fx.scenario;
        s.imports["mutate"].clear();
        CHECK_THROWS_AS(run_scenario(fx.module, s), ScenarioExhausted);
        s = fx.scenario;
        s.steps.push_back({"nope", {}});
        CHECK_THROWS_AS(run_scenario(fx.module, s), Error);
        CHECK_THROWS_AS(parse_scenario("{\"steps\": 3"), Error);
        try
        {
            parse_scenario("{\"steps\": [{\"invoke\": {\"name\": \"f\", \"args\": [{\"kind\": \"i8\", \"value\": 1}]}}]}");
            FAIL("expected a parse error");
        }
        catch (const Error& e)
        {
            CHECK(e.error_class() == ErrorClass::Parse);
        }
    }

    TEST_CASE("scenario JSON round trip")
    {
        for (const auto& name : test::corpus_names())
        {
            const auto fx = test::load_fixture(name);
            CHECK(parse_scenario(scenario_to_json(fx.scenario)) == fx.scenario);
        }
    }

    TEST_CASE("memory hash")
    {
        FinalState empty;
        CHECK(memory_hash(empty) == "cbf29ce484222325");
        FinalState one;
        one.memories.push_back({'a'});
        // FNV-1a("a")
        CHECK(memory_hash(one) == "af63dc4c8601ec8c");
    }
}
