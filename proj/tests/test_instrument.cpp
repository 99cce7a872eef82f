// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "support.hpp"

#include "wrr/error.hpp"
#include "wrr/harness.hpp"
#include "wrr/instrument.hpp"

#include <doctest.h>

#include <set>

using namespace wrr;
using namespace wrr::wasm;

namespace
{
std::optional<FuncType> recorder(const std::string& name)
{
    for (const auto& [n, t] : recorder_signatures())
        if (n == name)
            return t;
    return std::nullopt;
}
}  // namespace

TEST_SUITE("instrument")
{
    TEST_CASE("recorder signatures")
    {
        const auto load = recorder("load_i32");
        REQUIRE(load);
        CHECK(*load == FuncType{{ValType::I32, ValType::I32, ValType::I32}, {}});
        const auto pre = recorder("call_pre");
        REQUIRE(pre);
        CHECK(*pre == FuncType{{ValType::I32}, {}});

        // One recorder per distinct load and store shape, counted from the opcode table:
        // loads and stores collapse signedness and keep (value type, access width).
        std::set<std::pair<Sig, uint8_t>> loads, stores;
        for (uint16_t code = 0; code <= 0xff; ++code)
        {
            const auto info = op_info(code);
            if (!info)
                continue;
            if (is_load(info->op))
                loads.insert({info->sig, info->access_width});
            if (is_store(info->op))
                stores.insert({info->sig, info->access_width});
        }
        const std::size_t args = 4;          // one per number type
        const std::size_t call_hooks = 4;    // func_entry, func_return, call_pre, call_post
        const std::size_t bulk = 1;          // memory.fill / memory.copy / memory.init
        const std::size_t globals = 4 + 4;   // get and set, one per number type
        const std::size_t tables = 1 + 1;    // get and set
        CHECK(loads.size() == 9);
        CHECK(stores.size() == 9);
        CHECK(recorder_signatures().size() == args + call_hooks + loads.size() + stores.size() + bulk + globals + tables);

        std::set<std::string> names;
        for (const auto& [n, t] : recorder_signatures())
            CHECK(names.insert(n).second);
    }

    TEST_CASE("module without functions gains only the recorder imports")
    {
        Module m;
        m.memories.push_back({{1, std::nullopt}});
        m.globals.push_back({{ValType::I32, true}, make_i32(3)});
        m.exports.push_back({"memory", ExternKind::Memory, 0});
        const auto out = instrument(m);
        CHECK(out.imports.size() == recorder_signatures().size());
        for (const auto& imp : out.imports)
            CHECK(imp.module == "wrr");
        CHECK(out.functions.empty());
        CHECK(out.memories == m.memories);
        CHECK(out.globals == m.globals);
        CHECK(out.exports == m.exports);
        CHECK(validate_module(out).empty());
        const auto meta = read_instr_meta(out);
        REQUIRE(meta);
        CHECK(meta->imports == 0);
        CHECK(meta->recorders == recorder_signatures().size());
        CHECK(meta->wrapped.empty());
    }

    TEST_CASE("add records exactly entry and return")
    {
        Module m;
        const auto add = test::add_function(m, {{ValType::I32, ValType::I32}, {ValType::I32}},
            {make_index(Opcode::local_get, 0), make_index(Opcode::local_get, 1), make(Opcode::i32_add)});
        m.exports.push_back({"add", ExternKind::Func, add});
        HostScenario s;
        s.steps.push_back({"add", {Value::i32(2), Value::i32(3)}});
        const auto r = run_scenario(instrument(m), s);
        const Trace expected{{
            event::FuncEntry{0, {Value::i32(2), Value::i32(3)}},
            event::FuncReturn{0, {Value::i32(5)}},
        }};
        CHECK(r.trace == expected);
    }

    TEST_CASE("import calls are bracketed by Call and CallReturn")
    {
        const auto fx = test::load_fixture("shadow_mem");
        const auto r = run_scenario(instrument(fx.module), fx.scenario);
        std::size_t call = 0, ret = 0;
        for (std::size_t i = 0; i < r.trace.events.size(); ++i)
        {
            if (tag_of(r.trace.events[i]) == EventTag::Call)
                call = i;
            if (tag_of(r.trace.events[i]) == EventTag::CallReturn)
                ret = i;
        }
        CHECK(std::get<event::Call>(r.trace.events[call]).funcidx == 0);
        CHECK(ret == call + 1);
    }

    TEST_CASE("instrumented corpus modules validate and behave like the originals")
    {
        std::vector<std::string> names = test::corpus_names();
        names.push_back("properties/random_target");
        for (const auto& name : names)
        {
            CAPTURE(name);
            const auto m = test::load_module(name);
            const auto out = instrument(m);
            const auto ds = validate_module(out);
            CHECK(ds.empty());
            CHECK(parse_module(encode_module(out)) == out);
            // Exports keep their names and still denote the same original function.
            const auto meta = read_instr_meta(out);
            REQUIRE(meta);
            for (const auto& e : m.exports)
            {
                const auto* f = out.find_export(e.name);
                REQUIRE(f != nullptr);
                if (e.kind == ExternKind::Func)
                    CHECK(meta->to_original(f->index) == e.index);
            }
        }
        for (const auto& name : test::corpus_names())
        {
            CAPTURE(name);
            const auto fx = test::load_fixture(name);
            const auto a = run_scenario(fx.module, fx.scenario);
            const auto b = run_scenario(instrument(fx.module), fx.scenario);
            CHECK(a.state == b.state);
        }
    }

    TEST_CASE("transparency over random scenarios")
    {
        const auto m = test::load_module("properties/random_target");
        const auto im = instrument(m);
        test::Rng rng{99};
        for (int i = 0; i < 40; ++i)
        {
            const auto s = test::random_target_scenario(rng);
            CHECK(run_scenario(m, s).state == run_scenario(im, s).state);
        }
    }

    TEST_CASE("module-side global and table writes are traced")
    {
        const auto m = test::load_module("properties/random_target");
        HostScenario s;
        s.steps.push_back({"mix", {Value::i32(0)}});
        // x = 1 selects $bump through the table, which adds 1 to g = 7.
        s.imports["host"] = std::vector<ImportBehavior>(4, ImportBehavior{{}, {Value::i32(1)}});
        const auto r = run_scenario(instrument(m), s);
        std::vector<TraceEvent> globals;
        for (const auto& e : r.trace.events)
            if (tag_of(e) == EventTag::GlobalGet || tag_of(e) == EventTag::GlobalSet)
                globals.push_back(e);
        // Per iteration: bump reads, writes and reads g, then mix reads it.
        REQUIRE(globals.size() == 16);
        CHECK(globals[0] == TraceEvent{event::GlobalGet{0, Value::i32(7)}});
        CHECK(globals[1] == TraceEvent{event::GlobalSet{0, Value::i32(8)}});
        CHECK(globals[2] == TraceEvent{event::GlobalGet{0, Value::i32(8)}});
        CHECK(globals[3] == TraceEvent{event::GlobalGet{0, Value::i32(8)}});
        CHECK(globals[15] == TraceEvent{event::GlobalGet{0, Value::i32(11)}});
    }

    TEST_CASE("table.set is traced with the original function index")
    {
        Module m;
        m.tables.push_back({ValType::FuncRef, {1, std::nullopt}});
        const auto target = test::add_function(m, {}, {});
        const auto set = test::add_function(m, {},
            {make_i32(0), make_index(Opcode::ref_func, target), make_index(Opcode::table_set, 0)});
        ElemSegment declare;
        declare.mode = SegmentMode::Declarative;
        declare.items = {target};
        m.elems.push_back(declare);
        m.exports.push_back({"set", ExternKind::Func, set});
        HostScenario s;
        s.steps.push_back({"set", {}});
        const auto out = instrument(m);
        REQUIRE(validate_module(out).empty());
        const auto r = run_scenario(out, s);
        const Trace expected{{
            event::FuncEntry{set, {}},
            event::TableSet{0, 0, target},
            event::FuncReturn{set, {}},
        }};
        CHECK(r.trace == expected);
    }

    TEST_CASE("instrumenting twice is rejected")
    {
        const auto once = instrument(test::load_module("shadow_mem"));
        CHECK_THROWS_AS(instrument(once), AlreadyInstrumented);
    }

    TEST_CASE("index bookkeeping")
    {
        const auto m = test::load_module("multi_import");
        const auto out = instrument(m);
        const auto meta = *read_instr_meta(out);
        CHECK(meta.imports == m.imported_function_count());
        CHECK(meta.original_function_count == m.function_count());
        CHECK(meta.wrapped.size() == m.imported_function_count());
        for (uint32_t f = 0; f < m.function_count(); ++f)
            CHECK(meta.to_original(meta.raw_index(f)) == f);
        for (uint32_t r = 0; r < meta.recorders; ++r)
            CHECK_FALSE(meta.to_original(meta.imports + r));
    }

    TEST_CASE("disabled recorders")
    {
        const auto fx = test::load_fixture("shadow_mem");
        InstrumentationConfig cfg;
        cfg.record_loads = false;
        cfg.record_stores = false;
        const auto r = run_scenario(instrument(fx.module, cfg), fx.scenario);
        for (const auto& e : r.trace.events)
        {
            CHECK(tag_of(e) != EventTag::Load);
            CHECK(tag_of(e) != EventTag::Store);
        }
        CHECK(r.state == run_scenario(fx.module, fx.scenario).state);
    }
}
