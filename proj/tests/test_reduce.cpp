// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "support.hpp"

#include "wrr/error.hpp"
#include "wrr/harness.hpp"
#include "wrr/instrument.hpp"
#include "wrr/pipeline.hpp"
#include "wrr/reduce.hpp"

#include <doctest.h>

#include <map>

using namespace wrr;

namespace
{
ShadowState shadow_of(const std::string& fixture)
{
    return ShadowState::from(module_facts(test::load_module(fixture)), ShadowState::Sizing::Initial);
}

bool is_subsequence(const Trace& small, const Trace& big)
{
    std::size_t j = 0;
    for (const auto& e : big.events)
        if (j < small.events.size() && small.events[j] == e)
            ++j;
    return j == small.events.size();
}

Trace online(const wasm::Module& m, const HostScenario& s, std::size_t* peak = nullptr)
{
    const auto im = instrument(m);
    OnlineReducer r{im};
    RunOptions o;
    o.sink = &r;
    run_scenario(im, s, o);
    if (peak)
        *peak = r.peak_retained();
    return r.take();
}

/// Byte map standing in for memory: absent bytes are zero.
struct ModelMemory
{
    std::map<uint64_t, uint8_t> bytes;

    bool keep_load(uint64_t addr, const std::vector<uint8_t>& value)
    {
        bool differs = false;
        for (std::size_t i = 0; i < value.size(); ++i)
        {
            const auto it = bytes.find(addr + i);
            const uint8_t have = it == bytes.end() ? 0 : it->second;
            if (have != value[i])
                differs = true;
        }
        for (std::size_t i = 0; i < value.size(); ++i)
            bytes[addr + i] = value[i];
        return differs;
    }
};
}  // namespace

TEST_SUITE("reduce")
{
    TEST_CASE("shadow step on the figure events")
    {
        auto state = shadow_of("shadow_mem");
        CHECK_FALSE(shadow_step(state, event::Store{0, 1002, Value::i8(0x01)}));
        CHECK(state.memories[0].get(1002) == 0x01);
        CHECK_FALSE(shadow_step(state, event::Load{0, 1000, Value::i8(0xaa)}));
        CHECK_FALSE(shadow_step(state, event::Load{0, 1002, Value::i8(0x01)}));
        CHECK(shadow_step(state, event::Load{0, 1003, Value::i8(0xbb)}));
        CHECK(state.memories[0].get(1003) == 0xbb);
        // Once kept, the same value no longer diverges.
        CHECK_FALSE(shadow_step(state, event::Load{0, 1003, Value::i8(0xbb)}));
    }

    TEST_CASE("sub-word load diverging in its second byte is kept")
    {
        auto state = shadow_of("shadow_mem");
        // shadow[1000..1002) = aa cc; the load sees aa dd
        CHECK(shadow_step(state, event::Load{0, 1000, Value::i16(0xddaa)}));
        CHECK_FALSE(shadow_step(state, event::Load{0, 1000, Value::i16(0xddaa)}));
        CHECK(state.memories[0].get(1001) == 0xdd);
    }

    TEST_CASE("shadow step agrees with a byte-map model")
    {
        test::Rng rng{4242};
        const std::vector kinds{ValueKind::I8, ValueKind::I16, ValueKind::I32, ValueKind::I64, ValueKind::F32,
            ValueKind::F64};
        for (int round = 0; round < 50; ++round)
        {
            ShadowState state;
            state.memories.emplace_back(ShadowMemory::page_bytes);
            ModelMemory model;
            for (int i = 0; i < 300; ++i)
            {
                const auto kind = rng.pick(kinds);
                const auto addr = static_cast<uint32_t>(rng.range(0, 64));
                // Small value range so that equal bytes are common.
                auto v = Value::truncated(kind, rng.range(0, 3) * 0x0101010101010101ull);
                const auto bytes = v.bytes();
                if (rng.chance(0.4))
                {
                    CHECK_FALSE(shadow_step(state, event::Store{0, addr, v}));
                    for (std::size_t b = 0; b < bytes.size(); ++b)
                        model.bytes[addr + b] = bytes[b];
                }
                else
                {
                    REQUIRE(shadow_step(state, event::Load{0, addr, v}) == model.keep_load(addr, bytes));
                }
            }
        }
    }

    TEST_CASE("accesses outside the shadow are rejected")
    {
        auto state = shadow_of("shadow_mem");
        CHECK_THROWS_AS(shadow_step(state, event::Load{0, 65535, Value::i32(0)}), AddressOutOfShadow);
    }

    TEST_CASE("globals and tables")
    {
        auto state = shadow_of("global_mutation");
        REQUIRE(!state.globals.empty());
        REQUIRE(state.globals[0]);
        const auto initial = *state.globals[0];
        CHECK_FALSE(shadow_step(state, event::GlobalGet{0, initial}));
        auto changed = initial;
        changed.bits ^= 1;
        CHECK(shadow_step(state, event::GlobalGet{0, changed}));
        CHECK_FALSE(shadow_step(state, event::GlobalGet{0, changed}));

        // A module-side write is mirrored, so reading it back is not a divergence.
        CHECK_FALSE(shadow_step(state, event::GlobalSet{0, initial}));
        CHECK_FALSE(shadow_step(state, event::GlobalGet{0, initial}));

        ShadowState t;
        t.tables.push_back({std::optional<uint32_t>{2}, std::nullopt});
        CHECK_FALSE(shadow_step(t, event::TableSet{0, 1, 5}));
        CHECK_FALSE(shadow_step(t, event::TableGet{0, 1, 5}));
        CHECK_FALSE(shadow_step(t, event::TableSet{0, 1, std::nullopt}));
        CHECK_FALSE(shadow_step(t, event::TableGet{0, 0, 2}));
        CHECK(shadow_step(t, event::TableGet{0, 0, 3}));
        CHECK_FALSE(shadow_step(t, event::TableGet{0, 1, std::nullopt}));
        CHECK_THROWS_AS(shadow_step(t, event::TableGet{0, 0, std::nullopt}), ReplayabilityError);
    }

    TEST_CASE("call-stack rules")
    {
        const std::set<uint32_t> imported{0};
        CallKindStack s;
        REQUIRE(s.stack == std::vector{CallKind::Ext});
        CHECK(callstack_step(s, event::FuncEntry{1, {}}, imported));
        CHECK(s.stack.back() == CallKind::Int);
        CHECK_FALSE(callstack_step(s, event::Call{2}, imported));
        CHECK(s.stack.size() == 2);
        CHECK_FALSE(callstack_step(s, event::FuncEntry{2, {}}, imported));
        CHECK(s.stack.size() == 3);
        CHECK_FALSE(callstack_step(s, event::FuncReturn{2, {}}, imported));
        CHECK_FALSE(callstack_step(s, event::CallReturn{2, {}}, imported));
        CHECK(callstack_step(s, event::Call{0}, imported));
        CHECK(s.stack.back() == CallKind::Ext);
        CHECK(callstack_step(s, event::CallReturn{0, {}}, imported));
        CHECK_FALSE(callstack_step(s, event::FuncReturn{1, {}}, imported));
        CHECK(s.stack == std::vector{CallKind::Ext});
    }

    TEST_CASE("call-stack figure keeps four of ten events")
    {
        const auto text = read_file(test::corpus_dir() / "properties/call_stack.wrrt.txt");
        const auto raw = decode_text({reinterpret_cast<const char*>(text.data()), text.size()});
        REQUIRE(raw.events.size() == 10);
        const auto reduced = reduce(raw, test::load_module("properties/call_stack"));
        const Trace expected{{
            event::FuncEntry{1, {}},
            event::Call{0},
            event::FuncEntry{1, {}},
            event::CallReturn{0, {}},
        }};
        CHECK(reduced == expected);
    }

    TEST_CASE("shadow-memory figure keeps the import pair and the diverging load")
    {
        const auto fx = test::load_fixture("shadow_mem");
        const auto reduced = reduce(test::record_raw(fx.module, fx.scenario), fx.module);
        const Trace expected{{
            event::FuncEntry{1, {}},
            event::Call{0},
            event::CallReturn{0, {}},
            event::Load{0, 1003, Value::i8(0xbb)},
        }};
        CHECK(reduced == expected);
    }

    TEST_CASE("loop-only multiply keeps every entry event")
    {
        const auto fx = test::load_fixture("pure_loop");
        const auto raw = test::record_raw(fx.module, fx.scenario);
        // Returns from export calls are always dropped; everything else survives.
        Trace expected;
        for (const auto& e : raw.events)
            if (tag_of(e) != EventTag::FuncReturn)
                expected.events.push_back(e);
        ReduceStats st;
        CHECK(reduce(raw, fx.module, &st) == expected);
        CHECK(st.kept[static_cast<std::size_t>(EventTag::FuncEntry)] == fx.scenario.steps.size());
        CHECK(st.discarded[static_cast<std::size_t>(EventTag::FuncEntry)] == 0);
    }

    TEST_CASE("recursive export collapses to one event")
    {
        const auto fx = test::load_fixture("recursive");
        const auto raw = test::record_raw(fx.module, fx.scenario);
        ReduceStats st;
        const auto reduced = reduce(raw, fx.module, &st);
        CHECK(raw.events.size() > 50);
        REQUIRE(reduced.events.size() == 1);
        CHECK(tag_of(reduced.events[0]) == EventTag::FuncEntry);
        CHECK(st.total_kept() == 1);
        CHECK(st.total() == raw.events.size());
    }

    TEST_CASE("reduced traces are subsequences without stores or returns")
    {
        for (const auto& name : test::corpus_names())
        {
            CAPTURE(name);
            const auto fx = test::load_fixture(name);
            const auto raw = test::record_raw(fx.module, fx.scenario);
            const auto reduced = reduce(raw, fx.module);
            CHECK(is_subsequence(reduced, raw));
            for (const auto& e : reduced.events)
            {
                CHECK(tag_of(e) != EventTag::Store);
                CHECK(tag_of(e) != EventTag::FuncReturn);
                CHECK(tag_of(e) != EventTag::GlobalSet);
                CHECK(tag_of(e) != EventTag::TableSet);
            }
        }
    }

    TEST_CASE("online and offline reducers agree on the corpus")
    {
        for (const auto& name : test::corpus_names())
        {
            CAPTURE(name);
            const auto fx = test::load_fixture(name);
            const auto raw = test::record_raw(fx.module, fx.scenario);
            std::size_t peak = 0;
            CHECK(online(fx.module, fx.scenario, &peak) == reduce(raw, fx.module));
            CHECK(peak <= raw.events.size());
        }
    }

    TEST_CASE("online and offline reducers agree on random scenarios")
    {
        const auto m = test::load_module("properties/random_target");
        test::Rng rng{2024};
        for (int i = 0; i < 60; ++i)
        {
            const auto s = test::random_target_scenario(rng);
            const auto raw = test::record_raw(m, s);
            REQUIRE(online(m, s) == reduce(raw, m));
        }
    }

    TEST_CASE("empty stream")
    {
        const auto m = test::load_module("shadow_mem");
        CHECK(reduce({}, m).events.empty());
        OnlineReducer r{instrument(m)};
        CHECK(r.output().events.empty());
        CHECK(r.stats().total() == 0);
    }

    TEST_CASE("online memory stays bounded by the kept events")
    {
        const auto fx = test::load_fixture("store_heavy");
        const auto raw = test::record_raw(fx.module, fx.scenario);
        std::size_t peak = 0;
        const auto reduced = online(fx.module, fx.scenario, &peak);
        CHECK(peak == reduced.events.size());
        CHECK(peak * 10 < raw.events.size());
    }

    TEST_CASE("stats output")
    {
        const auto fx = test::load_fixture("shadow_mem");
        ReduceStats st;
        reduce(test::record_raw(fx.module, fx.scenario), fx.module, &st);
        CHECK(st.total() == 8);
        CHECK(st.total_kept() == 4);
        const auto doc = st.to_json();
        CHECK(doc.find("\"kept\"") != std::string::npos);
        CHECK(st.to_text().find("4 of 8") != std::string::npos);
    }
}
