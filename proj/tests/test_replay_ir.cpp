// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "support.hpp"

#include "wrr/error.hpp"
#include "wrr/pipeline.hpp"
#include "wrr/replay_ir.hpp"

#include <doctest.h>

#include <map>

using namespace wrr;
using namespace wrr::ir;

namespace
{
Context bytes_at(std::initializer_list<std::pair<uint32_t, uint8_t>> writes)
{
    Context c;
    for (const auto& [addr, val] : writes)
        c.actions.push_back(MutateMem{0, addr, val});
    return c;
}

Replay entry_only(Context c)
{
    Replay r;
    r.entry.contexts[0] = std::move(c);
    return r;
}

/// Memory image after each ExportCall and at the end of the context, for (memidx, addr) keys.
using Image = std::map<std::pair<uint32_t, uint64_t>, uint8_t>;
std::vector<Image> simulate(const std::vector<Action>& actions)
{
    std::vector<Image> out;
    Image mem;
    for (const auto& a : actions)
    {
        if (const auto* m = std::get_if<MutateMem>(&a))
            mem[{m->idx, m->addr}] = m->val;
        else if (const auto* b = std::get_if<BulkMutateMem>(&a))
            for (std::size_t i = 0; i < b->val.size(); ++i)
                mem[{b->idx, uint64_t{b->addr} + i}] = b->val[i];
        else if (std::holds_alternative<ExportCall>(a))
            out.push_back(mem);
    }
    out.push_back(mem);
    return out;
}

std::size_t written_bytes(const std::vector<Action>& actions)
{
    std::size_t n = 0;
    for (const auto& a : actions)
    {
        if (std::holds_alternative<MutateMem>(a))
            ++n;
        else if (const auto* b = std::get_if<BulkMutateMem>(&a))
            n += b->val.size();
    }
    return n;
}

/// Run lengths of consecutive-address MutateMem groups, found by brute force.
std::vector<std::size_t> runs(const Context& c)
{
    std::vector<std::size_t> out;
    const MutateMem* prev = nullptr;
    for (const auto& a : c.actions)
    {
        const auto* m = std::get_if<MutateMem>(&a);
        if (m && prev && m->idx == prev->idx && m->addr == prev->addr + 1)
            ++out.back();
        else if (m)
            out.push_back(1);
        prev = m;
    }
    return out;
}

Context random_context(test::Rng& rng, std::size_t max_len)
{
    Context c;
    const auto n = rng.range(0, max_len);
    uint32_t addr = static_cast<uint32_t>(rng.range(0, 32));
    for (std::size_t i = 0; i < n; ++i)
    {
        const auto roll = rng.range(0, 9);
        if (roll == 0)
            c.actions.push_back(ExportCall{static_cast<uint32_t>(rng.range(0, 3)), {}});
        else if (roll == 1)
            c.actions.push_back(MutateGlobal{0, Value::i32(static_cast<uint32_t>(rng.bits()))});
        else
        {
            // Mostly consecutive, sometimes a jump or a rewrite of the previous byte.
            const auto step = rng.range(0, 5);
            addr = step == 0 ? static_cast<uint32_t>(rng.range(0, 32)) : step == 1 ? addr : addr + 1;
            c.actions.push_back(MutateMem{static_cast<uint32_t>(rng.range(0, 8) == 0), addr,
                static_cast<uint8_t>(rng.bits())});
        }
    }
    return c;
}

std::size_t max_len(const Replay& r)
{
    std::size_t n = 0;
    for (const auto& [idx, fn] : r.functions)
        for (const auto& c : fn.contexts)
            n = std::max(n, c.actions.size());
    for (const auto& c : r.entry.contexts)
        n = std::max(n, c.actions.size());
    for (const auto& c : r.auxiliaries)
        n = std::max(n, c.actions.size());
    return n;
}
}  // namespace

TEST_SUITE("replay_ir")
{
    TEST_CASE("empty trace")
    {
        const auto r = translate({}, test::translate_example_module());
        CHECK(r.functions.empty());
        REQUIRE(r.entry.contexts.size() == 1);
        CHECK(r.entry.contexts[0].actions.empty());
        CHECK(r.auxiliaries.empty());
        const auto st = ir_stats(r);
        CHECK(st.actions() == 0);
        CHECK(st.functions == 0);
    }

    TEST_CASE("translate example")
    {
        const Trace t{{
            event::FuncEntry{1, {}},
            event::Call{0},
            event::CallReturn{0, {Value::i32(7)}},
            event::Load{0, 1003, Value::i8(0xbb)},
        }};
        const auto r = translate(t, test::translate_example_module());
        CHECK(r.entry.contexts[0].actions == std::vector<Action>{ExportCall{1, {}}});
        REQUIRE(r.functions.size() == 1);
        const auto& f = r.functions.at(0);
        REQUIRE(f.contexts.size() == 1);
        CHECK(f.contexts[0].actions == std::vector<Action>{MutateMem{0, 1003, 0xbb}});
        CHECK(f.results == std::vector<std::vector<Value>>{{Value::i32(7)}});
    }

    TEST_CASE("a write observed after an export call is placed before it")
    {
        const Trace t{{
            event::FuncEntry{1, {}},
            event::Load{0, 5, Value::i8(3)},
        }};
        const auto r = translate(t, test::translate_example_module());
        CHECK(r.entry.contexts[0].actions == std::vector<Action>{MutateMem{0, 5, 3}, ExportCall{1, {}}});
    }

    TEST_CASE("a wide load becomes one write per byte")
    {
        const Trace t{{
            event::Call{0},
            event::CallReturn{0, {Value::i32(0)}},
            event::Load{0, 8, Value::i32(0x04030201)},
        }};
        const auto r = translate(t, test::translate_example_module());
        CHECK(r.functions.at(0).contexts[0].actions ==
              std::vector<Action>{MutateMem{0, 8, 1}, MutateMem{0, 9, 2}, MutateMem{0, 10, 3}, MutateMem{0, 11, 4}});
    }

    TEST_CASE("nested calls and extension events")
    {
        const Trace t{{
            event::FuncEntry{1, {}},
            event::Call{0},
            event::FuncEntry{1, {}},
            event::Call{0},
            event::CallReturn{0, {Value::i32(1)}},
            event::GlobalGet{0, Value::i32(9)},
            event::CallReturn{0, {Value::i32(2)}},
            event::TableGet{0, 3, 1},
        }};
        const auto r = translate(t, test::translate_example_module());
        const auto& f = r.functions.at(0);
        REQUIRE(f.contexts.size() == 2);
        // A changed value is attributed to the host call that returned last.
        CHECK(r.entry.contexts[0].actions == std::vector<Action>{ExportCall{1, {}}});
        CHECK(f.contexts[0].actions == std::vector<Action>{MutateTable{0, 3, 1}, ExportCall{1, {}}});
        CHECK(f.contexts[1].actions == std::vector<Action>{MutateGlobal{0, Value::i32(9)}});
        CHECK(f.results[0] == std::vector{Value::i32(2)});
        CHECK(f.results[1] == std::vector{Value::i32(1)});
        // Keys are the imports that were called.
        CHECK(r.functions.size() == 1);
    }

    TEST_CASE("ill-formed input")
    {
        const auto m = test::translate_example_module();
        CHECK_THROWS_AS(translate(Trace{{event::CallReturn{0, {}}}}, m), IllFormedTrace);
        CHECK_THROWS_AS(translate(Trace{{event::Call{0}, event::CallReturn{1, {}}}}, m), IllFormedTrace);
        CHECK_THROWS_AS(translate(Trace{{event::Store{0, 0, Value::i8(1)}}}, m), IllFormedTrace);
        CHECK_THROWS_AS(translate(Trace{{event::FuncReturn{1, {}}}}, m), IllFormedTrace);
        CHECK_THROWS_AS(translate(Trace{{event::TableGet{0, 0, std::nullopt}}}, m), ReplayabilityError);
    }

    TEST_CASE("translate is deterministic over the corpus")
    {
        for (const auto& name : test::corpus_names())
        {
            const auto fx = test::load_fixture(name);
            const auto reduced = record(fx.module, fx.scenario, RecordMode::Reduced);
            CHECK(translate(reduced, fx.module) == translate(reduced, fx.module));
            CHECK(dump(translate(reduced, fx.module)) == dump(translate(reduced, fx.module)));
        }
    }

    TEST_CASE("merge: nine consecutive bytes")
    {
        const auto before = entry_only(
            bytes_at({{0, 8}, {1, 7}, {2, 6}, {3, 5}, {4, 4}, {5, 3}, {6, 2}, {7, 1}, {8, 0}}));
        const auto after = merge_memory_writes(before);
        CHECK(after.entry.contexts[0].actions ==
              std::vector<Action>{BulkMutateMem{0, 0, {8, 7, 6, 5, 4, 3, 2, 1, 0}}});
        CHECK(ir_stats(before).mutate_mem == 9);
        CHECK(ir_stats(after).mutate_mem == 0);
        CHECK(ir_stats(after).bulk_mutate_mem == 1);
        CHECK(ir_stats(after).bulk_bytes == 9);
        CHECK(format_action(after.entry.contexts[0].actions[0]) ==
              "BulkMutateMem {idx: 0, addr: 0, val: \"\\08\\07\\06\\05\\04\\03\\02\\01\\00\"}");
    }

    TEST_CASE("merge: single write and split runs")
    {
        const auto single = entry_only(bytes_at({{4, 1}}));
        CHECK(merge_memory_writes(single) == single);

        const auto split = merge_memory_writes(entry_only(bytes_at({{0, 1}, {1, 2}, {5, 3}, {6, 4}})));
        CHECK(split.entry.contexts[0].actions ==
              std::vector<Action>{BulkMutateMem{0, 0, {1, 2}}, BulkMutateMem{0, 5, {3, 4}}});

        // A rewrite of the same address breaks the run.
        const auto rewrite = merge_memory_writes(entry_only(bytes_at({{0, 1}, {0, 2}, {1, 3}})));
        CHECK(rewrite.entry.contexts[0].actions ==
              std::vector<Action>{MutateMem{0, 0, 1}, BulkMutateMem{0, 0, {2, 3}}});

        // Runs never cross other actions.
        Context c = bytes_at({{0, 1}});
        c.actions.push_back(ExportCall{1, {}});
        c.actions.push_back(MutateMem{0, 1, 2});
        CHECK(merge_memory_writes(entry_only(c)).entry.contexts[0] == c);
    }

    TEST_CASE("merge preserves memory images and matches a brute-force run finder")
    {
        test::Rng rng{77};
        for (int i = 0; i < 300; ++i)
        {
            const auto c = random_context(rng, 40);
            const auto merged = merge_memory_writes(entry_only(c)).entry.contexts[0];
            REQUIRE(simulate(merged.actions) == simulate(c.actions));
            REQUIRE(written_bytes(merged.actions) <= written_bytes(c.actions));
            std::vector<std::size_t> got;
            for (const auto& a : merged.actions)
            {
                if (std::holds_alternative<MutateMem>(a))
                    got.push_back(1);
                else if (const auto* b = std::get_if<BulkMutateMem>(&a))
                    got.push_back(b->val.size());
            }
            REQUIRE(got == runs(c));
        }
    }

    TEST_CASE("split: one over the threshold")
    {
        Context c;
        for (uint32_t i = 0; i < 17; ++i)
            c.actions.push_back(MutateMem{0, i * 2, 1});
        const auto r = split_functions(entry_only(c), 16);
        CHECK(r.auxiliaries.size() == 1);
        CHECK(r.entry.contexts[0].actions.size() <= 16);
        CHECK(test::flatten(r, r.entry.contexts[0]) == c.actions);
    }

    TEST_CASE("split: nothing to do")
    {
        Context c;
        for (uint32_t i = 0; i < 16; ++i)
            c.actions.push_back(MutateMem{0, i * 2, 1});
        const auto r = entry_only(c);
        CHECK(split_functions(r, 16) == r);
    }

    TEST_CASE("split bounds every body and keeps the action order")
    {
        test::Rng rng{5};
        for (int i = 0; i < 200; ++i)
        {
            const auto t = static_cast<std::size_t>(rng.range(2, 20));
            Replay r;
            r.entry.contexts[0] = random_context(rng, 600);
            auto& f = r.functions[0];
            for (int k = 0; k < 3; ++k)
            {
                f.contexts.push_back(random_context(rng, 400));
                f.results.emplace_back();
            }
            const auto s = split_functions(r, t);
            CAPTURE(t);
            REQUIRE(max_len(s) <= t);
            REQUIRE(test::flatten(s, s.entry.contexts[0]) == r.entry.contexts[0].actions);
            for (std::size_t k = 0; k < f.contexts.size(); ++k)
                REQUIRE(test::flatten(s, s.functions.at(0).contexts[k]) == f.contexts[k].actions);
            REQUIRE(s.functions.at(0).results == f.results);
        }
    }

    TEST_CASE("split limits")
    {
        Context c;
        for (uint32_t i = 0; i < 100; ++i)
            c.actions.push_back(MutateMem{0, i, 1});
        CHECK_THROWS_AS(split_functions(entry_only(c), 2, 10), SplitInfeasible);
        CHECK_THROWS_AS(split_functions(entry_only(c), 1), Error);
        CHECK_NOTHROW(split_functions(entry_only(c), 10, 10));
    }

    TEST_CASE("stats and dump")
    {
        Replay r = entry_only(bytes_at({{0, 1}, {1, 2}}));
        r.entry.contexts[0].actions.push_back(ExportCall{1, {Value::i32(4)}});
        r.functions[0].contexts.push_back(bytes_at({{9, 9}}));
        r.functions[0].results.push_back({Value::i32(7)});
        const auto st = ir_stats(r);
        CHECK(st.functions == 1);
        CHECK(st.contexts == 2);
        CHECK(st.mutate_mem == 3);
        CHECK(st.export_calls == 1);
        CHECK(st.max_context_length == 3);
        CHECK(st.to_json().find("\"MutateMem\": 3") != std::string::npos);
        const auto text = dump(r);
        CHECK(text.find("entry:") != std::string::npos);
        CHECK(text.find("function 0:") != std::string::npos);
        CHECK(text.find("context 0 -> [I32(7)]") != std::string::npos);
    }
}
