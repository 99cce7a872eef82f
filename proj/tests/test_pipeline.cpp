// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "support.hpp"

#include "wrr/error.hpp"
#include "wrr/pipeline.hpp"

#include <doctest.h>

using namespace wrr;

namespace
{
std::size_t largest_body(const std::vector<uint8_t>& bytes)
{
    const auto m = wasm::parse_module(bytes);
    std::size_t n = 0;
    for (const auto& f : m.functions)
        n = std::max(n, wasm::encode_function_body(f).size());
    return n;
}
}  // namespace

TEST_SUITE("pipeline")
{
    TEST_CASE("every corpus fixture replays to the same reduced trace")
    {
        const auto names = test::corpus_names();
        CHECK(names.size() >= 12);
        for (const auto& name : names)
        {
            CAPTURE(name);
            const auto fx = test::load_fixture(name);
            const auto v = validate(fx.module, fx.scenario);
            CHECK_MESSAGE(v.diff.identical, "event " << v.diff.index << ": " << v.diff.expected << " vs "
                                                     << v.diff.actual);
            CHECK(v.source == record(fx.module, fx.scenario, RecordMode::Reduced));
        }
    }

    TEST_CASE("split replays stay within the threshold")
    {
        for (const auto& name : test::corpus_names())
        {
            CAPTURE(name);
            const auto fx = test::load_fixture(name);
            GenerateOptions o{.split_threshold = 16};
            const auto v = validate(fx.module, fx.scenario, o);
            CHECK(v.diff.identical);
            CHECK(v.ir.max_context_length <= 16);
        }
    }

    TEST_CASE("split shrinks the oversized context")
    {
        const auto fx = test::load_fixture("oversized_context");
        const auto reduced = record(fx.module, fx.scenario, RecordMode::Reduced);
        const auto whole = generate_bundle(reduced, fx.module, {.merge = false, .split_threshold = 0});
        const auto split = generate_bundle(reduced, fx.module, {.merge = false, .split_threshold = 16});
        CHECK(largest_body(split.artifacts[0].bytes) * 4 < largest_body(whole.artifacts[0].bytes));
    }

    TEST_CASE("optimizations preserve replay behavior")
    {
        for (const auto& name : test::corpus_names())
        {
            CAPTURE(name);
            const auto fx = test::load_fixture(name);
            const auto reduced = record(fx.module, fx.scenario, RecordMode::Reduced);
            std::optional<FinalState> first;
            for (const bool merge : {false, true})
                for (const std::size_t t : {std::size_t{0}, std::size_t{4}, ir::default_split_threshold})
                {
                    const auto b = generate_bundle(reduced, fx.module, {.merge = merge, .split_threshold = t});
                    const auto state = run_scenario(wasm::parse_module(b.artifacts[0].bytes), replay_scenario()).state;
                    if (!first)
                        first = state;
                    CHECK(state.memories == first->memories);
                    CHECK(state.calls == first->calls);
                }
        }
    }

    TEST_CASE("known limitation diverges")
    {
        const auto fx = test::load_fixture("limitations/post_export_write");
        const auto v = validate(fx.module, fx.scenario);
        CHECK_FALSE(v.diff.identical);
        CHECK(v.diff.index == 3);
    }

    TEST_CASE("a corrupted trace is caught")
    {
        const auto fx = test::load_fixture("shadow_mem");
        auto source = record(fx.module, fx.scenario, RecordMode::Reduced);
        // A load the module never performs.
        source.events.push_back(event::Load{0, 4000, Value::i8(0x5a)});
        const auto v = validate(fx.module, fx.scenario, {}, source);
        CHECK_FALSE(v.diff.identical);
        CHECK(v.diff.index == source.events.size() - 1);
    }

    TEST_CASE("random scenarios replay accurately")
    {
        const auto m = test::load_module("properties/random_target");
        test::Rng rng{8080};
        for (int i = 0; i < 60; ++i)
        {
            const auto s = test::random_target_scenario(rng, true);
            const auto v = validate(m, s, {.split_threshold = static_cast<std::size_t>(rng.range(2, 40))});
            REQUIRE_MESSAGE(v.diff.identical, "scenario " << i << " event " << v.diff.index << ": "
                                                        << v.diff.expected << " vs " << v.diff.actual);
        }
    }

    TEST_CASE("exit codes")
    {
        CHECK(exit_code(ErrorClass::Parse) == 2);
        CHECK(exit_code(ErrorClass::Unsupported) == 3);
        CHECK(exit_code(ErrorClass::Scenario) == 4);
        CHECK(exit_code(ErrorClass::Divergence) == 5);
        CHECK(exit_code(ErrorClass::Internal) == 1);
    }

    TEST_CASE("diff_traces reports the first difference")
    {
        const Trace a{{event::Call{0}, event::CallReturn{0, {}}}};
        const Trace b{{event::Call{0}, event::CallReturn{1, {}}}};
        CHECK(diff_traces(a, a).identical);
        const auto d = diff_traces(a, b);
        CHECK_FALSE(d.identical);
        CHECK(d.index == 1);
        const auto shorter = diff_traces(a, Trace{{event::Call{0}}});
        CHECK_FALSE(shorter.identical);
        CHECK(shorter.index == 1);
    }
}
