// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "wrr/pipeline.hpp"
#include "wrr/error.hpp"
#include "wrr/instrument.hpp"

namespace wrr
{
namespace
{
class Collector : public TraceSink
{
public:
    void event(const TraceEvent& e) override { trace.events.push_back(e); }
    Trace trace;
};
}  // namespace

Trace record(const wasm::Module& original, const HostScenario& scenario, RecordMode mode, ReduceStats* stats)
{
    const auto instrumented = read_instr_meta(original) ? original : instrument(original);
    RunOptions options;
    if (mode == RecordMode::Reduced)
    {
        OnlineReducer reducer{instrumented};
        options.sink = &reducer;
        run_scenario(instrumented, scenario, options);
        if (stats)
            *stats = reducer.stats();
        return reducer.take();
    }
    Collector collector;
    options.sink = &collector;
    run_scenario(instrumented, scenario, options);
    if (stats)
        reduce(collector.trace, instrumented, stats);
    return std::move(collector.trace);
}

ir::Replay build_replay(const Trace& reduced, const wasm::Module& original, const GenerateOptions& options)
{
    auto r = ir::translate(reduced, original);
    if (options.merge)
        r = ir::merge_memory_writes(r);
    if (options.split_threshold != 0)
        r = ir::split_functions(r, options.split_threshold);
    return r;
}

ReplayBundle generate_bundle(const Trace& reduced, const wasm::Module& original, const GenerateOptions& options)
{
    CodegenOptions cg;
    cg.body_size_limit = options.body_size_limit;
    cg.source_trace_hash = content_hash(reduced);
    return generate(options.format, original, build_replay(reduced, original, options), cg);
}

HostScenario replay_scenario()
{
    HostScenario s;
    s.steps.push_back({"_start", {}});
    return s;
}

TraceDiff diff_traces(const Trace& expected, const Trace& actual)
{
    const auto n = std::min(expected.events.size(), actual.events.size());
    for (std::size_t i = 0; i < n; ++i)
        if (!(expected.events[i] == actual.events[i]))
            return {false, i, format_event(expected.events[i]), format_event(actual.events[i])};
    if (expected.events.size() == actual.events.size())
        return {};
    TraceDiff d{false, n, "<end of trace>", "<end of trace>"};
    if (n < expected.events.size())
        d.expected = format_event(expected.events[n]);
    else
        d.actual = format_event(actual.events[n]);
    return d;
}

ValidateResult validate(const wasm::Module& original, const HostScenario& scenario, const GenerateOptions& options,
    const std::optional<Trace>& source)
{
    ValidateResult v;
    v.source = source ? *source : record(original, scenario, RecordMode::Reduced);
    const auto r = build_replay(v.source, original, options);
    v.ir = ir::ir_stats(r);
    const auto module = build_self_contained(original, r);
    v.module_size = wasm::encode_module(module, {options.body_size_limit}).size();
    v.replayed = record(module, replay_scenario(), RecordMode::Reduced);
    v.diff = diff_traces(v.source, v.replayed);
    return v;
}

int exit_code(ErrorClass cls) noexcept
{
    switch (cls)
    {
    case ErrorClass::Parse:
        return 2;
    case ErrorClass::Unsupported:
        return 3;
    case ErrorClass::Scenario:
        return 4;
    case ErrorClass::Divergence:
        return 5;
    default:
        return 1;
    }
}

}  // namespace wrr
