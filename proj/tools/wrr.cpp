// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

// Command-line driver: instrument, record, reduce, generate, validate, stats.

#include "wrr/error.hpp"
#include "wrr/instrument.hpp"
#include "wrr/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;

namespace
{
using namespace wrr;

wasm::Module load_module(const fs::path& p)
{
    return wasm::parse_module(read_file(p));
}

Trace load_trace(const fs::path& p)
{
    const auto bytes = read_file(p);
    if (bytes.size() >= 4 && std::equal(trace_magic.begin(), trace_magic.end(), bytes.begin()))
        return decode_binary(bytes);
    return decode_text({reinterpret_cast<const char*>(bytes.data()), bytes.size()});
}

void save_trace(const fs::path& p, const Trace& t)
{
    if (p.extension() == ".txt")
        write_file_atomic(p, encode_text(t));
    else
        write_file_atomic(p, encode_binary(t));
}

HostScenario load_scenario(const fs::path& p)
{
    const auto bytes = read_file(p);
    return parse_scenario({reinterpret_cast<const char*>(bytes.data()), bytes.size()});
}

std::string trace_summary_json(const Trace& t)
{
    std::array<uint64_t, 8> counts{};
    for (const auto& e : t.events)
        ++counts[static_cast<std::size_t>(tag_of(e))];
    nlohmann::ordered_json doc;
    doc["events"] = t.events.size();
    doc["content_hash"] = content_hash(t);
    for (std::size_t i = 0; i < counts.size(); ++i)
        doc["by_kind"][event_name(static_cast<EventTag>(i))] = counts[i];
    return doc.dump(2) + "\n";
}

struct GenFlags
{
    std::string format = "self";
    bool no_merge = false;
    bool no_split = false;
    std::size_t split_threshold = ir::default_split_threshold;
    std::size_t body_limit = wasm::default_body_size_limit;

    void add(CLI::App* cmd)
    {
        cmd->add_option("--format", format, "self | js | dynamic")->check(CLI::IsMember({"self", "js", "dynamic",
            "SelfContainedWasm", "JsReplay", "DynamicLinking"}));
        cmd->add_flag("--no-merge", no_merge, "Keep consecutive byte writes separate");
        cmd->add_flag("--no-split", no_split, "Never outline long contexts");
        cmd->add_option("--split-threshold", split_threshold, "Maximum actions per generated function")
            ->check(CLI::Range(std::size_t{2}, std::numeric_limits<std::size_t>::max()));
        cmd->add_option("--body-limit", body_limit, "Function body size limit in bytes");
    }

    GenerateOptions options() const
    {
        GenerateOptions o;
        o.format = *parse_format(format);
        o.merge = !no_merge;
        o.split_threshold = no_split ? 0 : split_threshold;
        o.body_size_limit = body_limit;
        return o;
    }
};
}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"wrr: record, reduce and replay WebAssembly executions"};
    app.set_version_flag("--version", std::string{"wrr "} + WRR_VERSION);
    app.require_subcommand(1);

    std::string in, out, wasm_path, scenario_path, trace_path, stats_format = "text", dump_ir;
    bool raw = false, reduced = false, stats = false;
    GenFlags gen;

    auto* instrument_cmd = app.add_subcommand("instrument", "Insert recorder calls into a module");
    instrument_cmd->add_option("input", in, "Module to instrument")->required();
    instrument_cmd->add_option("-o,--output", out, "Instrumented module")->required();

    auto* record_cmd = app.add_subcommand("record", "Run a scenario against an instrumented module");
    record_cmd->add_option("wasm", wasm_path, "Original or instrumented module")->required();
    record_cmd->add_option("scenario", scenario_path, "Host scenario JSON")->required();
    record_cmd->add_option("-o,--output", out, "Trace file; .txt selects the text format")->required();
    auto* raw_flag = record_cmd->add_flag("--raw", raw, "Keep every event");
    record_cmd->add_flag("--reduced", reduced, "Reduce while recording (default)")->excludes(raw_flag);

    auto* reduce_cmd = app.add_subcommand("reduce", "Drop events a replay does not need");
    reduce_cmd->add_option("trace", trace_path, "Raw trace")->required();
    reduce_cmd->add_option("wasm", wasm_path, "Module that produced the trace")->required();
    reduce_cmd->add_option("-o,--output", out, "Reduced trace");
    reduce_cmd->add_flag("--stats", stats, "Print kept and discarded counts");
    reduce_cmd->add_option("--format", stats_format, "Statistics format")->check(CLI::IsMember({"text", "json"}));

    auto* generate_cmd = app.add_subcommand("generate", "Build a replay bundle from a reduced trace");
    generate_cmd->add_option("trace", trace_path, "Reduced trace")->required();
    generate_cmd->add_option("wasm", wasm_path, "Original module")->required();
    generate_cmd->add_option("-o,--output", out, "Bundle directory")->required();
    generate_cmd->add_option("--dump-ir", dump_ir, "Also write the replay IR as text");
    gen.add(generate_cmd);

    auto* validate_cmd = app.add_subcommand("validate", "Check that a replay re-records the same trace");
    validate_cmd->add_option("wasm", wasm_path, "Original module")->required();
    validate_cmd->add_option("scenario", scenario_path, "Host scenario JSON")->required();
    validate_cmd->add_option("--trace", trace_path, "Use this reduced trace instead of recording one");
    gen.add(validate_cmd);

    auto* stats_cmd = app.add_subcommand("stats", "Summarize a trace or a bundle directory");
    stats_cmd->add_option("path", in, "Trace file or bundle directory")->required();
    stats_cmd->add_option("--wasm", wasm_path, "With a trace: also report reduction statistics");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*instrument_cmd)
        {
            write_file_atomic(out, wasm::encode_module(instrument(load_module(in))));
        }
        else if (*record_cmd)
        {
            const auto mode = raw ? RecordMode::Raw : RecordMode::Reduced;
            save_trace(out, record(load_module(wasm_path), load_scenario(scenario_path), mode));
        }
        else if (*reduce_cmd)
        {
            ReduceStats st;
            const auto result = reduce(load_trace(trace_path), load_module(wasm_path), &st);
            if (!out.empty())
                save_trace(out, result);
            if (stats)
                std::cout << (stats_format == "json" ? st.to_json() : st.to_text());
        }
        else if (*generate_cmd)
        {
            const auto module = load_module(wasm_path);
            const auto trace = load_trace(trace_path);
            const auto options = gen.options();
            if (!dump_ir.empty())
                write_file_atomic(dump_ir, ir::dump(build_replay(trace, module, options)));
            const auto bundle = generate_bundle(trace, module, options);
            write_bundle(bundle, out);
            std::cout << "wrote " << format_name(bundle.format) << " bundle to " << out << '\n';
        }
        else if (*validate_cmd)
        {
            std::optional<Trace> source;
            if (!trace_path.empty())
                source = load_trace(trace_path);
            const auto v = validate(load_module(wasm_path), load_scenario(scenario_path), gen.options(), source);
            if (!v.diff.identical)
            {
                std::cout << "divergence at event " << v.diff.index << "\n  expected: " << v.diff.expected
                          << "\n  replayed: " << v.diff.actual << '\n';
                return exit_code(ErrorClass::Divergence);
            }
            std::cout << "identical: " << v.source.events.size() << " events, " << v.ir.actions() << " actions, "
                      << v.module_size << " bytes\n";
        }
        else if (*stats_cmd)
        {
            if (fs::is_directory(in))
            {
                std::cout << manifest_json(read_bundle(in));
            }
            else
            {
                const auto trace = load_trace(in);
                std::cout << trace_summary_json(trace);
                if (!wasm_path.empty())
                {
                    ReduceStats st;
                    reduce(trace, load_module(wasm_path), &st);
                    std::cout << st.to_json();
                }
            }
        }
    }
    catch (const Error& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.error_class());
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
