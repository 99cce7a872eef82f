// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "codegen_detail.hpp"
#include "wrr/error.hpp"

#include <json.hpp>

#include <cstdio>
#include <sstream>

namespace wrr
{
namespace codegen
{
namespace
{
std::string quote(const std::string& s)
{
    return nlohmann::json(s).dump();
}

std::string hex(uint64_t v)
{
    char buf[24];
    std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string js_value(const Value& v)
{
    switch (v.kind)
    {
    case ValueKind::I64:
        return std::to_string(static_cast<int64_t>(v.bits)) + "n";
    case ValueKind::F32:
        return "f32(" + hex(v.bits) + ")";
    case ValueKind::F64:
        return "f64(" + hex(v.bits) + "n)";
    default:
        return std::to_string(static_cast<int32_t>(static_cast<uint32_t>(v.bits)));
    }
}

std::string js_list(const std::vector<Value>& vs)
{
    std::string out = "[";
    for (std::size_t i = 0; i < vs.size(); ++i)
        out += (i ? ", " : "") + js_value(vs[i]);
    return out + "]";
}

const char* prelude = R"('use strict';
const fs = require('fs');
const path = require('path');

const scratch = new DataView(new ArrayBuffer(8));
function f32(bits) { scratch.setUint32(0, bits, true); return scratch.getFloat32(0, true); }
function f64(bits) { scratch.setBigUint64(0, bits, true); return scratch.getFloat64(0, true); }

// FNV-1a over all memories, 16 hex digits.
function memoryHash(memories) {
  let lo = 0x84222325, hi = 0xcbf29ce4;
  for (const m of memories) {
    for (const b of new Uint8Array(m.buffer)) {
      lo = (lo ^ b) >>> 0;
      // multiply by 0x100000001b3 in 32-bit halves
      const l = lo * 0x1b3;
      const carry = Math.floor(l / 0x100000000);
      hi = (hi * 0x1b3 + lo * 0x100 + carry) >>> 0;
      lo = l >>> 0;
    }
  }
  return hi.toString(16).padStart(8, '0') + lo.toString(16).padStart(8, '0');
}

function show(v) {
  if (Array.isArray(v)) return v.map(show);
  if (v === undefined) return [];
  return typeof v === 'bigint' ? v.toString() + 'n' : String(v);
}
)";

const char* epilogue = R"(
module.exports = { run };

if (require.main === module) {
  run().then(
    (r) => process.stdout.write(JSON.stringify({ calls: r.calls, memory_hash: r.memoryHash }) + '\n'),
    (e) => { console.error(e); process.exit(1); });
}
)";

class JsEmitter
{
public:
    JsEmitter(const wasm::Module& original, const ExposedOriginal& exposed) : m_original{original}, m_x{exposed} {}

    void action(std::ostringstream& out, const ir::Action& a, const char* indent) const
    {
        out << indent;
        if (const auto* c = std::get_if<ir::ExportCall>(&a))
        {
            out << "call(" << quote(m_x.funcs.at(c->idx)) << ", " << js_list(c->vals) << ");\n";
        }
        else if (const auto* m = std::get_if<ir::MutateMem>(&a))
        {
            out << "view(" << quote(m_x.memories.at(m->idx)) << ")[" << m->addr << "] = " << unsigned{m->val}
                << ";\n";
        }
        else if (const auto* b = std::get_if<ir::BulkMutateMem>(&a))
        {
            out << "view(" << quote(m_x.memories.at(b->idx)) << ").set([";
            for (std::size_t i = 0; i < b->val.size(); ++i)
                out << (i ? ", " : "") << unsigned{b->val[i]};
            out << "], " << b->addr << ");\n";
        }
        else if (const auto* g = std::get_if<ir::MutateGlobal>(&a))
        {
            out << "exports_[" << quote(m_x.globals.at(g->idx)) << "].value = " << js_value(g->val) << ";\n";
        }
        else if (const auto* t = std::get_if<ir::MutateTable>(&a))
        {
            out << "exports_[" << quote(m_x.tables.at(t->idx)) << "].set(" << t->elem << ", exports_["
                << quote(m_x.funcs.at(t->funcidx)) << "]);\n";
        }
        else
        {
            out << "aux_" << std::get<ir::CallAux>(a).aux << "();\n";
        }
    }

    void results(std::ostringstream& out, const std::vector<Value>& vs) const
    {
        if (vs.empty())
            out << "      return;\n";
        else if (vs.size() == 1)
            out << "      return " << js_value(vs[0]) << ";\n";
        else
            out << "      return " << js_list(vs) << ";\n";
    }

    void replay_function(std::ostringstream& out, uint32_t idx, const ir::RFunction& fn) const
    {
        out << "let counter_" << idx << " = 0;\n";
        out << "function replay_" << idx << "() {\n";
        out << "  const current = counter_" << idx << "++;\n";
        out << "  switch (current) {\n";
        for (std::size_t i = 0; i < fn.contexts.size(); ++i)
        {
            out << "    case " << i << ":\n";
            for (const auto& a : fn.contexts[i].actions)
                action(out, a, "      ");
            results(out, fn.results[i]);
        }
        out << "    default:\n";
        out << "      throw new WebAssembly.RuntimeError('replay_" << idx
            << " invoked more often than recorded');\n";
        out << "  }\n}\n\n";
    }

    void plain_function(std::ostringstream& out, const std::string& name, const ir::Context& c) const
    {
        out << "function " << name << "() {\n";
        for (const auto& a : c.actions)
            action(out, a, "  ");
        out << "}\n\n";
    }

    std::string imports_object(const std::function<std::string(uint32_t)>& target) const
    {
        std::map<std::string, std::vector<std::pair<std::string, uint32_t>>> by_module;
        for (uint32_t i = 0; i < m_original.imported_function_count(); ++i)
        {
            const auto* imp = m_original.function_import(i);
            by_module[imp->module].emplace_back(imp->name, i);
        }
        std::ostringstream out;
        out << "{";
        bool first_module = true;
        for (const auto& [module, items] : by_module)
        {
            out << (first_module ? "\n" : ",\n") << "    " << quote(module) << ": {";
            first_module = false;
            for (std::size_t j = 0; j < items.size(); ++j)
                out << (j ? ", " : " ") << quote(items[j].first) << ": " << target(items[j].second);
            out << " }";
        }
        out << (first_module ? "}" : "\n  }");
        return out.str();
    }

    std::string memory_list(const std::string& exports) const
    {
        std::string out = "[";
        for (std::size_t i = 0; i < m_x.memories.size(); ++i)
            out += (i ? ", " : "") + exports + "[" + quote(m_x.memories[i]) + "]";
        return out + "]";
    }

private:
    const wasm::Module& m_original;
    const ExposedOriginal& m_x;
};

std::string header()
{
    return std::string{"// Generated by wrr "} + WRR_VERSION + ".\n";
}
}  // namespace

std::string loader_script(const wasm::Module& original, const ExposedOriginal& exposed)
{
    JsEmitter js{original, exposed};
    std::ostringstream out;
    out << header() << "// Instantiates original.wasm and replay.wasm and links them to each other.\n" << prelude;
    out << R"(
async function run(dir = __dirname) {
  const read = (name) => fs.readFileSync(path.join(dir, name));
  let replay = null;
  const calls = [];
  const imports = )"
        << js.imports_object([](uint32_t i) {
               return "(...args) => replay.exports[\"replay_" + std::to_string(i) + "\"](...args)";
           })
        << R"(;
  const original = (await WebAssembly.instantiate(read('original.wasm'), imports)).instance;
  const orig = {};
  for (const [name, value] of Object.entries(original.exports)) {
    orig[name] = typeof value !== 'function' ? value : (...args) => {
      const record = { name, args: show(args), results: null };
      calls.push(record);
      const results = value(...args);
      record.results = show(results);
      return results;
    };
  }
  replay = (await WebAssembly.instantiate(read('replay.wasm'), { orig })).instance;
)" << (exposed.deferred_start.empty() ? std::string{}
                                     : "  original.exports[" + quote(exposed.deferred_start) + "]();\n")
        << R"(  replay.exports._start();
  return { exports: original.exports, calls, memoryHash: memoryHash()"
        << js.memory_list("original.exports") << R"() };
}
)" << epilogue;
    return out.str();
}

}  // namespace codegen

const char* format_name(OutputFormat f) noexcept
{
    switch (f)
    {
    case OutputFormat::SelfContainedWasm:
        return "SelfContainedWasm";
    case OutputFormat::JsReplay:
        return "JsReplay";
    case OutputFormat::DynamicLinking:
        return "DynamicLinking";
    }
    return "?";
}

std::optional<OutputFormat> parse_format(std::string_view s) noexcept
{
    if (s == "self" || s == "SelfContainedWasm")
        return OutputFormat::SelfContainedWasm;
    if (s == "js" || s == "JsReplay")
        return OutputFormat::JsReplay;
    if (s == "dynamic" || s == "DynamicLinking")
        return OutputFormat::DynamicLinking;
    return std::nullopt;
}

ReplayBundle gen_js_replay(const wasm::Module& original, const ir::Replay& r, const CodegenOptions& options)
{
    using namespace codegen;
    check_inputs(original, r);
    const auto exposed = expose_original(original, collect_uses(r));
    JsEmitter js{original, exposed};

    std::ostringstream out;
    out << header() << "// Replays a recorded execution of original.wasm.\n" << prelude;
    out << R"(
let exports_ = null;
const calls = [];
function view(name) { return new Uint8Array(exports_[name].buffer); }
function call(name, args) {
  const record = { name, args: show(args), results: null };
  calls.push(record);
  const results = exports_[name](...args);
  record.results = show(results);
  return results;
}

)";
    for (uint32_t i = 0; i < original.imported_function_count(); ++i)
    {
        const auto it = r.functions.find(i);
        js.replay_function(out, i, it == r.functions.end() ? ir::RFunction{} : it->second);
    }
    for (std::size_t a = 0; a < r.auxiliaries.size(); ++a)
        js.plain_function(out, "aux_" + std::to_string(a), r.auxiliaries[a]);
    js.plain_function(out, "entry", r.entry.contexts.at(0));
    out << "async function run(dir = __dirname) {\n";
    out << "  const imports = "
        << js.imports_object([](uint32_t i) { return "replay_" + std::to_string(i); }) << ";\n";
    out << "  const bytes = fs.readFileSync(path.join(dir, 'original.wasm'));\n";
    out << "  exports_ = (await WebAssembly.instantiate(bytes, imports)).instance.exports;\n";
    out << "  entry();\n";
    out << "  return { exports: exports_, calls, memoryHash: memoryHash(" << js.memory_list("exports_") << ") };\n";
    out << "}\n" << epilogue;

    ReplayBundle b;
    b.format = OutputFormat::JsReplay;
    b.entry = "replay.js";
    b.source_trace_hash = options.source_trace_hash;
    b.notes = exposed.notes;
    const auto text = out.str();
    b.artifacts.push_back({"replay.js", {text.begin(), text.end()}});
    b.artifacts.push_back({"original.wasm", wasm::encode_module(exposed.module)});
    return b;
}

ReplayBundle generate(OutputFormat format, const wasm::Module& original, const ir::Replay& r,
    const CodegenOptions& options)
{
    switch (format)
    {
    case OutputFormat::JsReplay:
        return gen_js_replay(original, r, options);
    case OutputFormat::DynamicLinking:
        return gen_dynamic_linking(original, r, options);
    default:
        return gen_self_contained(original, r, options);
    }
}

}  // namespace wrr
