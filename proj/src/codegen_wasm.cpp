// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "codegen_detail.hpp"
#include "wrr/error.hpp"
#include "wrr/instrument.hpp"

#include <algorithm>

namespace wrr
{
namespace codegen
{
using wasm::Instruction;
using wasm::Opcode;
using wasm::ValType;

namespace
{
std::optional<ValType> valtype_of(ValueKind k)
{
    switch (k)
    {
    case ValueKind::I32:
        return ValType::I32;
    case ValueKind::I64:
        return ValType::I64;
    case ValueKind::F32:
        return ValType::F32;
    case ValueKind::F64:
        return ValType::F64;
    default:
        return std::nullopt;
    }
}

void check_values(const std::vector<Value>& vals, const std::vector<ValType>& types, const std::string& what)
{
    bool ok = vals.size() == types.size();
    for (std::size_t i = 0; ok && i < vals.size(); ++i)
        ok = valtype_of(vals[i].kind) == types[i];
    if (!ok)
        throw Error{ErrorClass::Internal, what + " does not match the function signature"};
}

Error bad_replay(const std::string& what)
{
    return Error{ErrorClass::Internal, "replay refers to " + what};
}
}  // namespace

void for_each_action(const ir::Replay& r, const std::function<void(const ir::Action&)>& f)
{
    auto context = [&f](const ir::Context& c) {
        for (const auto& a : c.actions)
            f(a);
    };
    for (const auto& [idx, fn] : r.functions)
        for (const auto& c : fn.contexts)
            context(c);
    for (const auto& c : r.entry.contexts)
        context(c);
    for (const auto& c : r.auxiliaries)
        context(c);
}

std::string export_name(const wasm::Module& original, uint32_t funcidx)
{
    const auto* e = original.find_export(wasm::ExternKind::Func, funcidx);
    if (e == nullptr)
        throw UnresolvedExport{"function " + std::to_string(funcidx) + " is called by the host but not exported"};
    return e->name;
}

void check_inputs(const wasm::Module& original, const ir::Replay& r)
{
    for (const auto& imp : original.imports)
        if (imp.kind() != wasm::ExternKind::Func)
            throw UnsupportedFeature{"non-function import " + imp.module + "." + imp.name};
    const auto k = original.imported_function_count();
    for (const auto& [idx, fn] : r.functions)
    {
        if (idx >= k)
            throw bad_replay("function " + std::to_string(idx) + ", which is not an import");
        if (fn.results.size() != fn.contexts.size())
            throw bad_replay("function " + std::to_string(idx) + " with mismatched result lists");
        for (const auto& res : fn.results)
            check_values(res, original.function_type(idx).results,
                "recorded result of import " + std::to_string(idx));
    }
    if (r.entry.contexts.size() != 1)
        throw bad_replay("an entry function with " + std::to_string(r.entry.contexts.size()) + " contexts");

    for_each_action(r, [&](const ir::Action& a) {
        if (const auto* c = std::get_if<ir::ExportCall>(&a))
        {
            if (c->idx >= original.function_count())
                throw bad_replay("unknown function " + std::to_string(c->idx));
            export_name(original, c->idx);
            check_values(c->vals, original.function_type(c->idx).params,
                "ExportCall argument list for function " + std::to_string(c->idx));
        }
        else if (const auto* m = std::get_if<ir::MutateMem>(&a))
        {
            if (m->idx >= original.memory_count())
                throw bad_replay("unknown memory " + std::to_string(m->idx));
        }
        else if (const auto* b = std::get_if<ir::BulkMutateMem>(&a))
        {
            if (b->idx >= original.memory_count() || b->val.empty())
                throw bad_replay("bad bulk write to memory " + std::to_string(b->idx));
        }
        else if (const auto* g = std::get_if<ir::MutateGlobal>(&a))
        {
            if (g->idx >= original.global_count())
                throw bad_replay("unknown global " + std::to_string(g->idx));
            const auto type = original.global_type(g->idx);
            if (!type.is_mutable || valtype_of(g->val.kind) != type.type)
                throw bad_replay("immutable or differently typed global " + std::to_string(g->idx));
        }
        else if (const auto* t = std::get_if<ir::MutateTable>(&a))
        {
            if (t->idx >= original.table_count() || t->funcidx >= original.function_count())
                throw bad_replay("unknown table " + std::to_string(t->idx) + " or function " +
                                 std::to_string(t->funcidx));
        }
        else if (std::get<ir::CallAux>(a).aux >= r.auxiliaries.size())
        {
            throw bad_replay("unknown auxiliary " + std::to_string(std::get<ir::CallAux>(a).aux));
        }
    });
}

Uses collect_uses(const ir::Replay& r)
{
    Uses u;
    for_each_action(r, [&u](const ir::Action& a) {
        if (const auto* c = std::get_if<ir::ExportCall>(&a))
            u.export_calls.insert(c->idx);
        else if (const auto* g = std::get_if<ir::MutateGlobal>(&a))
            u.globals.insert(g->idx);
        else if (const auto* t = std::get_if<ir::MutateTable>(&a))
        {
            u.tables.insert(t->idx);
            u.table_funcs.insert(t->funcidx);
        }
    });
    return u;
}

Instruction const_of(const Value& v)
{
    switch (v.kind)
    {
    case ValueKind::I64:
        return wasm::make_i64(v.bits);
    case ValueKind::F32:
        return wasm::make_f32_bits(static_cast<uint32_t>(v.bits));
    case ValueKind::F64:
        return wasm::make_f64_bits(v.bits);
    default:
        return wasm::make_i32(static_cast<uint32_t>(v.bits));
    }
}

void Lowerer::lower_bulk(const ir::BulkMutateMem& b, std::vector<Instruction>& out)
{
    if (b.val.size() > 8)
    {
        const auto seg = m_map.data_base + static_cast<uint32_t>(segments.size());
        wasm::DataSegment d;
        d.mode = wasm::SegmentMode::Passive;
        d.bytes = b.val;
        segments.push_back(std::move(d));
        out.push_back(wasm::make_i32(b.addr));
        out.push_back(wasm::make_i32(0));
        out.push_back(wasm::make_i32(static_cast<uint32_t>(b.val.size())));
        auto init = wasm::make_index(Opcode::memory_init, seg);
        init.index2 = b.idx;
        out.push_back(init);
        return;
    }
    // Short runs: the widest little-endian stores that fit.
    std::size_t off = 0;
    while (off < b.val.size())
    {
        const auto rest = b.val.size() - off;
        const std::size_t w = rest >= 8 ? 8 : rest >= 4 ? 4 : rest >= 2 ? 2 : 1;
        uint64_t v = 0;
        for (std::size_t i = w; i-- > 0;)
            v = (v << 8) | b.val[off + i];
        out.push_back(wasm::make_i32(b.addr + static_cast<uint32_t>(off)));
        if (w == 8)
        {
            out.push_back(wasm::make_i64(v));
            out.push_back(wasm::make_mem(Opcode::i64_store, 0, b.idx));
        }
        else
        {
            out.push_back(wasm::make_i32(static_cast<uint32_t>(v)));
            const auto op = w == 4 ? Opcode::i32_store : w == 2 ? Opcode::i32_store16 : Opcode::i32_store8;
            out.push_back(wasm::make_mem(op, 0, b.idx));
        }
        off += w;
    }
}

void Lowerer::lower(const ir::Action& a, std::vector<Instruction>& out)
{
    if (const auto* c = std::get_if<ir::ExportCall>(&a))
    {
        for (const auto& v : c->vals)
            out.push_back(const_of(v));
        out.push_back(wasm::make_index(Opcode::call, m_map.func(c->idx)));
        for (std::size_t i = 0; i < m_original.function_type(c->idx).results.size(); ++i)
            out.push_back(wasm::make(Opcode::drop));
    }
    else if (const auto* m = std::get_if<ir::MutateMem>(&a))
    {
        out.push_back(wasm::make_i32(m->addr));
        out.push_back(wasm::make_i32(m->val));
        out.push_back(wasm::make_mem(Opcode::i32_store8, 0, m->idx));
    }
    else if (const auto* b = std::get_if<ir::BulkMutateMem>(&a))
    {
        lower_bulk(*b, out);
    }
    else if (const auto* g = std::get_if<ir::MutateGlobal>(&a))
    {
        out.push_back(const_of(g->val));
        out.push_back(wasm::make_index(Opcode::global_set, m_map.global(g->idx)));
    }
    else if (const auto* t = std::get_if<ir::MutateTable>(&a))
    {
        const auto f = m_map.func(t->funcidx);
        declared.insert(f);
        out.push_back(wasm::make_i32(t->elem));
        out.push_back(wasm::make_index(Opcode::ref_func, f));
        out.push_back(wasm::make_index(Opcode::table_set, m_map.table(t->idx)));
    }
    else
    {
        out.push_back(wasm::make_index(Opcode::call, m_map.aux_base + std::get<ir::CallAux>(a).aux));
    }
}

wasm::Function Lowerer::replay_function(uint32_t type_index, const wasm::FuncType& type, const ir::RFunction& fn,
    uint32_t counter_global)
{
    wasm::Function f;
    f.type_index = type_index;
    auto& body = f.body;
    if (!fn.contexts.empty())
    {
        // The counter advances before any action runs so re-entrant invocations see the next slot.
        const auto current = static_cast<uint32_t>(type.params.size());
        f.locals.push_back({1, ValType::I32});
        body.push_back(wasm::make_index(Opcode::global_get, counter_global));
        body.push_back(wasm::make_index(Opcode::local_tee, current));
        body.push_back(wasm::make_i32(1));
        body.push_back(wasm::make(Opcode::i32_add));
        body.push_back(wasm::make_index(Opcode::global_set, counter_global));
        for (std::size_t i = 0; i < fn.contexts.size(); ++i)
        {
            body.push_back(wasm::make_index(Opcode::local_get, current));
            body.push_back(wasm::make_i32(static_cast<uint32_t>(i)));
            body.push_back(wasm::make(Opcode::i32_eq));
            body.push_back(wasm::make_block(Opcode::if_, {}));
            for (const auto& a : fn.contexts[i].actions)
                lower(a, body);
            for (const auto& v : fn.results[i])
                body.push_back(const_of(v));
            body.push_back(wasm::make(Opcode::return_));
            body.push_back(wasm::make(Opcode::end));
        }
    }
    body.push_back(wasm::make(Opcode::unreachable));
    body.push_back(wasm::make(Opcode::end));
    return f;
}

wasm::Function Lowerer::plain_function(uint32_t type_index, const ir::Context& c)
{
    wasm::Function f;
    f.type_index = type_index;
    for (const auto& a : c.actions)
        lower(a, f.body);
    f.body.push_back(wasm::make(Opcode::end));
    return f;
}

ExposedOriginal expose_original(const wasm::Module& original, const Uses& uses)
{
    ExposedOriginal x{original, {}, {}, {}, {}, {}, {}};
    auto ensure = [&x](wasm::ExternKind kind, uint32_t idx, const std::string& fallback) {
        if (const auto* e = x.module.find_export(kind, idx))
            return e->name;
        x.module.exports.push_back({fallback, kind, idx});
        x.notes.push_back("original.wasm additionally exports " + fallback);
        return fallback;
    };
    for (uint32_t i = 0; i < original.memory_count(); ++i)
        x.memories.push_back(ensure(wasm::ExternKind::Memory, i, "__wrr_memory_" + std::to_string(i)));
    for (const auto g : uses.globals)
        x.globals[g] = ensure(wasm::ExternKind::Global, g, "__wrr_global_" + std::to_string(g));
    for (const auto t : uses.tables)
        x.tables[t] = ensure(wasm::ExternKind::Table, t, "__wrr_table_" + std::to_string(t));
    for (const auto f : uses.export_calls)
        x.funcs[f] = export_name(original, f);
    for (const auto f : uses.table_funcs)
        x.funcs[f] = ensure(wasm::ExternKind::Func, f, "__wrr_func_" + std::to_string(f));
    return x;
}

void defer_start(ExposedOriginal& x)
{
    if (!x.module.start)
        return;
    const auto f = *x.module.start;
    x.module.start.reset();
    if (const auto* e = x.module.find_export(wasm::ExternKind::Func, f))
    {
        x.deferred_start = e->name;
        return;
    }
    x.deferred_start = "__wrr_start";
    x.module.exports.push_back({x.deferred_start, wasm::ExternKind::Func, f});
    x.notes.push_back("original.wasm start function moved to export __wrr_start");
}

namespace
{
void finish_segments(wasm::Module& out, Lowerer& lw)
{
    if (!lw.segments.empty())
    {
        out.datas.insert(out.datas.end(), lw.segments.begin(), lw.segments.end());
        out.data_count = static_cast<uint32_t>(out.datas.size());
    }
    else if (out.data_count)
    {
        out.data_count = static_cast<uint32_t>(out.datas.size());
    }
    if (!lw.declared.empty())
    {
        wasm::ElemSegment seg;
        seg.mode = wasm::SegmentMode::Declarative;
        for (const auto f : lw.declared)
            seg.items.push_back(f);
        out.elems.push_back(std::move(seg));
    }
}

wasm::Global counter_global()
{
    return {{ValType::I32, true}, wasm::make_i32(0)};
}

const ir::RFunction& rfunction(const ir::Replay& r, uint32_t idx)
{
    static const ir::RFunction empty{};
    const auto it = r.functions.find(idx);
    return it == r.functions.end() ? empty : it->second;
}

std::vector<uint8_t> encode_checked(const wasm::Module& m, const CodegenOptions& options)
{
    auto bytes = wasm::encode_module(m, {options.body_size_limit});
    const auto diags = wasm::validate_module(m, {options.body_size_limit});
    if (!diags.empty())
        throw Error{ErrorClass::Internal, "generated module does not validate: " + diags.front().message};
    return bytes;
}
}  // namespace

}  // namespace codegen

wasm::Module build_self_contained(const wasm::Module& original, const ir::Replay& r, std::vector<std::string>* notes)
{
    using namespace codegen;
    check_inputs(original, r);
    const auto k = original.imported_function_count();
    const auto n = static_cast<uint32_t>(original.functions.size());
    const auto aux_count = static_cast<uint32_t>(r.auxiliaries.size());

    wasm::Module out = original;
    out.customs.erase(std::remove_if(out.customs.begin(), out.customs.end(),
                          [](const wasm::CustomSection& c) { return c.name == replay_section_name; }),
        out.customs.end());
    const auto counter_base = out.global_count();
    for (uint32_t i = 0; i < k; ++i)
        out.globals.push_back(counter_global());

    IndexMap map;
    map.aux_base = k + n;
    map.data_base = static_cast<uint32_t>(out.datas.size());
    Lowerer lw{original, map};
    std::map<uint32_t, wasm::Function> defs;
    for (uint32_t i = 0; i < k; ++i)
        defs[i] = lw.replay_function(original.function_type_index(i), original.function_type(i), rfunction(r, i),
            counter_base + i);
    out = wasm::splice_import_functions(out, defs);

    const auto void_type = out.intern_type({});
    for (const auto& aux : r.auxiliaries)
        out.functions.push_back(lw.plain_function(void_type, aux));
    out.functions.push_back(lw.plain_function(void_type, r.entry.contexts[0]));
    const auto start_index = k + n + aux_count;

    for (auto& e : out.exports)
        if (e.name == "_start")
        {
            e.name = "_start_orig";
            if (notes)
                notes->push_back("original export _start renamed to _start_orig");
        }
    out.exports.push_back({"_start", wasm::ExternKind::Func, start_index});
    finish_segments(out, lw);

    ReplayMeta meta;
    for (uint32_t i = 0; i < k; ++i)
        meta.stand_ins.push_back(i);
    for (uint32_t i = 0; i <= aux_count; ++i)
        meta.host_only.push_back(k + n + i);
    out.customs.push_back(make_replay_section(meta));
    return out;
}

ReplayBundle gen_self_contained(const wasm::Module& original, const ir::Replay& r, const CodegenOptions& options)
{
    ReplayBundle b;
    b.format = OutputFormat::SelfContainedWasm;
    b.entry = "_start";
    b.source_trace_hash = options.source_trace_hash;
    const auto m = build_self_contained(original, r, &b.notes);
    b.artifacts.push_back({"replay.wasm", codegen::encode_checked(m, options)});
    return b;
}

namespace codegen
{
std::string loader_script(const wasm::Module& original, const ExposedOriginal& exposed);
}

ReplayBundle gen_dynamic_linking(const wasm::Module& original, const ir::Replay& r, const CodegenOptions& options)
{
    using namespace codegen;
    check_inputs(original, r);
    const auto uses = collect_uses(r);
    auto exposed = expose_original(original, uses);
    defer_start(exposed);
    const auto k = original.imported_function_count();

    wasm::Module rep;
    for (uint32_t i = 0; i < original.memory_count(); ++i)
        rep.imports.push_back({"orig", exposed.memories[i], original.memory_type(i)});

    std::set<uint32_t> funcs = uses.export_calls;
    funcs.insert(uses.table_funcs.begin(), uses.table_funcs.end());
    std::map<uint32_t, uint32_t> func_at;
    for (const auto f : funcs)
    {
        func_at[f] = static_cast<uint32_t>(func_at.size());
        rep.imports.push_back({"orig", exposed.funcs.at(f), rep.intern_type(original.function_type(f))});
    }
    std::map<uint32_t, uint32_t> global_at;
    for (const auto g : uses.globals)
    {
        global_at[g] = static_cast<uint32_t>(global_at.size());
        rep.imports.push_back({"orig", exposed.globals.at(g), original.global_type(g)});
    }
    std::map<uint32_t, uint32_t> table_at;
    for (const auto t : uses.tables)
    {
        table_at[t] = static_cast<uint32_t>(table_at.size());
        rep.imports.push_back({"orig", exposed.tables.at(t), original.table_type(t)});
    }

    const auto imported = static_cast<uint32_t>(funcs.size());
    const auto counter_base = static_cast<uint32_t>(uses.globals.size());
    for (uint32_t i = 0; i < k; ++i)
        rep.globals.push_back(counter_global());

    IndexMap map;
    map.func = [&func_at](uint32_t f) { return func_at.at(f); };
    map.global = [&global_at](uint32_t g) { return global_at.at(g); };
    map.table = [&table_at](uint32_t t) { return table_at.at(t); };
    map.aux_base = imported + k;
    Lowerer lw{original, map};
    for (uint32_t i = 0; i < k; ++i)
    {
        rep.functions.push_back(lw.replay_function(rep.intern_type(original.function_type(i)),
            original.function_type(i), rfunction(r, i), counter_base + i));
        rep.exports.push_back({"replay_" + std::to_string(i), wasm::ExternKind::Func, imported + i});
    }
    const auto void_type = rep.intern_type({});
    for (const auto& aux : r.auxiliaries)
        rep.functions.push_back(lw.plain_function(void_type, aux));
    rep.functions.push_back(lw.plain_function(void_type, r.entry.contexts[0]));
    rep.exports.push_back({"_start", wasm::ExternKind::Func,
        imported + k + static_cast<uint32_t>(r.auxiliaries.size())});
    finish_segments(rep, lw);

    ReplayBundle b;
    b.format = OutputFormat::DynamicLinking;
    b.entry = "loader.js";
    b.source_trace_hash = options.source_trace_hash;
    b.notes = exposed.notes;
    b.artifacts.push_back({"replay.wasm", encode_checked(rep, options)});
    b.artifacts.push_back({"original.wasm", wasm::encode_module(exposed.module)});
    const auto loader = loader_script(original, exposed);
    b.artifacts.push_back({"loader.js", {loader.begin(), loader.end()}});
    return b;
}

}  // namespace wrr
