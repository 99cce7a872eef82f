// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "wrr/instrument.hpp"
#include "wrr/error.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace wrr
{
using wasm::Instruction;
using wasm::Opcode;
using wasm::ValType;

std::optional<uint32_t> InstrMeta::to_original(uint32_t index) const noexcept
{
    if (index < imports)
        return index;
    if (index < wrapper_base())
        return std::nullopt;
    if (index < wrapper_base() + wrapped.size())
        return wrapped[index - wrapper_base()];
    return index - defined_shift();
}

uint32_t InstrMeta::raw_index(uint32_t original) const noexcept
{
    return original < imports ? original : original + defined_shift();
}

namespace
{
class PayloadReader
{
public:
    explicit PayloadReader(std::span<const uint8_t> bytes) : m_bytes{bytes} {}

    uint32_t u32()
    {
        uint32_t result = 0;
        for (int shift = 0; shift < 35; shift += 7)
        {
            if (m_pos >= m_bytes.size())
                throw MalformedModule{m_pos, "truncated wrr custom section"};
            const auto b = m_bytes[m_pos++];
            result |= static_cast<uint32_t>(b & 0x7f) << shift;
            if ((b & 0x80) == 0)
                return result;
        }
        throw MalformedModule{m_pos, "overlong integer in wrr custom section"};
    }

    std::vector<uint32_t> list()
    {
        const auto n = u32();
        if (n > m_bytes.size())
            throw MalformedModule{m_pos, "bad list length in wrr custom section"};
        std::vector<uint32_t> out(n);
        for (auto& v : out)
            v = u32();
        return out;
    }

private:
    std::span<const uint8_t> m_bytes;
    std::size_t m_pos = 0;
};

void write_list(std::vector<uint8_t>& out, const std::vector<uint32_t>& values)
{
    wasm::write_u32_leb(out, static_cast<uint32_t>(values.size()));
    for (const auto v : values)
        wasm::write_u32_leb(out, v);
}

const char* type_suffix(ValType t)
{
    switch (t)
    {
    case ValType::I32:
        return "i32";
    case ValType::I64:
        return "i64";
    case ValType::F32:
        return "f32";
    case ValType::F64:
        return "f64";
    case ValType::FuncRef:
        break;
    }
    return nullptr;
}

const char* access_suffix(Opcode op)
{
    switch (op)
    {
    case Opcode::i32_load:
    case Opcode::i32_store:
        return "i32";
    case Opcode::i64_load:
    case Opcode::i64_store:
        return "i64";
    case Opcode::f32_load:
    case Opcode::f32_store:
        return "f32";
    case Opcode::f64_load:
    case Opcode::f64_store:
        return "f64";
    case Opcode::i32_load8_s:
    case Opcode::i32_load8_u:
    case Opcode::i32_store8:
        return "i32_8";
    case Opcode::i32_load16_s:
    case Opcode::i32_load16_u:
    case Opcode::i32_store16:
        return "i32_16";
    case Opcode::i64_load8_s:
    case Opcode::i64_load8_u:
    case Opcode::i64_store8:
        return "i64_8";
    case Opcode::i64_load16_s:
    case Opcode::i64_load16_u:
    case Opcode::i64_store16:
        return "i64_16";
    case Opcode::i64_load32_s:
    case Opcode::i64_load32_u:
    case Opcode::i64_store32:
        return "i64_32";
    default:
        return nullptr;
    }
}

/// Register type of the value a load produces or a store consumes.
ValType access_type(Opcode op)
{
    switch (wasm::info(op).sig)
    {
    case wasm::Sig::load_I:
    case wasm::Sig::store_I:
        return ValType::I64;
    case wasm::Sig::load_f:
    case wasm::Sig::store_f:
        return ValType::F32;
    case wasm::Sig::load_F:
    case wasm::Sig::store_F:
        return ValType::F64;
    default:
        return ValType::I32;
    }
}

/// Scratch locals appended to a function, handed out per type and slot.
class ScratchLocals
{
public:
    explicit ScratchLocals(uint32_t first) : m_next{first} {}

    uint32_t get(ValType t, uint32_t slot = 0)
    {
        auto& pool = m_pool[t];
        while (pool.size() <= slot)
        {
            pool.push_back(m_next++);
            m_order.push_back(t);
        }
        return pool[slot];
    }

    void append_to(std::vector<wasm::Local>& locals) const
    {
        for (const auto t : m_order)
        {
            if (!locals.empty() && locals.back().type == t)
                ++locals.back().count;
            else
                locals.push_back({1, t});
        }
    }

private:
    uint32_t m_next;
    std::map<ValType, std::vector<uint32_t>> m_pool;
    std::vector<ValType> m_order;
};

class Instrumenter
{
public:
    Instrumenter(const wasm::Module& m, const InstrumentationConfig& cfg) : m_in{m}, m_cfg{cfg} {}

    wasm::Module run()
    {
        for (const auto& imp : m_in.imports)
            if (imp.module == m_cfg.recorder_import_module)
                throw AlreadyInstrumented{m_cfg.recorder_import_module};
        if (m_in.find_custom(instr_section_name))
            throw AlreadyInstrumented{m_cfg.recorder_import_module};

        const auto replay = read_replay_meta(m_in);
        m_meta.imports = m_in.imported_function_count();
        m_meta.original_function_count = m_in.function_count();
        std::set<uint32_t> wrapped;
        for (uint32_t i = 0; i < m_meta.imports; ++i)
            wrapped.insert(i);
        if (replay)
        {
            wrapped.insert(replay->stand_ins.begin(), replay->stand_ins.end());
            m_host.insert(replay->stand_ins.begin(), replay->stand_ins.end());
            m_host.insert(replay->host_only.begin(), replay->host_only.end());
            m_meta.host_only = replay->host_only;
        }
        m_meta.wrapped.assign(wrapped.begin(), wrapped.end());
        const auto signatures = recorder_signatures();
        m_meta.recorders = static_cast<uint32_t>(signatures.size());
        for (std::size_t w = 0; w < m_meta.wrapped.size(); ++w)
            m_wrapper_of[m_meta.wrapped[w]] = m_meta.wrapper_base() + static_cast<uint32_t>(w);

        m_out = m_in;
        m_out.imports.clear();
        for (const auto& imp : m_in.imports)
            m_out.imports.push_back(imp);
        // Recorder imports follow all original imports; only function imports take indices.
        for (uint32_t r = 0; r < signatures.size(); ++r)
        {
            const auto& [name, type] = signatures[r];
            m_recorder[name] = m_meta.imports + r;
            m_out.imports.push_back({m_cfg.recorder_import_module, name, m_out.intern_type(type)});
        }

        m_out.functions.clear();
        for (const auto f : m_meta.wrapped)
            m_out.functions.push_back(make_wrapper(f));
        for (uint32_t i = 0; i < m_in.functions.size(); ++i)
        {
            const auto original = m_meta.imports + i;
            if (m_host.contains(original))
                m_out.functions.push_back(remap_host(m_in.functions[i]));
            else
                m_out.functions.push_back(instrument_function(original, m_in.functions[i]));
        }

        for (auto& e : m_out.exports)
            if (e.kind == wasm::ExternKind::Func)
                e.index = m_meta.raw_index(e.index);
        if (m_out.start)
            m_out.start = m_meta.raw_index(*m_out.start);
        for (auto& seg : m_out.elems)
            for (auto& item : seg.items)
                if (item)
                    item = call_target(*item);
        for (auto& g : m_out.globals)
            if (g.init.op == Opcode::ref_func)
                g.init.index = call_target(g.init.index);

        if (!m_declared.empty())
        {
            // ref.func operands must be declared; wrappers are new functions.
            wasm::ElemSegment seg;
            seg.mode = wasm::SegmentMode::Declarative;
            for (const auto f : m_declared)
                seg.items.push_back(f);
            m_out.elems.push_back(std::move(seg));
        }
        m_out.customs.erase(std::remove_if(m_out.customs.begin(), m_out.customs.end(),
                                [](const wasm::CustomSection& c) { return c.name == "name"; }),
            m_out.customs.end());
        m_out.customs.push_back(name_section());
        m_out.customs.push_back(meta_section());
        return m_out;
    }

private:
    uint32_t call_target(uint32_t original) const
    {
        const auto it = m_wrapper_of.find(original);
        return it != m_wrapper_of.end() ? it->second : m_meta.raw_index(original);
    }

    void rec(std::vector<Instruction>& out, const std::string& name) const
    {
        out.push_back(wasm::make_index(Opcode::call, m_recorder.at(name)));
    }

    /// Pops `types` (top of stack last) into scratch locals, records them as pending values,
    /// then restores them onto the stack.
    void record_values(std::vector<Instruction>& out, ScratchLocals& scratch,
        const std::vector<ValType>& types, std::map<ValType, uint32_t> base = {}) const
    {
        std::vector<uint32_t> slots(types.size());
        std::map<ValType, uint32_t> used = base;
        for (std::size_t i = 0; i < types.size(); ++i)
            slots[i] = scratch.get(types[i], used[types[i]]++);
        for (std::size_t i = types.size(); i-- > 0;)
            out.push_back(wasm::make_index(Opcode::local_set, slots[i]));
        for (std::size_t i = 0; i < types.size(); ++i)
        {
            out.push_back(wasm::make_index(Opcode::local_get, slots[i]));
            rec(out, std::string{"arg_"} + type_suffix(types[i]));
        }
        for (std::size_t i = 0; i < types.size(); ++i)
            out.push_back(wasm::make_index(Opcode::local_get, slots[i]));
    }

    void check_recordable(const wasm::FuncType& t, uint32_t f) const
    {
        for (const auto v : t.params)
            if (v == ValType::FuncRef)
                throw UnsupportedFeature{"funcref parameter in function " + std::to_string(f)};
        for (const auto v : t.results)
            if (v == ValType::FuncRef)
                throw UnsupportedFeature{"funcref result in function " + std::to_string(f)};
    }

    wasm::Function make_wrapper(uint32_t f) const
    {
        const auto& type = m_in.function_type(f);
        check_recordable(type, f);
        wasm::Function w;
        w.type_index = m_in.function_type_index(f);
        ScratchLocals scratch{static_cast<uint32_t>(type.params.size())};
        auto& body = w.body;
        if (m_cfg.record_calls)
        {
            body.push_back(wasm::make_i32(f));
            rec(body, "call_pre");
        }
        for (uint32_t p = 0; p < type.params.size(); ++p)
            body.push_back(wasm::make_index(Opcode::local_get, p));
        body.push_back(wasm::make_index(Opcode::call, m_meta.raw_index(f)));
        if (m_cfg.record_calls)
        {
            record_values(body, scratch, type.results);
            body.push_back(wasm::make_i32(f));
            rec(body, "call_post");
        }
        body.push_back(wasm::make(Opcode::end));
        scratch.append_to(w.locals);
        return w;
    }

    wasm::Function remap_host(const wasm::Function& f) const
    {
        auto out = f;
        for (auto& in : out.body)
            if (in.op == Opcode::call || in.op == Opcode::ref_func)
                in.index = m_meta.raw_index(in.index);
        return out;
    }

    bool traced_global(uint32_t g) const
    {
        const auto type = m_in.global_type(g);
        if (!type.is_mutable || type.type == ValType::FuncRef)
            return false;
        return g < m_in.imported_global_count() || m_in.find_export(wasm::ExternKind::Global, g) != nullptr;
    }

    wasm::Function instrument_function(uint32_t f, const wasm::Function& fn)
    {
        const auto& type = m_in.types.at(fn.type_index);
        check_recordable(type, f);
        uint32_t local_count = static_cast<uint32_t>(type.params.size());
        for (const auto& l : fn.locals)
            local_count += l.count;
        ScratchLocals scratch{local_count};

        wasm::Function out;
        out.type_index = fn.type_index;
        out.locals = fn.locals;
        auto& body = out.body;

        if (m_cfg.record_entries)
        {
            for (uint32_t p = 0; p < type.params.size(); ++p)
            {
                body.push_back(wasm::make_index(Opcode::local_get, p));
                rec(body, std::string{"arg_"} + type_suffix(type.params[p]));
            }
            body.push_back(wasm::make_i32(f));
            rec(body, "func_entry");
        }

        wasm::BlockType bt;
        if (type.results.size() == 1)
            bt = {wasm::BlockType::Value, type.results[0], 0};
        else if (type.results.size() > 1)
            bt = {wasm::BlockType::TypeIndex, ValType::I32, m_out.intern_type({{}, type.results})};
        body.push_back(wasm::make_block(Opcode::block, bt));

        auto record_return = [&]() {
            if (!m_cfg.record_entries)
                return;
            record_values(body, scratch, type.results);
            body.push_back(wasm::make_i32(f));
            rec(body, "func_return");
        };

        for (std::size_t pc = 0; pc + 1 < fn.body.size(); ++pc)
        {
            const auto& in = fn.body[pc];
            if (in.op == Opcode::return_)
            {
                record_return();
                body.push_back(in);
            }
            else if (wasm::is_load(in.op) && m_cfg.record_loads)
            {
                const auto t = access_type(in.op);
                const auto a = scratch.get(ValType::I32);
                const auto v = scratch.get(t, t == ValType::I32 ? 1 : 0);
                body.push_back(wasm::make_index(Opcode::local_tee, a));
                body.push_back(in);
                body.push_back(wasm::make_index(Opcode::local_tee, v));
                push_address(body, in, a);
                body.push_back(wasm::make_index(Opcode::local_get, v));
                rec(body, std::string{"load_"} + access_suffix(in.op));
            }
            else if (wasm::is_store(in.op) && m_cfg.record_stores)
            {
                const auto t = access_type(in.op);
                const auto a = scratch.get(ValType::I32);
                const auto v = scratch.get(t, t == ValType::I32 ? 1 : 0);
                body.push_back(wasm::make_index(Opcode::local_set, v));
                body.push_back(wasm::make_index(Opcode::local_tee, a));
                body.push_back(wasm::make_index(Opcode::local_get, v));
                body.push_back(in);
                push_address(body, in, a);
                body.push_back(wasm::make_index(Opcode::local_get, v));
                rec(body, std::string{"store_"} + access_suffix(in.op));
            }
            else if ((in.op == Opcode::memory_fill || in.op == Opcode::memory_copy ||
                         in.op == Opcode::memory_init) &&
                     m_cfg.record_stores)
            {
                const auto d = scratch.get(ValType::I32, 0);
                const auto s = scratch.get(ValType::I32, 1);
                const auto n = scratch.get(ValType::I32, 2);
                body.push_back(wasm::make_index(Opcode::local_set, n));
                body.push_back(wasm::make_index(Opcode::local_set, s));
                body.push_back(wasm::make_index(Opcode::local_tee, d));
                body.push_back(wasm::make_index(Opcode::local_get, s));
                body.push_back(wasm::make_index(Opcode::local_get, n));
                body.push_back(in);
                // memory.copy names the destination memory in `index`, the others in `index2`.
                body.push_back(wasm::make_i32(in.op == Opcode::memory_copy ? in.index : in.index2));
                body.push_back(wasm::make_index(Opcode::local_get, d));
                body.push_back(wasm::make_index(Opcode::local_get, n));
                rec(body, "store_bulk");
            }
            else if (in.op == Opcode::global_get && m_cfg.record_globals && traced_global(in.index))
            {
                const auto t = m_in.global_type(in.index).type;
                const auto v = scratch.get(t);
                body.push_back(in);
                body.push_back(wasm::make_index(Opcode::local_tee, v));
                body.push_back(wasm::make_i32(in.index));
                body.push_back(wasm::make_index(Opcode::local_get, v));
                rec(body, std::string{"global_get_"} + type_suffix(t));
            }
            else if (in.op == Opcode::global_set && m_cfg.record_globals && traced_global(in.index))
            {
                const auto t = m_in.global_type(in.index).type;
                const auto v = scratch.get(t);
                body.push_back(wasm::make_index(Opcode::local_tee, v));
                body.push_back(in);
                body.push_back(wasm::make_i32(in.index));
                body.push_back(wasm::make_index(Opcode::local_get, v));
                rec(body, std::string{"global_set_"} + type_suffix(t));
            }
            else if (in.op == Opcode::table_set && m_cfg.record_tables)
            {
                const auto i = scratch.get(ValType::I32);
                const auto r = scratch.get(ValType::FuncRef);
                body.push_back(wasm::make_index(Opcode::local_set, r));
                body.push_back(wasm::make_index(Opcode::local_tee, i));
                body.push_back(wasm::make_index(Opcode::local_get, r));
                body.push_back(in);
                body.push_back(wasm::make_i32(in.index));
                body.push_back(wasm::make_index(Opcode::local_get, i));
                body.push_back(wasm::make_index(Opcode::local_get, r));
                rec(body, "table_set");
            }
            else if (in.op == Opcode::table_get && m_cfg.record_tables)
            {
                const auto i = scratch.get(ValType::I32);
                const auto r = scratch.get(ValType::FuncRef);
                body.push_back(wasm::make_index(Opcode::local_tee, i));
                body.push_back(in);
                body.push_back(wasm::make_index(Opcode::local_tee, r));
                body.push_back(wasm::make_i32(in.index));
                body.push_back(wasm::make_index(Opcode::local_get, i));
                body.push_back(wasm::make_index(Opcode::local_get, r));
                rec(body, "table_get");
            }
            else if (in.op == Opcode::call)
            {
                const auto target = call_target(in.index);
                const bool internal = !m_wrapper_of.contains(in.index);
                if (internal && m_cfg.record_calls)
                {
                    body.push_back(wasm::make_i32(in.index));
                    rec(body, "call_pre");
                }
                body.push_back(wasm::make_index(Opcode::call, target));
                if (internal && m_cfg.record_calls)
                {
                    record_values(body, scratch, m_in.function_type(in.index).results);
                    body.push_back(wasm::make_i32(in.index));
                    rec(body, "call_post");
                }
            }
            else if (in.op == Opcode::ref_func)
            {
                body.push_back(wasm::make_index(Opcode::ref_func, call_target(in.index)));
                m_declared.insert(call_target(in.index));
            }
            else
            {
                body.push_back(in);
            }
        }
        body.push_back(wasm::make(Opcode::end));
        record_return();
        body.push_back(wasm::make(Opcode::end));
        scratch.append_to(out.locals);
        return out;
    }

    static void push_address(std::vector<Instruction>& body, const Instruction& in, uint32_t addr_local)
    {
        body.push_back(wasm::make_i32(in.mem.memory));
        body.push_back(wasm::make_index(Opcode::local_get, addr_local));
        if (in.mem.offset != 0)
        {
            body.push_back(wasm::make_i32(in.mem.offset));
            body.push_back(wasm::make(Opcode::i32_add));
        }
    }

    wasm::CustomSection name_section() const
    {
        std::vector<uint8_t> names;
        wasm::write_u32_leb(names, static_cast<uint32_t>(m_meta.wrapped.size()));
        for (std::size_t w = 0; w < m_meta.wrapped.size(); ++w)
        {
            wasm::write_u32_leb(names, m_meta.wrapper_base() + static_cast<uint32_t>(w));
            const auto name = "wrr_wrap_" + std::to_string(m_meta.wrapped[w]);
            wasm::write_u32_leb(names, static_cast<uint32_t>(name.size()));
            names.insert(names.end(), name.begin(), name.end());
        }
        wasm::CustomSection c{"name", {1}};
        wasm::write_u32_leb(c.payload, static_cast<uint32_t>(names.size()));
        c.payload.insert(c.payload.end(), names.begin(), names.end());
        return c;
    }

    wasm::CustomSection meta_section() const
    {
        wasm::CustomSection c{std::string{instr_section_name}, {}};
        wasm::write_u32_leb(c.payload, m_meta.imports);
        wasm::write_u32_leb(c.payload, m_meta.recorders);
        write_list(c.payload, m_meta.wrapped);
        write_list(c.payload, m_meta.host_only);
        wasm::write_u32_leb(c.payload, m_meta.original_function_count);
        return c;
    }

    const wasm::Module& m_in;
    const InstrumentationConfig& m_cfg;
    wasm::Module m_out;
    InstrMeta m_meta;
    std::set<uint32_t> m_host;
    std::map<uint32_t, uint32_t> m_wrapper_of;
    std::map<std::string, uint32_t> m_recorder;
    std::set<uint32_t> m_declared;
};
}  // namespace

std::optional<InstrMeta> read_instr_meta(const wasm::Module& m)
{
    const auto* c = m.find_custom(instr_section_name);
    if (c == nullptr)
        return std::nullopt;
    PayloadReader r{c->payload};
    InstrMeta meta;
    meta.imports = r.u32();
    meta.recorders = r.u32();
    meta.wrapped = r.list();
    meta.host_only = r.list();
    meta.original_function_count = r.u32();
    return meta;
}

std::optional<ReplayMeta> read_replay_meta(const wasm::Module& m)
{
    const auto* c = m.find_custom(replay_section_name);
    if (c == nullptr)
        return std::nullopt;
    PayloadReader r{c->payload};
    ReplayMeta meta;
    meta.stand_ins = r.list();
    meta.host_only = r.list();
    return meta;
}

wasm::CustomSection make_replay_section(const ReplayMeta& meta)
{
    wasm::CustomSection c{std::string{replay_section_name}, {}};
    write_list(c.payload, meta.stand_ins);
    write_list(c.payload, meta.host_only);
    return c;
}

std::vector<std::pair<std::string, wasm::FuncType>> recorder_signatures()
{
    using V = ValType;
    std::vector<std::pair<std::string, wasm::FuncType>> out;
    for (const auto t : {V::I32, V::I64, V::F32, V::F64})
        out.push_back({std::string{"arg_"} + type_suffix(t), {{t}, {}}});
    for (const char* name : {"func_entry", "func_return", "call_pre", "call_post"})
        out.push_back({name, {{V::I32}, {}}});
    const std::pair<const char*, V> accesses[] = {{"i32", V::I32}, {"i64", V::I64}, {"f32", V::F32},
        {"f64", V::F64}, {"i32_8", V::I32}, {"i32_16", V::I32}, {"i64_8", V::I64}, {"i64_16", V::I64},
        {"i64_32", V::I64}};
    for (const char* prefix : {"load_", "store_"})
        for (const auto& [suffix, t] : accesses)
            out.push_back({std::string{prefix} + suffix, {{V::I32, V::I32, t}, {}}});
    out.push_back({"store_bulk", {{V::I32, V::I32, V::I32}, {}}});
    for (const auto t : {V::I32, V::I64, V::F32, V::F64})
        out.push_back({std::string{"global_get_"} + type_suffix(t), {{V::I32, t}, {}}});
    out.push_back({"table_get", {{V::I32, V::I32, V::FuncRef}, {}}});
    for (const auto t : {V::I32, V::I64, V::F32, V::F64})
        out.push_back({std::string{"global_set_"} + type_suffix(t), {{V::I32, t}, {}}});
    out.push_back({"table_set", {{V::I32, V::I32, V::FuncRef}, {}}});
    return out;
}

wasm::Module instrument(const wasm::Module& m, const InstrumentationConfig& config)
{
    return Instrumenter{m, config}.run();
}

}  // namespace wrr
