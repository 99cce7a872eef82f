// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "wrr/error.hpp"
#include "wrr/wasm.hpp"

namespace wrr::wasm
{
void write_u32_leb(std::vector<uint8_t>& out, uint32_t v)
{
    do
    {
        uint8_t b = v & 0x7f;
        v >>= 7;
        if (v != 0)
            b |= 0x80;
        out.push_back(b);
    } while (v != 0);
}

void write_s64_leb(std::vector<uint8_t>& out, int64_t v)
{
    while (true)
    {
        const uint8_t b = v & 0x7f;
        v >>= 7;
        const bool done = (v == 0 && (b & 0x40) == 0) || (v == -1 && (b & 0x40) != 0);
        if (done)
        {
            out.push_back(b);
            return;
        }
        out.push_back(b | 0x80);
    }
}

void write_s32_leb(std::vector<uint8_t>& out, int32_t v)
{
    write_s64_leb(out, v);
}

namespace
{
void write_name(std::vector<uint8_t>& out, std::string_view s)
{
    write_u32_leb(out, static_cast<uint32_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
}

void write_limits(std::vector<uint8_t>& out, const Limits& l)
{
    out.push_back(l.max ? 1 : 0);
    write_u32_leb(out, l.min);
    if (l.max)
        write_u32_leb(out, *l.max);
}

void write_fixed(std::vector<uint8_t>& out, uint64_t v, int bytes)
{
    for (int i = 0; i < bytes; ++i)
        out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void write_const_expr(std::vector<uint8_t>& out, const ConstExpr& e)
{
    encode_instruction(out, e);
    out.push_back(0x0b);
}

void write_section(std::vector<uint8_t>& out, uint8_t id, const std::vector<uint8_t>& content)
{
    out.push_back(id);
    write_u32_leb(out, static_cast<uint32_t>(content.size()));
    out.insert(out.end(), content.begin(), content.end());
}
}  // namespace

void encode_instruction(std::vector<uint8_t>& out, const Instruction& in)
{
    const auto code = static_cast<uint16_t>(in.op);
    if (is_prefixed(in.op))
    {
        out.push_back(0xfc);
        write_u32_leb(out, code & 0xff);
    }
    else
    {
        out.push_back(static_cast<uint8_t>(code));
    }
    switch (info(in.op).imm)
    {
    case Imm::None:
        break;
    case Imm::Block:
        switch (in.block.kind)
        {
        case BlockType::Empty:
            out.push_back(0x40);
            break;
        case BlockType::Value:
            out.push_back(static_cast<uint8_t>(in.block.type));
            break;
        case BlockType::TypeIndex:
            write_s64_leb(out, in.block.index);
            break;
        }
        break;
    case Imm::Label:
    case Imm::Func:
    case Imm::Local:
    case Imm::Global:
    case Imm::Table:
    case Imm::Data:
        write_u32_leb(out, in.index);
        break;
    case Imm::LabelTable:
        write_u32_leb(out, static_cast<uint32_t>(in.labels.size()));
        for (const auto l : in.labels)
            write_u32_leb(out, l);
        write_u32_leb(out, in.index);
        break;
    case Imm::CallIndirect:
        write_u32_leb(out, in.index);
        write_u32_leb(out, in.index2);
        break;
    case Imm::MemArg:
        if (in.mem.memory != 0)
        {
            write_u32_leb(out, in.mem.align | 0x40);
            write_u32_leb(out, in.mem.memory);
        }
        else
        {
            write_u32_leb(out, in.mem.align);
        }
        write_u32_leb(out, in.mem.offset);
        break;
    case Imm::Memory:
        write_u32_leb(out, in.index2);
        break;
    case Imm::I32:
        write_s32_leb(out, static_cast<int32_t>(static_cast<uint32_t>(in.value)));
        break;
    case Imm::I64:
        write_s64_leb(out, static_cast<int64_t>(in.value));
        break;
    case Imm::F32:
        write_fixed(out, in.value, 4);
        break;
    case Imm::F64:
        write_fixed(out, in.value, 8);
        break;
    case Imm::SelectT:
        write_u32_leb(out, static_cast<uint32_t>(in.labels.size()));
        for (const auto t : in.labels)
            out.push_back(static_cast<uint8_t>(t));
        break;
    case Imm::RefType:
        out.push_back(0x70);
        break;
    case Imm::MemoryInit:
    case Imm::MemoryCopy:
        write_u32_leb(out, in.index);
        write_u32_leb(out, in.index2);
        break;
    }
}

std::vector<uint8_t> encode_function_body(const Function& f)
{
    std::vector<uint8_t> out;
    write_u32_leb(out, static_cast<uint32_t>(f.locals.size()));
    for (const auto& l : f.locals)
    {
        write_u32_leb(out, l.count);
        out.push_back(static_cast<uint8_t>(l.type));
    }
    for (const auto& in : f.body)
        encode_instruction(out, in);
    return out;
}

std::vector<uint8_t> encode_module(const Module& m, const EncodeOptions& options)
{
    std::vector<uint8_t> out = {0x00, 0x61, 0x73, 0x6d, 0x01, 0x00, 0x00, 0x00};
    std::vector<uint8_t> s;

    if (!m.types.empty())
    {
        s.clear();
        write_u32_leb(s, static_cast<uint32_t>(m.types.size()));
        for (const auto& t : m.types)
        {
            s.push_back(0x60);
            write_u32_leb(s, static_cast<uint32_t>(t.params.size()));
            for (const auto p : t.params)
                s.push_back(static_cast<uint8_t>(p));
            write_u32_leb(s, static_cast<uint32_t>(t.results.size()));
            for (const auto r : t.results)
                s.push_back(static_cast<uint8_t>(r));
        }
        write_section(out, 1, s);
    }
    if (!m.imports.empty())
    {
        s.clear();
        write_u32_leb(s, static_cast<uint32_t>(m.imports.size()));
        for (const auto& imp : m.imports)
        {
            write_name(s, imp.module);
            write_name(s, imp.name);
            s.push_back(static_cast<uint8_t>(imp.kind()));
            std::visit(
                [&s](const auto& d) {
                    using T = std::decay_t<decltype(d)>;
                    if constexpr (std::is_same_v<T, uint32_t>)
                        write_u32_leb(s, d);
                    else if constexpr (std::is_same_v<T, TableType>)
                    {
                        s.push_back(static_cast<uint8_t>(d.elem));
                        write_limits(s, d.limits);
                    }
                    else if constexpr (std::is_same_v<T, MemoryType>)
                        write_limits(s, d.limits);
                    else
                    {
                        s.push_back(static_cast<uint8_t>(d.type));
                        s.push_back(d.is_mutable ? 1 : 0);
                    }
                },
                imp.desc);
        }
        write_section(out, 2, s);
    }
    if (!m.functions.empty())
    {
        s.clear();
        write_u32_leb(s, static_cast<uint32_t>(m.functions.size()));
        for (const auto& f : m.functions)
            write_u32_leb(s, f.type_index);
        write_section(out, 3, s);
    }
    if (!m.tables.empty())
    {
        s.clear();
        write_u32_leb(s, static_cast<uint32_t>(m.tables.size()));
        for (const auto& t : m.tables)
        {
            s.push_back(static_cast<uint8_t>(t.elem));
            write_limits(s, t.limits);
        }
        write_section(out, 4, s);
    }
    if (!m.memories.empty())
    {
        s.clear();
        write_u32_leb(s, static_cast<uint32_t>(m.memories.size()));
        for (const auto& mem : m.memories)
            write_limits(s, mem.limits);
        write_section(out, 5, s);
    }
    if (!m.globals.empty())
    {
        s.clear();
        write_u32_leb(s, static_cast<uint32_t>(m.globals.size()));
        for (const auto& g : m.globals)
        {
            s.push_back(static_cast<uint8_t>(g.type.type));
            s.push_back(g.type.is_mutable ? 1 : 0);
            write_const_expr(s, g.init);
        }
        write_section(out, 6, s);
    }
    if (!m.exports.empty())
    {
        s.clear();
        write_u32_leb(s, static_cast<uint32_t>(m.exports.size()));
        for (const auto& e : m.exports)
        {
            write_name(s, e.name);
            s.push_back(static_cast<uint8_t>(e.kind));
            write_u32_leb(s, e.index);
        }
        write_section(out, 7, s);
    }
    if (m.start)
    {
        s.clear();
        write_u32_leb(s, *m.start);
        write_section(out, 8, s);
    }
    if (!m.elems.empty())
    {
        s.clear();
        write_u32_leb(s, static_cast<uint32_t>(m.elems.size()));
        for (const auto& e : m.elems)
        {
            uint32_t flags = e.uses_exprs ? 4 : 0;
            if (e.mode == SegmentMode::Active)
            {
                if (e.explicit_table || e.table != 0)
                    flags |= 2;
            }
            else
            {
                flags |= 1;
                if (e.mode == SegmentMode::Declarative)
                    flags |= 2;
            }
            write_u32_leb(s, flags);
            if (e.mode == SegmentMode::Active)
            {
                if (flags & 2)
                    write_u32_leb(s, e.table);
                write_const_expr(s, e.offset);
            }
            if (flags != 0 && flags != 4)
                s.push_back(e.uses_exprs ? 0x70 : 0x00);
            write_u32_leb(s, static_cast<uint32_t>(e.items.size()));
            for (const auto& item : e.items)
            {
                if (e.uses_exprs)
                {
                    if (item)
                    {
                        s.push_back(0xd2);
                        write_u32_leb(s, *item);
                    }
                    else
                    {
                        s.push_back(0xd0);
                        s.push_back(0x70);
                    }
                    s.push_back(0x0b);
                }
                else
                {
                    write_u32_leb(s, item.value_or(0));
                }
            }
        }
        write_section(out, 9, s);
    }
    if (m.data_count)
    {
        s.clear();
        write_u32_leb(s, *m.data_count);
        write_section(out, 12, s);
    }
    if (!m.functions.empty())
    {
        s.clear();
        write_u32_leb(s, static_cast<uint32_t>(m.functions.size()));
        const auto base = m.imported_function_count();
        for (std::size_t i = 0; i < m.functions.size(); ++i)
        {
            const auto body = encode_function_body(m.functions[i]);
            if (body.size() > options.body_size_limit)
                throw LimitExceeded{base + static_cast<uint32_t>(i), body.size(), options.body_size_limit};
            write_u32_leb(s, static_cast<uint32_t>(body.size()));
            s.insert(s.end(), body.begin(), body.end());
        }
        write_section(out, 10, s);
    }
    if (!m.datas.empty())
    {
        s.clear();
        write_u32_leb(s, static_cast<uint32_t>(m.datas.size()));
        for (const auto& d : m.datas)
        {
            if (d.mode == SegmentMode::Passive)
            {
                s.push_back(1);
            }
            else if (d.memory != 0)
            {
                s.push_back(2);
                write_u32_leb(s, d.memory);
                write_const_expr(s, d.offset);
            }
            else
            {
                s.push_back(0);
                write_const_expr(s, d.offset);
            }
            write_u32_leb(s, static_cast<uint32_t>(d.bytes.size()));
            s.insert(s.end(), d.bytes.begin(), d.bytes.end());
        }
        write_section(out, 11, s);
    }
    for (const auto& c : m.customs)
    {
        s.clear();
        write_name(s, c.name);
        s.insert(s.end(), c.payload.begin(), c.payload.end());
        write_section(out, 0, s);
    }
    return out;
}

}  // namespace wrr::wasm
