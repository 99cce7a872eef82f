// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "wrr/error.hpp"
#include "wrr/wasm.hpp"

#include <cstring>

namespace wrr::wasm
{
namespace
{
enum SectionId : uint8_t
{
    Custom = 0,
    Type = 1,
    ImportSec = 2,
    FunctionSec = 3,
    TableSec = 4,
    MemorySec = 5,
    GlobalSec = 6,
    ExportSec = 7,
    StartSec = 8,
    ElementSec = 9,
    CodeSec = 10,
    DataSec = 11,
    DataCountSec = 12,
    TagSec = 13,
};

/// Position of each known section in the mandated order.
int section_rank(uint8_t id)
{
    switch (id)
    {
    case Type:
        return 1;
    case ImportSec:
        return 2;
    case FunctionSec:
        return 3;
    case TableSec:
        return 4;
    case MemorySec:
        return 5;
    case TagSec:
        return 6;
    case GlobalSec:
        return 7;
    case ExportSec:
        return 8;
    case StartSec:
        return 9;
    case ElementSec:
        return 10;
    case DataCountSec:
        return 11;
    case CodeSec:
        return 12;
    case DataSec:
        return 13;
    default:
        return -1;
    }
}

/// Opcodes from proposals outside the supported subset, mapped to the proposal name.
const char* unsupported_opcode_feature(uint8_t op)
{
    switch (op)
    {
    case 0x06:
    case 0x07:
    case 0x08:
    case 0x09:
    case 0x0a:
    case 0x18:
    case 0x19:
    case 0x1f:
        return "exception-handling";
    case 0x12:
    case 0x13:
        return "tail-call";
    case 0x14:
    case 0x15:
    case 0xd3:
    case 0xd4:
    case 0xd5:
    case 0xd6:
        return "function-references";
    case 0xfb:
        return "gc";
    case 0xfd:
        return "simd";
    case 0xfe:
        return "threads";
    default:
        return nullptr;
    }
}

class Reader
{
public:
    Reader(std::span<const uint8_t> bytes, std::size_t base) : m_bytes{bytes}, m_base{base} {}

    std::size_t offset() const noexcept { return m_base + m_pos; }
    bool at_end() const noexcept { return m_pos == m_bytes.size(); }
    std::size_t remaining() const noexcept { return m_bytes.size() - m_pos; }

    [[noreturn]] void fail(const std::string& reason) const { throw MalformedModule{offset(), reason}; }

    uint8_t byte()
    {
        if (at_end())
            fail("unexpected end");
        return m_bytes[m_pos++];
    }

    std::span<const uint8_t> bytes(std::size_t n)
    {
        if (remaining() < n)
            fail("unexpected end");
        auto s = m_bytes.subspan(m_pos, n);
        m_pos += n;
        return s;
    }

    uint32_t u32()
    {
        uint64_t result = 0;
        for (int shift = 0;; shift += 7)
        {
            const auto b = byte();
            if (shift == 28 && (b & 0x70) != 0)
                fail("integer representation too long");
            result |= uint64_t{b & 0x7fu} << shift;
            if ((b & 0x80) == 0)
                break;
            if (shift == 28)
                fail("integer representation too long");
        }
        return static_cast<uint32_t>(result);
    }

    int64_t signed_leb(int bits)
    {
        int64_t result = 0;
        int shift = 0;
        uint8_t b;
        const int max_bytes = (bits + 6) / 7;
        for (int i = 0;; ++i)
        {
            if (i == max_bytes)
                fail("integer representation too long");
            b = byte();
            result |= int64_t{b & 0x7f} << shift;
            shift += 7;
            if ((b & 0x80) == 0)
                break;
        }
        if (shift < 64 && (b & 0x40) != 0)
            result |= -(int64_t{1} << shift);
        if (bits < 64)
        {
            const auto min = -(int64_t{1} << (bits - 1));
            const auto max = (int64_t{1} << (bits - 1)) - 1;
            if (result < min || result > max)
                fail("integer too large");
        }
        return result;
    }

    std::string name()
    {
        const auto n = u32();
        const auto s = bytes(n);
        return {reinterpret_cast<const char*>(s.data()), s.size()};
    }

    ValType valtype()
    {
        const auto b = byte();
        if (b == 0x6f)
            throw UnsupportedFeature{"reference-types (externref)"};
        if (b == 0x7b)
            throw UnsupportedFeature{"simd"};
        const auto t = decode_valtype(b);
        if (!t)
            fail("invalid value type");
        return *t;
    }

    Limits limits(bool is_memory)
    {
        const auto flags = byte();
        if (is_memory && (flags & 0x02))
            throw UnsupportedFeature{"threads (shared memory)"};
        if (is_memory && (flags & 0x04))
            throw UnsupportedFeature{"memory64"};
        if (flags > 1)
            fail("invalid limits flags");
        Limits l;
        l.min = u32();
        if (flags & 1)
            l.max = u32();
        return l;
    }

private:
    std::span<const uint8_t> m_bytes;
    std::size_t m_base;
    std::size_t m_pos = 0;
};

ConstExpr read_const_expr(Reader& r)
{
    const auto op = r.byte();
    ConstExpr e;
    switch (op)
    {
    case 0x41:
        e.op = Opcode::i32_const;
        e.value = static_cast<uint32_t>(r.signed_leb(32));
        break;
    case 0x42:
        e.op = Opcode::i64_const;
        e.value = static_cast<uint64_t>(r.signed_leb(64));
        break;
    case 0x43:
    {
        e.op = Opcode::f32_const;
        const auto b = r.bytes(4);
        uint32_t v;
        std::memcpy(&v, b.data(), 4);
        e.value = v;
        break;
    }
    case 0x44:
    {
        e.op = Opcode::f64_const;
        const auto b = r.bytes(8);
        std::memcpy(&e.value, b.data(), 8);
        break;
    }
    case 0x23:
        e.op = Opcode::global_get;
        e.index = r.u32();
        break;
    case 0xd0:
        e.op = Opcode::ref_null;
        if (r.byte() != 0x70)
            throw UnsupportedFeature{"reference-types (externref)"};
        e.value = 0x70;
        break;
    case 0xd2:
        e.op = Opcode::ref_func;
        e.index = r.u32();
        break;
    default:
        if (op == 0x6a || op == 0x6b || op == 0x6c || op == 0x7c || op == 0x7d || op == 0x7e)
            throw UnsupportedFeature{"extended-const"};
        r.fail("unsupported constant expression");
    }
    if (r.byte() != 0x0b)
    {
        throw UnsupportedFeature{"extended-const"};
    }
    return e;
}

BlockType read_block_type(Reader& r)
{
    const auto start = r.offset();
    (void)start;
    BlockType bt;
    // Peek via a signed LEB decode: 0x40 is empty, value types are single negative bytes.
    const auto v = r.signed_leb(33);
    if (v == -64)
        return bt;
    if (v < 0)
    {
        const auto byte = static_cast<uint8_t>(v & 0x7f);
        if (byte == 0x6f)
            throw UnsupportedFeature{"reference-types (externref)"};
        if (byte == 0x7b)
            throw UnsupportedFeature{"simd"};
        const auto t = decode_valtype(byte);
        if (!t)
            r.fail("invalid block type");
        bt.kind = BlockType::Value;
        bt.type = *t;
        return bt;
    }
    bt.kind = BlockType::TypeIndex;
    bt.index = static_cast<uint32_t>(v);
    return bt;
}

Instruction read_instruction(Reader& r)
{
    const auto at = r.offset();
    const auto first = r.byte();
    uint16_t code = first;
    if (first == 0xfc)
    {
        const auto sub = r.u32();
        if (sub >= 12 && sub <= 17)
            throw UnsupportedFeature{"bulk-memory table operations"};
        if (sub > 0xff)
            throw MalformedModule{at, "unknown 0xfc opcode " + std::to_string(sub)};
        code = static_cast<uint16_t>(0xfc00 | sub);
    }
    else if (const auto* feature = unsupported_opcode_feature(first))
    {
        throw UnsupportedFeature{feature};
    }
    const auto oi = op_info(code);
    if (!oi)
        throw MalformedModule{at, "unknown opcode " + std::to_string(code)};

    Instruction in;
    in.op = oi->op;
    switch (oi->imm)
    {
    case Imm::None:
        break;
    case Imm::Block:
        in.block = read_block_type(r);
        break;
    case Imm::Label:
    case Imm::Func:
    case Imm::Local:
    case Imm::Global:
    case Imm::Table:
    case Imm::Data:
        in.index = r.u32();
        break;
    case Imm::LabelTable:
    {
        const auto n = r.u32();
        if (n > r.remaining())
            r.fail("br_table length exceeds input");
        in.labels.reserve(n);
        for (uint32_t i = 0; i < n; ++i)
            in.labels.push_back(r.u32());
        in.index = r.u32();
        break;
    }
    case Imm::CallIndirect:
        in.index = r.u32();
        in.index2 = r.u32();
        break;
    case Imm::MemArg:
    {
        auto align = r.u32();
        if (align & 0x40)
        {
            align &= ~0x40u;
            in.mem.memory = r.u32();
        }
        in.mem.align = align;
        in.mem.offset = r.u32();
        break;
    }
    case Imm::Memory:
        in.index2 = r.u32();
        break;
    case Imm::I32:
        in.value = static_cast<uint32_t>(r.signed_leb(32));
        break;
    case Imm::I64:
        in.value = static_cast<uint64_t>(r.signed_leb(64));
        break;
    case Imm::F32:
    {
        const auto b = r.bytes(4);
        uint32_t v;
        std::memcpy(&v, b.data(), 4);
        in.value = v;
        break;
    }
    case Imm::F64:
    {
        const auto b = r.bytes(8);
        std::memcpy(&in.value, b.data(), 8);
        break;
    }
    case Imm::SelectT:
    {
        const auto n = r.u32();
        if (n != 1)
            r.fail("typed select must have exactly one type");
        in.labels.push_back(static_cast<uint32_t>(r.valtype()));
        break;
    }
    case Imm::RefType:
    {
        const auto b = r.byte();
        if (b == 0x6f)
            throw UnsupportedFeature{"reference-types (externref)"};
        if (b != 0x70)
            r.fail("invalid reference type");
        in.value = b;
        break;
    }
    case Imm::MemoryInit:
        in.index = r.u32();
        in.index2 = r.u32();
        break;
    case Imm::MemoryCopy:
        in.index = r.u32();
        in.index2 = r.u32();
        break;
    }
    return in;
}

Function read_body(Reader& r, uint32_t type_index)
{
    Function f;
    f.type_index = type_index;
    const auto groups = r.u32();
    uint64_t total = 0;
    for (uint32_t i = 0; i < groups; ++i)
    {
        Local l;
        l.count = r.u32();
        l.type = r.valtype();
        total += l.count;
        if (total > 50'000)
            r.fail("too many locals");
        f.locals.push_back(l);
    }
    int depth = 0;
    while (true)
    {
        auto in = read_instruction(r);
        const auto op = in.op;
        f.body.push_back(std::move(in));
        if (op == Opcode::block || op == Opcode::loop || op == Opcode::if_)
            ++depth;
        else if (op == Opcode::end)
        {
            if (depth == 0)
                break;
            --depth;
        }
    }
    if (!r.at_end())
        r.fail("function body has trailing bytes");
    return f;
}

std::vector<std::optional<uint32_t>> read_elem_exprs(Reader& r)
{
    const auto n = r.u32();
    std::vector<std::optional<uint32_t>> items;
    for (uint32_t i = 0; i < n; ++i)
    {
        const auto e = read_const_expr(r);
        if (e.op == Opcode::ref_func)
            items.emplace_back(e.index);
        else if (e.op == Opcode::ref_null)
            items.emplace_back(std::nullopt);
        else
            throw UnsupportedFeature{"element expression other than ref.func/ref.null"};
    }
    return items;
}

std::vector<std::optional<uint32_t>> read_elem_indices(Reader& r)
{
    const auto n = r.u32();
    if (n > r.remaining())
        r.fail("element count exceeds input");
    std::vector<std::optional<uint32_t>> items;
    items.reserve(n);
    for (uint32_t i = 0; i < n; ++i)
        items.emplace_back(r.u32());
    return items;
}

ElemSegment read_elem(Reader& r)
{
    const auto flags = r.u32();
    if (flags > 7)
        r.fail("invalid element segment flags");
    ElemSegment s;
    s.uses_exprs = (flags & 4) != 0;
    const bool passive_or_declarative = (flags & 1) != 0;
    const bool explicit_table = (flags & 2) != 0;
    if (!passive_or_declarative)
    {
        s.mode = SegmentMode::Active;
        if (explicit_table)
        {
            s.explicit_table = true;
            s.table = r.u32();
        }
        s.offset = read_const_expr(r);
    }
    else
    {
        s.mode = explicit_table ? SegmentMode::Declarative : SegmentMode::Passive;
    }
    // Flag 0 and 4 have an implicit element kind; everything else names it.
    if (flags != 0 && flags != 4)
    {
        const auto kind = r.byte();
        if (s.uses_exprs)
        {
            if (kind == 0x6f)
                throw UnsupportedFeature{"reference-types (externref)"};
            if (kind != 0x70)
                r.fail("invalid element reference type");
        }
        else if (kind != 0x00)
        {
            r.fail("invalid element kind");
        }
    }
    s.items = s.uses_exprs ? read_elem_exprs(r) : read_elem_indices(r);
    return s;
}

DataSegment read_data(Reader& r)
{
    const auto flags = r.u32();
    DataSegment d;
    switch (flags)
    {
    case 0:
        d.offset = read_const_expr(r);
        break;
    case 1:
        d.mode = SegmentMode::Passive;
        break;
    case 2:
        d.memory = r.u32();
        d.offset = read_const_expr(r);
        break;
    default:
        r.fail("invalid data segment flags");
    }
    const auto n = r.u32();
    const auto b = r.bytes(n);
    d.bytes.assign(b.begin(), b.end());
    return d;
}
}  // namespace

Module parse_module(std::span<const uint8_t> bytes)
{
    static constexpr uint8_t preamble[] = {0x00, 0x61, 0x73, 0x6d};
    if (bytes.size() < 8 || std::memcmp(bytes.data(), preamble, 4) != 0)
        throw MalformedModule{0, "missing \\0asm magic"};
    if (bytes[4] != 1 || bytes[5] != 0 || bytes[6] != 0 || bytes[7] != 0)
        throw MalformedModule{4, "unsupported binary version"};

    Module m;
    std::vector<uint32_t> func_types;
    bool have_code = false;
    int last_rank = 0;
    Reader top{bytes.subspan(8), 8};
    while (!top.at_end())
    {
        const auto id = top.byte();
        const auto size = top.u32();
        const auto content_offset = top.offset();
        Reader r{top.bytes(size), content_offset};

        if (id == Custom)
        {
            CustomSection c;
            c.name = r.name();
            const auto rest = r.bytes(r.remaining());
            c.payload.assign(rest.begin(), rest.end());
            m.customs.push_back(std::move(c));
            continue;
        }
        if (id == TagSec)
            throw UnsupportedFeature{"exception-handling"};
        const auto rank = section_rank(id);
        if (rank < 0)
            throw MalformedModule{content_offset - 1, "unknown section id " + std::to_string(id)};
        if (rank <= last_rank)
            throw MalformedModule{content_offset - 1, "section out of order"};
        last_rank = rank;

        switch (id)
        {
        case Type:
        {
            const auto n = r.u32();
            for (uint32_t i = 0; i < n; ++i)
            {
                const auto form = r.byte();
                if (form == 0x5e || form == 0x5f || form == 0x4e || form == 0x50 || form == 0x4f)
                    throw UnsupportedFeature{"gc"};
                if (form != 0x60)
                    r.fail("expected function type");
                FuncType t;
                const auto np = r.u32();
                for (uint32_t j = 0; j < np; ++j)
                    t.params.push_back(r.valtype());
                const auto nr = r.u32();
                for (uint32_t j = 0; j < nr; ++j)
                    t.results.push_back(r.valtype());
                m.types.push_back(std::move(t));
            }
            break;
        }
        case ImportSec:
        {
            const auto n = r.u32();
            for (uint32_t i = 0; i < n; ++i)
            {
                Import imp;
                imp.module = r.name();
                imp.name = r.name();
                const auto kind = r.byte();
                switch (kind)
                {
                case 0:
                    imp.desc = r.u32();
                    break;
                case 1:
                {
                    TableType t;
                    t.elem = r.valtype();
                    if (t.elem != ValType::FuncRef)
                        r.fail("table element type must be a reference");
                    t.limits = r.limits(false);
                    imp.desc = t;
                    break;
                }
                case 2:
                    imp.desc = MemoryType{r.limits(true)};
                    break;
                case 3:
                {
                    GlobalType g;
                    g.type = r.valtype();
                    const auto mut = r.byte();
                    if (mut > 1)
                        r.fail("invalid mutability");
                    g.is_mutable = mut == 1;
                    imp.desc = g;
                    break;
                }
                case 4:
                    throw UnsupportedFeature{"exception-handling"};
                default:
                    r.fail("invalid import kind");
                }
                m.imports.push_back(std::move(imp));
            }
            break;
        }
        case FunctionSec:
        {
            const auto n = r.u32();
            for (uint32_t i = 0; i < n; ++i)
                func_types.push_back(r.u32());
            break;
        }
        case TableSec:
        {
            const auto n = r.u32();
            for (uint32_t i = 0; i < n; ++i)
            {
                TableType t;
                t.elem = r.valtype();
                if (t.elem != ValType::FuncRef)
                    r.fail("table element type must be a reference");
                t.limits = r.limits(false);
                m.tables.push_back(t);
            }
            break;
        }
        case MemorySec:
        {
            const auto n = r.u32();
            for (uint32_t i = 0; i < n; ++i)
                m.memories.push_back(MemoryType{r.limits(true)});
            break;
        }
        case GlobalSec:
        {
            const auto n = r.u32();
            for (uint32_t i = 0; i < n; ++i)
            {
                Global g;
                g.type.type = r.valtype();
                const auto mut = r.byte();
                if (mut > 1)
                    r.fail("invalid mutability");
                g.type.is_mutable = mut == 1;
                g.init = read_const_expr(r);
                m.globals.push_back(g);
            }
            break;
        }
        case ExportSec:
        {
            const auto n = r.u32();
            for (uint32_t i = 0; i < n; ++i)
            {
                Export e;
                e.name = r.name();
                const auto kind = r.byte();
                if (kind > 3)
                {
                    if (kind == 4)
                        throw UnsupportedFeature{"exception-handling"};
                    r.fail("invalid export kind");
                }
                e.kind = static_cast<ExternKind>(kind);
                e.index = r.u32();
                m.exports.push_back(std::move(e));
            }
            break;
        }
        case StartSec:
            m.start = r.u32();
            break;
        case ElementSec:
        {
            const auto n = r.u32();
            for (uint32_t i = 0; i < n; ++i)
                m.elems.push_back(read_elem(r));
            break;
        }
        case DataCountSec:
            m.data_count = r.u32();
            break;
        case CodeSec:
        {
            have_code = true;
            const auto n = r.u32();
            if (n != func_types.size())
                r.fail("function and code section counts differ");
            for (uint32_t i = 0; i < n; ++i)
            {
                const auto body_size = r.u32();
                const auto body_offset = r.offset();
                Reader body{r.bytes(body_size), body_offset};
                m.functions.push_back(read_body(body, func_types[i]));
            }
            break;
        }
        case DataSec:
        {
            const auto n = r.u32();
            if (m.data_count && *m.data_count != n)
                r.fail("data count section disagrees with data section");
            for (uint32_t i = 0; i < n; ++i)
                m.datas.push_back(read_data(r));
            break;
        }
        default:
            break;
        }
        if (!r.at_end())
            r.fail("section has trailing bytes");
    }
    if (!have_code && !func_types.empty())
        throw MalformedModule{bytes.size(), "function section without code section"};
    if (m.data_count && m.datas.size() != *m.data_count)
        throw MalformedModule{bytes.size(), "data count section disagrees with data section"};
    if (m.memory_count() > 1)
        throw UnsupportedFeature{"multi-memory"};
    if (m.table_count() > 1)
        throw UnsupportedFeature{"multiple tables"};
    return m;
}

}  // namespace wrr::wasm
