// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "wrr/trace.hpp"
#include "wrr/error.hpp"

#include <bit>
#include <cctype>
#include <charconv>
#include <cstring>

namespace wrr
{
const char* kind_name(ValueKind kind) noexcept
{
    switch (kind)
    {
    case ValueKind::I32:
        return "I32";
    case ValueKind::I64:
        return "I64";
    case ValueKind::F32:
        return "F32";
    case ValueKind::F64:
        return "F64";
    case ValueKind::I8:
        return "I8";
    case ValueKind::I16:
        return "I16";
    }
    return "?";
}

const char* event_name(EventTag tag) noexcept
{
    switch (tag)
    {
    case EventTag::FuncEntry:
        return "FuncEntry";
    case EventTag::FuncReturn:
        return "FuncReturn";
    case EventTag::Call:
        return "Call";
    case EventTag::CallReturn:
        return "CallReturn";
    case EventTag::Load:
        return "Load";
    case EventTag::Store:
        return "Store";
    case EventTag::GlobalGet:
        return "GlobalGet";
    case EventTag::TableGet:
        return "TableGet";
    case EventTag::GlobalSet:
        return "GlobalSet";
    case EventTag::TableSet:
        return "TableSet";
    }
    return "?";
}

Value Value::f32(float v) noexcept
{
    return f32_bits(std::bit_cast<uint32_t>(v));
}

Value Value::f64(double v) noexcept
{
    return f64_bits(std::bit_cast<uint64_t>(v));
}

Value Value::truncated(ValueKind kind, uint64_t raw) noexcept
{
    const auto width = byte_width(kind);
    const uint64_t mask = width == 8 ? ~uint64_t{0} : (uint64_t{1} << (width * 8)) - 1;
    return {kind, raw & mask};
}

std::vector<uint8_t> Value::bytes() const
{
    std::vector<uint8_t> out(byte_width(kind));
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<uint8_t>(bits >> (8 * i));
    return out;
}

// ---------------------------------------------------------------------------------------------
// Binary codec

namespace
{
void put_u32(std::vector<uint8_t>& out, uint32_t v)
{
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void put_value(std::vector<uint8_t>& out, const Value& v)
{
    out.push_back(static_cast<uint8_t>(v.kind));
    const auto width = byte_width(v.kind);
    for (std::size_t i = 0; i < width; ++i)
        out.push_back(static_cast<uint8_t>(v.bits >> (8 * i)));
}

void put_values(std::vector<uint8_t>& out, const std::vector<Value>& values)
{
    put_u32(out, static_cast<uint32_t>(values.size()));
    for (const auto& v : values)
        put_value(out, v);
}

class ByteReader
{
public:
    explicit ByteReader(std::span<const uint8_t> bytes) : m_bytes{bytes} {}

    std::size_t offset() const noexcept { return m_pos; }
    bool at_end() const noexcept { return m_pos == m_bytes.size(); }

    uint8_t u8(std::size_t record_start)
    {
        need(1, record_start);
        return m_bytes[m_pos++];
    }

    uint32_t u32(std::size_t record_start)
    {
        need(4, record_start);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= uint32_t{m_bytes[m_pos++]} << (8 * i);
        return v;
    }

    Value value(std::size_t record_start)
    {
        const auto kind_offset = m_pos;
        const auto kind_byte = u8(record_start);
        if (kind_byte > static_cast<uint8_t>(ValueKind::I16))
            throw MalformedTrace{kind_offset, "unknown value kind " + std::to_string(kind_byte)};
        const auto kind = static_cast<ValueKind>(kind_byte);
        const auto width = byte_width(kind);
        need(width, record_start);
        uint64_t bits = 0;
        for (std::size_t i = 0; i < width; ++i)
            bits |= uint64_t{m_bytes[m_pos++]} << (8 * i);
        return {kind, bits};
    }

    std::vector<Value> values(std::size_t record_start)
    {
        const auto count = u32(record_start);
        // Each value occupies at least two bytes; reject absurd counts before allocating.
        if (count > (m_bytes.size() - m_pos) / 2)
            throw MalformedTrace{record_start, "value count exceeds remaining input"};
        std::vector<Value> out;
        out.reserve(count);
        for (uint32_t i = 0; i < count; ++i)
            out.push_back(value(record_start));
        return out;
    }

private:
    void need(std::size_t n, std::size_t record_start) const
    {
        if (m_bytes.size() - m_pos < n)
            throw MalformedTrace{record_start, "truncated record"};
    }

    std::span<const uint8_t> m_bytes;
    std::size_t m_pos = 0;
};

void check_value_kind(const Value& v, bool allow_subword, std::size_t position, bool is_line)
{
    if (!allow_subword && is_subword(v.kind))
        throw MalformedTrace{position, "sub-word value outside a memory access", is_line};
}
}  // namespace

void append_binary(std::vector<uint8_t>& out, const TraceEvent& event)
{
    out.push_back(static_cast<uint8_t>(tag_of(event)));
    std::visit(
        [&out](const auto& e) {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, event::FuncEntry>)
            {
                put_u32(out, e.funcidx);
                put_values(out, e.params);
            }
            else if constexpr (std::is_same_v<T, event::FuncReturn>)
            {
                put_u32(out, e.funcidx);
                put_values(out, e.values);
            }
            else if constexpr (std::is_same_v<T, event::Call>)
            {
                put_u32(out, e.funcidx);
            }
            else if constexpr (std::is_same_v<T, event::CallReturn>)
            {
                put_u32(out, e.funcidx);
                put_values(out, e.results);
            }
            else if constexpr (std::is_same_v<T, event::Load> || std::is_same_v<T, event::Store>)
            {
                put_u32(out, e.memidx);
                put_u32(out, e.address);
                put_value(out, e.value);
            }
            else if constexpr (std::is_same_v<T, event::GlobalGet> || std::is_same_v<T, event::GlobalSet>)
            {
                put_u32(out, e.globalidx);
                put_value(out, e.value);
            }
            else
            {
                put_u32(out, e.tableidx);
                put_u32(out, e.elemidx);
                out.push_back(e.funcref ? 1 : 0);
                if (e.funcref)
                    put_u32(out, *e.funcref);
            }
        },
        event);
}

std::vector<uint8_t> encode_binary(const Trace& trace)
{
    std::vector<uint8_t> out(trace_magic.begin(), trace_magic.end());
    put_u32(out, trace_version);
    for (const auto& e : trace.events)
        append_binary(out, e);
    return out;
}

namespace
{
template <typename T>
T read_global(ByteReader& in, std::size_t start)
{
    T e;
    e.globalidx = in.u32(start);
    e.value = in.value(start);
    check_value_kind(e.value, false, start, false);
    return e;
}

template <typename T>
T read_table(ByteReader& in, std::size_t start)
{
    T e;
    e.tableidx = in.u32(start);
    e.elemidx = in.u32(start);
    const auto flag = in.u8(start);
    if (flag > 1)
        throw MalformedTrace{start, "bad funcref flag"};
    if (flag == 1)
        e.funcref = in.u32(start);
    return e;
}
}  // namespace

Trace decode_binary(std::span<const uint8_t> bytes)
{
    if (bytes.size() < 8)
        throw MalformedTrace{0, "missing header"};
    if (std::memcmp(bytes.data(), trace_magic.data(), trace_magic.size()) != 0)
        throw MalformedTrace{0, "bad magic"};
    ByteReader in{bytes};
    for (std::size_t i = 0; i < 4; ++i)
        in.u8(0);
    const auto version = in.u32(0);
    if (version != trace_version)
        throw MalformedTrace{4, "unsupported version " + std::to_string(version)};

    Trace trace;
    while (!in.at_end())
    {
        const auto start = in.offset();
        const auto tag = in.u8(start);
        switch (static_cast<EventTag>(tag))
        {
        case EventTag::FuncEntry:
        {
            event::FuncEntry e;
            e.funcidx = in.u32(start);
            e.params = in.values(start);
            for (const auto& v : e.params)
                check_value_kind(v, false, start, false);
            trace.events.emplace_back(std::move(e));
            break;
        }
        case EventTag::FuncReturn:
        {
            event::FuncReturn e;
            e.funcidx = in.u32(start);
            e.values = in.values(start);
            for (const auto& v : e.values)
                check_value_kind(v, false, start, false);
            trace.events.emplace_back(std::move(e));
            break;
        }
        case EventTag::Call:
            trace.events.emplace_back(event::Call{in.u32(start)});
            break;
        case EventTag::CallReturn:
        {
            event::CallReturn e;
            e.funcidx = in.u32(start);
            e.results = in.values(start);
            for (const auto& v : e.results)
                check_value_kind(v, false, start, false);
            trace.events.emplace_back(std::move(e));
            break;
        }
        case EventTag::Load:
        {
            event::Load e;
            e.memidx = in.u32(start);
            e.address = in.u32(start);
            e.value = in.value(start);
            trace.events.emplace_back(e);
            break;
        }
        case EventTag::Store:
        {
            event::Store e;
            e.memidx = in.u32(start);
            e.address = in.u32(start);
            e.value = in.value(start);
            trace.events.emplace_back(e);
            break;
        }
        case EventTag::GlobalGet:
            trace.events.emplace_back(read_global<event::GlobalGet>(in, start));
            break;
        case EventTag::GlobalSet:
            trace.events.emplace_back(read_global<event::GlobalSet>(in, start));
            break;
        case EventTag::TableGet:
            trace.events.emplace_back(read_table<event::TableGet>(in, start));
            break;
        case EventTag::TableSet:
            trace.events.emplace_back(read_table<event::TableSet>(in, start));
            break;
        default:
            throw MalformedTrace{start, "unknown event tag " + std::to_string(tag)};
        }
    }
    return trace;
}

// ---------------------------------------------------------------------------------------------
// Text codec

namespace
{
std::string format_value(const Value& v)
{
    std::string out = kind_name(v.kind);
    out += '(';
    if (v.kind == ValueKind::F32 || v.kind == ValueKind::F64)
    {
        char buf[24];
        const auto digits = v.kind == ValueKind::F32 ? 8 : 16;
        std::snprintf(buf, sizeof buf, "0x%0*llx", digits, static_cast<unsigned long long>(v.bits));
        out += buf;
    }
    else
    {
        out += std::to_string(v.bits);
    }
    out += ')';
    return out;
}

std::string format_values(const std::vector<Value>& values)
{
    std::string out = "[";
    for (std::size_t i = 0; i < values.size(); ++i)
    {
        if (i != 0)
            out += ", ";
        out += format_value(values[i]);
    }
    out += ']';
    return out;
}

std::string format_index(uint32_t v)
{
    return "I32(" + std::to_string(v) + ")";
}

class LineParser
{
public:
    LineParser(std::string_view line, std::size_t line_number) : m_s{line}, m_line{line_number} {}

    [[noreturn]] void fail(const std::string& reason) const
    {
        throw MalformedTrace{m_line, reason + " (column " + std::to_string(m_pos + 1) + ")", true};
    }

    void skip_ws()
    {
        while (m_pos < m_s.size() && std::isspace(static_cast<unsigned char>(m_s[m_pos])))
            ++m_pos;
    }

    bool peek(char c)
    {
        skip_ws();
        return m_pos < m_s.size() && m_s[m_pos] == c;
    }

    void expect(char c)
    {
        if (!peek(c))
            fail(std::string{"expected '"} + c + "'");
        ++m_pos;
    }

    std::string_view word()
    {
        skip_ws();
        const auto begin = m_pos;
        while (m_pos < m_s.size() &&
               (std::isalnum(static_cast<unsigned char>(m_s[m_pos])) || m_s[m_pos] == '_'))
            ++m_pos;
        if (begin == m_pos)
            fail("expected identifier");
        return m_s.substr(begin, m_pos - begin);
    }

    uint64_t number()
    {
        skip_ws();
        int base = 10;
        if (m_s.substr(m_pos, 2) == "0x" || m_s.substr(m_pos, 2) == "0X")
        {
            base = 16;
            m_pos += 2;
        }
        uint64_t v = 0;
        const auto* first = m_s.data() + m_pos;
        const auto* last = m_s.data() + m_s.size();
        const auto [ptr, ec] = std::from_chars(first, last, v, base);
        if (ec != std::errc{} || ptr == first)
            fail("expected number");
        m_pos += static_cast<std::size_t>(ptr - first);
        return v;
    }

    void field(std::string_view name)
    {
        const auto w = word();
        if (w != name)
            fail("expected field '" + std::string{name} + "'");
        expect(':');
    }

    Value value()
    {
        const auto w = word();
        ValueKind kind;
        if (w == "I32")
            kind = ValueKind::I32;
        else if (w == "I64")
            kind = ValueKind::I64;
        else if (w == "F32")
            kind = ValueKind::F32;
        else if (w == "F64")
            kind = ValueKind::F64;
        else if (w == "I8")
            kind = ValueKind::I8;
        else if (w == "I16")
            kind = ValueKind::I16;
        else
            fail("unknown value kind '" + std::string{w} + "'");
        expect('(');
        const auto bits = number();
        expect(')');
        const auto v = Value::truncated(kind, bits);
        if (v.bits != bits)
            fail("value does not fit its kind");
        return v;
    }

    uint32_t index()
    {
        const auto v = value();
        if (v.kind != ValueKind::I32)
            fail("index must be I32");
        return static_cast<uint32_t>(v.bits);
    }

    std::vector<Value> values()
    {
        std::vector<Value> out;
        expect('[');
        if (peek(']'))
        {
            ++m_pos;
            return out;
        }
        while (true)
        {
            auto v = value();
            if (is_subword(v.kind))
                fail("sub-word value outside a memory access");
            out.push_back(v);
            if (peek(','))
            {
                ++m_pos;
                continue;
            }
            expect(']');
            return out;
        }
    }

    void comma() { expect(','); }

    void finish()
    {
        expect('}');
        skip_ws();
        if (m_pos != m_s.size())
            fail("trailing characters");
    }

private:
    std::string_view m_s;
    std::size_t m_line;
    std::size_t m_pos = 0;
};
}  // namespace

std::string format_event(const TraceEvent& event)
{
    return std::visit(
        [](const auto& e) -> std::string {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, event::FuncEntry>)
                return "FuncEntry { funcidx: " + format_index(e.funcidx) +
                       ", params: " + format_values(e.params) + " }";
            else if constexpr (std::is_same_v<T, event::FuncReturn>)
                return "FuncReturn { funcidx: " + format_index(e.funcidx) +
                       ", values: " + format_values(e.values) + " }";
            else if constexpr (std::is_same_v<T, event::Call>)
                return "Call { funcidx: " + format_index(e.funcidx) + " }";
            else if constexpr (std::is_same_v<T, event::CallReturn>)
                return "CallReturn { funcidx: " + format_index(e.funcidx) +
                       ", results: " + format_values(e.results) + " }";
            else if constexpr (std::is_same_v<T, event::Load>)
                return "Load { memidx: " + format_index(e.memidx) + ", address: " +
                       format_index(e.address) + ", value: " + format_value(e.value) + " }";
            else if constexpr (std::is_same_v<T, event::Store>)
                return "Store { memidx: " + format_index(e.memidx) + ", address: " +
                       format_index(e.address) + ", value: " + format_value(e.value) + " }";
            else if constexpr (std::is_same_v<T, event::GlobalGet> || std::is_same_v<T, event::GlobalSet>)
                return std::string{std::is_same_v<T, event::GlobalGet> ? "GlobalGet" : "GlobalSet"} +
                       " { globalidx: " + format_index(e.globalidx) + ", value: " + format_value(e.value) + " }";
            else
                return std::string{std::is_same_v<T, event::TableGet> ? "TableGet" : "TableSet"} +
                       " { tableidx: " + format_index(e.tableidx) + ", elemidx: " +
                       format_index(e.elemidx) +
                       ", funcref: " + (e.funcref ? format_index(*e.funcref) : "Null") + " }";
        },
        event);
}

TraceEvent parse_event(std::string_view line, std::size_t line_number)
{
    LineParser p{line, line_number};
    const auto name = p.word();
    p.expect('{');
    if (name == "FuncEntry")
    {
        event::FuncEntry e;
        p.field("funcidx");
        e.funcidx = p.index();
        p.comma();
        p.field("params");
        e.params = p.values();
        p.finish();
        return e;
    }
    if (name == "FuncReturn")
    {
        event::FuncReturn e;
        p.field("funcidx");
        e.funcidx = p.index();
        p.comma();
        p.field("values");
        e.values = p.values();
        p.finish();
        return e;
    }
    if (name == "Call")
    {
        event::Call e;
        p.field("funcidx");
        e.funcidx = p.index();
        p.finish();
        return e;
    }
    if (name == "CallReturn")
    {
        event::CallReturn e;
        p.field("funcidx");
        e.funcidx = p.index();
        p.comma();
        p.field("results");
        e.results = p.values();
        p.finish();
        return e;
    }
    if (name == "Load" || name == "Store")
    {
        uint32_t mem;
        uint32_t addr;
        p.field("memidx");
        mem = p.index();
        p.comma();
        p.field("address");
        addr = p.index();
        p.comma();
        p.field("value");
        const auto v = p.value();
        p.finish();
        if (name == "Load")
            return event::Load{mem, addr, v};
        return event::Store{mem, addr, v};
    }
    if (name == "GlobalGet" || name == "GlobalSet")
    {
        uint32_t idx;
        p.field("globalidx");
        idx = p.index();
        p.comma();
        p.field("value");
        const auto v = p.value();
        if (is_subword(v.kind))
            p.fail("sub-word global value");
        p.finish();
        if (name == "GlobalGet")
            return event::GlobalGet{idx, v};
        return event::GlobalSet{idx, v};
    }
    if (name == "TableGet" || name == "TableSet")
    {
        uint32_t table;
        uint32_t elem;
        std::optional<uint32_t> ref;
        p.field("tableidx");
        table = p.index();
        p.comma();
        p.field("elemidx");
        elem = p.index();
        p.comma();
        p.field("funcref");
        if (p.peek('N'))
        {
            if (p.word() != "Null")
                p.fail("expected Null");
        }
        else
        {
            ref = p.index();
        }
        p.finish();
        if (name == "TableGet")
            return event::TableGet{table, elem, ref};
        return event::TableSet{table, elem, ref};
    }
    p.fail("unknown event '" + std::string{name} + "'");
}

std::string encode_text(const Trace& trace)
{
    std::string out;
    for (const auto& e : trace.events)
    {
        out += format_event(e);
        out += '\n';
    }
    return out;
}

Trace decode_text(std::string_view text)
{
    Trace trace;
    std::size_t line_number = 0;
    while (!text.empty())
    {
        ++line_number;
        const auto nl = text.find('\n');
        auto line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string_view::npos || line[first] == '#')
            continue;
        trace.events.push_back(parse_event(line, line_number));
    }
    return trace;
}

std::string content_hash(const Trace& trace)
{
    uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto b : encode_binary(trace))
    {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace wrr
