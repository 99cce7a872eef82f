// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace wrr
{
enum class ValueKind : uint8_t
{
    I32 = 0x00,
    I64 = 0x01,
    F32 = 0x02,
    F64 = 0x03,
    I8 = 0x04,
    I16 = 0x05,
};

/// Width of a value of the given kind in bytes.
constexpr std::size_t byte_width(ValueKind kind) noexcept
{
    switch (kind)
    {
    case ValueKind::I8:
        return 1;
    case ValueKind::I16:
        return 2;
    case ValueKind::I32:
    case ValueKind::F32:
        return 4;
    case ValueKind::I64:
    case ValueKind::F64:
        return 8;
    }
    return 0;
}

constexpr bool is_subword(ValueKind kind) noexcept
{
    return kind == ValueKind::I8 || kind == ValueKind::I16;
}

const char* kind_name(ValueKind kind) noexcept;

/// A typed value. Floats are carried as raw IEEE-754 bits, sub-word values zero-extended.
struct Value
{
    ValueKind kind = ValueKind::I32;
    uint64_t bits = 0;

    static Value i32(uint32_t v) noexcept { return {ValueKind::I32, v}; }
    static Value i64(uint64_t v) noexcept { return {ValueKind::I64, v}; }
    static Value f32_bits(uint32_t v) noexcept { return {ValueKind::F32, v}; }
    static Value f64_bits(uint64_t v) noexcept { return {ValueKind::F64, v}; }
    static Value i8(uint8_t v) noexcept { return {ValueKind::I8, v}; }
    static Value i16(uint16_t v) noexcept { return {ValueKind::I16, v}; }
    static Value f32(float v) noexcept;
    static Value f64(double v) noexcept;

    /// Builds a value of `kind` from the low bits of `raw`.
    static Value truncated(ValueKind kind, uint64_t raw) noexcept;

    /// Little-endian bytes of the payload, `byte_width(kind)` long.
    std::vector<uint8_t> bytes() const;

    friend bool operator==(const Value&, const Value&) = default;
};

namespace event
{
struct FuncEntry
{
    uint32_t funcidx = 0;
    std::vector<Value> params;
    friend bool operator==(const FuncEntry&, const FuncEntry&) = default;
};

struct FuncReturn
{
    uint32_t funcidx = 0;
    std::vector<Value> values;
    friend bool operator==(const FuncReturn&, const FuncReturn&) = default;
};

struct Call
{
    uint32_t funcidx = 0;
    friend bool operator==(const Call&, const Call&) = default;
};

struct CallReturn
{
    uint32_t funcidx = 0;
    std::vector<Value> results;
    friend bool operator==(const CallReturn&, const CallReturn&) = default;
};

struct Load
{
    uint32_t memidx = 0;
    uint32_t address = 0;
    Value value;
    friend bool operator==(const Load&, const Load&) = default;
};

struct Store
{
    uint32_t memidx = 0;
    uint32_t address = 0;
    Value value;
    friend bool operator==(const Store&, const Store&) = default;
};

struct GlobalGet
{
    uint32_t globalidx = 0;
    Value value;
    friend bool operator==(const GlobalGet&, const GlobalGet&) = default;
};

struct TableGet
{
    uint32_t tableidx = 0;
    uint32_t elemidx = 0;
    /// Function index of the loaded reference; empty for null or host-made references.
    std::optional<uint32_t> funcref;
    friend bool operator==(const TableGet&, const TableGet&) = default;
};

/// Module-side write of a traced global. Never kept by the reducer.
struct GlobalSet
{
    uint32_t globalidx = 0;
    Value value;
    friend bool operator==(const GlobalSet&, const GlobalSet&) = default;
};

/// Module-side `table.set`. Never kept by the reducer.
struct TableSet
{
    uint32_t tableidx = 0;
    uint32_t elemidx = 0;
    std::optional<uint32_t> funcref;
    friend bool operator==(const TableSet&, const TableSet&) = default;
};
}  // namespace event

using TraceEvent = std::variant<event::FuncEntry, event::FuncReturn, event::Call,
    event::CallReturn, event::Load, event::Store, event::GlobalGet, event::TableGet, event::GlobalSet,
    event::TableSet>;

/// Variant order doubles as the binary tag byte.
enum class EventTag : uint8_t
{
    FuncEntry = 0x00,
    FuncReturn = 0x01,
    Call = 0x02,
    CallReturn = 0x03,
    Load = 0x04,
    Store = 0x05,
    GlobalGet = 0x06,
    TableGet = 0x07,
    GlobalSet = 0x08,
    TableSet = 0x09,
};

inline constexpr std::size_t event_tag_count = 10;

inline EventTag tag_of(const TraceEvent& e) noexcept
{
    return static_cast<EventTag>(e.index());
}

const char* event_name(EventTag tag) noexcept;

struct Trace
{
    std::vector<TraceEvent> events;

    friend bool operator==(const Trace&, const Trace&) = default;
};

inline constexpr std::string_view trace_magic = "WRR3";
inline constexpr uint32_t trace_version = 1;

std::vector<uint8_t> encode_binary(const Trace& trace);
void append_binary(std::vector<uint8_t>& out, const TraceEvent& event);
Trace decode_binary(std::span<const uint8_t> bytes);

/// One event in the textual notation, without the trailing newline.
std::string format_event(const TraceEvent& event);
TraceEvent parse_event(std::string_view line, std::size_t line_number = 1);

std::string encode_text(const Trace& trace);
Trace decode_text(std::string_view text);

/// FNV-1a over the binary encoding, rendered as 16 hex digits.
std::string content_hash(const Trace& trace);

}  // namespace wrr
