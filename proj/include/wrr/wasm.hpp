// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "wrr/opcodes.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace wrr::wasm
{
enum class ValType : uint8_t
{
    I32 = 0x7f,
    I64 = 0x7e,
    F32 = 0x7d,
    F64 = 0x7c,
    FuncRef = 0x70,
};

const char* to_string(ValType t) noexcept;

struct FuncType
{
    std::vector<ValType> params;
    std::vector<ValType> results;

    friend bool operator==(const FuncType&, const FuncType&) = default;
};

struct Limits
{
    uint32_t min = 0;
    std::optional<uint32_t> max;

    friend bool operator==(const Limits&, const Limits&) = default;
};

struct TableType
{
    ValType elem = ValType::FuncRef;
    Limits limits;

    friend bool operator==(const TableType&, const TableType&) = default;
};

struct MemoryType
{
    Limits limits;

    friend bool operator==(const MemoryType&, const MemoryType&) = default;
};

struct GlobalType
{
    ValType type = ValType::I32;
    bool is_mutable = false;

    friend bool operator==(const GlobalType&, const GlobalType&) = default;
};

enum class ExternKind : uint8_t
{
    Func = 0,
    Table = 1,
    Memory = 2,
    Global = 3,
};

struct Import
{
    std::string module;
    std::string name;
    /// Function imports carry a type index.
    std::variant<uint32_t, TableType, MemoryType, GlobalType> desc;

    ExternKind kind() const noexcept { return static_cast<ExternKind>(desc.index()); }
    friend bool operator==(const Import&, const Import&) = default;
};

struct Export
{
    std::string name;
    ExternKind kind = ExternKind::Func;
    uint32_t index = 0;

    friend bool operator==(const Export&, const Export&) = default;
};

struct BlockType
{
    enum Kind : uint8_t
    {
        Empty,
        Value,
        TypeIndex,
    };
    Kind kind = Empty;
    ValType type = ValType::I32;
    uint32_t index = 0;

    friend bool operator==(const BlockType&, const BlockType&) = default;
};

struct MemArg
{
    uint32_t align = 0;  ///< log2
    uint32_t offset = 0;
    uint32_t memory = 0;

    friend bool operator==(const MemArg&, const MemArg&) = default;
};

struct Instruction
{
    Opcode op = Opcode::nop;
    /// local/global/func/label/type/table/data index, or the br_table default label
    uint32_t index = 0;
    /// call_indirect table, memory index of memory.init/size/grow/fill, source memory of copy
    uint32_t index2 = 0;
    /// constant payload bits (floats as raw IEEE-754); ref.null heap type
    uint64_t value = 0;
    MemArg mem{};
    BlockType block{};
    /// br_table targets, or the operand types of a typed select (as ValType bytes)
    std::vector<uint32_t> labels;

    friend bool operator==(const Instruction&, const Instruction&) = default;
};

struct Local
{
    uint32_t count = 0;
    ValType type = ValType::I32;

    friend bool operator==(const Local&, const Local&) = default;
};

struct Function
{
    uint32_t type_index = 0;
    std::vector<Local> locals;
    /// Body including the final `end`.
    std::vector<Instruction> body;

    friend bool operator==(const Function&, const Function&) = default;
};

/// Constant expressions are limited to a single instruction (MVP + ref.func/ref.null).
using ConstExpr = Instruction;

struct Global
{
    GlobalType type;
    ConstExpr init;

    friend bool operator==(const Global&, const Global&) = default;
};

enum class SegmentMode : uint8_t
{
    Active,
    Passive,
    Declarative,
};

struct ElemSegment
{
    SegmentMode mode = SegmentMode::Active;
    uint32_t table = 0;
    ConstExpr offset;
    /// Function indices; empty optional is a null reference.
    std::vector<std::optional<uint32_t>> items;
    /// Whether items were written as expressions (flags 4..7) rather than bare indices.
    bool uses_exprs = false;
    /// Whether the table index / elemkind were written explicitly (flag 2 or 6).
    bool explicit_table = false;

    friend bool operator==(const ElemSegment&, const ElemSegment&) = default;
};

struct DataSegment
{
    SegmentMode mode = SegmentMode::Active;
    uint32_t memory = 0;
    ConstExpr offset;
    std::vector<uint8_t> bytes;

    friend bool operator==(const DataSegment&, const DataSegment&) = default;
};

struct CustomSection
{
    std::string name;
    std::vector<uint8_t> payload;

    friend bool operator==(const CustomSection&, const CustomSection&) = default;
};

struct Module
{
    std::vector<FuncType> types;
    std::vector<Import> imports;
    std::vector<Function> functions;
    std::vector<TableType> tables;
    std::vector<MemoryType> memories;
    std::vector<Global> globals;
    std::vector<Export> exports;
    std::optional<uint32_t> start;
    std::vector<ElemSegment> elems;
    std::optional<uint32_t> data_count;
    std::vector<DataSegment> datas;
    std::vector<CustomSection> customs;

    friend bool operator==(const Module&, const Module&) = default;

    uint32_t imported_function_count() const noexcept;
    uint32_t imported_global_count() const noexcept;
    uint32_t imported_table_count() const noexcept;
    uint32_t imported_memory_count() const noexcept;
    uint32_t function_count() const noexcept;
    uint32_t global_count() const noexcept;
    uint32_t table_count() const noexcept;
    uint32_t memory_count() const noexcept;

    /// Type of any function in the index space (imports first).
    const FuncType& function_type(uint32_t func_index) const;
    uint32_t function_type_index(uint32_t func_index) const;
    GlobalType global_type(uint32_t global_index) const;
    TableType table_type(uint32_t table_index) const;
    MemoryType memory_type(uint32_t memory_index) const;

    /// Import entry for an imported function, or nullptr.
    const Import* function_import(uint32_t func_index) const noexcept;
    /// The first export of the given kind and index, or nullptr.
    const Export* find_export(ExternKind kind, uint32_t index) const noexcept;
    const Export* find_export(std::string_view name) const noexcept;
    const CustomSection* find_custom(std::string_view name) const noexcept;

    /// Index of an equal type, appending it when absent.
    uint32_t intern_type(const FuncType& type);
};

inline constexpr std::size_t default_body_size_limit = 7'654'321;

std::optional<ValType> decode_valtype(uint8_t byte) noexcept;

Module parse_module(std::span<const uint8_t> bytes);

struct EncodeOptions
{
    std::size_t body_size_limit = default_body_size_limit;
};

std::vector<uint8_t> encode_module(const Module& m, const EncodeOptions& options = {});

/// Encoded size of one function body (locals and code, without the size prefix).
std::vector<uint8_t> encode_function_body(const Function& f);

/// Instruction sequence encoding without the trailing `end` handling; used for size estimates.
void encode_instruction(std::vector<uint8_t>& out, const Instruction& instr);

struct Diagnostic
{
    std::optional<uint32_t> func_index;
    std::string message;
};

struct ValidateOptions
{
    std::size_t body_size_limit = default_body_size_limit;
};

std::vector<Diagnostic> validate_module(const Module& m, const ValidateOptions& options = {});

/// Replaces every function import with the given definition. Defined functions keep their
/// indices because the replacements take the import slots at the front of the defined list.
Module splice_import_functions(const Module& m, const std::map<uint32_t, Function>& defs);

// LEB128 helpers shared by the encoders.
void write_u32_leb(std::vector<uint8_t>& out, uint32_t v);
void write_s32_leb(std::vector<uint8_t>& out, int32_t v);
void write_s64_leb(std::vector<uint8_t>& out, int64_t v);

// Instruction construction helpers.
Instruction make(Opcode op);
Instruction make_index(Opcode op, uint32_t index);
Instruction make_i32(uint32_t v);
Instruction make_i64(uint64_t v);
Instruction make_f32_bits(uint32_t bits);
Instruction make_f64_bits(uint64_t bits);
Instruction make_mem(Opcode op, uint32_t offset = 0, uint32_t memory = 0);
Instruction make_block(Opcode op, BlockType type);

/// Evaluates a constant expression given already-initialized globals (raw bits).
uint64_t eval_const_expr(const ConstExpr& e, std::span<const uint64_t> globals);

inline constexpr uint64_t null_ref = ~uint64_t{0};

}  // namespace wrr::wasm
