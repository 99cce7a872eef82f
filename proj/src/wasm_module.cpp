// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "wrr/error.hpp"
#include "wrr/wasm.hpp"

#include <algorithm>

namespace wrr
{
const char* to_string(TrapKind kind) noexcept
{
    switch (kind)
    {
    case TrapKind::Unreachable:
        return "unreachable";
    case TrapKind::IntegerDivByZero:
        return "integer divide by zero";
    case TrapKind::IntegerOverflow:
        return "integer overflow";
    case TrapKind::InvalidConversion:
        return "invalid conversion to integer";
    case TrapKind::OutOfBoundsMemory:
        return "out of bounds memory access";
    case TrapKind::OutOfBoundsTable:
        return "out of bounds table access";
    case TrapKind::UninitializedElement:
        return "uninitialized element";
    case TrapKind::IndirectCallTypeMismatch:
        return "indirect call type mismatch";
    case TrapKind::CallStackExhausted:
        return "call stack exhausted";
    case TrapKind::DroppedSegment:
        return "out of bounds data segment access";
    }
    return "?";
}
}  // namespace wrr

namespace wrr::wasm
{
const char* to_string(ValType t) noexcept
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
        return "funcref";
    }
    return "?";
}

std::optional<ValType> decode_valtype(uint8_t byte) noexcept
{
    switch (byte)
    {
    case 0x7f:
    case 0x7e:
    case 0x7d:
    case 0x7c:
    case 0x70:
        return static_cast<ValType>(byte);
    default:
        return std::nullopt;
    }
}

namespace
{
template <ExternKind K>
uint32_t count_imports(const std::vector<Import>& imports) noexcept
{
    return static_cast<uint32_t>(std::count_if(
        imports.begin(), imports.end(), [](const Import& i) { return i.kind() == K; }));
}

template <ExternKind K>
const Import* nth_import(const std::vector<Import>& imports, uint32_t n) noexcept
{
    for (const auto& i : imports)
    {
        if (i.kind() != K)
            continue;
        if (n == 0)
            return &i;
        --n;
    }
    return nullptr;
}
}  // namespace

uint32_t Module::imported_function_count() const noexcept
{
    return count_imports<ExternKind::Func>(imports);
}
uint32_t Module::imported_global_count() const noexcept
{
    return count_imports<ExternKind::Global>(imports);
}
uint32_t Module::imported_table_count() const noexcept
{
    return count_imports<ExternKind::Table>(imports);
}
uint32_t Module::imported_memory_count() const noexcept
{
    return count_imports<ExternKind::Memory>(imports);
}
uint32_t Module::function_count() const noexcept
{
    return imported_function_count() + static_cast<uint32_t>(functions.size());
}
uint32_t Module::global_count() const noexcept
{
    return imported_global_count() + static_cast<uint32_t>(globals.size());
}
uint32_t Module::table_count() const noexcept
{
    return imported_table_count() + static_cast<uint32_t>(tables.size());
}
uint32_t Module::memory_count() const noexcept
{
    return imported_memory_count() + static_cast<uint32_t>(memories.size());
}

uint32_t Module::function_type_index(uint32_t func_index) const
{
    if (const auto* imp = nth_import<ExternKind::Func>(imports, func_index))
        return std::get<uint32_t>(imp->desc);
    const auto local = func_index - imported_function_count();
    if (local >= functions.size())
        throw Error{ErrorClass::Internal, "function index out of range: " + std::to_string(func_index)};
    return functions[local].type_index;
}

const FuncType& Module::function_type(uint32_t func_index) const
{
    const auto t = function_type_index(func_index);
    if (t >= types.size())
        throw Error{ErrorClass::Internal, "type index out of range: " + std::to_string(t)};
    return types[t];
}

GlobalType Module::global_type(uint32_t global_index) const
{
    if (const auto* imp = nth_import<ExternKind::Global>(imports, global_index))
        return std::get<GlobalType>(imp->desc);
    const auto local = global_index - imported_global_count();
    if (local >= globals.size())
        throw Error{ErrorClass::Internal, "global index out of range: " + std::to_string(global_index)};
    return globals[local].type;
}

TableType Module::table_type(uint32_t table_index) const
{
    if (const auto* imp = nth_import<ExternKind::Table>(imports, table_index))
        return std::get<TableType>(imp->desc);
    const auto local = table_index - imported_table_count();
    if (local >= tables.size())
        throw Error{ErrorClass::Internal, "table index out of range: " + std::to_string(table_index)};
    return tables[local];
}

MemoryType Module::memory_type(uint32_t memory_index) const
{
    if (const auto* imp = nth_import<ExternKind::Memory>(imports, memory_index))
        return std::get<MemoryType>(imp->desc);
    const auto local = memory_index - imported_memory_count();
    if (local >= memories.size())
        throw Error{ErrorClass::Internal, "memory index out of range: " + std::to_string(memory_index)};
    return memories[local];
}

const Import* Module::function_import(uint32_t func_index) const noexcept
{
    return nth_import<ExternKind::Func>(imports, func_index);
}

const Export* Module::find_export(ExternKind kind, uint32_t index) const noexcept
{
    for (const auto& e : exports)
        if (e.kind == kind && e.index == index)
            return &e;
    return nullptr;
}

const Export* Module::find_export(std::string_view name) const noexcept
{
    for (const auto& e : exports)
        if (e.name == name)
            return &e;
    return nullptr;
}

const CustomSection* Module::find_custom(std::string_view name) const noexcept
{
    for (const auto& c : customs)
        if (c.name == name)
            return &c;
    return nullptr;
}

uint32_t Module::intern_type(const FuncType& type)
{
    const auto it = std::find(types.begin(), types.end(), type);
    if (it != types.end())
        return static_cast<uint32_t>(it - types.begin());
    types.push_back(type);
    return static_cast<uint32_t>(types.size() - 1);
}

Instruction make(Opcode op)
{
    Instruction i;
    i.op = op;
    return i;
}

Instruction make_index(Opcode op, uint32_t index)
{
    auto i = make(op);
    i.index = index;
    return i;
}

Instruction make_i32(uint32_t v)
{
    auto i = make(Opcode::i32_const);
    i.value = v;
    return i;
}

Instruction make_i64(uint64_t v)
{
    auto i = make(Opcode::i64_const);
    i.value = v;
    return i;
}

Instruction make_f32_bits(uint32_t bits)
{
    auto i = make(Opcode::f32_const);
    i.value = bits;
    return i;
}

Instruction make_f64_bits(uint64_t bits)
{
    auto i = make(Opcode::f64_const);
    i.value = bits;
    return i;
}

Instruction make_mem(Opcode op, uint32_t offset, uint32_t memory)
{
    auto i = make(op);
    i.mem.offset = offset;
    i.mem.memory = memory;
    i.mem.align = natural_alignment(op);
    return i;
}

Instruction make_block(Opcode op, BlockType type)
{
    auto i = make(op);
    i.block = type;
    return i;
}

uint64_t eval_const_expr(const ConstExpr& e, std::span<const uint64_t> globals)
{
    switch (e.op)
    {
    case Opcode::i32_const:
    case Opcode::f32_const:
        return e.value & 0xffffffffu;
    case Opcode::i64_const:
    case Opcode::f64_const:
        return e.value;
    case Opcode::global_get:
        if (e.index >= globals.size())
            throw Error{ErrorClass::Internal, "constant expression reads unknown global"};
        return globals[e.index];
    case Opcode::ref_null:
        return null_ref;
    case Opcode::ref_func:
        return e.index;
    default:
        throw Error{ErrorClass::Internal, std::string{"not a constant instruction: "} + info(e.op).name};
    }
}

}  // namespace wrr::wasm
