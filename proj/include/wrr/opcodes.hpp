// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>

namespace wrr::wasm
{
/// Immediate operand layout following an opcode.
enum class Imm : uint8_t
{
    None,
    Block,
    Label,
    LabelTable,
    Func,
    CallIndirect,
    Local,
    Global,
    Table,
    MemArg,
    Memory,      ///< single memory index byte (memory.size/grow/fill)
    I32,
    I64,
    F32,
    F64,
    SelectT,
    RefType,
    Data,        ///< data.drop
    MemoryInit,  ///< data index + memory index
    MemoryCopy,  ///< two memory indices
};

/// Stack signature families. `i`=i32 `I`=i64 `f`=f32 `F`=f64; operands before `_`, result after.
enum class Sig : uint8_t
{
    Special,  ///< typed by hand in the validator/interpreter
    i_i,
    ii_i,
    I_I,
    II_I,
    I_i,
    II_i,
    f_f,
    ff_f,
    ff_i,
    F_F,
    FF_F,
    FF_i,
    i_I,
    f_i,
    F_i,
    f_I,
    F_I,
    i_f,
    I_f,
    F_f,
    i_F,
    I_F,
    f_F,
    load_i,
    load_I,
    load_f,
    load_F,
    store_i,
    store_I,
    store_f,
    store_F,
};

// code, identifier, text name, immediate, signature, memory access width
#define WRR_WASM_OPCODES(X)                                            \
    X(0x00, unreachable, "unreachable", None, Special, 0)              \
    X(0x01, nop, "nop", None, Special, 0)                              \
    X(0x02, block, "block", Block, Special, 0)                         \
    X(0x03, loop, "loop", Block, Special, 0)                           \
    X(0x04, if_, "if", Block, Special, 0)                              \
    X(0x05, else_, "else", None, Special, 0)                           \
    X(0x0b, end, "end", None, Special, 0)                              \
    X(0x0c, br, "br", Label, Special, 0)                               \
    X(0x0d, br_if, "br_if", Label, Special, 0)                         \
    X(0x0e, br_table, "br_table", LabelTable, Special, 0)              \
    X(0x0f, return_, "return", None, Special, 0)                       \
    X(0x10, call, "call", Func, Special, 0)                            \
    X(0x11, call_indirect, "call_indirect", CallIndirect, Special, 0)  \
    X(0x1a, drop, "drop", None, Special, 0)                            \
    X(0x1b, select, "select", None, Special, 0)                        \
    X(0x1c, select_t, "select", SelectT, Special, 0)                   \
    X(0x20, local_get, "local.get", Local, Special, 0)                 \
    X(0x21, local_set, "local.set", Local, Special, 0)                 \
    X(0x22, local_tee, "local.tee", Local, Special, 0)                 \
    X(0x23, global_get, "global.get", Global, Special, 0)              \
    X(0x24, global_set, "global.set", Global, Special, 0)              \
    X(0x25, table_get, "table.get", Table, Special, 0)                 \
    X(0x26, table_set, "table.set", Table, Special, 0)                 \
    X(0x28, i32_load, "i32.load", MemArg, load_i, 4)                   \
    X(0x29, i64_load, "i64.load", MemArg, load_I, 8)                   \
    X(0x2a, f32_load, "f32.load", MemArg, load_f, 4)                   \
    X(0x2b, f64_load, "f64.load", MemArg, load_F, 8)                   \
    X(0x2c, i32_load8_s, "i32.load8_s", MemArg, load_i, 1)             \
    X(0x2d, i32_load8_u, "i32.load8_u", MemArg, load_i, 1)             \
    X(0x2e, i32_load16_s, "i32.load16_s", MemArg, load_i, 2)           \
    X(0x2f, i32_load16_u, "i32.load16_u", MemArg, load_i, 2)           \
    X(0x30, i64_load8_s, "i64.load8_s", MemArg, load_I, 1)             \
    X(0x31, i64_load8_u, "i64.load8_u", MemArg, load_I, 1)             \
    X(0x32, i64_load16_s, "i64.load16_s", MemArg, load_I, 2)           \
    X(0x33, i64_load16_u, "i64.load16_u", MemArg, load_I, 2)           \
    X(0x34, i64_load32_s, "i64.load32_s", MemArg, load_I, 4)           \
    X(0x35, i64_load32_u, "i64.load32_u", MemArg, load_I, 4)           \
    X(0x36, i32_store, "i32.store", MemArg, store_i, 4)                \
    X(0x37, i64_store, "i64.store", MemArg, store_I, 8)                \
    X(0x38, f32_store, "f32.store", MemArg, store_f, 4)                \
    X(0x39, f64_store, "f64.store", MemArg, store_F, 8)                \
    X(0x3a, i32_store8, "i32.store8", MemArg, store_i, 1)              \
    X(0x3b, i32_store16, "i32.store16", MemArg, store_i, 2)            \
    X(0x3c, i64_store8, "i64.store8", MemArg, store_I, 1)              \
    X(0x3d, i64_store16, "i64.store16", MemArg, store_I, 2)            \
    X(0x3e, i64_store32, "i64.store32", MemArg, store_I, 4)            \
    X(0x3f, memory_size, "memory.size", Memory, Special, 0)            \
    X(0x40, memory_grow, "memory.grow", Memory, Special, 0)            \
    X(0x41, i32_const, "i32.const", I32, Special, 0)                   \
    X(0x42, i64_const, "i64.const", I64, Special, 0)                   \
    X(0x43, f32_const, "f32.const", F32, Special, 0)                   \
    X(0x44, f64_const, "f64.const", F64, Special, 0)                   \
    X(0x45, i32_eqz, "i32.eqz", None, i_i, 0)                          \
    X(0x46, i32_eq, "i32.eq", None, ii_i, 0)                           \
    X(0x47, i32_ne, "i32.ne", None, ii_i, 0)                           \
    X(0x48, i32_lt_s, "i32.lt_s", None, ii_i, 0)                       \
    X(0x49, i32_lt_u, "i32.lt_u", None, ii_i, 0)                       \
    X(0x4a, i32_gt_s, "i32.gt_s", None, ii_i, 0)                       \
    X(0x4b, i32_gt_u, "i32.gt_u", None, ii_i, 0)                       \
    X(0x4c, i32_le_s, "i32.le_s", None, ii_i, 0)                       \
    X(0x4d, i32_le_u, "i32.le_u", None, ii_i, 0)                       \
    X(0x4e, i32_ge_s, "i32.ge_s", None, ii_i, 0)                       \
    X(0x4f, i32_ge_u, "i32.ge_u", None, ii_i, 0)                       \
    X(0x50, i64_eqz, "i64.eqz", None, I_i, 0)                          \
    X(0x51, i64_eq, "i64.eq", None, II_i, 0)                           \
    X(0x52, i64_ne, "i64.ne", None, II_i, 0)                           \
    X(0x53, i64_lt_s, "i64.lt_s", None, II_i, 0)                       \
    X(0x54, i64_lt_u, "i64.lt_u", None, II_i, 0)                       \
    X(0x55, i64_gt_s, "i64.gt_s", None, II_i, 0)                       \
    X(0x56, i64_gt_u, "i64.gt_u", None, II_i, 0)                       \
    X(0x57, i64_le_s, "i64.le_s", None, II_i, 0)                       \
    X(0x58, i64_le_u, "i64.le_u", None, II_i, 0)                       \
    X(0x59, i64_ge_s, "i64.ge_s", None, II_i, 0)                       \
    X(0x5a, i64_ge_u, "i64.ge_u", None, II_i, 0)                       \
    X(0x5b, f32_eq, "f32.eq", None, ff_i, 0)                           \
    X(0x5c, f32_ne, "f32.ne", None, ff_i, 0)                           \
    X(0x5d, f32_lt, "f32.lt", None, ff_i, 0)                           \
    X(0x5e, f32_gt, "f32.gt", None, ff_i, 0)                           \
    X(0x5f, f32_le, "f32.le", None, ff_i, 0)                           \
    X(0x60, f32_ge, "f32.ge", None, ff_i, 0)                           \
    X(0x61, f64_eq, "f64.eq", None, FF_i, 0)                           \
    X(0x62, f64_ne, "f64.ne", None, FF_i, 0)                           \
    X(0x63, f64_lt, "f64.lt", None, FF_i, 0)                           \
    X(0x64, f64_gt, "f64.gt", None, FF_i, 0)                           \
    X(0x65, f64_le, "f64.le", None, FF_i, 0)                           \
    X(0x66, f64_ge, "f64.ge", None, FF_i, 0)                           \
    X(0x67, i32_clz, "i32.clz", None, i_i, 0)                          \
    X(0x68, i32_ctz, "i32.ctz", None, i_i, 0)                          \
    X(0x69, i32_popcnt, "i32.popcnt", None, i_i, 0)                    \
    X(0x6a, i32_add, "i32.add", None, ii_i, 0)                         \
    X(0x6b, i32_sub, "i32.sub", None, ii_i, 0)                         \
    X(0x6c, i32_mul, "i32.mul", None, ii_i, 0)                         \
    X(0x6d, i32_div_s, "i32.div_s", None, ii_i, 0)                     \
    X(0x6e, i32_div_u, "i32.div_u", None, ii_i, 0)                     \
    X(0x6f, i32_rem_s, "i32.rem_s", None, ii_i, 0)                     \
    X(0x70, i32_rem_u, "i32.rem_u", None, ii_i, 0)                     \
    X(0x71, i32_and, "i32.and", None, ii_i, 0)                         \
    X(0x72, i32_or, "i32.or", None, ii_i, 0)                           \
    X(0x73, i32_xor, "i32.xor", None, ii_i, 0)                         \
    X(0x74, i32_shl, "i32.shl", None, ii_i, 0)                         \
    X(0x75, i32_shr_s, "i32.shr_s", None, ii_i, 0)                     \
    X(0x76, i32_shr_u, "i32.shr_u", None, ii_i, 0)                     \
    X(0x77, i32_rotl, "i32.rotl", None, ii_i, 0)                       \
    X(0x78, i32_rotr, "i32.rotr", None, ii_i, 0)                       \
    X(0x79, i64_clz, "i64.clz", None, I_I, 0)                          \
    X(0x7a, i64_ctz, "i64.ctz", None, I_I, 0)                          \
    X(0x7b, i64_popcnt, "i64.popcnt", None, I_I, 0)                    \
    X(0x7c, i64_add, "i64.add", None, II_I, 0)                         \
    X(0x7d, i64_sub, "i64.sub", None, II_I, 0)                         \
    X(0x7e, i64_mul, "i64.mul", None, II_I, 0)                         \
    X(0x7f, i64_div_s, "i64.div_s", None, II_I, 0)                     \
    X(0x80, i64_div_u, "i64.div_u", None, II_I, 0)                     \
    X(0x81, i64_rem_s, "i64.rem_s", None, II_I, 0)                     \
    X(0x82, i64_rem_u, "i64.rem_u", None, II_I, 0)                     \
    X(0x83, i64_and, "i64.and", None, II_I, 0)                         \
    X(0x84, i64_or, "i64.or", None, II_I, 0)                           \
    X(0x85, i64_xor, "i64.xor", None, II_I, 0)                         \
    X(0x86, i64_shl, "i64.shl", None, II_I, 0)                         \
    X(0x87, i64_shr_s, "i64.shr_s", None, II_I, 0)                     \
    X(0x88, i64_shr_u, "i64.shr_u", None, II_I, 0)                     \
    X(0x89, i64_rotl, "i64.rotl", None, II_I, 0)                       \
    X(0x8a, i64_rotr, "i64.rotr", None, II_I, 0)                       \
    X(0x8b, f32_abs, "f32.abs", None, f_f, 0)                          \
    X(0x8c, f32_neg, "f32.neg", None, f_f, 0)                          \
    X(0x8d, f32_ceil, "f32.ceil", None, f_f, 0)                        \
    X(0x8e, f32_floor, "f32.floor", None, f_f, 0)                      \
    X(0x8f, f32_trunc, "f32.trunc", None, f_f, 0)                      \
    X(0x90, f32_nearest, "f32.nearest", None, f_f, 0)                  \
    X(0x91, f32_sqrt, "f32.sqrt", None, f_f, 0)                        \
    X(0x92, f32_add, "f32.add", None, ff_f, 0)                         \
    X(0x93, f32_sub, "f32.sub", None, ff_f, 0)                         \
    X(0x94, f32_mul, "f32.mul", None, ff_f, 0)                         \
    X(0x95, f32_div, "f32.div", None, ff_f, 0)                         \
    X(0x96, f32_min, "f32.min", None, ff_f, 0)                         \
    X(0x97, f32_max, "f32.max", None, ff_f, 0)                         \
    X(0x98, f32_copysign, "f32.copysign", None, ff_f, 0)               \
    X(0x99, f64_abs, "f64.abs", None, F_F, 0)                          \
    X(0x9a, f64_neg, "f64.neg", None, F_F, 0)                          \
    X(0x9b, f64_ceil, "f64.ceil", None, F_F, 0)                        \
    X(0x9c, f64_floor, "f64.floor", None, F_F, 0)                      \
    X(0x9d, f64_trunc, "f64.trunc", None, F_F, 0)                      \
    X(0x9e, f64_nearest, "f64.nearest", None, F_F, 0)                  \
    X(0x9f, f64_sqrt, "f64.sqrt", None, F_F, 0)                        \
    X(0xa0, f64_add, "f64.add", None, FF_F, 0)                         \
    X(0xa1, f64_sub, "f64.sub", None, FF_F, 0)                         \
    X(0xa2, f64_mul, "f64.mul", None, FF_F, 0)                         \
    X(0xa3, f64_div, "f64.div", None, FF_F, 0)                         \
    X(0xa4, f64_min, "f64.min", None, FF_F, 0)                         \
    X(0xa5, f64_max, "f64.max", None, FF_F, 0)                         \
    X(0xa6, f64_copysign, "f64.copysign", None, FF_F, 0)               \
    X(0xa7, i32_wrap_i64, "i32.wrap_i64", None, I_i, 0)                \
    X(0xa8, i32_trunc_f32_s, "i32.trunc_f32_s", None, f_i, 0)          \
    X(0xa9, i32_trunc_f32_u, "i32.trunc_f32_u", None, f_i, 0)          \
    X(0xaa, i32_trunc_f64_s, "i32.trunc_f64_s", None, F_i, 0)          \
    X(0xab, i32_trunc_f64_u, "i32.trunc_f64_u", None, F_i, 0)          \
    X(0xac, i64_extend_i32_s, "i64.extend_i32_s", None, i_I, 0)        \
    X(0xad, i64_extend_i32_u, "i64.extend_i32_u", None, i_I, 0)        \
    X(0xae, i64_trunc_f32_s, "i64.trunc_f32_s", None, f_I, 0)          \
    X(0xaf, i64_trunc_f32_u, "i64.trunc_f32_u", None, f_I, 0)          \
    X(0xb0, i64_trunc_f64_s, "i64.trunc_f64_s", None, F_I, 0)          \
    X(0xb1, i64_trunc_f64_u, "i64.trunc_f64_u", None, F_I, 0)          \
    X(0xb2, f32_convert_i32_s, "f32.convert_i32_s", None, i_f, 0)      \
    X(0xb3, f32_convert_i32_u, "f32.convert_i32_u", None, i_f, 0)      \
    X(0xb4, f32_convert_i64_s, "f32.convert_i64_s", None, I_f, 0)      \
    X(0xb5, f32_convert_i64_u, "f32.convert_i64_u", None, I_f, 0)      \
    X(0xb6, f32_demote_f64, "f32.demote_f64", None, F_f, 0)            \
    X(0xb7, f64_convert_i32_s, "f64.convert_i32_s", None, i_F, 0)      \
    X(0xb8, f64_convert_i32_u, "f64.convert_i32_u", None, i_F, 0)      \
    X(0xb9, f64_convert_i64_s, "f64.convert_i64_s", None, I_F, 0)      \
    X(0xba, f64_convert_i64_u, "f64.convert_i64_u", None, I_F, 0)      \
    X(0xbb, f64_promote_f32, "f64.promote_f32", None, f_F, 0)          \
    X(0xbc, i32_reinterpret_f32, "i32.reinterpret_f32", None, f_i, 0)  \
    X(0xbd, i64_reinterpret_f64, "i64.reinterpret_f64", None, F_I, 0)  \
    X(0xbe, f32_reinterpret_i32, "f32.reinterpret_i32", None, i_f, 0)  \
    X(0xbf, f64_reinterpret_i64, "f64.reinterpret_i64", None, I_F, 0)  \
    X(0xc0, i32_extend8_s, "i32.extend8_s", None, i_i, 0)              \
    X(0xc1, i32_extend16_s, "i32.extend16_s", None, i_i, 0)            \
    X(0xc2, i64_extend8_s, "i64.extend8_s", None, I_I, 0)              \
    X(0xc3, i64_extend16_s, "i64.extend16_s", None, I_I, 0)            \
    X(0xc4, i64_extend32_s, "i64.extend32_s", None, I_I, 0)            \
    X(0xd0, ref_null, "ref.null", RefType, Special, 0)                 \
    X(0xd1, ref_is_null, "ref.is_null", None, Special, 0)              \
    X(0xd2, ref_func, "ref.func", Func, Special, 0)                    \
    X(0xfc00, i32_trunc_sat_f32_s, "i32.trunc_sat_f32_s", None, f_i, 0) \
    X(0xfc01, i32_trunc_sat_f32_u, "i32.trunc_sat_f32_u", None, f_i, 0) \
    X(0xfc02, i32_trunc_sat_f64_s, "i32.trunc_sat_f64_s", None, F_i, 0) \
    X(0xfc03, i32_trunc_sat_f64_u, "i32.trunc_sat_f64_u", None, F_i, 0) \
    X(0xfc04, i64_trunc_sat_f32_s, "i64.trunc_sat_f32_s", None, f_I, 0) \
    X(0xfc05, i64_trunc_sat_f32_u, "i64.trunc_sat_f32_u", None, f_I, 0) \
    X(0xfc06, i64_trunc_sat_f64_s, "i64.trunc_sat_f64_s", None, F_I, 0) \
    X(0xfc07, i64_trunc_sat_f64_u, "i64.trunc_sat_f64_u", None, F_I, 0) \
    X(0xfc08, memory_init, "memory.init", MemoryInit, Special, 0)      \
    X(0xfc09, data_drop, "data.drop", Data, Special, 0)                \
    X(0xfc0a, memory_copy, "memory.copy", MemoryCopy, Special, 0)      \
    X(0xfc0b, memory_fill, "memory.fill", Memory, Special, 0)

enum class Opcode : uint16_t
{
#define WRR_X(code, ident, text, imm, sig, width) ident = code,
    WRR_WASM_OPCODES(WRR_X)
#undef WRR_X
};

struct OpInfo
{
    Opcode op;
    const char* name;
    Imm imm;
    Sig sig;
    uint8_t access_width;  ///< bytes touched by a load/store, 0 otherwise
};

/// Info for a known opcode; empty for codes outside the supported subset.
std::optional<OpInfo> op_info(uint16_t code) noexcept;
const OpInfo& info(Opcode op) noexcept;

constexpr bool is_prefixed(Opcode op) noexcept
{
    return static_cast<uint16_t>(op) > 0xff;
}

constexpr bool is_load(Opcode op) noexcept
{
    const auto c = static_cast<uint16_t>(op);
    return c >= 0x28 && c <= 0x35;
}

constexpr bool is_store(Opcode op) noexcept
{
    const auto c = static_cast<uint16_t>(op);
    return c >= 0x36 && c <= 0x3e;
}

/// log2 of the natural alignment of a memory access.
uint32_t natural_alignment(Opcode op) noexcept;

}  // namespace wrr::wasm
