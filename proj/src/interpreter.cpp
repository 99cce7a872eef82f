// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "wrr/interpreter.hpp"
#include "wrr/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

namespace wrr::interp
{
using wasm::Opcode;
using wasm::ValType;

namespace
{
constexpr uint32_t max_pages = 65536;

inline float as_f32(uint64_t v) noexcept
{
    return std::bit_cast<float>(static_cast<uint32_t>(v));
}
inline double as_f64(uint64_t v) noexcept
{
    return std::bit_cast<double>(v);
}
inline uint64_t from_f32(float f) noexcept
{
    return std::bit_cast<uint32_t>(f);
}
inline uint64_t from_f64(double d) noexcept
{
    return std::bit_cast<uint64_t>(d);
}

template <typename T>
T fmin_wasm(T a, T b) noexcept
{
    if (std::isnan(a) || std::isnan(b))
        return std::numeric_limits<T>::quiet_NaN();
    if (a == 0 && b == 0)
        return std::signbit(a) ? a : b;
    return a < b ? a : b;
}

template <typename T>
T fmax_wasm(T a, T b) noexcept
{
    if (std::isnan(a) || std::isnan(b))
        return std::numeric_limits<T>::quiet_NaN();
    if (a == 0 && b == 0)
        return std::signbit(a) ? b : a;
    return a > b ? a : b;
}

// Range of source values that truncate into the destination type, both bounds exclusive.
template <typename Int, typename Float>
std::pair<Float, Float> trunc_bounds() noexcept
{
    const Float hi = std::ldexp(Float(1), std::numeric_limits<Int>::digits);
    if constexpr (std::is_signed_v<Int>)
    {
        const Float min = -hi;
        Float lo = min - Float(1);
        if (lo == min)
            lo = std::nextafter(min, -std::numeric_limits<Float>::infinity());
        return {lo, hi};
    }
    else
    {
        return {Float(-1), hi};
    }
}

/// Returns false on NaN, and sets `overflow` when the truncated value is out of range.
template <typename Int, typename Float>
bool trunc_checked(Float f, Int& out, bool& overflow) noexcept
{
    overflow = false;
    if (std::isnan(f))
        return false;
    const auto [lo, hi] = trunc_bounds<Int, Float>();
    if (!(f > lo && f < hi))
    {
        overflow = true;
        return false;
    }
    out = static_cast<Int>(f);
    return true;
}

template <typename Int, typename Float>
Int trunc_sat(Float f) noexcept
{
    if (std::isnan(f))
        return 0;
    const auto [lo, hi] = trunc_bounds<Int, Float>();
    if (!(f > lo))
        return std::numeric_limits<Int>::min();
    if (!(f < hi))
        return std::numeric_limits<Int>::max();
    return static_cast<Int>(f);
}
}  // namespace

Instance::Instance(wasm::Module module, std::vector<HostFunction> imports, Hooks hooks, Options options)
  : m_module{std::move(module)},
    m_imports{std::move(imports)},
    m_hooks{std::move(hooks)},
    m_options{options}
{
    m_import_count = m_module.imported_function_count();
    if (m_imports.size() != m_import_count)
        throw Error{ErrorClass::Internal, "host function count does not match function imports"};
    for (const auto& imp : m_module.imports)
        if (imp.kind() != wasm::ExternKind::Func)
            throw UnsupportedFeature{"imported " +
                std::string{imp.kind() == wasm::ExternKind::Memory ? "memory"
                        : imp.kind() == wasm::ExternKind::Table  ? "table"
                                                                 : "global"} +
                " '" + imp.module + "." + imp.name + "'"};

    for (const auto& mem : m_module.memories)
    {
        m_memories.emplace_back(std::size_t{mem.limits.min} * page_size, uint8_t{0});
        m_memory_max.push_back(mem.limits.max);
    }
    for (const auto& t : m_module.tables)
        m_tables.emplace_back(t.limits.min, wasm::null_ref);
    for (const auto& g : m_module.globals)
        m_globals.push_back(wasm::eval_const_expr(g.init, m_globals));

    m_meta.resize(m_module.functions.size());
    for (uint32_t i = 0; i < m_module.functions.size(); ++i)
        prepare(i);

    m_elem_dropped.assign(m_module.elems.size(), false);
    for (std::size_t i = 0; i < m_module.elems.size(); ++i)
    {
        const auto& e = m_module.elems[i];
        if (e.mode == wasm::SegmentMode::Active)
        {
            const auto offset = static_cast<uint32_t>(wasm::eval_const_expr(e.offset, m_globals));
            auto& table = m_tables.at(e.table);
            if (uint64_t{offset} + e.items.size() > table.size())
                throw Trap{TrapKind::OutOfBoundsTable, 0, 0};
            for (std::size_t j = 0; j < e.items.size(); ++j)
                table[offset + j] = e.items[j] ? uint64_t{*e.items[j]} : wasm::null_ref;
        }
        if (e.mode != wasm::SegmentMode::Passive)
            m_elem_dropped[i] = true;
    }
    m_data_dropped.assign(m_module.datas.size(), false);
    for (std::size_t i = 0; i < m_module.datas.size(); ++i)
    {
        const auto& d = m_module.datas[i];
        if (d.mode != wasm::SegmentMode::Active)
            continue;
        const auto offset = static_cast<uint32_t>(wasm::eval_const_expr(d.offset, m_globals));
        auto& mem = m_memories.at(d.memory);
        if (uint64_t{offset} + d.bytes.size() > mem.size())
            throw Trap{TrapKind::OutOfBoundsMemory, 0, 0};
        std::copy(d.bytes.begin(), d.bytes.end(), mem.begin() + offset);
        m_data_dropped[i] = true;
    }
    m_stack.reserve(4096);
}

void Instance::prepare(uint32_t defined_index)
{
    const auto& f = m_module.functions[defined_index];
    auto& meta = m_meta[defined_index];
    const auto& type = m_module.types.at(f.type_index);
    meta.param_count = static_cast<uint32_t>(type.params.size());
    meta.result_count = static_cast<uint32_t>(type.results.size());
    meta.local_types = type.params;
    for (const auto& l : f.locals)
        meta.local_types.insert(meta.local_types.end(), l.count, l.type);

    meta.end.assign(f.body.size(), 0);
    meta.alt.assign(f.body.size(), 0);
    std::vector<uint32_t> open;
    for (uint32_t pc = 0; pc < f.body.size(); ++pc)
    {
        switch (f.body[pc].op)
        {
        case Opcode::block:
        case Opcode::loop:
        case Opcode::if_:
            open.push_back(pc);
            break;
        case Opcode::else_:
            if (!open.empty())
                meta.alt[open.back()] = pc;
            break;
        case Opcode::end:
            if (!open.empty())
            {
                const auto start = open.back();
                open.pop_back();
                meta.end[start] = pc;
                if (f.body[start].op == Opcode::if_ && meta.alt[start] == 0)
                    meta.alt[start] = pc;
                else if (f.body[start].op == Opcode::if_)
                    meta.end[meta.alt[start]] = pc;
            }
            break;
        default:
            break;
        }
    }
}

void Instance::run_start()
{
    if (m_module.start)
        invoke(*m_module.start, {});
}

std::vector<uint64_t> Instance::invoke(uint32_t func_index, std::span<const uint64_t> args)
{
    const auto& type = m_module.function_type(func_index);
    if (args.size() != type.params.size())
        throw SignatureMismatch{"function " + std::to_string(func_index) + " expects " +
                                std::to_string(type.params.size()) + " arguments, got " +
                                std::to_string(args.size())};
    const auto base = m_stack.size();
    m_stack.insert(m_stack.end(), args.begin(), args.end());
    try
    {
        call(func_index);
    }
    catch (...)
    {
        m_stack.resize(base);
        throw;
    }
    std::vector<uint64_t> results(m_stack.begin() + static_cast<std::ptrdiff_t>(base), m_stack.end());
    m_stack.resize(base);
    return results;
}

std::vector<uint64_t> Instance::invoke_export(std::string_view name, std::span<const uint64_t> args)
{
    const auto* e = m_module.find_export(name);
    if (e == nullptr || e->kind != wasm::ExternKind::Func)
        throw SignatureMismatch{"no exported function named '" + std::string{name} + "'"};
    return invoke(e->index, args);
}

void Instance::call(uint32_t func_index)
{
    if (m_depth >= m_options.max_call_depth)
        throw Trap{TrapKind::CallStackExhausted, func_index, 0};
    ++m_depth;
    struct DepthGuard
    {
        std::size_t& depth;
        ~DepthGuard() { --depth; }
    } guard{m_depth};
    if (func_index < m_import_count)
        call_host(func_index);
    else
        execute(func_index);
}

void Instance::call_host(uint32_t func_index)
{
    const auto& type = m_module.function_type(func_index);
    const auto n = type.params.size();
    // Copy out: a re-entrant host may grow the shared operand stack.
    std::vector<uint64_t> args(m_stack.end() - static_cast<std::ptrdiff_t>(n), m_stack.end());
    m_stack.resize(m_stack.size() - n);
    std::vector<uint64_t> results(type.results.size(), 0);
    m_imports[func_index](args, results);
    for (std::size_t i = 0; i < results.size(); ++i)
    {
        switch (type.results[i])
        {
        case ValType::I32:
        case ValType::F32:
            results[i] &= 0xffffffffu;
            break;
        default:
            break;
        }
    }
    m_stack.insert(m_stack.end(), results.begin(), results.end());
}

void Instance::execute(uint32_t func_index)
{
    const auto defined = func_index - m_import_count;
    const auto& func = m_module.functions[defined];
    const auto& meta = m_meta[defined];
    const auto& code = func.body;

    std::vector<uint64_t> locals(meta.local_types.size(), 0);
    std::copy(m_stack.end() - meta.param_count, m_stack.end(), locals.begin());
    m_stack.resize(m_stack.size() - meta.param_count);

    struct Label
    {
        uint32_t continuation;
        uint32_t arity;
        std::size_t height;
        bool is_loop;
    };
    std::vector<Label> labels;
    labels.push_back({static_cast<uint32_t>(code.size()), meta.result_count, m_stack.size(), false});

    auto& stack = m_stack;
    uint32_t pc = 0;

    auto trap = [&](TrapKind kind) -> Trap { return Trap{kind, func_index, pc}; };
    auto pop = [&]() {
        const auto v = stack.back();
        stack.pop_back();
        return v;
    };
    auto push = [&](uint64_t v) { stack.push_back(v); };
    auto push_i32 = [&](uint32_t v) { stack.push_back(v); };
    auto top = [&]() -> uint64_t& { return stack.back(); };

    auto block_arity = [&](const wasm::BlockType& bt, uint32_t& params, uint32_t& results) {
        switch (bt.kind)
        {
        case wasm::BlockType::Empty:
            params = results = 0;
            break;
        case wasm::BlockType::Value:
            params = 0;
            results = 1;
            break;
        case wasm::BlockType::TypeIndex:
            params = static_cast<uint32_t>(m_module.types[bt.index].params.size());
            results = static_cast<uint32_t>(m_module.types[bt.index].results.size());
            break;
        }
    };

    auto branch = [&](uint32_t depth) {
        const auto target = labels[labels.size() - 1 - depth];
        const auto first = stack.size() - target.arity;
        std::copy(stack.begin() + static_cast<std::ptrdiff_t>(first), stack.end(),
            stack.begin() + static_cast<std::ptrdiff_t>(target.height));
        stack.resize(target.height + target.arity);
        labels.resize(labels.size() - depth - (target.is_loop ? 0 : 1));
        pc = target.continuation;
    };

    auto effective = [&](const wasm::Instruction& in, uint64_t width) -> uint8_t* {
        auto& mem = m_memories[in.mem.memory];
        const auto addr = static_cast<uint32_t>(pop());
        const auto ea = uint64_t{addr} + in.mem.offset;
        if (ea + width > mem.size())
            throw trap(TrapKind::OutOfBoundsMemory);
        return mem.data() + ea;
    };

    auto load = [&]<typename T>(const wasm::Instruction& in) -> T {
        T v;
        std::memcpy(&v, effective(in, sizeof(T)), sizeof(T));
        return v;
    };

    auto store = [&]<typename T>(const wasm::Instruction& in, T v) {
        std::memcpy(effective(in, sizeof(T)), &v, sizeof(T));
    };

    while (pc < code.size())
    {
        const auto& in = code[pc];
        switch (in.op)
        {
        case Opcode::unreachable:
            throw trap(TrapKind::Unreachable);
        case Opcode::nop:
            break;
        case Opcode::block:
        {
            uint32_t params, results;
            block_arity(in.block, params, results);
            labels.push_back({meta.end[pc] + 1, results, stack.size() - params, false});
            break;
        }
        case Opcode::loop:
        {
            uint32_t params, results;
            block_arity(in.block, params, results);
            labels.push_back({pc + 1, params, stack.size() - params, true});
            break;
        }
        case Opcode::if_:
        {
            uint32_t params, results;
            block_arity(in.block, params, results);
            const auto cond = static_cast<uint32_t>(pop());
            const auto end = meta.end[pc];
            const auto alt = meta.alt[pc];
            if (cond != 0)
            {
                labels.push_back({end + 1, results, stack.size() - params, false});
            }
            else if (alt != end)
            {
                labels.push_back({end + 1, results, stack.size() - params, false});
                pc = alt;
            }
            else
            {
                pc = end;
            }
            break;
        }
        case Opcode::else_:
            // Reached by falling out of the then-branch.
            labels.pop_back();
            pc = meta.end[pc];
            break;
        case Opcode::end:
            labels.pop_back();
            break;
        case Opcode::br:
            branch(in.index);
            continue;
        case Opcode::br_if:
            if (static_cast<uint32_t>(pop()) != 0)
            {
                branch(in.index);
                continue;
            }
            break;
        case Opcode::br_table:
        {
            const auto i = static_cast<uint32_t>(pop());
            branch(i < in.labels.size() ? in.labels[i] : in.index);
            continue;
        }
        case Opcode::return_:
            branch(static_cast<uint32_t>(labels.size() - 1));
            continue;
        case Opcode::call:
            call(in.index);
            break;
        case Opcode::call_indirect:
        {
            const auto& table = m_tables[in.index2];
            const auto i = static_cast<uint32_t>(pop());
            if (i >= table.size())
                throw trap(TrapKind::OutOfBoundsTable);
            const auto ref = table[i];
            if (ref == wasm::null_ref)
                throw trap(TrapKind::UninitializedElement);
            const auto callee = static_cast<uint32_t>(ref);
            if (m_module.function_type(callee) != m_module.types[in.index])
                throw trap(TrapKind::IndirectCallTypeMismatch);
            call(callee);
            break;
        }
        case Opcode::drop:
            stack.pop_back();
            break;
        case Opcode::select:
        case Opcode::select_t:
        {
            const auto c = static_cast<uint32_t>(pop());
            const auto b = pop();
            if (c == 0)
                top() = b;
            break;
        }
        case Opcode::local_get:
            push(locals[in.index]);
            break;
        case Opcode::local_set:
            locals[in.index] = pop();
            break;
        case Opcode::local_tee:
            locals[in.index] = top();
            break;
        case Opcode::global_get:
            push(m_globals[in.index]);
            break;
        case Opcode::global_set:
            m_globals[in.index] = pop();
            break;
        case Opcode::table_get:
        {
            const auto& table = m_tables[in.index];
            const auto i = static_cast<uint32_t>(top());
            if (i >= table.size())
                throw trap(TrapKind::OutOfBoundsTable);
            top() = table[i];
            break;
        }
        case Opcode::table_set:
        {
            auto& table = m_tables[in.index];
            const auto ref = pop();
            const auto i = static_cast<uint32_t>(pop());
            if (i >= table.size())
                throw trap(TrapKind::OutOfBoundsTable);
            table[i] = ref;
            break;
        }

        case Opcode::i32_load:
            push_i32(load.operator()<uint32_t>(in));
            break;
        case Opcode::i64_load:
            push(load.operator()<uint64_t>(in));
            break;
        case Opcode::f32_load:
            push_i32(load.operator()<uint32_t>(in));
            break;
        case Opcode::f64_load:
            push(load.operator()<uint64_t>(in));
            break;
        case Opcode::i32_load8_s:
            push_i32(static_cast<uint32_t>(int32_t{load.operator()<int8_t>(in)}));
            break;
        case Opcode::i32_load8_u:
            push_i32(load.operator()<uint8_t>(in));
            break;
        case Opcode::i32_load16_s:
            push_i32(static_cast<uint32_t>(int32_t{load.operator()<int16_t>(in)}));
            break;
        case Opcode::i32_load16_u:
            push_i32(load.operator()<uint16_t>(in));
            break;
        case Opcode::i64_load8_s:
            push(static_cast<uint64_t>(int64_t{load.operator()<int8_t>(in)}));
            break;
        case Opcode::i64_load8_u:
            push(load.operator()<uint8_t>(in));
            break;
        case Opcode::i64_load16_s:
            push(static_cast<uint64_t>(int64_t{load.operator()<int16_t>(in)}));
            break;
        case Opcode::i64_load16_u:
            push(load.operator()<uint16_t>(in));
            break;
        case Opcode::i64_load32_s:
            push(static_cast<uint64_t>(int64_t{load.operator()<int32_t>(in)}));
            break;
        case Opcode::i64_load32_u:
            push(load.operator()<uint32_t>(in));
            break;
        case Opcode::i32_store:
        case Opcode::f32_store:
        case Opcode::i64_store32:
        {
            const auto v = static_cast<uint32_t>(pop());
            store(in, v);
            break;
        }
        case Opcode::i64_store:
        case Opcode::f64_store:
        {
            const auto v = pop();
            store(in, v);
            break;
        }
        case Opcode::i32_store8:
        case Opcode::i64_store8:
        {
            const auto v = static_cast<uint8_t>(pop());
            store(in, v);
            break;
        }
        case Opcode::i32_store16:
        case Opcode::i64_store16:
        {
            const auto v = static_cast<uint16_t>(pop());
            store(in, v);
            break;
        }
        case Opcode::memory_size:
            push_i32(static_cast<uint32_t>(m_memories[in.index2].size() / page_size));
            break;
        case Opcode::memory_grow:
        {
            auto& mem = m_memories[in.index2];
            const auto old_pages = static_cast<uint32_t>(mem.size() / page_size);
            const auto delta = static_cast<uint32_t>(top());
            const uint64_t limit = m_memory_max[in.index2].value_or(max_pages);
            if (uint64_t{old_pages} + delta > std::min<uint64_t>(limit, max_pages))
            {
                top() = 0xffffffffu;
                break;
            }
            mem.resize(mem.size() + std::size_t{delta} * page_size, 0);
            top() = old_pages;
            if (delta != 0 && m_hooks.on_grow)
                m_hooks.on_grow(in.index2, old_pages, old_pages + delta);
            break;
        }
        case Opcode::i32_const:
            push_i32(static_cast<uint32_t>(in.value));
            break;
        case Opcode::i64_const:
            push(in.value);
            break;
        case Opcode::f32_const:
            push_i32(static_cast<uint32_t>(in.value));
            break;
        case Opcode::f64_const:
            push(in.value);
            break;

#define WRR_CMP(OP, T, EXPR)                  \
    case Opcode::OP:                          \
    {                                         \
        const auto b = static_cast<T>(pop()); \
        const auto a = static_cast<T>(pop()); \
        push_i32((EXPR) ? 1 : 0);             \
        break;                                \
    }
#define WRR_BIN32(OP, EXPR)                          \
    case Opcode::OP:                                 \
    {                                                \
        const auto b = static_cast<uint32_t>(pop()); \
        const auto a = static_cast<uint32_t>(pop()); \
        push_i32(static_cast<uint32_t>(EXPR));       \
        break;                                       \
    }
#define WRR_BIN64(OP, EXPR)                 \
    case Opcode::OP:                        \
    {                                       \
        const uint64_t b = pop();           \
        const uint64_t a = pop();           \
        push(static_cast<uint64_t>(EXPR));  \
        break;                              \
    }
#define WRR_FBIN32(OP, EXPR)              \
    case Opcode::OP:                      \
    {                                     \
        const float b = as_f32(pop());    \
        const float a = as_f32(pop());    \
        push(from_f32(EXPR));             \
        break;                            \
    }
#define WRR_FBIN64(OP, EXPR)              \
    case Opcode::OP:                      \
    {                                     \
        const double b = as_f64(pop());   \
        const double a = as_f64(pop());   \
        push(from_f64(EXPR));             \
        break;                            \
    }
#define WRR_FCMP32(OP, EXPR)              \
    case Opcode::OP:                      \
    {                                     \
        const float b = as_f32(pop());    \
        const float a = as_f32(pop());    \
        push_i32((EXPR) ? 1 : 0);         \
        break;                            \
    }
#define WRR_FCMP64(OP, EXPR)              \
    case Opcode::OP:                      \
    {                                     \
        const double b = as_f64(pop());   \
        const double a = as_f64(pop());   \
        push_i32((EXPR) ? 1 : 0);         \
        break;                            \
    }
#define WRR_UN(OP, EXPR)   \
    case Opcode::OP:       \
    {                      \
        const auto a = top(); \
        top() = (EXPR);    \
        break;             \
    }

        WRR_UN(i32_eqz, static_cast<uint32_t>(a) == 0 ? 1u : 0u)
        WRR_CMP(i32_eq, uint32_t, a == b)
        WRR_CMP(i32_ne, uint32_t, a != b)
        WRR_CMP(i32_lt_s, int32_t, a < b)
        WRR_CMP(i32_lt_u, uint32_t, a < b)
        WRR_CMP(i32_gt_s, int32_t, a > b)
        WRR_CMP(i32_gt_u, uint32_t, a > b)
        WRR_CMP(i32_le_s, int32_t, a <= b)
        WRR_CMP(i32_le_u, uint32_t, a <= b)
        WRR_CMP(i32_ge_s, int32_t, a >= b)
        WRR_CMP(i32_ge_u, uint32_t, a >= b)
        WRR_UN(i64_eqz, a == 0 ? 1u : 0u)
        WRR_CMP(i64_eq, uint64_t, a == b)
        WRR_CMP(i64_ne, uint64_t, a != b)
        WRR_CMP(i64_lt_s, int64_t, a < b)
        WRR_CMP(i64_lt_u, uint64_t, a < b)
        WRR_CMP(i64_gt_s, int64_t, a > b)
        WRR_CMP(i64_gt_u, uint64_t, a > b)
        WRR_CMP(i64_le_s, int64_t, a <= b)
        WRR_CMP(i64_le_u, uint64_t, a <= b)
        WRR_CMP(i64_ge_s, int64_t, a >= b)
        WRR_CMP(i64_ge_u, uint64_t, a >= b)
        WRR_FCMP32(f32_eq, a == b)
        WRR_FCMP32(f32_ne, a != b)
        WRR_FCMP32(f32_lt, a < b)
        WRR_FCMP32(f32_gt, a > b)
        WRR_FCMP32(f32_le, a <= b)
        WRR_FCMP32(f32_ge, a >= b)
        WRR_FCMP64(f64_eq, a == b)
        WRR_FCMP64(f64_ne, a != b)
        WRR_FCMP64(f64_lt, a < b)
        WRR_FCMP64(f64_gt, a > b)
        WRR_FCMP64(f64_le, a <= b)
        WRR_FCMP64(f64_ge, a >= b)

        WRR_UN(i32_clz, static_cast<uint64_t>(std::countl_zero(static_cast<uint32_t>(a))))
        WRR_UN(i32_ctz, static_cast<uint64_t>(std::countr_zero(static_cast<uint32_t>(a))))
        WRR_UN(i32_popcnt, static_cast<uint64_t>(std::popcount(static_cast<uint32_t>(a))))
        WRR_BIN32(i32_add, a + b)
        WRR_BIN32(i32_sub, a - b)
        WRR_BIN32(i32_mul, a * b)
        case Opcode::i32_div_s:
        {
            const auto b = static_cast<int32_t>(pop());
            const auto a = static_cast<int32_t>(pop());
            if (b == 0)
                throw trap(TrapKind::IntegerDivByZero);
            if (a == std::numeric_limits<int32_t>::min() && b == -1)
                throw trap(TrapKind::IntegerOverflow);
            push_i32(static_cast<uint32_t>(a / b));
            break;
        }
        case Opcode::i32_div_u:
        {
            const auto b = static_cast<uint32_t>(pop());
            const auto a = static_cast<uint32_t>(pop());
            if (b == 0)
                throw trap(TrapKind::IntegerDivByZero);
            push_i32(a / b);
            break;
        }
        case Opcode::i32_rem_s:
        {
            const auto b = static_cast<int32_t>(pop());
            const auto a = static_cast<int32_t>(pop());
            if (b == 0)
                throw trap(TrapKind::IntegerDivByZero);
            push_i32(b == -1 ? 0u : static_cast<uint32_t>(a % b));
            break;
        }
        case Opcode::i32_rem_u:
        {
            const auto b = static_cast<uint32_t>(pop());
            const auto a = static_cast<uint32_t>(pop());
            if (b == 0)
                throw trap(TrapKind::IntegerDivByZero);
            push_i32(a % b);
            break;
        }
        WRR_BIN32(i32_and, a & b)
        WRR_BIN32(i32_or, a | b)
        WRR_BIN32(i32_xor, a ^ b)
        WRR_BIN32(i32_shl, a << (b & 31))
        WRR_BIN32(i32_shr_s, static_cast<int32_t>(a) >> (b & 31))
        WRR_BIN32(i32_shr_u, a >> (b & 31))
        WRR_BIN32(i32_rotl, std::rotl(a, static_cast<int>(b & 31)))
        WRR_BIN32(i32_rotr, std::rotr(a, static_cast<int>(b & 31)))

        WRR_UN(i64_clz, static_cast<uint64_t>(std::countl_zero(a)))
        WRR_UN(i64_ctz, static_cast<uint64_t>(std::countr_zero(a)))
        WRR_UN(i64_popcnt, static_cast<uint64_t>(std::popcount(a)))
        WRR_BIN64(i64_add, a + b)
        WRR_BIN64(i64_sub, a - b)
        WRR_BIN64(i64_mul, a * b)
        case Opcode::i64_div_s:
        {
            const auto b = static_cast<int64_t>(pop());
            const auto a = static_cast<int64_t>(pop());
            if (b == 0)
                throw trap(TrapKind::IntegerDivByZero);
            if (a == std::numeric_limits<int64_t>::min() && b == -1)
                throw trap(TrapKind::IntegerOverflow);
            push(static_cast<uint64_t>(a / b));
            break;
        }
        case Opcode::i64_div_u:
        {
            const uint64_t b = pop();
            const uint64_t a = pop();
            if (b == 0)
                throw trap(TrapKind::IntegerDivByZero);
            push(a / b);
            break;
        }
        case Opcode::i64_rem_s:
        {
            const auto b = static_cast<int64_t>(pop());
            const auto a = static_cast<int64_t>(pop());
            if (b == 0)
                throw trap(TrapKind::IntegerDivByZero);
            push(b == -1 ? 0u : static_cast<uint64_t>(a % b));
            break;
        }
        case Opcode::i64_rem_u:
        {
            const uint64_t b = pop();
            const uint64_t a = pop();
            if (b == 0)
                throw trap(TrapKind::IntegerDivByZero);
            push(a % b);
            break;
        }
        WRR_BIN64(i64_and, a & b)
        WRR_BIN64(i64_or, a | b)
        WRR_BIN64(i64_xor, a ^ b)
        WRR_BIN64(i64_shl, a << (b & 63))
        WRR_BIN64(i64_shr_s, static_cast<int64_t>(a) >> (b & 63))
        WRR_BIN64(i64_shr_u, a >> (b & 63))
        WRR_BIN64(i64_rotl, std::rotl(a, static_cast<int>(b & 63)))
        WRR_BIN64(i64_rotr, std::rotr(a, static_cast<int>(b & 63)))

        WRR_UN(f32_abs, a & 0x7fffffffu)
        WRR_UN(f32_neg, (a ^ 0x80000000u) & 0xffffffffu)
        WRR_UN(f32_ceil, from_f32(std::ceil(as_f32(a))))
        WRR_UN(f32_floor, from_f32(std::floor(as_f32(a))))
        WRR_UN(f32_trunc, from_f32(std::trunc(as_f32(a))))
        WRR_UN(f32_nearest, from_f32(std::nearbyint(as_f32(a))))
        WRR_UN(f32_sqrt, from_f32(std::sqrt(as_f32(a))))
        WRR_FBIN32(f32_add, a + b)
        WRR_FBIN32(f32_sub, a - b)
        WRR_FBIN32(f32_mul, a * b)
        WRR_FBIN32(f32_div, a / b)
        WRR_FBIN32(f32_min, fmin_wasm(a, b))
        WRR_FBIN32(f32_max, fmax_wasm(a, b))
        WRR_BIN32(f32_copysign, (a & 0x7fffffffu) | (b & 0x80000000u))

        WRR_UN(f64_abs, a & 0x7fffffffffffffffull)
        WRR_UN(f64_neg, a ^ 0x8000000000000000ull)
        WRR_UN(f64_ceil, from_f64(std::ceil(as_f64(a))))
        WRR_UN(f64_floor, from_f64(std::floor(as_f64(a))))
        WRR_UN(f64_trunc, from_f64(std::trunc(as_f64(a))))
        WRR_UN(f64_nearest, from_f64(std::nearbyint(as_f64(a))))
        WRR_UN(f64_sqrt, from_f64(std::sqrt(as_f64(a))))
        WRR_FBIN64(f64_add, a + b)
        WRR_FBIN64(f64_sub, a - b)
        WRR_FBIN64(f64_mul, a * b)
        WRR_FBIN64(f64_div, a / b)
        WRR_FBIN64(f64_min, fmin_wasm(a, b))
        WRR_FBIN64(f64_max, fmax_wasm(a, b))
        WRR_BIN64(f64_copysign, (a & 0x7fffffffffffffffull) | (b & 0x8000000000000000ull))

        WRR_UN(i32_wrap_i64, a & 0xffffffffu)

#define WRR_TRUNC(OP, INT, CONV, STORE)                                                 \
    case Opcode::OP:                                                                    \
    {                                                                                   \
        INT r{};                                                                        \
        bool overflow = false;                                                          \
        if (!trunc_checked<INT>(CONV(top()), r, overflow))                              \
            throw trap(overflow ? TrapKind::IntegerOverflow : TrapKind::InvalidConversion); \
        top() = STORE(r);                                                               \
        break;                                                                          \
    }
#define WRR_SAT(OP, INT, CONV, STORE)             \
    case Opcode::OP:                              \
        top() = STORE(trunc_sat<INT>(CONV(top()))); \
        break;
#define WRR_AS32(r) static_cast<uint64_t>(static_cast<uint32_t>(r))
#define WRR_AS64(r) static_cast<uint64_t>(r)

        WRR_TRUNC(i32_trunc_f32_s, int32_t, as_f32, WRR_AS32)
        WRR_TRUNC(i32_trunc_f32_u, uint32_t, as_f32, WRR_AS32)
        WRR_TRUNC(i32_trunc_f64_s, int32_t, as_f64, WRR_AS32)
        WRR_TRUNC(i32_trunc_f64_u, uint32_t, as_f64, WRR_AS32)
        WRR_TRUNC(i64_trunc_f32_s, int64_t, as_f32, WRR_AS64)
        WRR_TRUNC(i64_trunc_f32_u, uint64_t, as_f32, WRR_AS64)
        WRR_TRUNC(i64_trunc_f64_s, int64_t, as_f64, WRR_AS64)
        WRR_TRUNC(i64_trunc_f64_u, uint64_t, as_f64, WRR_AS64)
        WRR_SAT(i32_trunc_sat_f32_s, int32_t, as_f32, WRR_AS32)
        WRR_SAT(i32_trunc_sat_f32_u, uint32_t, as_f32, WRR_AS32)
        WRR_SAT(i32_trunc_sat_f64_s, int32_t, as_f64, WRR_AS32)
        WRR_SAT(i32_trunc_sat_f64_u, uint32_t, as_f64, WRR_AS32)
        WRR_SAT(i64_trunc_sat_f32_s, int64_t, as_f32, WRR_AS64)
        WRR_SAT(i64_trunc_sat_f32_u, uint64_t, as_f32, WRR_AS64)
        WRR_SAT(i64_trunc_sat_f64_s, int64_t, as_f64, WRR_AS64)
        WRR_SAT(i64_trunc_sat_f64_u, uint64_t, as_f64, WRR_AS64)

        WRR_UN(i64_extend_i32_s, static_cast<uint64_t>(int64_t{static_cast<int32_t>(a)}))
        WRR_UN(i64_extend_i32_u, a & 0xffffffffu)
        WRR_UN(f32_convert_i32_s, from_f32(static_cast<float>(static_cast<int32_t>(a))))
        WRR_UN(f32_convert_i32_u, from_f32(static_cast<float>(static_cast<uint32_t>(a))))
        WRR_UN(f32_convert_i64_s, from_f32(static_cast<float>(static_cast<int64_t>(a))))
        WRR_UN(f32_convert_i64_u, from_f32(static_cast<float>(a)))
        WRR_UN(f32_demote_f64, from_f32(static_cast<float>(as_f64(a))))
        WRR_UN(f64_convert_i32_s, from_f64(static_cast<double>(static_cast<int32_t>(a))))
        WRR_UN(f64_convert_i32_u, from_f64(static_cast<double>(static_cast<uint32_t>(a))))
        WRR_UN(f64_convert_i64_s, from_f64(static_cast<double>(static_cast<int64_t>(a))))
        WRR_UN(f64_convert_i64_u, from_f64(static_cast<double>(a)))
        WRR_UN(f64_promote_f32, from_f64(static_cast<double>(as_f32(a))))
        case Opcode::i32_reinterpret_f32:
        case Opcode::i64_reinterpret_f64:
        case Opcode::f32_reinterpret_i32:
        case Opcode::f64_reinterpret_i64:
            break;
        WRR_UN(i32_extend8_s, static_cast<uint32_t>(int32_t{static_cast<int8_t>(a)}))
        WRR_UN(i32_extend16_s, static_cast<uint32_t>(int32_t{static_cast<int16_t>(a)}))
        WRR_UN(i64_extend8_s, static_cast<uint64_t>(int64_t{static_cast<int8_t>(a)}))
        WRR_UN(i64_extend16_s, static_cast<uint64_t>(int64_t{static_cast<int16_t>(a)}))
        WRR_UN(i64_extend32_s, static_cast<uint64_t>(int64_t{static_cast<int32_t>(a)}))

#undef WRR_CMP
#undef WRR_BIN32
#undef WRR_BIN64
#undef WRR_FBIN32
#undef WRR_FBIN64
#undef WRR_FCMP32
#undef WRR_FCMP64
#undef WRR_UN
#undef WRR_TRUNC
#undef WRR_SAT
#undef WRR_AS32
#undef WRR_AS64

        case Opcode::ref_null:
            push(wasm::null_ref);
            break;
        case Opcode::ref_is_null:
            top() = top() == wasm::null_ref ? 1 : 0;
            break;
        case Opcode::ref_func:
            push(in.index);
            break;

        case Opcode::memory_init:
        {
            const auto n = static_cast<uint32_t>(pop());
            const auto src = static_cast<uint32_t>(pop());
            const auto dst = static_cast<uint32_t>(pop());
            auto& mem = m_memories[in.index2];
            const auto& seg = m_module.datas[in.index];
            const std::size_t seg_size = m_data_dropped[in.index] ? 0 : seg.bytes.size();
            if (uint64_t{src} + n > seg_size || uint64_t{dst} + n > mem.size())
                throw trap(TrapKind::OutOfBoundsMemory);
            std::copy_n(seg.bytes.begin() + src, n, mem.begin() + dst);
            break;
        }
        case Opcode::data_drop:
            m_data_dropped[in.index] = true;
            break;
        case Opcode::memory_copy:
        {
            const auto n = static_cast<uint32_t>(pop());
            const auto src = static_cast<uint32_t>(pop());
            const auto dst = static_cast<uint32_t>(pop());
            auto& to = m_memories[in.index];
            auto& from = m_memories[in.index2];
            if (uint64_t{src} + n > from.size() || uint64_t{dst} + n > to.size())
                throw trap(TrapKind::OutOfBoundsMemory);
            std::memmove(to.data() + dst, from.data() + src, n);
            break;
        }
        case Opcode::memory_fill:
        {
            const auto n = static_cast<uint32_t>(pop());
            const auto value = static_cast<uint8_t>(pop());
            const auto dst = static_cast<uint32_t>(pop());
            auto& mem = m_memories[in.index2];
            if (uint64_t{dst} + n > mem.size())
                throw trap(TrapKind::OutOfBoundsMemory);
            std::memset(mem.data() + dst, value, n);
            break;
        }
        }
        ++pc;
    }
}

}  // namespace wrr::interp
