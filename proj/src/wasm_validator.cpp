// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "wrr/error.hpp"
#include "wrr/wasm.hpp"

#include <set>

namespace wrr::wasm
{
namespace
{
struct ValidationFailure
{
    std::string message;
};

[[noreturn]] void fail(std::string message)
{
    throw ValidationFailure{std::move(message)};
}

using MaybeType = std::optional<ValType>;  // empty = unknown (polymorphic stack)

struct ControlFrame
{
    Opcode op;
    std::vector<ValType> start_types;
    std::vector<ValType> end_types;
    std::size_t height;
    bool unreachable = false;
};

bool is_num(ValType t)
{
    return t != ValType::FuncRef;
}

class FunctionValidator
{
public:
    FunctionValidator(const Module& m, const std::set<uint32_t>& declared_refs)
      : m_module{m}, m_declared{declared_refs}
    {}

    void run(const Function& f)
    {
        if (f.type_index >= m_module.types.size())
            fail("function type index out of range");
        const auto& type = m_module.types[f.type_index];
        m_locals = type.params;
        for (const auto& l : f.locals)
        {
            if (m_locals.size() + l.count > 50'000)
                fail("too many locals");
            m_locals.insert(m_locals.end(), l.count, l.type);
        }
        m_results = type.results;
        push_ctrl(Opcode::block, {}, type.results);

        for (std::size_t pc = 0; pc < f.body.size(); ++pc)
        {
            m_pc = pc;
            if (m_ctrls.empty())
                fail("instructions after final end");
            step(f.body[pc]);
        }
        if (!m_ctrls.empty())
            fail("body not terminated by end");
    }

    std::size_t pc() const noexcept { return m_pc; }

private:
    void push(MaybeType t) { m_vals.push_back(t); }
    void push(ValType t) { m_vals.emplace_back(t); }

    MaybeType pop()
    {
        auto& top = m_ctrls.back();
        if (m_vals.size() == top.height)
        {
            if (top.unreachable)
                return std::nullopt;
            fail("operand stack underflow");
        }
        const auto t = m_vals.back();
        m_vals.pop_back();
        return t;
    }

    MaybeType pop(ValType expect)
    {
        const auto actual = pop();
        if (actual && *actual != expect)
            fail(std::string{"type mismatch: expected "} + to_string(expect) + ", got " +
                 to_string(*actual));
        return actual ? actual : MaybeType{expect};
    }

    void pop_all(const std::vector<ValType>& types)
    {
        for (auto it = types.rbegin(); it != types.rend(); ++it)
            pop(*it);
    }

    void push_all(const std::vector<ValType>& types)
    {
        for (const auto t : types)
            push(t);
    }

    void push_ctrl(Opcode op, std::vector<ValType> in, std::vector<ValType> out)
    {
        m_ctrls.push_back({op, in, std::move(out), m_vals.size(), false});
        push_all(in);
    }

    ControlFrame pop_ctrl()
    {
        if (m_ctrls.empty())
            fail("control stack underflow");
        const auto frame = m_ctrls.back();
        pop_all(frame.end_types);
        if (m_vals.size() != frame.height)
            fail("values remaining on stack at end of block");
        m_ctrls.pop_back();
        return frame;
    }

    const std::vector<ValType>& label_types(const ControlFrame& f) const
    {
        return f.op == Opcode::loop ? f.start_types : f.end_types;
    }

    void set_unreachable()
    {
        m_vals.resize(m_ctrls.back().height);
        m_ctrls.back().unreachable = true;
    }

    const ControlFrame& label(uint32_t depth) const
    {
        if (depth >= m_ctrls.size())
            fail("branch depth out of range");
        return m_ctrls[m_ctrls.size() - 1 - depth];
    }

    std::pair<std::vector<ValType>, std::vector<ValType>> block_sig(const BlockType& bt) const
    {
        switch (bt.kind)
        {
        case BlockType::Empty:
            return {};
        case BlockType::Value:
            return {{}, {bt.type}};
        case BlockType::TypeIndex:
            if (bt.index >= m_module.types.size())
                fail("block type index out of range");
            return {m_module.types[bt.index].params, m_module.types[bt.index].results};
        }
        return {};
    }

    void check_memory(uint32_t index) const
    {
        if (index >= m_module.memory_count())
            fail("memory index out of range");
    }

    void check_table(uint32_t index) const
    {
        if (index >= m_module.table_count())
            fail("table index out of range");
    }

    void check_func(uint32_t index) const
    {
        if (index >= m_module.function_count())
            fail("function index out of range");
    }

    void check_data(uint32_t index) const
    {
        if (!m_module.data_count)
            fail("data count section required");
        if (index >= *m_module.data_count)
            fail("data segment index out of range");
    }

    void simple(Sig sig)
    {
        using V = ValType;
        auto un = [this](V in, V out) {
            pop(in);
            push(out);
        };
        auto bin = [this](V in, V out) {
            pop(in);
            pop(in);
            push(out);
        };
        switch (sig)
        {
        case Sig::i_i:
            return un(V::I32, V::I32);
        case Sig::ii_i:
            return bin(V::I32, V::I32);
        case Sig::I_I:
            return un(V::I64, V::I64);
        case Sig::II_I:
            return bin(V::I64, V::I64);
        case Sig::I_i:
            return un(V::I64, V::I32);
        case Sig::II_i:
            return bin(V::I64, V::I32);
        case Sig::f_f:
            return un(V::F32, V::F32);
        case Sig::ff_f:
            return bin(V::F32, V::F32);
        case Sig::ff_i:
            return bin(V::F32, V::I32);
        case Sig::F_F:
            return un(V::F64, V::F64);
        case Sig::FF_F:
            return bin(V::F64, V::F64);
        case Sig::FF_i:
            return bin(V::F64, V::I32);
        case Sig::i_I:
            return un(V::I32, V::I64);
        case Sig::f_i:
            return un(V::F32, V::I32);
        case Sig::F_i:
            return un(V::F64, V::I32);
        case Sig::f_I:
            return un(V::F32, V::I64);
        case Sig::F_I:
            return un(V::F64, V::I64);
        case Sig::i_f:
            return un(V::I32, V::F32);
        case Sig::I_f:
            return un(V::I64, V::F32);
        case Sig::F_f:
            return un(V::F64, V::F32);
        case Sig::i_F:
            return un(V::I32, V::F64);
        case Sig::I_F:
            return un(V::I64, V::F64);
        case Sig::f_F:
            return un(V::F32, V::F64);
        case Sig::load_i:
            return un(V::I32, V::I32);
        case Sig::load_I:
            return un(V::I32, V::I64);
        case Sig::load_f:
            return un(V::I32, V::F32);
        case Sig::load_F:
            return un(V::I32, V::F64);
        case Sig::store_i:
            pop(V::I32);
            pop(V::I32);
            return;
        case Sig::store_I:
            pop(V::I64);
            pop(V::I32);
            return;
        case Sig::store_f:
            pop(V::F32);
            pop(V::I32);
            return;
        case Sig::store_F:
            pop(V::F64);
            pop(V::I32);
            return;
        case Sig::Special:
            break;
        }
    }

    void step(const Instruction& in)
    {
        const auto& oi = info(in.op);
        if (oi.imm == Imm::MemArg)
        {
            check_memory(in.mem.memory);
            if (in.mem.align > natural_alignment(in.op))
                fail(std::string{"alignment exceeds natural alignment for "} + oi.name);
        }
        if (oi.sig != Sig::Special)
            return simple(oi.sig);

        switch (in.op)
        {
        case Opcode::unreachable:
            set_unreachable();
            break;
        case Opcode::nop:
            break;
        case Opcode::block:
        case Opcode::loop:
        {
            auto [params, results] = block_sig(in.block);
            pop_all(params);
            push_ctrl(in.op, params, results);
            break;
        }
        case Opcode::if_:
        {
            auto [params, results] = block_sig(in.block);
            pop(ValType::I32);
            pop_all(params);
            push_ctrl(in.op, params, results);
            break;
        }
        case Opcode::else_:
        {
            const auto frame = pop_ctrl();
            if (frame.op != Opcode::if_)
                fail("else without if");
            push_ctrl(Opcode::else_, frame.start_types, frame.end_types);
            break;
        }
        case Opcode::end:
        {
            const auto frame = pop_ctrl();
            if (frame.op == Opcode::if_ && frame.start_types != frame.end_types)
                fail("if without else must have matching param and result types");
            push_all(frame.end_types);
            break;
        }
        case Opcode::br:
            pop_all(label_types(label(in.index)));
            set_unreachable();
            break;
        case Opcode::br_if:
        {
            pop(ValType::I32);
            const auto types = label_types(label(in.index));
            pop_all(types);
            push_all(types);
            break;
        }
        case Opcode::br_table:
        {
            pop(ValType::I32);
            const auto arity = label_types(label(in.index)).size();
            for (const auto l : in.labels)
            {
                const auto& types = label_types(label(l));
                if (types.size() != arity)
                    fail("br_table arity mismatch");
                // Check each target against a copy so polymorphic operands stay untouched.
                std::vector<MaybeType> popped;
                for (auto it = types.rbegin(); it != types.rend(); ++it)
                    popped.push_back(pop(*it));
                for (auto it = popped.rbegin(); it != popped.rend(); ++it)
                    push(*it);
            }
            pop_all(label_types(label(in.index)));
            set_unreachable();
            break;
        }
        case Opcode::return_:
            pop_all(m_results);
            set_unreachable();
            break;
        case Opcode::call:
        {
            check_func(in.index);
            const auto& t = m_module.function_type(in.index);
            pop_all(t.params);
            push_all(t.results);
            break;
        }
        case Opcode::call_indirect:
        {
            check_table(in.index2);
            if (in.index >= m_module.types.size())
                fail("call_indirect type index out of range");
            pop(ValType::I32);
            const auto& t = m_module.types[in.index];
            pop_all(t.params);
            push_all(t.results);
            break;
        }
        case Opcode::drop:
            pop();
            break;
        case Opcode::select:
        {
            pop(ValType::I32);
            const auto t1 = pop();
            const auto t2 = pop();
            if ((t1 && !is_num(*t1)) || (t2 && !is_num(*t2)))
                fail("untyped select on reference operands");
            if (t1 && t2 && *t1 != *t2)
                fail("select operand types differ");
            push(t1 ? t1 : t2);
            break;
        }
        case Opcode::select_t:
        {
            const auto t = static_cast<ValType>(in.labels.at(0));
            pop(ValType::I32);
            pop(t);
            pop(t);
            push(t);
            break;
        }
        case Opcode::local_get:
            push(local(in.index));
            break;
        case Opcode::local_set:
            pop(local(in.index));
            break;
        case Opcode::local_tee:
        {
            const auto t = local(in.index);
            pop(t);
            push(t);
            break;
        }
        case Opcode::global_get:
            if (in.index >= m_module.global_count())
                fail("global index out of range");
            push(m_module.global_type(in.index).type);
            break;
        case Opcode::global_set:
        {
            if (in.index >= m_module.global_count())
                fail("global index out of range");
            const auto gt = m_module.global_type(in.index);
            if (!gt.is_mutable)
                fail("global.set on immutable global");
            pop(gt.type);
            break;
        }
        case Opcode::table_get:
            check_table(in.index);
            pop(ValType::I32);
            push(ValType::FuncRef);
            break;
        case Opcode::table_set:
            check_table(in.index);
            pop(ValType::FuncRef);
            pop(ValType::I32);
            break;
        case Opcode::memory_size:
            check_memory(in.index2);
            push(ValType::I32);
            break;
        case Opcode::memory_grow:
            check_memory(in.index2);
            pop(ValType::I32);
            push(ValType::I32);
            break;
        case Opcode::i32_const:
            push(ValType::I32);
            break;
        case Opcode::i64_const:
            push(ValType::I64);
            break;
        case Opcode::f32_const:
            push(ValType::F32);
            break;
        case Opcode::f64_const:
            push(ValType::F64);
            break;
        case Opcode::ref_null:
            push(ValType::FuncRef);
            break;
        case Opcode::ref_is_null:
        {
            const auto t = pop();
            if (t && *t != ValType::FuncRef)
                fail("ref.is_null on non-reference");
            push(ValType::I32);
            break;
        }
        case Opcode::ref_func:
            check_func(in.index);
            if (!m_declared.contains(in.index))
                fail("ref.func of undeclared function " + std::to_string(in.index));
            push(ValType::FuncRef);
            break;
        case Opcode::memory_init:
            check_memory(in.index2);
            check_data(in.index);
            pop(ValType::I32);
            pop(ValType::I32);
            pop(ValType::I32);
            break;
        case Opcode::data_drop:
            check_data(in.index);
            break;
        case Opcode::memory_copy:
            check_memory(in.index);
            check_memory(in.index2);
            pop(ValType::I32);
            pop(ValType::I32);
            pop(ValType::I32);
            break;
        case Opcode::memory_fill:
            check_memory(in.index2);
            pop(ValType::I32);
            pop(ValType::I32);
            pop(ValType::I32);
            break;
        default:
            fail(std::string{"unhandled instruction "} + oi.name);
        }
    }

    ValType local(uint32_t index) const
    {
        if (index >= m_locals.size())
            fail("local index out of range");
        return m_locals[index];
    }

    const Module& m_module;
    const std::set<uint32_t>& m_declared;
    std::vector<ValType> m_locals;
    std::vector<ValType> m_results;
    std::vector<MaybeType> m_vals;
    std::vector<ControlFrame> m_ctrls;
    std::size_t m_pc = 0;
};

ValType const_expr_type(const Module& m, const ConstExpr& e, const std::set<uint32_t>& declared)
{
    switch (e.op)
    {
    case Opcode::i32_const:
        return ValType::I32;
    case Opcode::i64_const:
        return ValType::I64;
    case Opcode::f32_const:
        return ValType::F32;
    case Opcode::f64_const:
        return ValType::F64;
    case Opcode::ref_null:
        return ValType::FuncRef;
    case Opcode::ref_func:
        if (e.index >= m.function_count())
            fail("ref.func index out of range");
        (void)declared;
        return ValType::FuncRef;
    case Opcode::global_get:
    {
        if (e.index >= m.imported_global_count())
            fail("constant expression may only read imported globals");
        const auto gt = m.global_type(e.index);
        if (gt.is_mutable)
            fail("constant expression reads a mutable global");
        return gt.type;
    }
    default:
        fail("invalid constant expression");
    }
}

void check_limits(const Limits& l, uint64_t bound, const char* what)
{
    if (l.min > bound)
        fail(std::string{what} + " minimum too large");
    if (l.max && (*l.max > bound || *l.max < l.min))
        fail(std::string{what} + " maximum invalid");
}

void validate_structure(const Module& m, const std::set<uint32_t>& declared)
{
    for (const auto& imp : m.imports)
    {
        if (imp.kind() == ExternKind::Func && std::get<uint32_t>(imp.desc) >= m.types.size())
            fail("import '" + imp.name + "' has invalid type index");
        if (imp.kind() == ExternKind::Memory)
            check_limits(std::get<MemoryType>(imp.desc).limits, 65536, "memory");
    }
    for (const auto& mem : m.memories)
        check_limits(mem.limits, 65536, "memory");
    for (const auto& t : m.tables)
        check_limits(t.limits, 0xffffffffu, "table");
    for (const auto& g : m.globals)
        if (const_expr_type(m, g.init, declared) != g.type.type)
            fail("global initializer type mismatch");

    std::set<std::string> names;
    for (const auto& e : m.exports)
    {
        if (!names.insert(e.name).second)
            fail("duplicate export name '" + e.name + "'");
        uint32_t bound = 0;
        switch (e.kind)
        {
        case ExternKind::Func:
            bound = m.function_count();
            break;
        case ExternKind::Table:
            bound = m.table_count();
            break;
        case ExternKind::Memory:
            bound = m.memory_count();
            break;
        case ExternKind::Global:
            bound = m.global_count();
            break;
        }
        if (e.index >= bound)
            fail("export '" + e.name + "' index out of range");
    }
    if (m.start)
    {
        if (*m.start >= m.function_count())
            fail("start function index out of range");
        const auto& t = m.function_type(*m.start);
        if (!t.params.empty() || !t.results.empty())
            fail("start function must have type [] -> []");
    }
    for (const auto& e : m.elems)
    {
        if (e.mode == SegmentMode::Active)
        {
            if (e.table >= m.table_count())
                fail("element segment table index out of range");
            if (const_expr_type(m, e.offset, declared) != ValType::I32)
                fail("element segment offset must be i32");
        }
        for (const auto& item : e.items)
            if (item && *item >= m.function_count())
                fail("element segment function index out of range");
    }
    for (const auto& d : m.datas)
    {
        if (d.mode == SegmentMode::Active)
        {
            if (d.memory >= m.memory_count())
                fail("data segment memory index out of range");
            if (const_expr_type(m, d.offset, declared) != ValType::I32)
                fail("data segment offset must be i32");
        }
    }
    if (m.data_count && *m.data_count != m.datas.size())
        fail("data count disagrees with data segments");
}
}  // namespace

std::vector<Diagnostic> validate_module(const Module& m, const ValidateOptions& options)
{
    std::vector<Diagnostic> diags;

    // Functions that may appear in ref.func: anything referenced outside function bodies.
    std::set<uint32_t> declared;
    for (const auto& e : m.elems)
        for (const auto& item : e.items)
            if (item)
                declared.insert(*item);
    for (const auto& e : m.exports)
        if (e.kind == ExternKind::Func)
            declared.insert(e.index);
    for (const auto& g : m.globals)
        if (g.init.op == Opcode::ref_func)
            declared.insert(g.init.index);

    try
    {
        validate_structure(m, declared);
    }
    catch (const ValidationFailure& f)
    {
        diags.push_back({std::nullopt, f.message});
    }
    catch (const Error& e)
    {
        diags.push_back({std::nullopt, e.what()});
    }

    const auto base = m.imported_function_count();
    for (std::size_t i = 0; i < m.functions.size(); ++i)
    {
        const auto index = base + static_cast<uint32_t>(i);
        FunctionValidator v{m, declared};
        try
        {
            v.run(m.functions[i]);
        }
        catch (const ValidationFailure& f)
        {
            diags.push_back({index, f.message + " (instruction " + std::to_string(v.pc()) + ")"});
        }
        catch (const Error& e)
        {
            diags.push_back({index, e.what()});
        }
        const auto size = encode_function_body(m.functions[i]).size();
        if (size > options.body_size_limit)
            diags.push_back({index, "body size " + std::to_string(size) + " exceeds limit " +
                                        std::to_string(options.body_size_limit)});
    }
    return diags;
}

}  // namespace wrr::wasm
