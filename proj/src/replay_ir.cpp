// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "wrr/replay_ir.hpp"
#include "wrr/error.hpp"

#include <json.hpp>

#include <cstdio>
#include <sstream>

namespace wrr::ir
{
namespace
{
struct Frame
{
    /// Owning function, or none for the global context.
    std::optional<uint32_t> funcidx;
    std::size_t context = 0;
};

Context& resolve(Replay& r, const Frame& f)
{
    return f.funcidx ? r.functions[*f.funcidx].contexts[f.context] : r.entry.contexts[0];
}

/// Appends to the context, or inserts before a trailing ExportCall: the host changed
/// state before that export ran and the Wasm side only observed it later.
void place(Context& c, Action a)
{
    if (!c.actions.empty() && std::holds_alternative<ExportCall>(c.actions.back()))
        c.actions.insert(c.actions.end() - 1, std::move(a));
    else
        c.actions.push_back(std::move(a));
}
}  // namespace

Replay translate(const Trace& reduced, const wasm::Module& module)
{
    Replay r;
    std::vector<Frame> stack{Frame{}};
    Frame last{};

    for (std::size_t i = 0; i < reduced.events.size(); ++i)
    {
        const auto& e = reduced.events[i];
        if (const auto* fe = std::get_if<event::FuncEntry>(&e))
        {
            // The start function runs during instantiation in every output format.
            if (i == 0 && module.start && fe->funcidx == *module.start)
                continue;
            resolve(r, stack.back()).actions.push_back(ExportCall{fe->funcidx, fe->params});
        }
        else if (const auto* c = std::get_if<event::Call>(&e))
        {
            auto& fn = r.functions[c->funcidx];
            fn.contexts.emplace_back();
            fn.results.emplace_back();
            Frame frame{c->funcidx, fn.contexts.size() - 1};
            stack.push_back(frame);
            last = frame;
        }
        else if (const auto* cr = std::get_if<event::CallReturn>(&e))
        {
            if (stack.size() <= 1)
                throw IllFormedTrace{i, "CallReturn without a matching Call"};
            const auto frame = stack.back();
            if (*frame.funcidx != cr->funcidx)
                throw IllFormedTrace{i, "CallReturn for function " + std::to_string(cr->funcidx) +
                                            " while function " + std::to_string(*frame.funcidx) + " is active"};
            stack.pop_back();
            r.functions[cr->funcidx].results[frame.context] = cr->results;
            last = frame;
        }
        else if (const auto* l = std::get_if<event::Load>(&e))
        {
            auto& ctx = resolve(r, last);
            const auto bytes = l->value.bytes();
            for (std::size_t b = 0; b < bytes.size(); ++b)
                place(ctx, MutateMem{l->memidx, l->address + static_cast<uint32_t>(b), bytes[b]});
        }
        else if (const auto* g = std::get_if<event::GlobalGet>(&e))
        {
            place(resolve(r, last), MutateGlobal{g->globalidx, g->value});
        }
        else if (const auto* t = std::get_if<event::TableGet>(&e))
        {
            if (!t->funcref)
                throw ReplayabilityError{"TableGet of a host-created reference at event " + std::to_string(i)};
            place(resolve(r, last), MutateTable{t->tableidx, t->elemidx, *t->funcref});
        }
        else
        {
            throw IllFormedTrace{i, std::string{event_name(tag_of(e))} + " in a reduced trace"};
        }
    }
    return r;
}

namespace
{
Context merge_context(const Context& c)
{
    Context out;
    std::size_t i = 0;
    while (i < c.actions.size())
    {
        const auto* first = std::get_if<MutateMem>(&c.actions[i]);
        if (first == nullptr)
        {
            out.actions.push_back(c.actions[i++]);
            continue;
        }
        std::size_t j = i + 1;
        std::vector<uint8_t> bytes{first->val};
        while (j < c.actions.size())
        {
            const auto* next = std::get_if<MutateMem>(&c.actions[j]);
            if (next == nullptr || next->idx != first->idx ||
                uint64_t{next->addr} != uint64_t{first->addr} + bytes.size())
                break;
            bytes.push_back(next->val);
            ++j;
        }
        if (bytes.size() == 1)
            out.actions.push_back(*first);
        else
            out.actions.push_back(BulkMutateMem{first->idx, first->addr, std::move(bytes)});
        i = j;
    }
    return out;
}

class Splitter
{
public:
    Splitter(Replay& r, std::size_t threshold) : m_r{r}, m_t{threshold} {}

    std::vector<Action> build(std::span<const Action> actions)
    {
        const auto n = actions.size();
        if (n <= m_t)
            return {actions.begin(), actions.end()};
        std::vector<Action> items;
        const auto m = (n - m_t + m_t - 2) / (m_t - 1);
        if (m <= m_t)
        {
            // Keep a prefix inline and outline the rest into m full-size auxiliaries.
            const auto inline_count = m_t - m;
            items.assign(actions.begin(), actions.begin() + static_cast<std::ptrdiff_t>(inline_count));
            auto rest = actions.subspan(inline_count);
            while (!rest.empty())
            {
                const auto take = std::min(rest.size(), m_t);
                items.push_back(outline(std::vector<Action>{rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(take)}));
                rest = rest.subspan(take);
            }
            return items;
        }
        // Too long for one level: split into m_t equal parts, each built recursively.
        for (std::size_t p = 0; p < m_t; ++p)
        {
            const auto begin = n * p / m_t;
            const auto end = n * (p + 1) / m_t;
            items.push_back(outline(build(actions.subspan(begin, end - begin))));
        }
        return items;
    }

private:
    CallAux outline(std::vector<Action> actions)
    {
        m_r.auxiliaries.push_back(Context{std::move(actions)});
        return CallAux{static_cast<uint32_t>(m_r.auxiliaries.size() - 1)};
    }

    Replay& m_r;
    std::size_t m_t;
};
}  // namespace

Replay merge_memory_writes(const Replay& r)
{
    Replay out = r;
    for (auto& [idx, fn] : out.functions)
        for (auto& c : fn.contexts)
            c = merge_context(c);
    for (auto& c : out.entry.contexts)
        c = merge_context(c);
    for (auto& c : out.auxiliaries)
        c = merge_context(c);
    return out;
}

Replay split_functions(const Replay& r, std::size_t threshold, std::size_t max_aux)
{
    if (threshold < 2)
        throw Error{ErrorClass::Internal, "split threshold must be at least 2"};
    Replay out = r;
    auto check = [&](const Context& c) {
        if (c.actions.size() > threshold * max_aux)
            throw SplitInfeasible{"context of " + std::to_string(c.actions.size()) +
                                  " actions exceeds threshold " + std::to_string(threshold) + " x " +
                                  std::to_string(max_aux) + " auxiliaries"};
    };
    Splitter splitter{out, threshold};
    auto split = [&](Context& c) {
        check(c);
        if (c.actions.size() > threshold)
            c.actions = splitter.build(std::vector<Action>{c.actions});
    };
    for (auto& [idx, fn] : out.functions)
        for (auto& c : fn.contexts)
            split(c);
    for (auto& c : out.entry.contexts)
        split(c);
    // Pre-existing auxiliaries may be oversized too; new ones never are.
    for (std::size_t i = 0; i < r.auxiliaries.size(); ++i)
    {
        check(out.auxiliaries[i]);
        if (out.auxiliaries[i].actions.size() > threshold)
        {
            auto actions = std::move(out.auxiliaries[i].actions);
            out.auxiliaries[i].actions = splitter.build(actions);
        }
    }
    if (out.auxiliaries.size() > max_aux)
        throw SplitInfeasible{"split needs " + std::to_string(out.auxiliaries.size()) + " auxiliaries, limit is " +
                              std::to_string(max_aux)};
    return out;
}

namespace
{
std::size_t leb_size(uint64_t v)
{
    std::size_t n = 1;
    while (v >= 0x80)
    {
        v >>= 7;
        ++n;
    }
    return n;
}

std::size_t sleb_size(int64_t v)
{
    std::vector<uint8_t> tmp;
    wasm::write_s64_leb(tmp, v);
    return tmp.size();
}

std::size_t const_size(const Value& v)
{
    switch (v.kind)
    {
    case ValueKind::I64:
        return 1 + sleb_size(static_cast<int64_t>(v.bits));
    case ValueKind::F32:
        return 5;
    case ValueKind::F64:
        return 9;
    default:
        return 1 + sleb_size(static_cast<int32_t>(static_cast<uint32_t>(v.bits)));
    }
}

std::size_t action_estimate(const Action& a)
{
    return std::visit(
        [](const auto& act) -> std::size_t {
            using T = std::decay_t<decltype(act)>;
            if constexpr (std::is_same_v<T, ExportCall>)
            {
                std::size_t n = 1 + leb_size(act.idx) + 1;
                for (const auto& v : act.vals)
                    n += const_size(v);
                return n;
            }
            else if constexpr (std::is_same_v<T, MutateMem>)
                return 1 + sleb_size(static_cast<int32_t>(act.addr)) + 1 + sleb_size(act.val) + 3;
            else if constexpr (std::is_same_v<T, BulkMutateMem>)
                return 1 + sleb_size(static_cast<int32_t>(act.addr)) + 2 + 1 + sleb_size(static_cast<int64_t>(act.val.size())) + 5;
            else if constexpr (std::is_same_v<T, MutateGlobal>)
                return const_size(act.val) + 1 + leb_size(act.idx);
            else if constexpr (std::is_same_v<T, MutateTable>)
                return 1 + sleb_size(act.elem) + 1 + leb_size(act.funcidx) + 1 + leb_size(act.idx);
            else
                return 1 + leb_size(act.aux);
        },
        a);
}

std::string value_text(const Value& v)
{
    std::string out = kind_name(v.kind);
    char buf[32];
    if (v.kind == ValueKind::F32 || v.kind == ValueKind::F64)
        std::snprintf(buf, sizeof buf, "(0x%0*llx)", v.kind == ValueKind::F32 ? 8 : 16,
            static_cast<unsigned long long>(v.bits));
    else
        std::snprintf(buf, sizeof buf, "(%llu)", static_cast<unsigned long long>(v.bits));
    return out + buf;
}

std::string values_text(const std::vector<Value>& vs)
{
    std::string out = "[";
    for (std::size_t i = 0; i < vs.size(); ++i)
        out += (i ? ", " : "") + value_text(vs[i]);
    return out + "]";
}

std::string byte_text(uint8_t b)
{
    char buf[4];
    std::snprintf(buf, sizeof buf, "\\%02x", b);
    return buf;
}
}  // namespace

IrStats ir_stats(const Replay& r)
{
    IrStats s;
    s.functions = r.functions.size();
    s.auxiliaries = r.auxiliaries.size();
    auto visit = [&s](const Context& c) {
        s.max_context_length = std::max(s.max_context_length, c.actions.size());
        std::size_t body = 0;
        for (const auto& a : c.actions)
        {
            body += action_estimate(a);
            std::visit(
                [&s](const auto& act) {
                    using T = std::decay_t<decltype(act)>;
                    if constexpr (std::is_same_v<T, ExportCall>)
                        ++s.export_calls;
                    else if constexpr (std::is_same_v<T, MutateMem>)
                        ++s.mutate_mem;
                    else if constexpr (std::is_same_v<T, BulkMutateMem>)
                    {
                        ++s.bulk_mutate_mem;
                        s.bulk_bytes += act.val.size();
                    }
                    else if constexpr (std::is_same_v<T, MutateGlobal>)
                        ++s.mutate_global;
                    else if constexpr (std::is_same_v<T, MutateTable>)
                        ++s.mutate_table;
                    else
                        ++s.call_aux;
                },
                a);
        }
        s.max_body_estimate = std::max(s.max_body_estimate, body);
        s.total_body_estimate += body;
    };
    for (const auto& [idx, fn] : r.functions)
        for (const auto& c : fn.contexts)
        {
            ++s.contexts;
            visit(c);
        }
    for (const auto& c : r.entry.contexts)
    {
        ++s.contexts;
        visit(c);
    }
    for (const auto& c : r.auxiliaries)
        visit(c);
    return s;
}

std::string IrStats::to_json() const
{
    nlohmann::ordered_json doc{{"functions", functions}, {"contexts", contexts}, {"auxiliaries", auxiliaries},
        {"actions", actions()}, {"ExportCall", export_calls}, {"MutateMem", mutate_mem},
        {"BulkMutateMem", bulk_mutate_mem}, {"bulk_bytes", bulk_bytes}, {"MutateGlobal", mutate_global},
        {"MutateTable", mutate_table}, {"CallAux", call_aux}, {"max_context_length", max_context_length},
        {"max_body_estimate", max_body_estimate}, {"total_body_estimate", total_body_estimate}};
    return doc.dump(2) + "\n";
}

std::string format_action(const Action& a)
{
    return std::visit(
        [](const auto& act) -> std::string {
            using T = std::decay_t<decltype(act)>;
            if constexpr (std::is_same_v<T, ExportCall>)
                return "ExportCall {idx: " + std::to_string(act.idx) + ", vals: " + values_text(act.vals) + "}";
            else if constexpr (std::is_same_v<T, MutateMem>)
                return "MutateMem {idx: " + std::to_string(act.idx) + ", addr: " + std::to_string(act.addr) +
                       ", val: " + byte_text(act.val) + "}";
            else if constexpr (std::is_same_v<T, BulkMutateMem>)
            {
                std::string val;
                for (const auto b : act.val)
                    val += byte_text(b);
                return "BulkMutateMem {idx: " + std::to_string(act.idx) + ", addr: " + std::to_string(act.addr) +
                       ", val: \"" + val + "\"}";
            }
            else if constexpr (std::is_same_v<T, MutateGlobal>)
                return "MutateGlobal {idx: " + std::to_string(act.idx) + ", val: " + value_text(act.val) + "}";
            else if constexpr (std::is_same_v<T, MutateTable>)
                return "MutateTable {idx: " + std::to_string(act.idx) + ", elem: " + std::to_string(act.elem) +
                       ", funcidx: " + std::to_string(act.funcidx) + "}";
            else
                return "CallAux {aux: " + std::to_string(act.aux) + "}";
        },
        a);
}

std::string dump(const Replay& r)
{
    std::ostringstream out;
    auto context = [&out](const Context& c) {
        for (const auto& a : c.actions)
            out << "    " << format_action(a) << '\n';
    };
    out << "entry:\n";
    context(r.entry.contexts.at(0));
    for (const auto& [idx, fn] : r.functions)
    {
        out << "function " << idx << ":\n";
        for (std::size_t i = 0; i < fn.contexts.size(); ++i)
        {
            out << "  context " << i << " -> " << values_text(fn.results[i]) << ":\n";
            context(fn.contexts[i]);
        }
    }
    for (std::size_t i = 0; i < r.auxiliaries.size(); ++i)
    {
        out << "aux " << i << ":\n";
        context(r.auxiliaries[i]);
    }
    return out.str();
}

}  // namespace wrr::ir
