// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "wrr/opcodes.hpp"

#include <algorithm>
#include <array>
#include <bit>

namespace wrr::wasm
{
namespace
{
constexpr std::array op_table = {
#define WRR_X(code, ident, text, imm, sig, width) \
    OpInfo{Opcode::ident, text, Imm::imm, Sig::sig, width},
    WRR_WASM_OPCODES(WRR_X)
#undef WRR_X
};

static_assert(std::is_sorted(op_table.begin(), op_table.end(),
    [](const OpInfo& a, const OpInfo& b) { return a.op < b.op; }));
}  // namespace

std::optional<OpInfo> op_info(uint16_t code) noexcept
{
    const auto it = std::lower_bound(op_table.begin(), op_table.end(), code,
        [](const OpInfo& i, uint16_t c) { return static_cast<uint16_t>(i.op) < c; });
    if (it == op_table.end() || static_cast<uint16_t>(it->op) != code)
        return std::nullopt;
    return *it;
}

const OpInfo& info(Opcode op) noexcept
{
    return *std::lower_bound(op_table.begin(), op_table.end(), op,
        [](const OpInfo& i, Opcode o) { return i.op < o; });
}

uint32_t natural_alignment(Opcode op) noexcept
{
    return static_cast<uint32_t>(std::countr_zero(unsigned{info(op).access_width}));
}

}  // namespace wrr::wasm
