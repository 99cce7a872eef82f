// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "wrr/error.hpp"
#include "wrr/wasm.hpp"

namespace wrr::wasm
{
Module splice_import_functions(const Module& m, const std::map<uint32_t, Function>& defs)
{
    const auto k = m.imported_function_count();
    for (uint32_t i = 0; i < k; ++i)
        if (!defs.contains(i))
            throw MissingReplayFunction{i};

    // Function imports occupy indices 0..k-1. Placing the replacements first in the
    // defined list keeps every index stable, so bodies, elems and exports need no remap.
    Module out = m;
    out.imports.clear();
    for (const auto& imp : m.imports)
        if (imp.kind() != ExternKind::Func)
            out.imports.push_back(imp);

    std::vector<Function> functions;
    functions.reserve(k + m.functions.size());
    for (uint32_t i = 0; i < k; ++i)
    {
        auto f = defs.at(i);
        if (m.types.size() <= f.type_index || m.types[f.type_index] != m.function_type(i))
            throw Error{ErrorClass::Internal,
                "replay definition for import " + std::to_string(i) + " has the wrong type"};
        functions.push_back(std::move(f));
    }
    functions.insert(functions.end(), m.functions.begin(), m.functions.end());
    out.functions = std::move(functions);
    return out;
}

}  // namespace wrr::wasm
