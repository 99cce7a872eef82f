// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "wrr/trace.hpp"

#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace wrr
{
namespace host
{
struct WriteMemory
{
    uint32_t memidx = 0;
    uint32_t addr = 0;
    std::vector<uint8_t> bytes;
    friend bool operator==(const WriteMemory&, const WriteMemory&) = default;
};

struct WriteGlobal
{
    uint32_t globalidx = 0;
    Value value;
    friend bool operator==(const WriteGlobal&, const WriteGlobal&) = default;
};

struct CallExport
{
    std::string name;
    std::vector<Value> args;
    friend bool operator==(const CallExport&, const CallExport&) = default;
};
}  // namespace host

using HostAction = std::variant<host::WriteMemory, host::WriteGlobal, host::CallExport>;

/// What the host does during one invocation of an import: side effects, then results.
struct ImportBehavior
{
    std::vector<HostAction> pre;
    std::vector<Value> results;
    friend bool operator==(const ImportBehavior&, const ImportBehavior&) = default;
};

struct InvokeExport
{
    std::string name;
    std::vector<Value> args;
    friend bool operator==(const InvokeExport&, const InvokeExport&) = default;
};

/// A deterministic script of host behavior. `imports[f][i]` governs the i-th call of f.
struct HostScenario
{
    std::vector<InvokeExport> steps;
    std::map<std::string, std::vector<ImportBehavior>> imports;
    friend bool operator==(const HostScenario&, const HostScenario&) = default;
};

HostScenario parse_scenario(std::string_view json);
std::string scenario_to_json(const HostScenario& scenario);

}  // namespace wrr
