// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace wrr
{
/// Failure classes. The CLI maps each class to a process exit code.
enum class ErrorClass
{
    Parse,        ///< malformed trace, module or scenario file
    Unsupported,  ///< feature outside the supported Wasm subset
    Scenario,     ///< link errors, traps, exhausted host scripts
    Divergence,   ///< replay did not reproduce the source trace
    Internal,     ///< everything else (limits, ill-formed inputs)
};

class Error : public std::runtime_error
{
public:
    Error(ErrorClass cls, const std::string& what) : std::runtime_error{what}, m_class{cls} {}

    ErrorClass error_class() const noexcept { return m_class; }

private:
    ErrorClass m_class;
};

/// Bad magic, unknown tag, truncated record or unparsable text line.
class MalformedTrace : public Error
{
public:
    /// `position` is a byte offset for binary input and a 1-based line for text.
    MalformedTrace(std::size_t position, const std::string& reason, bool is_line = false)
      : Error{ErrorClass::Parse, (is_line ? "malformed trace at line " : "malformed trace at offset ") +
                                     std::to_string(position) + ": " + reason},
        m_position{position}
    {}

    std::size_t position() const noexcept { return m_position; }

private:
    std::size_t m_position;
};

class MalformedModule : public Error
{
public:
    MalformedModule(std::size_t offset, const std::string& reason)
      : Error{ErrorClass::Parse,
            "malformed module at offset " + std::to_string(offset) + ": " + reason},
        m_offset{offset}
    {}

    std::size_t offset() const noexcept { return m_offset; }

private:
    std::size_t m_offset;
};

class UnsupportedFeature : public Error
{
public:
    explicit UnsupportedFeature(std::string feature)
      : Error{ErrorClass::Unsupported, "unsupported feature: " + feature},
        m_feature{std::move(feature)}
    {}

    const std::string& feature() const noexcept { return m_feature; }

private:
    std::string m_feature;
};

class LimitExceeded : public Error
{
public:
    LimitExceeded(uint32_t func_index, std::size_t size, std::size_t limit)
      : Error{ErrorClass::Internal, "function " + std::to_string(func_index) + " body is " +
                                        std::to_string(size) + " bytes, limit is " +
                                        std::to_string(limit)},
        func_index{func_index},
        size{size},
        limit{limit}
    {}

    uint32_t func_index;
    std::size_t size;
    std::size_t limit;
};

class MissingReplayFunction : public Error
{
public:
    explicit MissingReplayFunction(uint32_t import_index)
      : Error{ErrorClass::Internal,
            "no replay definition for imported function " + std::to_string(import_index)},
        import_index{import_index}
    {}

    uint32_t import_index;
};

class AlreadyInstrumented : public Error
{
public:
    explicit AlreadyInstrumented(const std::string& module_name)
      : Error{ErrorClass::Internal, "module already imports from '" + module_name + "'"}
    {}
};

class LinkError : public Error
{
public:
    explicit LinkError(const std::string& import_name)
      : Error{ErrorClass::Scenario, "unbound import: " + import_name}, import_name{import_name}
    {}

    std::string import_name;
};

enum class TrapKind
{
    Unreachable,
    IntegerDivByZero,
    IntegerOverflow,
    InvalidConversion,
    OutOfBoundsMemory,
    OutOfBoundsTable,
    UninitializedElement,
    IndirectCallTypeMismatch,
    CallStackExhausted,
    DroppedSegment,
};

const char* to_string(TrapKind kind) noexcept;

class Trap : public Error
{
public:
    Trap(TrapKind kind, uint32_t func_index, uint32_t pc)
      : Error{ErrorClass::Scenario, std::string{"trap: "} + to_string(kind) + " in function " +
                                        std::to_string(func_index) + " at instruction " +
                                        std::to_string(pc)},
        kind{kind},
        func_index{func_index},
        pc{pc}
    {}

    TrapKind kind;
    uint32_t func_index;
    uint32_t pc;
};

class SignatureMismatch : public Error
{
public:
    explicit SignatureMismatch(const std::string& what) : Error{ErrorClass::Scenario, what} {}
};

/// A scripted import was invoked more often than the scenario describes.
class ScenarioExhausted : public Error
{
public:
    ScenarioExhausted(const std::string& import_name, std::size_t call_count)
      : Error{ErrorClass::Scenario, "scenario exhausted for import '" + import_name +
                                        "' at invocation " + std::to_string(call_count)},
        import_name{import_name},
        call_count{call_count}
    {}

    std::string import_name;
    std::size_t call_count;
};

class ScenarioError : public Error
{
public:
    explicit ScenarioError(const std::string& what) : Error{ErrorClass::Scenario, what} {}
};

/// Trace does not nest properly or references unknown functions.
class IllFormedTrace : public Error
{
public:
    IllFormedTrace(std::size_t event_index, const std::string& reason)
      : Error{ErrorClass::Internal,
            "ill-formed trace at event " + std::to_string(event_index) + ": " + reason},
        event_index{event_index}
    {}

    std::size_t event_index;
};

class AddressOutOfShadow : public Error
{
public:
    AddressOutOfShadow(uint32_t memidx, uint64_t address, std::size_t width)
      : Error{ErrorClass::Internal, "access of " + std::to_string(width) + " bytes at " +
                                        std::to_string(address) + " is outside shadow memory " +
                                        std::to_string(memidx)}
    {}
};

class ReplayabilityError : public Error
{
public:
    explicit ReplayabilityError(const std::string& what) : Error{ErrorClass::Internal, what} {}
};

class SplitInfeasible : public Error
{
public:
    explicit SplitInfeasible(const std::string& what) : Error{ErrorClass::Internal, what} {}
};

class UnresolvedExport : public Error
{
public:
    explicit UnresolvedExport(const std::string& what)
      : Error{ErrorClass::Internal, "unresolved export: " + what}
    {}
};

}  // namespace wrr
