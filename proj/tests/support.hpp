// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "wrr/harness.hpp"
#include "wrr/replay_ir.hpp"
#include "wrr/scenario.hpp"
#include "wrr/trace.hpp"
#include "wrr/wasm.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace wrr::test
{
std::filesystem::path corpus_dir();

struct Fixture
{
    std::string name;
    wasm::Module module;
    HostScenario scenario;
};

/// Names of the top-level corpus scenarios, sorted.
std::vector<std::string> corpus_names();

/// Loads `<corpus>/<name>.wasm` and `<corpus>/<name>.json`; `name` may contain a subdirectory.
Fixture load_fixture(const std::string& name);
wasm::Module load_module(const std::string& name);

/// Appends an import of `type` and returns its function index. Imports must precede definitions.
uint32_t add_import(wasm::Module& m, const std::string& module, const std::string& name, const wasm::FuncType& type);

/// Appends a defined function; `body` gets its trailing `end` here. Returns the function index.
uint32_t add_function(wasm::Module& m, const wasm::FuncType& type, std::vector<wasm::Instruction> body,
    std::vector<wasm::Local> locals = {});

/// One page of memory exported as "memory", import 0 = env.f () -> i32, and export "run"
/// (function 1) returning f() plus the byte at 1003.
wasm::Module translate_example_module();

/// Seeded generator with the helpers the property tests need.
class Rng
{
public:
    explicit Rng(uint64_t seed) : m_engine{seed} {}

    uint64_t bits() { return m_engine(); }
    /// Uniform in [lo, hi].
    uint64_t range(uint64_t lo, uint64_t hi) { return std::uniform_int_distribution<uint64_t>{lo, hi}(m_engine); }
    bool chance(double p) { return std::bernoulli_distribution{p}(m_engine); }
    std::vector<uint8_t> bytes(std::size_t n);
    template <class T>
    const T& pick(const std::vector<T>& v)
    {
        return v.at(range(0, v.size() - 1));
    }

private:
    std::mt19937_64 m_engine;
};

/// A value of the given kind with random bits, NaN payloads included.
Value random_value(Rng& rng, ValueKind kind);
/// A value usable as a parameter or result (no sub-word kinds).
Value random_number(Rng& rng);
TraceEvent random_event(Rng& rng);
Trace random_trace(Rng& rng, std::size_t max_events);

/// A scenario for corpus/properties/random_target covering writes, global writes,
/// nested export calls and memory growth. With `replayable`, a host behavior makes its
/// nested export calls only after its writes.
HostScenario random_target_scenario(Rng& rng, bool replayable = false);

/// Raw trace of `m` (instrumented on the fly) under `s`.
Trace record_raw(const wasm::Module& m, const HostScenario& s);

/// Expands CallAux actions in place, giving the action sequence a context performs.
std::vector<ir::Action> flatten(const ir::Replay& r, const ir::Context& c);

}  // namespace wrr::test
