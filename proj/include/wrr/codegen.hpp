// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "wrr/replay_ir.hpp"
#include "wrr/wasm.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wrr
{
enum class OutputFormat
{
    SelfContainedWasm,
    JsReplay,
    DynamicLinking,
};

const char* format_name(OutputFormat f) noexcept;
/// Accepts the full names and the short forms self, js and dynamic.
std::optional<OutputFormat> parse_format(std::string_view s) noexcept;

struct Artifact
{
    std::string name;
    std::vector<uint8_t> bytes;
};

struct ReplayBundle
{
    OutputFormat format = OutputFormat::SelfContainedWasm;
    /// Exported entry function, or the script to run.
    std::string entry;
    std::string source_trace_hash;
    std::string toolchain_version = WRR_VERSION;
    std::vector<Artifact> artifacts;
    std::vector<std::string> notes;

    const Artifact* find(std::string_view name) const noexcept;
};

struct CodegenOptions
{
    std::size_t body_size_limit = wasm::default_body_size_limit;
    std::string source_trace_hash;
};

/// The spliced, import-free module before encoding.
wasm::Module build_self_contained(const wasm::Module& original, const ir::Replay& r,
    std::vector<std::string>* notes = nullptr);

ReplayBundle gen_self_contained(const wasm::Module& original, const ir::Replay& r, const CodegenOptions& options = {});
ReplayBundle gen_js_replay(const wasm::Module& original, const ir::Replay& r, const CodegenOptions& options = {});
ReplayBundle gen_dynamic_linking(const wasm::Module& original, const ir::Replay& r, const CodegenOptions& options = {});
ReplayBundle generate(OutputFormat format, const wasm::Module& original, const ir::Replay& r,
    const CodegenOptions& options = {});

std::string manifest_json(const ReplayBundle& bundle);

/// Writes every artifact and manifest.json into `dir`, each file via rename.
void write_bundle(const ReplayBundle& bundle, const std::filesystem::path& dir);
ReplayBundle read_bundle(const std::filesystem::path& dir);

/// Writes `bytes` to a sibling temporary and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::span<const uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);
std::vector<uint8_t> read_file(const std::filesystem::path& path);

}  // namespace wrr
