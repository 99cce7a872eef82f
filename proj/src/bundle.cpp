// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "wrr/codegen.hpp"
#include "wrr/error.hpp"

#include <json.hpp>

#include <fstream>
#include <iterator>

namespace wrr
{
const Artifact* ReplayBundle::find(std::string_view name) const noexcept
{
    for (const auto& a : artifacts)
        if (a.name == name)
            return &a;
    return nullptr;
}

std::string manifest_json(const ReplayBundle& bundle)
{
    nlohmann::ordered_json doc;
    doc["format"] = format_name(bundle.format);
    doc["entry"] = bundle.entry;
    doc["source_trace_hash"] = bundle.source_trace_hash;
    doc["toolchain_version"] = bundle.toolchain_version;
    auto& artifacts = doc["artifacts"] = nlohmann::ordered_json::array();
    for (const auto& a : bundle.artifacts)
        artifacts.push_back({{"name", a.name}, {"size", a.bytes.size()}});
    doc["notes"] = bundle.notes;
    return doc.dump(2) + "\n";
}

std::vector<uint8_t> read_file(const std::filesystem::path& path)
{
    std::ifstream in{path, std::ios::binary};
    if (!in)
        throw Error{ErrorClass::Parse, "cannot read " + path.string()};
    return {std::istreambuf_iterator<char>{in}, std::istreambuf_iterator<char>{}};
}

void write_file_atomic(const std::filesystem::path& path, std::span<const uint8_t> bytes)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out{tmp, std::ios::binary | std::ios::trunc};
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out.flush())
            throw Error{ErrorClass::Internal, "cannot write " + tmp.string()};
    }
    std::filesystem::rename(tmp, path);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view text)
{
    write_file_atomic(path, std::span{reinterpret_cast<const uint8_t*>(text.data()), text.size()});
}

void write_bundle(const ReplayBundle& bundle, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    for (const auto& a : bundle.artifacts)
        write_file_atomic(dir / a.name, a.bytes);
    // The manifest goes last so a readable manifest implies complete artifacts.
    write_file_atomic(dir / "manifest.json", manifest_json(bundle));
}

ReplayBundle read_bundle(const std::filesystem::path& dir)
{
    const auto text = read_file(dir / "manifest.json");
    nlohmann::json doc;
    try
    {
        doc = nlohmann::json::parse(text.begin(), text.end());
    }
    catch (const nlohmann::json::exception& e)
    {
        throw Error{ErrorClass::Parse, "manifest.json: " + std::string{e.what()}};
    }
    ReplayBundle b;
    try
    {
        const auto format = parse_format(doc.at("format").get<std::string>());
        if (!format)
            throw Error{ErrorClass::Parse, "manifest.json: unknown format"};
        b.format = *format;
        b.entry = doc.at("entry").get<std::string>();
        b.source_trace_hash = doc.at("source_trace_hash").get<std::string>();
        b.toolchain_version = doc.at("toolchain_version").get<std::string>();
        for (const auto& a : doc.at("artifacts"))
        {
            const auto name = a.at("name").get<std::string>();
            b.artifacts.push_back({name, read_file(dir / name)});
        }
        if (doc.contains("notes"))
            b.notes = doc["notes"].get<std::vector<std::string>>();
    }
    catch (const nlohmann::json::exception& e)
    {
        throw Error{ErrorClass::Parse, "manifest.json: " + std::string{e.what()}};
    }
    return b;
}

}  // namespace wrr
