// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "wrr/scenario.hpp"
#include "wrr/error.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>

namespace wrr
{
namespace
{
using nlohmann::json;

[[noreturn]] void bad(const std::string& what)
{
    throw Error{ErrorClass::Parse, "malformed scenario: " + what};
}

uint64_t parse_integer(const json& v, bool allow_hex)
{
    if (v.is_number_unsigned())
        return v.get<uint64_t>();
    if (v.is_number_integer())
        return static_cast<uint64_t>(v.get<int64_t>());
    if (!v.is_string())
        bad("expected an integer, got " + v.dump());
    const auto s = v.get<std::string>();
    std::string_view body{s};
    int base = 10;
    if (allow_hex && (body.starts_with("0x") || body.starts_with("0X")))
    {
        body.remove_prefix(2);
        base = 16;
    }
    bool negative = false;
    if (base == 10 && body.starts_with("-"))
    {
        negative = true;
        body.remove_prefix(1);
    }
    uint64_t out = 0;
    const auto [end, ec] = std::from_chars(body.data(), body.data() + body.size(), out, base);
    if (ec != std::errc{} || end != body.data() + body.size() || body.empty())
        bad("invalid integer '" + s + "'");
    return negative ? ~out + 1 : out;
}

Value parse_value(const json& v)
{
    if (!v.is_object() || !v.contains("kind") || !v.contains("value"))
        bad("value must be {\"kind\", \"value\"}: " + v.dump());
    const auto kind = v.at("kind").get<std::string>();
    const auto& payload = v.at("value");
    if (kind == "i32")
        return Value::truncated(ValueKind::I32, parse_integer(payload, true));
    if (kind == "i64")
        return Value::i64(parse_integer(payload, true));
    if (kind == "f32")
        return Value::truncated(ValueKind::F32, parse_integer(payload, true));
    if (kind == "f64")
        return Value::f64_bits(parse_integer(payload, true));
    bad("unknown value kind '" + kind + "'");
}

std::vector<Value> parse_values(const json& v)
{
    std::vector<Value> out;
    if (v.is_null())
        return out;
    if (!v.is_array())
        bad("expected an array of values");
    for (const auto& item : v)
        out.push_back(parse_value(item));
    return out;
}

std::vector<uint8_t> parse_hex(const std::string& s)
{
    if (s.size() % 2 != 0)
        bad("odd-length hex string");
    std::vector<uint8_t> out(s.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i)
    {
        const auto [end, ec] = std::from_chars(s.data() + 2 * i, s.data() + 2 * i + 2, out[i], 16);
        if (ec != std::errc{} || end != s.data() + 2 * i + 2)
            bad("invalid hex string '" + s + "'");
    }
    return out;
}

HostAction parse_action(const json& a)
{
    if (a.contains("writeMem"))
    {
        const auto& w = a.at("writeMem");
        return host::WriteMemory{static_cast<uint32_t>(w.value("mem", 0)),
            static_cast<uint32_t>(parse_integer(w.at("addr"), true)),
            parse_hex(w.at("bytes_hex").get<std::string>())};
    }
    if (a.contains("writeGlobal"))
    {
        const auto& w = a.at("writeGlobal");
        return host::WriteGlobal{w.at("idx").get<uint32_t>(), parse_value(w.at("value"))};
    }
    if (a.contains("callExport"))
    {
        const auto& c = a.at("callExport");
        return host::CallExport{c.at("name").get<std::string>(), parse_values(c.value("args", json{}))};
    }
    bad("unknown host action " + a.dump());
}

json value_json(const Value& v)
{
    char buf[24];
    switch (v.kind)
    {
    case ValueKind::I32:
        return {{"kind", "i32"}, {"value", static_cast<int32_t>(v.bits)}};
    case ValueKind::I64:
        return {{"kind", "i64"}, {"value", std::to_string(static_cast<int64_t>(v.bits))}};
    case ValueKind::F32:
        std::snprintf(buf, sizeof buf, "0x%08llx", static_cast<unsigned long long>(v.bits));
        return {{"kind", "f32"}, {"value", buf}};
    case ValueKind::F64:
        std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v.bits));
        return {{"kind", "f64"}, {"value", buf}};
    default:
        throw Error{ErrorClass::Internal, "sub-word value in scenario"};
    }
}

json values_json(const std::vector<Value>& vs)
{
    json out = json::array();
    for (const auto& v : vs)
        out.push_back(value_json(v));
    return out;
}
}  // namespace

HostScenario parse_scenario(std::string_view text)
{
    json doc;
    try
    {
        doc = json::parse(text);
    }
    catch (const json::exception& e)
    {
        bad(e.what());
    }
    HostScenario s;
    try
    {
        for (const auto& step : doc.value("steps", json::array()))
        {
            const auto& inv = step.at("invoke");
            s.steps.push_back({inv.at("name").get<std::string>(), parse_values(inv.value("args", json{}))});
        }
        const auto imports = doc.value("imports", json::object());
        for (const auto& [name, behaviors] : imports.items())
        {
            auto& list = s.imports[name];
            for (const auto& b : behaviors)
            {
                ImportBehavior ib;
                for (const auto& a : b.value("pre", json::array()))
                    ib.pre.push_back(parse_action(a));
                ib.results = parse_values(b.value("results", json{}));
                list.push_back(std::move(ib));
            }
        }
    }
    catch (const json::exception& e)
    {
        bad(e.what());
    }
    return s;
}

std::string scenario_to_json(const HostScenario& s)
{
    json doc;
    doc["steps"] = json::array();
    for (const auto& step : s.steps)
        doc["steps"].push_back({{"invoke", {{"name", step.name}, {"args", values_json(step.args)}}}});
    doc["imports"] = json::object();
    for (const auto& [name, behaviors] : s.imports)
    {
        json list = json::array();
        for (const auto& b : behaviors)
        {
            json pre = json::array();
            for (const auto& a : b.pre)
            {
                std::visit(
                    [&pre](const auto& act) {
                        using T = std::decay_t<decltype(act)>;
                        if constexpr (std::is_same_v<T, host::WriteMemory>)
                        {
                            std::string hex;
                            char buf[3];
                            for (const auto byte : act.bytes)
                            {
                                std::snprintf(buf, sizeof buf, "%02x", byte);
                                hex += buf;
                            }
                            pre.push_back({{"writeMem", {{"mem", act.memidx}, {"addr", act.addr}, {"bytes_hex", hex}}}});
                        }
                        else if constexpr (std::is_same_v<T, host::WriteGlobal>)
                            pre.push_back({{"writeGlobal", {{"idx", act.globalidx}, {"value", value_json(act.value)}}}});
                        else
                            pre.push_back({{"callExport", {{"name", act.name}, {"args", values_json(act.args)}}}});
                    },
                    a);
            }
            list.push_back({{"pre", pre}, {"results", values_json(b.results)}});
        }
        doc["imports"][name] = list;
    }
    return doc.dump(2) + "\n";
}

}  // namespace wrr
