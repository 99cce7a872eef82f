// wrr: WebAssembly record-reduce-replay
// Copyright 2026 The wrr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "support.hpp"

#include "wrr/error.hpp"
#include "wrr/wasm.hpp"

#include <doctest.h>

using namespace wrr;
using namespace wrr::wasm;

namespace
{
const std::vector<uint8_t> preamble{0x00, 0x61, 0x73, 0x6d, 0x01, 0x00, 0x00, 0x00};

std::vector<uint8_t> module_bytes(std::initializer_list<uint8_t> sections)
{
    auto out = preamble;
    out.insert(out.end(), sections);
    return out;
}

bool has_diagnostic_for(const std::vector<Diagnostic>& ds, uint32_t func)
{
    for (const auto& d : ds)
        if (d.func_index == func)
            return true;
    return false;
}
}  // namespace

TEST_SUITE("wasm")
{
    TEST_CASE("empty module")
    {
        const auto m = parse_module(preamble);
        CHECK(m == Module{});
        CHECK(encode_module(Module{}) == preamble);
        CHECK(validate_module(m).empty());
    }

    TEST_CASE("bad preamble")
    {
        CHECK_THROWS_AS(parse_module(std::vector<uint8_t>{0x00, 0x61, 0x73}), MalformedModule);
        CHECK_THROWS_AS(parse_module(std::vector<uint8_t>{0x00, 0x61, 0x73, 0x6d, 0x02, 0, 0, 0}), MalformedModule);
    }

    TEST_CASE("SIMD is rejected")
    {
        // type () -> (); one function: i32.const 0, i8x16.splat, drop, end
        const auto bytes = module_bytes({0x01, 0x04, 0x01, 0x60, 0x00, 0x00, 0x03, 0x02, 0x01, 0x00, 0x0a, 0x09, 0x01,
            0x07, 0x00, 0x41, 0x00, 0xfd, 0x0f, 0x1a, 0x0b});
        try
        {
            parse_module(bytes);
            FAIL("expected UnsupportedFeature");
        }
        catch (const UnsupportedFeature& e)
        {
            CHECK(e.feature() == "simd");
            CHECK(e.error_class() == ErrorClass::Unsupported);
        }
    }

    TEST_CASE("corpus parse/encode fixpoint")
    {
        std::vector<std::string> names = test::corpus_names();
        names.push_back("properties/random_target");
        names.push_back("limitations/post_export_write");
        for (const auto& name : names)
        {
            CAPTURE(name);
            const auto m = test::load_module(name);
            CHECK(validate_module(m).empty());
            const auto once = encode_module(m);
            const auto again = parse_module(once);
            CHECK(again == m);
            CHECK(encode_module(again) == once);
        }
    }

    TEST_CASE("custom sections survive and are emitted last")
    {
        Module m;
        test::add_function(m, {}, {});
        m.customs.push_back({"note", {1, 2, 3}});
        const auto bytes = encode_module(m);
        const auto back = parse_module(bytes);
        REQUIRE(back.customs.size() == 1);
        CHECK(back.customs[0].payload == std::vector<uint8_t>{1, 2, 3});
        // id 0, size 8, name "note", payload
        const std::vector<uint8_t> tail{0x00, 0x08, 0x04, 'n', 'o', 't', 'e', 1, 2, 3};
        CHECK(std::equal(tail.rbegin(), tail.rend(), bytes.rbegin()));
    }

    TEST_CASE("LEB128 is canonical")
    {
        std::vector<uint8_t> out;
        write_u32_leb(out, 624485);
        CHECK(out == std::vector<uint8_t>{0xe5, 0x8e, 0x26});
        out.clear();
        write_s32_leb(out, -123456);
        CHECK(out == std::vector<uint8_t>{0xc0, 0xbb, 0x78});
        out.clear();
        write_s64_leb(out, -1);
        CHECK(out == std::vector<uint8_t>{0x7f});
        out.clear();
        write_u32_leb(out, 0);
        CHECK(out == std::vector<uint8_t>{0x00});
    }

    TEST_CASE("body size limit")
    {
        Module m;
        // locals vector (1 byte) + 15 nops + end = 17 bytes
        test::add_function(m, {}, std::vector<Instruction>(15, make(Opcode::nop)));
        REQUIRE(encode_function_body(m.functions[0]).size() == 17);
        CHECK_NOTHROW(encode_module(m, {17}));
        try
        {
            encode_module(m, {16});
            FAIL("expected LimitExceeded");
        }
        catch (const LimitExceeded& e)
        {
            CHECK(e.func_index == 0);
            CHECK(e.size == 17);
            CHECK(e.limit == 16);
        }
        CHECK(has_diagnostic_for(validate_module(m, {16}), 0));
    }

    TEST_CASE("validator reports the offending function")
    {
        Module m;
        test::add_function(m, {}, {});
        test::add_function(m, {}, {make_i32(1)});
        const auto ds = validate_module(m);
        REQUIRE(ds.size() == 1);
        CHECK(ds[0].func_index == 1);
    }

    TEST_CASE("validator checks call signatures")
    {
        Module m;
        const auto callee = test::add_function(m, {{ValType::I32, ValType::I32}, {}}, {});
        test::add_function(m, {}, {make_i32(1), make_index(Opcode::call, callee)});
        CHECK(has_diagnostic_for(validate_module(m), 1));

        Module wrong_type;
        const auto f = test::add_function(wrong_type, {{ValType::I64}, {}}, {});
        test::add_function(wrong_type, {}, {make_i32(1), make_index(Opcode::call, f)});
        CHECK(has_diagnostic_for(validate_module(wrong_type), 1));

        Module unknown;
        test::add_function(unknown, {}, {make_index(Opcode::call, 7)});
        CHECK(has_diagnostic_for(validate_module(unknown), 0));
    }

    TEST_CASE("validator checks memory and globals")
    {
        Module no_memory;
        test::add_function(no_memory, {{}, {ValType::I32}}, {make_i32(0), make_mem(Opcode::i32_load)});
        CHECK_FALSE(validate_module(no_memory).empty());

        Module immutable;
        immutable.globals.push_back({{ValType::I32, false}, make_i32(0)});
        test::add_function(immutable, {}, {make_i32(1), make_index(Opcode::global_set, 0)});
        CHECK_FALSE(validate_module(immutable).empty());

        Module no_data_count;
        no_data_count.memories.push_back({{1, std::nullopt}});
        no_data_count.datas.push_back({SegmentMode::Passive, 0, {}, {1, 2}});
        test::add_function(no_data_count, {},
            {make_i32(0), make_i32(0), make_i32(2), make_index(Opcode::memory_init, 0)});
        CHECK_FALSE(validate_module(no_data_count).empty());
        no_data_count.data_count = 1;
        CHECK(validate_module(no_data_count).empty());
    }

    TEST_CASE("splice with nothing to replace")
    {
        const auto m = test::load_module("pure_loop");
        CHECK(splice_import_functions(m, {}) == m);
    }

    TEST_CASE("splice replaces imports and keeps defined bodies")
    {
        const auto m = test::load_module("multi_import");
        const auto k = m.imported_function_count();
        REQUIRE(k >= 2);
        std::map<uint32_t, Function> defs;
        for (uint32_t i = 0; i < k; ++i)
        {
            const auto& type = m.function_type(i);
            Function f{m.function_type_index(i), {}, {}};
            for (const auto r : type.results)
            {
                if (r == ValType::I32)
                    f.body.push_back(make_i32(i));
                else if (r == ValType::I64)
                    f.body.push_back(make_i64(i));
                else if (r == ValType::F32)
                    f.body.push_back(make_f32_bits(0));
                else
                    f.body.push_back(make_f64_bits(0));
            }
            f.body.push_back(make(Opcode::end));
            defs[i] = f;
        }
        const auto out = splice_import_functions(m, defs);
        CHECK(out.imported_function_count() == 0);
        CHECK(out.function_count() == m.function_count());
        CHECK(validate_module(out).empty());
        for (uint32_t i = 0; i < m.functions.size(); ++i)
            CHECK(out.functions[k + i] == m.functions[i]);
        for (uint32_t i = 0; i < k; ++i)
            CHECK(out.function_type(i) == m.function_type(i));
        for (const auto& e : m.exports)
            CHECK(out.find_export(e.name)->index == e.index);

        defs.erase(1);
        try
        {
            splice_import_functions(m, defs);
            FAIL("expected MissingReplayFunction");
        }
        catch (const MissingReplayFunction& e)
        {
            CHECK(e.import_index == 1);
        }
    }

    TEST_CASE("module index helpers")
    {
        const auto m = test::load_module("multi_import");
        CHECK(m.function_count() == m.imported_function_count() + m.functions.size());
        CHECK(m.function_import(0) != nullptr);
        CHECK(m.function_import(m.imported_function_count()) == nullptr);
        Module t;
        const auto a = t.intern_type({{ValType::I32}, {}});
        CHECK(t.intern_type({{ValType::I32}, {}}) == a);
        CHECK(t.intern_type({{}, {ValType::I32}}) != a);
    }
}
