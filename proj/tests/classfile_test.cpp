#include "bcrepair/classfile.hpp"

#include <algorithm>
#include <random>

#include "bcrepair/codemodel.hpp"
#include "doctest.h"
#include "support/fixtures.hpp"

using namespace bcrepair;
using testsupport::corpus_files;
using testsupport::load_corpus;

TEST_CASE("bad magic is rejected at offset 0") {
    Bytes zeros(16, 0);
    try {
        parse_class(zeros);
        FAIL("expected MalformedClass");
    } catch (const MalformedClass& e) {
        CHECK(e.offset == 0);
    }
}

TEST_CASE("truncated stream reports the fault offset") {
    Bytes header = {0xCA, 0xFE, 0xBA, 0xBE, 0x00, 0x00};
    try {
        parse_class(header);
        FAIL("expected MalformedClass");
    } catch (const MalformedClass& e) {
        CHECK(e.offset >= 6);
    }
}

TEST_CASE("version window 45.0..61.0") {
    ClassFile cf = load_corpus("Empty_v52.class");
    auto with_version = [&](u2 major, u2 minor) {
        Bytes b = emit_class(cf);
        b[4] = static_cast<u1>(minor >> 8);
        b[5] = static_cast<u1>(minor);
        b[6] = static_cast<u1>(major >> 8);
        b[7] = static_cast<u1>(major);
        return b;
    };
    CHECK_NOTHROW(parse_class(with_version(45, 3)));
    CHECK_NOTHROW(parse_class(with_version(61, 0)));
    CHECK_THROWS_AS(parse_class(with_version(44, 0)), MalformedClass);
    CHECK_THROWS_AS(parse_class(with_version(62, 0)), MalformedClass);
    CHECK_THROWS_AS(parse_class(with_version(61, 1)), MalformedClass);
}

TEST_CASE("empty class fixture parses to the expected shape") {
    ClassFile cf = load_corpus("Empty_v52.class");
    CHECK(cf.name() == "corpus/Empty");
    CHECK(cf.super_name() == "java/lang/Object");
    REQUIRE(cf.methods.size() == 1);
    CHECK(cf.methods[0].name == "<init>");
    CHECK(cf.methods[0].descriptor == "()V");
    REQUIRE(cf.methods[0].code.has_value());
}

TEST_CASE("long constants occupy two slots with a phantom") {
    ClassFile cf = load_corpus("LongArith_v52.class");
    bool found = false;
    const auto& slots = cf.pool.slots();
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].tag != CpTag::Long) continue;
        found = true;
        REQUIRE(i + 1 < slots.size());
        CHECK(slots[i + 1].tag == CpTag::Phantom);
        CHECK_FALSE(cf.pool.valid_index(static_cast<u2>(i + 2)));
    }
    CHECK(found);
}

TEST_CASE("round-trip: emit(parse(f)) == f over the whole corpus") {
    int checked = 0;
    for (const std::string& path : corpus_files()) {
        Bytes original = read_file(path);
        ClassFile cf = parse_class(original);
        Bytes again = emit_class(cf);
        if (again != original) {
            CAPTURE(path);
            REQUIRE(again == original);
        }
        ++checked;
    }
    CHECK(checked >= 100);
}

TEST_CASE("round-trip holds for the unsorted-line-table oddity") {
    std::string path = testsupport::fixtures_dir() + "/weird/UnsortedLnt.class";
    Bytes original = read_file(path);
    ClassFile cf = parse_class(original);
    CHECK(emit_class(cf) == original);
    // The decoded view is canonicalized ascending even though raw is not.
    const auto& lnt = *cf.methods[1].code->line_numbers;
    for (std::size_t i = 1; i < lnt.size(); ++i) {
        CHECK(lnt[i - 1].start_pc <= lnt[i].start_pc);
    }
}

TEST_CASE("pool appends dedupe and never renumber") {
    ClassFile cf = load_corpus("Arith_v52.class");
    std::vector<CpEntry> before(cf.pool.slots());
    u2 a = cf.pool.add_class("probe/One");
    u2 b = cf.pool.add_string("hello");
    u2 c = cf.pool.add_methodref("probe/One", "go", "()V");
    CHECK(cf.pool.add_class("probe/One") == a);
    CHECK(cf.pool.add_string("hello") == b);
    CHECK(cf.pool.add_methodref("probe/One", "go", "()V") == c);
    for (std::size_t i = 0; i < before.size(); ++i) {
        CHECK(cf.pool.slots()[i].tag == before[i].tag);
        CHECK(cf.pool.slots()[i].utf8 == before[i].utf8);
        CHECK(cf.pool.slots()[i].index1 == before[i].index1);
    }
}

TEST_CASE("appended string constant changes only the pool region") {
    std::string path = testsupport::corpus_file("Empty_v52.class");
    Bytes original = read_file(path);
    ClassFile cf = parse_class(original);

    std::size_t slots_before = cf.pool.slot_count();
    cf.pool.add_string("probe-string");
    Bytes patched = emit_class(cf);

    // Hand-construct the expected bytes: bump the count, splice the two new
    // entries (Utf8 then String) at the end of the pool region.
    std::size_t pool_end = 10;
    {
        ByteReader r{std::span<const u1>(original.data(), original.size())};
        r.skip(8);
        u2 count = r.read_u2();
        for (u2 i = 1; i < count; ++i) {
            u1 tag = r.read_u1();
            switch (static_cast<CpTag>(tag)) {
                case CpTag::Utf8: {
                    u2 len = r.read_u2();
                    r.skip(len);
                    break;
                }
                case CpTag::Integer: case CpTag::Float: r.skip(4); break;
                case CpTag::Long: case CpTag::Double: r.skip(8); ++i; break;
                case CpTag::Class: case CpTag::String: case CpTag::MethodType:
                    r.skip(2);
                    break;
                case CpTag::MethodHandle: r.skip(3); break;
                default: r.skip(4); break;
            }
        }
        pool_end = r.offset();
    }
    Bytes expected(original.begin(), original.begin() + 8);
    ByteWriter w;
    w.write_u2(static_cast<u2>(slots_before + 2 + 1));
    Bytes count_bytes = w.take();
    expected.insert(expected.end(), count_bytes.begin(), count_bytes.end());
    expected.insert(expected.end(), original.begin() + 10, original.begin() + pool_end);
    ByteWriter entries;
    std::string s = "probe-string";
    entries.write_u1(1);  // Utf8
    entries.write_u2(static_cast<u2>(s.size()));
    entries.write_string(s);
    entries.write_u1(8);  // String
    entries.write_u2(static_cast<u2>(slots_before + 1));
    Bytes entry_bytes = entries.take();
    expected.insert(expected.end(), entry_bytes.begin(), entry_bytes.end());
    expected.insert(expected.end(), original.begin() + pool_end, original.end());

    CHECK(patched == expected);
}

TEST_CASE("oversized pools are unencodable") {
    ClassFile cf = load_corpus("Empty_v52.class");
    CpEntry filler;
    filler.tag = CpTag::Integer;
    while (cf.pool.slot_count() < 65536) {
        filler.data32 = static_cast<u4>(cf.pool.slot_count());
        cf.pool.push_entry(filler);
    }
    CHECK_THROWS_AS(emit_class(cf), UnencodableClass);
}

TEST_CASE("unknown constant tags are malformed") {
    Bytes b = emit_class(load_corpus("Empty_v52.class"));
    // First pool entry starts at offset 10; stomp its tag.
    b[10] = 19;  // Module tag: outside the supported vocabulary
    CHECK_THROWS_AS(parse_class(b), MalformedClass);
}

TEST_CASE("validate_structure: clean fixtures have no faults") {
    for (const std::string name :
         {"Empty_v52.class", "Arith_v52.class", "Switches_v52.class", "TryCatch_v52.class"}) {
        ClassFile cf = load_corpus(name);
        CHECK(validate_structure(cf).empty());
    }
}

TEST_CASE("validate_structure: handler pc inside an instruction is reported") {
    Bytes original = read_file(testsupport::corpus_file("TryCatch_v49.class"));
    ClassFile cf = parse_class(original);
    const MemberInfo* m = cf.find_method("safeDiv", "(II)I");
    REQUIRE(m);
    const ExceptionTableEntry& entry = m->code->exception_table[0];
    // Locate the 8-byte exception-table row in the raw bytes and point the
    // handler into the middle of the leading bipush.
    ByteWriter pattern;
    pattern.write_u2(entry.start_pc);
    pattern.write_u2(entry.end_pc);
    pattern.write_u2(entry.handler_pc);
    pattern.write_u2(entry.catch_type);
    Bytes pat = pattern.take();
    auto it = std::search(original.begin(), original.end(), pat.begin(), pat.end());
    REQUIRE(it != original.end());
    std::size_t off = static_cast<std::size_t>(it - original.begin());
    original[off + 4] = 0;
    original[off + 5] = 1;  // pc 1 = the bipush operand byte

    ClassFile corrupted = parse_class(original);
    std::vector<StructuralFault> faults = validate_structure(corrupted);
    REQUIRE(faults.size() == 1);
    CHECK(faults[0].where.find("safeDiv") != std::string::npos);
    CHECK(faults[0].message.find("pc 1") != std::string::npos);
}

TEST_CASE("validate_structure: member reference with invalid descriptor") {
    ClassFile cf = load_corpus("Empty_v52.class");
    // A Fieldref whose NameAndType descriptor slot holds garbage.
    u2 garbage = cf.pool.add_utf8("not-a-descriptor");
    u2 name = cf.pool.add_utf8("f");
    CpEntry nat;
    nat.tag = CpTag::NameAndType;
    nat.index1 = name;
    nat.index2 = garbage;
    cf.pool.push_entry(nat);
    u2 nat_idx = static_cast<u2>(cf.pool.slot_count());
    CpEntry ref;
    ref.tag = CpTag::Fieldref;
    ref.index1 = cf.pool.add_class("probe/Owner");
    ref.index2 = nat_idx;
    cf.pool.push_entry(ref);

    std::vector<StructuralFault> faults = validate_structure(cf);
    REQUIRE(faults.size() == 1);
    CHECK(faults[0].message.find("invalid descriptor") != std::string::npos);
}

TEST_CASE("parser totality: fuzzed inputs never escape MalformedClass") {
    std::mt19937 rng(0xC0FFEE);
    auto try_parse = [](const Bytes& b) {
        try {
            ClassFile cf = parse_class(b);
            (void)cf;
        } catch (const MalformedClass&) {
        }
    };
    // Pure noise.
    for (int i = 0; i < 1500; ++i) {
        std::uniform_int_distribution<int> len(0, 200);
        Bytes b(static_cast<std::size_t>(len(rng)));
        for (u1& byte : b) byte = static_cast<u1>(rng());
        try_parse(b);
    }
    // Valid prefix, noisy suffix.
    Bytes seed = read_file(testsupport::corpus_file("Switches_v52.class"));
    for (int i = 0; i < 800; ++i) {
        Bytes b = seed;
        std::uniform_int_distribution<std::size_t> pos(0, b.size() - 1);
        std::uniform_int_distribution<int> nflips(1, 8);
        int flips = nflips(rng);
        for (int k = 0; k < flips; ++k) b[pos(rng)] = static_cast<u1>(rng());
        try_parse(b);
    }
}
