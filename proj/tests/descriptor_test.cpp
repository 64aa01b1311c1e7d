#include "bcrepair/descriptor.hpp"

#include "doctest.h"

using namespace bcrepair;

TEST_CASE("field descriptor grammar") {
    CHECK(is_valid_field_descriptor("I"));
    CHECK(is_valid_field_descriptor("Ljava/lang/String;"));
    CHECK(is_valid_field_descriptor("[[D"));
    CHECK(is_valid_field_descriptor("[Ljava/util/List;"));
    CHECK_FALSE(is_valid_field_descriptor(""));
    CHECK_FALSE(is_valid_field_descriptor("X"));
    CHECK_FALSE(is_valid_field_descriptor("L;"));
    CHECK_FALSE(is_valid_field_descriptor("Ljava/lang/String"));
    CHECK_FALSE(is_valid_field_descriptor("II"));
    CHECK_FALSE(is_valid_field_descriptor("["));
}

TEST_CASE("method descriptor grammar and parts") {
    CHECK(is_valid_method_descriptor("()V"));
    CHECK(is_valid_method_descriptor("(II[Ljava/lang/String;)J"));
    CHECK_FALSE(is_valid_method_descriptor("()"));
    CHECK_FALSE(is_valid_method_descriptor("(V)V"));
    CHECK_FALSE(is_valid_method_descriptor("I"));

    MethodDescriptor md = parse_method_descriptor("(IJLjava/lang/Object;)D");
    REQUIRE(md.params.size() == 3);
    CHECK(md.params[0] == "I");
    CHECK(md.params[1] == "J");
    CHECK(md.params[2] == "Ljava/lang/Object;");
    CHECK(md.ret == "D");
    CHECK(arg_slots("(IJLjava/lang/Object;)D") == 4);
    CHECK(slot_width("J") == 2);
    CHECK(slot_width("V") == 0);
    CHECK(slot_width("[J") == 1);
    CHECK(class_of_descriptor("Ljava/util/Map;") == "java/util/Map");
    CHECK(class_of_descriptor("[I").empty());
}
