#include <doctest.h>

#include "cocotree/decompose.hpp"
#include "cocotree/mock_backend.hpp"
#include "support.hpp"

using namespace cocotree;

TEST_CASE("numbered list parsing") {
    SUBCASE("single line") {
        NumberedList list = parse_numbered_list("1. a red ball 2. a blue box", 2);
        CHECK(list.total_found == 2);
        REQUIRE(list.items.size() == 2);
        CHECK(list.items[0] == "a red ball");
        CHECK(list.items[1] == "a blue box");
    }
    SUBCASE("multi line with trailing punctuation") {
        NumberedList list = parse_numbered_list("1. a dog.\n2. a cat;\n3. a bone,", 3);
        REQUIRE(list.items.size() == 3);
        CHECK(list.items[0] == "a dog");
        CHECK(list.items[1] == "a cat");
        CHECK(list.items[2] == "a bone");
    }
    SUBCASE("overflow is counted but truncated") {
        NumberedList list = parse_numbered_list("1. a 2. b 3. c 4. d", 2);
        CHECK(list.total_found == 4);
        REQUIRE(list.items.size() == 2);
        CHECK(list.items[1] == "b");
    }
    SUBCASE("decimals inside items do not split") {
        NumberedList list = parse_numbered_list("1. a 3.5 inch ball 2. a box", 2);
        REQUIRE(list.items.size() == 2);
        CHECK(list.items[0] == "a 3.5 inch ball");
    }
    SUBCASE("empty items are dropped") {
        NumberedList list = parse_numbered_list("1. 2. a box 3. ", 3);
        CHECK(list.total_found == 1);
        CHECK(list.items[0] == "a box");
    }
    SUBCASE("no markers raises a parse error") {
        CHECK_THROWS_AS(parse_numbered_list("just prose, no numbering", 2), Error);
    }
}

namespace {

std::string table(const std::string& body) { return body; }

MockBackend llm_with(const std::string& entries) {
    return MockBackend(table("[" + entries + "]"), "llm", MockBackend::FromString{});
}

}  // namespace

TEST_CASE("decomposition returns exactly m entities") {
    MockBackend llm = llm_with(R"(
        {"role":"llm","slots":{"op":"decompose","caption":"a red ball on a blue box","m":"2"},
         "completion":"1. a red ball 2. a blue box"})");
    std::vector<MorphologicalEntity> entities =
        decompose_caption(llm, nullptr, "a red ball on a blue box", 2);
    REQUIRE(entities.size() == 2);
    CHECK(entities[0].text == "a red ball");
    CHECK(entities[0].index == 1);
    CHECK(entities[1].index == 2);
    CHECK(entities[1].source_caption == "a red ball on a blue box");
}

TEST_CASE("decomposition reprompts once on a bad count, then fails") {
    SUBCASE("wrong count both times fails") {
        MockBackend llm = llm_with(R"(
            {"role":"llm","contains":["Divide the caption"],"completion":"1. only one"})");
        CHECK_THROWS_WITH_AS(decompose_caption(llm, nullptr, "a cat on a mat", 2),
                             doctest::Contains("did not decompose"), Error);
    }
    SUBCASE("the corrective reprompt can rescue the call") {
        MockBackend llm = llm_with(R"(
            {"role":"llm","contains":["previous answer did not follow","Divide the caption"],
             "completion":"1. a cat 2. a mat"},
            {"role":"llm","contains":["Divide the caption"],"completion":"no numbering here"})");
        std::vector<MorphologicalEntity> entities =
            decompose_caption(llm, nullptr, "a cat on a mat", 2);
        REQUIRE(entities.size() == 2);
        CHECK(entities[1].text == "a mat");
    }
}

TEST_CASE("decomposition rejects duplicate or caption-echo entities") {
    SUBCASE("duplicates") {
        MockBackend llm = llm_with(R"(
            {"role":"llm","contains":["Divide the caption"],"completion":"1. a cat 2. a cat"})");
        CHECK_THROWS_AS(decompose_caption(llm, nullptr, "a cat on a mat", 2), Error);
    }
    SUBCASE("echoing the caption") {
        MockBackend llm = llm_with(R"(
            {"role":"llm","contains":["Divide the caption"],
             "completion":"1. a cat on a mat 2. a mat"})");
        CHECK_THROWS_AS(decompose_caption(llm, nullptr, "a cat on a mat", 2), Error);
    }
}

TEST_CASE("decomposition validates m") {
    testsupport::CooperativeBackend llm;
    CHECK_THROWS_AS(decompose_caption(llm, nullptr, "a cat", 0), Error);
}
