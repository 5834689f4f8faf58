#include <doctest.h>

#include "cocotree/mock_backend.hpp"
#include "cocotree/tree.hpp"
#include "support.hpp"

using namespace cocotree;

namespace {

MockBackend llm_from(const std::string& table) {
    return MockBackend(table, "llm", MockBackend::FromString{});
}

}  // namespace

TEST_CASE("cooperative build fills every level") {
    testsupport::CooperativeBackend llm;
    ConceptTree tree = build_tree(llm, nullptr, "a cat sits on a mat", 2, 3, 2);
    tree.validate();
    CHECK(tree.root_caption == "a cat sits on a mat");
    CHECK(tree.entities.size() == 2);
    // 1 + 2 + 2*3 + 2*9
    CHECK(tree.nodes.size() == 27);
    CHECK(tree.degradations.empty());
    for (NodeId id : tree.entities) CHECK(tree.node(id).level == 1);
    int leaves = 0;
    for (const ConceptNode& node : tree.nodes)
        if (node.children.empty()) ++leaves;
    CHECK(leaves == 18);
}

TEST_CASE("expansion failure degrades to a leaf instead of failing the build") {
    MockBackend llm = llm_from(R"([
        {"role":"llm","slots":{"op":"decompose"},"completion":"1. a cat 2. a mat"},
        {"role":"llm","slots":{"op":"expand","node":"a cat"},"completion":"1. fur 2. whiskers"}
    ])");
    ConceptTree tree = build_tree(llm, nullptr, "a cat on a mat", 2, 2, 1);
    tree.validate();
    REQUIRE(tree.degradations.size() == 1);
    CHECK(tree.node(tree.degradations[0].node).text == "a mat");
    CHECK(tree.node(tree.degradations[0].node).children.empty());
    CHECK(tree.nodes.size() == 5);
}

TEST_CASE("decomposition failure fails the build") {
    MockBackend llm = llm_from(R"([])");
    CHECK_THROWS_AS(build_tree(llm, nullptr, "a cat", 2, 2, 1), Error);
}

TEST_CASE("expansion dedup drops ancestor echoes and repeats") {
    MockBackend llm = llm_from(R"([
        {"role":"llm","slots":{"op":"decompose"},"completion":"1. a cat 2. a mat"},
        {"role":"llm","slots":{"op":"expand","node":"a cat"},
         "completion":"1. A CAT 2. fur 3. Fur 4. a cat on a mat 5. paws"},
        {"role":"llm","slots":{"op":"expand","node":"a mat"},"completion":"1. woven 2. flat"}
    ])");
    ConceptTree tree = build_tree(llm, nullptr, "a cat on a mat", 2, 4, 1);
    const ConceptNode& cat = tree.node(tree.entities[0]);
    std::vector<std::string> texts;
    for (NodeId id : cat.children) texts.push_back(tree.node(id).text);
    // truncation to s=4 drops "paws" first; then "A CAT" echoes the parent,
    // "Fur" repeats a sibling, and the caption echoes the root
    CHECK(texts == std::vector<std::string>{"fur"});
}

TEST_CASE("expansion truncates to s but an empty reply degrades") {
    MockBackend llm = llm_from(R"([
        {"role":"llm","slots":{"op":"decompose"},"completion":"1. a cat 2. a mat"},
        {"role":"llm","slots":{"op":"expand","node":"a cat"},
         "completion":"1. fur 2. whiskers 3. paws 4. tail"},
        {"role":"llm","slots":{"op":"expand","node":"a mat"},"completion":"no list at all"}
    ])");
    ConceptTree tree = build_tree(llm, nullptr, "a cat on a mat", 2, 2, 1);
    CHECK(tree.node(tree.entities[0]).children.size() == 2);
    REQUIRE(tree.degradations.size() == 1);
    CHECK(tree.degradations[0].node == tree.entities[1]);
}

TEST_CASE("frontier pruning keeps the configured width") {
    testsupport::CooperativeBackend llm;
    BuildOptions options;
    options.prune_width = 2;
    ConceptTree tree = build_tree(llm, nullptr, "a busy street at night", 3, 3, 2, options);
    tree.validate();
    // level 1 pruned to 2 before expanding, level 2 = 6 pruned to 2, level 3 = 6
    int level2 = 0;
    int level3 = 0;
    for (const ConceptNode& node : tree.nodes) {
        if (node.level == 2) ++level2;
        if (node.level == 3) ++level3;
    }
    CHECK(level2 == 6);
    CHECK(level3 == 6);
}

TEST_CASE("structure validation catches corruption") {
    testsupport::CooperativeBackend llm;
    ConceptTree tree = build_tree(llm, nullptr, "a cat", 2, 2, 1);
    SUBCASE("id/index mismatch") {
        tree.nodes[1].id = 99;
        CHECK_THROWS_AS(tree.validate(), Error);
    }
    SUBCASE("orphan child reference") {
        tree.nodes[0].children.push_back(42);
        CHECK_THROWS_AS(tree.validate(), Error);
    }
    SUBCASE("level jump") {
        tree.nodes.back().level = 7;
        CHECK_THROWS_AS(tree.validate(), Error);
    }
    SUBCASE("duplicate sibling text") {
        NodeId a = tree.node(tree.entities[0]).children[0];
        NodeId b = tree.node(tree.entities[0]).children[1];
        tree.nodes[b].text = tree.nodes[a].text;
        CHECK_THROWS_AS(tree.validate(), Error);
    }
}

TEST_CASE("scoring fills every non-root node with composite values") {
    testsupport::CooperativeBackend llm;
    testsupport::CooperativeBackend vlm;
    ConceptTree tree = build_tree(llm, nullptr, "a cat on a mat", 2, 2, 1);
    ScoreMap scores = score_tree(vlm, llm, nullptr, tree, "https://img.example/cat.png", 0.6);
    CHECK(scores.size() == tree.nodes.size() - 1);
    for (const auto& [id, score] : scores) {
        CHECK(id != 0);
        CHECK(score.l_s > 0.0);
        CHECK(score.l_s < 1.0);
        CHECK(score.c_s >= std::min(score.l_s, score.v_s));
        CHECK(score.c_s <= std::max(score.l_s, score.v_s));
    }
}

TEST_CASE("serialization round trips exactly") {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 20; ++i) {
        ScoreMap scores;
        ConceptTree tree = testsupport::random_tree(rng, 3, 3, 3, &scores);
        std::string doc = serialize_tree(tree, &scores, 0.6);
        TreeDocument loaded = deserialize_tree(doc);
        CHECK(serialize_tree(loaded.tree, loaded.scores ? &*loaded.scores : nullptr,
                             loaded.alpha) == doc);
    }
}

TEST_CASE("unscored documents carry null scores") {
    std::mt19937_64 rng(22);
    ConceptTree tree = testsupport::random_tree(rng, 2, 2, 2, nullptr);
    std::string doc = serialize_tree(tree, nullptr, 0.5);
    TreeDocument loaded = deserialize_tree(doc);
    CHECK_FALSE(loaded.scores.has_value());
    CHECK(loaded.tree.nodes.size() == tree.nodes.size());
    CHECK(serialize_tree(loaded.tree, nullptr, loaded.alpha) == doc);
}

TEST_CASE("deserialization rejects malformed documents") {
    CHECK_THROWS_AS(deserialize_tree("not json"), Error);
    CHECK_THROWS_AS(deserialize_tree("{}"), Error);
    CHECK_THROWS_AS(deserialize_tree(R"({"schema":"something-else"})"), Error);
    std::mt19937_64 rng(23);
    ConceptTree tree = testsupport::random_tree(rng, 2, 2, 2, nullptr);
    std::string doc = serialize_tree(tree, nullptr, 0.5);
    std::string broken = doc;
    size_t pos = broken.find("\"level\": 1");
    REQUIRE(pos != std::string::npos);
    broken.replace(pos, 10, "\"level\": 9");
    CHECK_THROWS_AS(deserialize_tree(broken), Error);
}

TEST_CASE("partial scores surface through the scoring error") {
    MockBackend llm = llm_from(R"([
        {"role":"llm","slots":{"op":"decompose"},"completion":"1. a cat 2. a mat"},
        {"role":"llm","slots":{"op":"expand"},"completion":"1. x 2. y"},
        {"role":"llm","slots":{"hypothesis":"a cat"},"p_yes":0.9},
        {"role":"llm","slots":{"hypothesis":"a mat"},"p_yes":0.8}
    ])");
    // vlm answers only for the entities; children raise protocol errors
    MockBackend vlm = MockBackend(R"([
        {"role":"vlm","slots":{"statement":"a cat"},"p_yes":0.7},
        {"role":"vlm","slots":{"statement":"a mat"},"p_yes":0.6}
    ])", "vlm", MockBackend::FromString{});
    ConceptTree tree = build_tree(llm, nullptr, "a cat on a mat", 2, 2, 1);
    try {
        score_tree(vlm, llm, nullptr, tree, "https://img.example/x.png", 0.5);
        FAIL("expected a scoring error");
    } catch (const ScoringError& e) {
        CHECK(e.code() == ErrorCode::protocol);
        CHECK(e.partial_scores().size() >= 2);
    }
}
