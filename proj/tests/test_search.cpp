#include <algorithm>

#include <doctest.h>

#include "cocotree/search.hpp"
#include "support.hpp"

using namespace cocotree;

namespace {

// Small fixed tree: two entities, one with two children, one barren.
//        root
//       /    \
//   e0(.9)  e1(.5)
//    /  \
// a(.2) b(.8)
ConceptTree small_tree() {
    ConceptTree tree;
    tree.root_caption = "root";
    tree.params = {2, 2, 1};
    tree.nodes = {
        {0, "root", 0, std::nullopt, {1, 2}},
        {1, "e0", 1, 0, {3, 4}},
        {2, "e1", 1, 0, {}},
        {3, "a", 2, 1, {}},
        {4, "b", 2, 1, {}},
    };
    tree.entities = {1, 2};
    tree.validate();
    return tree;
}

ScoreMap small_scores() {
    ScoreMap scores;
    scores[1] = {1, 0.9, 0.9, 0.9, ""};
    scores[2] = {2, 0.5, 0.5, 0.5, ""};
    scores[3] = {3, 0.2, 0.2, 0.2, ""};
    scores[4] = {4, 0.8, 0.8, 0.8, ""};
    return scores;
}

}  // namespace

TEST_CASE("path enumeration lists every entity-to-leaf path") {
    ConceptTree tree = small_tree();
    ScoreMap scores = small_scores();
    std::vector<ReasoningPath> paths = enumerate_paths(tree, scores);
    REQUIRE(paths.size() == 3);
    CHECK(paths[0].node_ids == std::vector<NodeId>{1, 3});
    CHECK(paths[1].node_ids == std::vector<NodeId>{1, 4});
    CHECK(paths[2].node_ids == std::vector<NodeId>{2});
    CHECK(paths[1].weight == doctest::Approx(0.85));
    CHECK(paths[2].weight == doctest::Approx(0.5));
    CHECK(leaf_path_count(tree) == 3);
}

TEST_CASE("enumeration requires complete scores") {
    ConceptTree tree = small_tree();
    ScoreMap scores = small_scores();
    scores.erase(4);
    CHECK_THROWS_AS(enumerate_paths(tree, scores), Error);
}

TEST_CASE("greedy follows the best child, not the best path") {
    ConceptTree tree = small_tree();
    ScoreMap scores = small_scores();
    // greedy picks e0 (0.9), then b (0.8): the actual best path here
    ReasoningPath greedy = greedy_search(tree, scores);
    CHECK(greedy.node_ids == std::vector<NodeId>{1, 4});

    // sink e0's children so greedy still commits to e0 but the best path is e1
    scores[3].c_s = 0.05;
    scores[4].c_s = 0.02;
    greedy = greedy_search(tree, scores);
    CHECK(greedy.node_ids == std::vector<NodeId>{1, 3});
    CHECK(greedy.weight == doctest::Approx(0.475));
    std::vector<ReasoningPath> all = enumerate_paths(tree, scores);
    double best = 0.0;
    for (const ReasoningPath& path : all) best = std::max(best, path.weight);
    CHECK(best == doctest::Approx(0.5));
    CHECK(beam_search(tree, scores, 3).weight == doctest::Approx(0.5));
}

TEST_CASE("beam ties break toward the lexicographically smaller text sequence") {
    ConceptTree tree = small_tree();
    ScoreMap scores = small_scores();
    scores[3].c_s = 0.8;  // paths e0>a and e0>b now tie at 0.85
    ReasoningPath path = beam_search(tree, scores, 3);
    CHECK(path.node_ids == std::vector<NodeId>{1, 3});
    CHECK(path.texts(tree) == std::vector<std::string>{"e0", "a"});
}

TEST_CASE("beam with k at least the leaf count equals exhaustive search") {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 100; ++i) {
        ScoreMap scores;
        ConceptTree tree = testsupport::random_tree(rng, 3, 4, 4, &scores);
        std::vector<ReasoningPath> all = enumerate_paths(tree, scores);
        double best = 0.0;
        for (const ReasoningPath& path : all) best = std::max(best, path.weight);
        ReasoningPath beam = beam_search(tree, scores, leaf_path_count(tree));
        CHECK(beam.weight == best);
    }
}

TEST_CASE("beam width one equals greedy") {
    std::mt19937_64 rng(32);
    for (int i = 0; i < 100; ++i) {
        ScoreMap scores;
        ConceptTree tree = testsupport::random_tree(rng, 3, 4, 4, &scores);
        ReasoningPath beam = beam_search(tree, scores, 1);
        ReasoningPath greedy = greedy_search(tree, scores);
        CHECK(beam.node_ids == greedy.node_ids);
        CHECK(beam.weight == greedy.weight);
    }
}

TEST_CASE("beam quality never decreases with width") {
    std::mt19937_64 rng(33);
    for (int i = 0; i < 50; ++i) {
        ScoreMap scores;
        ConceptTree tree = testsupport::random_tree(rng, 3, 4, 4, &scores);
        double previous = -1.0;
        for (int k = 1; k <= 6; ++k) {
            double weight = beam_search(tree, scores, k).weight;
            CHECK(weight >= previous);
            previous = weight;
        }
    }
}

TEST_CASE("search config dispatch and validation") {
    ConceptTree tree = small_tree();
    ScoreMap scores = small_scores();
    CHECK(find_path(tree, scores, {Strategy::greedy, 1}).node_ids ==
          greedy_search(tree, scores).node_ids);
    CHECK(find_path(tree, scores, {Strategy::beam, 2}).weight ==
          beam_search(tree, scores, 2).weight);
    CHECK_THROWS_AS(beam_search(tree, scores, 0), Error);
    CHECK(std::string(strategy_name(Strategy::greedy)) == "max");
    CHECK(std::string(strategy_name(Strategy::beam)) == "beam");
}

TEST_CASE("search trace records kept and cut candidates") {
    ConceptTree tree = small_tree();
    ScoreMap scores = small_scores();
    SearchTrace trace;
    beam_search(tree, scores, 1, &trace);
    REQUIRE_FALSE(trace.levels.empty());
    bool saw_cut = false;
    for (const SearchTrace::Level& level : trace.levels)
        for (const SearchTrace::Candidate& candidate : level.candidates)
            if (!candidate.kept) saw_cut = true;
    CHECK(saw_cut);
    std::string rendered = render_trace(trace, tree);
    CHECK(rendered.find("[kept]") != std::string::npos);
    CHECK(rendered.find("[cut]") != std::string::npos);
}

TEST_CASE("path weight is the left-to-right mean") {
    CHECK(path_weight({0.2, 0.4, 0.9}) == doctest::Approx(0.5));
    CHECK(path_weight({0.7}) == 0.7);
    CHECK_THROWS_AS(path_weight({}), Error);
}

TEST_CASE("degraded trees still search") {
    // an entity with no children is itself a complete path
    ConceptTree tree;
    tree.root_caption = "root";
    tree.params = {1, 2, 3};
    tree.nodes = {{0, "root", 0, std::nullopt, {1}}, {1, "only", 1, 0, {}}};
    tree.entities = {1};
    tree.validate();
    ScoreMap scores;
    scores[1] = {1, 0.4, 0.4, 0.4, ""};
    ReasoningPath path = beam_search(tree, scores, 5);
    CHECK(path.node_ids == std::vector<NodeId>{1});
    CHECK(path.weight == doctest::Approx(0.4));
}
