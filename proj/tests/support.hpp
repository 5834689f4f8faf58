#pragma once

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "cocotree/backend.hpp"
#include "cocotree/digest.hpp"
#include "cocotree/tree.hpp"
#include "cocotree/wire.hpp"

namespace testsupport {

inline std::filesystem::path source_dir() { return COCOTREE_SOURCE_DIR; }

inline std::filesystem::path fixtures_dir() { return source_dir() / "tests" / "fixtures"; }

inline std::string cli_path() { return COCOTREE_CLI_PATH; }

// Unique scratch directory under the build tree, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& prefix) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                (prefix + "-" + std::to_string(::getpid()) + "-" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }

    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

// Backend that always cooperates: decomposition and expansion return exactly
// the requested number of items, every child text encodes its full path so
// texts never collide, and yes/no probabilities derive from a prompt hash.
class CooperativeBackend : public cocotree::ModelBackend {
public:
    std::string identity() const override { return "cooperative"; }

    std::string complete(const cocotree::ModelRequest& request) override {
        if (request.kind == cocotree::ModelRequest::Kind::yes_no) {
            double p = hashed_probability(request.prompt);
            return cocotree::wire::make_yes_no_body(std::log(p), std::log1p(-p));
        }
        auto op = request.slots.find("op");
        if (op == request.slots.end())
            return cocotree::wire::make_completion_body("1. something");
        if (op->second == "decompose") {
            int m = std::stoi(request.slots.at("m"));
            std::string reply;
            for (int i = 1; i <= m; ++i)
                reply += std::to_string(i) + ". entity " + std::to_string(i) + " of " +
                         request.slots.at("caption") + " ";
            return cocotree::wire::make_completion_body(reply);
        }
        if (op->second == "expand") {
            int s = std::stoi(request.slots.at("s"));
            std::string reply;
            for (int i = 1; i <= s; ++i)
                reply += std::to_string(i) + ". " + request.slots.at("node") + " / part " +
                         std::to_string(i) + " ";
            return cocotree::wire::make_completion_body(reply);
        }
        return cocotree::wire::make_completion_body("1. something");
    }

private:
    static double hashed_probability(const std::string& prompt) {
        std::string digest = cocotree::sha256_hex(prompt);
        unsigned value = 0;
        for (int i = 0; i < 6; ++i) {
            char c = digest[i];
            value = value * 16 + (c <= '9' ? c - '0' : c - 'a' + 10);
        }
        return 0.02 + 0.96 * (static_cast<double>(value) / 0xFFFFFF);
    }
};

// Random full tree built directly (no backend): m entities, up to s children
// per node, depth up to l. Every node gets l_s = v_s = c_s = one random
// draw, which keeps the scores alpha-invariant.
inline cocotree::ConceptTree random_tree(std::mt19937_64& rng, int max_m, int max_s, int max_l,
                                         cocotree::ScoreMap* scores) {
    std::uniform_int_distribution<int> m_dist(1, max_m);
    std::uniform_int_distribution<int> s_dist(1, max_s);
    std::uniform_int_distribution<int> l_dist(1, max_l);
    std::uniform_real_distribution<double> score_dist(0.0, 1.0);

    cocotree::ConceptTree tree;
    tree.root_caption = "root caption";
    int m = m_dist(rng);
    int s = s_dist(rng);
    int l = l_dist(rng);
    tree.params = {m, s, l};
    tree.nodes.push_back({0, tree.root_caption, 0, std::nullopt, {}});

    std::vector<cocotree::NodeId> frontier;
    for (int i = 0; i < m; ++i) {
        cocotree::NodeId id = static_cast<cocotree::NodeId>(tree.nodes.size());
        tree.nodes.push_back({id, "entity " + std::to_string(i), 1, 0, {}});
        tree.nodes[0].children.push_back(id);
        tree.entities.push_back(id);
        frontier.push_back(id);
    }
    for (int level = 2; level <= l + 1; ++level) {
        std::vector<cocotree::NodeId> next;
        for (cocotree::NodeId parent : frontier) {
            int width = std::uniform_int_distribution<int>(0, s)(rng);
            for (int i = 0; i < width; ++i) {
                cocotree::NodeId id = static_cast<cocotree::NodeId>(tree.nodes.size());
                tree.nodes.push_back({id,
                                      tree.nodes[parent].text + "." + std::to_string(i),
                                      level, parent, {}});
                tree.nodes[parent].children.push_back(id);
                next.push_back(id);
            }
        }
        frontier = std::move(next);
        if (frontier.empty()) break;
    }
    tree.validate();

    if (scores) {
        scores->clear();
        for (const cocotree::ConceptNode& node : tree.nodes) {
            if (node.id == 0) continue;
            double value = score_dist(rng);
            (*scores)[node.id] = {node.id, value, value, value, "img"};
        }
    }
    return tree;
}

}  // namespace testsupport
