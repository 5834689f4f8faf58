#pragma once

#include <string>
#include <vector>

#include "cocotree/tree.hpp"

namespace cocotree {

// Entity-to-leaf node sequence with its per-node composite scores and their
// mean as the path weight. Never contains the root.
struct ReasoningPath {
    std::vector<NodeId> node_ids;
    std::vector<double> node_scores;
    double weight = 0.0;

    std::vector<std::string> texts(const ConceptTree& tree) const;
};

enum class Strategy { greedy, beam };

const char* strategy_name(Strategy strategy);

struct SearchConfig {
    Strategy strategy = Strategy::beam;
    int beam_width = 3;
};

// Per-level frontier dump for the explain output.
struct SearchTrace {
    struct Candidate {
        std::vector<NodeId> node_ids;
        double weight = 0.0;
        bool kept = false;       // survived the beam cut
        bool complete = false;   // ends at a leaf
    };
    struct Level {
        std::vector<Candidate> candidates;
    };
    std::vector<Level> levels;
};

// Every entity-to-leaf path, in depth-first order over the tree. Raises
// incomplete-scores when a path touches an unscored node.
std::vector<ReasoningPath> enumerate_paths(const ConceptTree& tree, const ScoreMap& scores);

// Arithmetic mean, accumulated left to right.
double path_weight(const std::vector<double>& node_scores);

// Descends from the best-scoring entity, taking the highest-c_s child at
// each step (ties toward the lexicographically smaller node text).
ReasoningPath greedy_search(const ConceptTree& tree, const ScoreMap& scores,
                            SearchTrace* trace = nullptr);

// Width-k beam over partial paths ranked by running mean weight; finished
// paths stay in the beam and compete. To keep widening monotone, widths
// 1..k all run and the best finished path across them is returned; k at
// least the leaf count collapses to a single unpruned (exhaustive) pass.
ReasoningPath beam_search(const ConceptTree& tree, const ScoreMap& scores, int k,
                          SearchTrace* trace = nullptr);

ReasoningPath find_path(const ConceptTree& tree, const ScoreMap& scores,
                        const SearchConfig& config, SearchTrace* trace = nullptr);

// beta * base_score + (1 - beta) * path_weight, clamped into [min, max] of
// the two scores so the endpoints are exact.
double fuse(double base_score, double path_weight, double beta);

// Number of entity-to-leaf paths (= leaves reachable from entities).
int leaf_path_count(const ConceptTree& tree);

std::string render_trace(const SearchTrace& trace, const ConceptTree& tree);

}  // namespace cocotree
