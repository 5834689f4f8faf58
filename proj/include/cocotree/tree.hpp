#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cocotree/backend.hpp"
#include "cocotree/cache.hpp"
#include "cocotree/error.hpp"

namespace cocotree {

using NodeId = int;

struct ConceptNode {
    NodeId id = 0;
    std::string text;
    int level = 0;  // 0 = root caption, 1 = entity, >= 2 = discovered concept
    std::optional<NodeId> parent;
    std::vector<NodeId> children;  // reply order
};

struct TreeParams {
    int m = 2;
    int s = 3;
    int l = 3;
};

struct Degradation {
    NodeId node = 0;
    std::string reason;
};

// Concept tree over one caption. Nodes are stored by id, root at id 0; the
// structure depends on the caption alone, never on an image.
struct ConceptTree {
    std::string root_caption;
    TreeParams params;
    std::vector<ConceptNode> nodes;  // id == index
    std::vector<NodeId> entities;    // level-1 ids in decomposition order
    std::vector<Degradation> degradations;

    const ConceptNode& node(NodeId id) const;
    // Texts of the node and everything above it, root caption included.
    std::vector<std::string> ancestor_texts(NodeId id) const;
    // Structural invariants: id/index agreement, parent/child symmetry,
    // level steps of one, per-parent distinct texts, reachability.
    void validate() const;
};

struct NodeScore {
    NodeId node_id = 0;
    double l_s = 0.0;
    double v_s = 0.0;
    double c_s = 0.0;
    std::string image_digest;
};

using ScoreMap = std::map<NodeId, NodeScore>;

// alpha * l_s + (1 - alpha) * v_s, clamped into [min, max] of the inputs so
// the convexity bound is exact despite rounding.
double composite_score(double l_s, double v_s, double alpha);

// Child concepts for one node: renders the expansion prompt against the
// root caption, parses the numbered reply, truncates to s, and drops items
// that repeat an ancestor or an earlier sibling (case-insensitive). One
// corrective reprompt on an unparseable reply; a second failure raises
// expansion-failed.
std::vector<std::string> expand_node(ModelBackend& llm, ResponseCache* cache,
                                     const ConceptTree& tree, NodeId node_id, int s);

struct BuildOptions {
    int parallelism = 1;
    // 0 disables pruning. Otherwise each frontier is cut to the best
    // prune_width nodes by caption entailment before expansion, trading
    // completeness for near-linear growth.
    int prune_width = 0;
};

// Breadth-first construction: level 1 from caption decomposition, levels
// 2..l+1 by expanding every node of the previous level. A failed expansion
// leaves that node a leaf and records a degradation; a failed decomposition
// fails the build.
ConceptTree build_tree(ModelBackend& llm, ResponseCache* cache, const std::string& caption,
                       int m, int s, int l, const BuildOptions& options = {});

// Raised when scoring aborts partway; carries whatever was completed.
class ScoringError : public Error {
public:
    ScoringError(ErrorCode code, const std::string& message, ScoreMap partial)
        : Error(code, message), partial_(std::move(partial)) {}

    const ScoreMap& partial_scores() const { return partial_; }

private:
    ScoreMap partial_;
};

// Scores every node below the root against one image: l_s entails the node
// from the root caption, v_s checks it against the image, c_s combines them.
ScoreMap score_tree(ModelBackend& vlm, ModelBackend& llm, ResponseCache* cache,
                    const ConceptTree& tree, const std::string& image, double alpha,
                    int parallelism = 1);

struct TreeDocument {
    ConceptTree tree;
    std::optional<ScoreMap> scores;
    double alpha = 0.0;
    std::optional<std::string> image_digest;
};

// JSON tree document, stable field and node order. scores may be null for
// an unscored tree.
std::string serialize_tree(const ConceptTree& tree, const ScoreMap* scores, double alpha);

// Inverse of serialize_tree. Malformed structure raises a schema error.
TreeDocument deserialize_tree(const std::string& document);

}  // namespace cocotree
