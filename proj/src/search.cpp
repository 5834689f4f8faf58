#include "cocotree/search.hpp"

#include <algorithm>
#include <sstream>

namespace cocotree {

namespace {

double node_score(const ScoreMap& scores, NodeId id) {
    auto it = scores.find(id);
    if (it == scores.end())
        raise(ErrorCode::incomplete_scores,
              "node " + std::to_string(id) + " has no score");
    return it->second.c_s;
}

bool lex_less(const ConceptTree& tree, const std::vector<NodeId>& a,
              const std::vector<NodeId>& b) {
    size_t n = std::min(a.size(), b.size());
    for (size_t i = 0; i < n; ++i) {
        const std::string& ta = tree.node(a[i]).text;
        const std::string& tb = tree.node(b[i]).text;
        if (ta != tb) return ta < tb;
    }
    return a.size() < b.size();
}

struct PartialPath {
    std::vector<NodeId> node_ids;
    std::vector<double> node_scores;
    double weight = 0.0;
    bool complete = false;
};

// weight desc, then node-text sequence asc. Total over distinct paths:
// identical text sequences would need two same-text children of one parent,
// which tree validation forbids.
bool better(const ConceptTree& tree, const PartialPath& a, const PartialPath& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return lex_less(tree, a.node_ids, b.node_ids);
}

PartialPath extend(const ConceptTree& tree, const ScoreMap& scores, const PartialPath& base,
                   NodeId child) {
    PartialPath next = base;
    next.node_ids.push_back(child);
    next.node_scores.push_back(node_score(scores, child));
    next.weight = path_weight(next.node_scores);
    next.complete = tree.node(child).children.empty();
    return next;
}

PartialPath seed(const ConceptTree& tree, const ScoreMap& scores, NodeId entity) {
    PartialPath path;
    path.node_ids = {entity};
    path.node_scores = {node_score(scores, entity)};
    path.weight = path_weight(path.node_scores);
    path.complete = tree.node(entity).children.empty();
    return path;
}

ReasoningPath finish(PartialPath path) {
    return {std::move(path.node_ids), std::move(path.node_scores), path.weight};
}

void record_level(SearchTrace* trace, const std::vector<PartialPath>& ranked, size_t kept) {
    if (!trace) return;
    SearchTrace::Level level;
    for (size_t i = 0; i < ranked.size(); ++i)
        level.candidates.push_back(
            {ranked[i].node_ids, ranked[i].weight, i < kept, ranked[i].complete});
    trace->levels.push_back(std::move(level));
}

// One literal beam pass. Finished paths keep their beam slot, so width 1
// reproduces the greedy descent.
ReasoningPath beam_pass(const ConceptTree& tree, const ScoreMap& scores, int width,
                        SearchTrace* trace) {
    std::vector<PartialPath> frontier;
    for (NodeId entity : tree.entities) frontier.push_back(seed(tree, scores, entity));

    for (;;) {
        std::sort(frontier.begin(), frontier.end(),
                  [&](const PartialPath& a, const PartialPath& b) { return better(tree, a, b); });
        size_t kept = std::min(frontier.size(), static_cast<size_t>(width));
        record_level(trace, frontier, kept);
        frontier.resize(kept);

        bool all_complete = true;
        for (const PartialPath& path : frontier)
            if (!path.complete) all_complete = false;
        if (all_complete) return finish(std::move(frontier.front()));

        std::vector<PartialPath> next;
        for (const PartialPath& path : frontier) {
            if (path.complete) {
                next.push_back(path);
                continue;
            }
            for (NodeId child : tree.node(path.node_ids.back()).children)
                next.push_back(extend(tree, scores, path, child));
        }
        frontier = std::move(next);
    }
}

void count_leaves(const ConceptTree& tree, NodeId id, int& count) {
    const ConceptNode& n = tree.node(id);
    if (n.children.empty()) {
        ++count;
        return;
    }
    for (NodeId child : n.children) count_leaves(tree, child, count);
}

}  // namespace

std::vector<std::string> ReasoningPath::texts(const ConceptTree& tree) const {
    std::vector<std::string> out;
    out.reserve(node_ids.size());
    for (NodeId id : node_ids) out.push_back(tree.node(id).text);
    return out;
}

const char* strategy_name(Strategy strategy) {
    return strategy == Strategy::greedy ? "max" : "beam";
}

double path_weight(const std::vector<double>& node_scores) {
    if (node_scores.empty()) raise(ErrorCode::invalid_input, "path has no scores");
    double sum = 0.0;
    for (double score : node_scores) sum += score;
    return sum / static_cast<double>(node_scores.size());
}

std::vector<ReasoningPath> enumerate_paths(const ConceptTree& tree, const ScoreMap& scores) {
    std::vector<ReasoningPath> paths;
    std::vector<NodeId> stack_ids;
    std::vector<double> stack_scores;

    auto descend = [&](auto&& self, NodeId id) -> void {
        stack_ids.push_back(id);
        stack_scores.push_back(node_score(scores, id));
        const ConceptNode& n = tree.node(id);
        if (n.children.empty()) {
            paths.push_back({stack_ids, stack_scores, path_weight(stack_scores)});
        } else {
            for (NodeId child : n.children) self(self, child);
        }
        stack_ids.pop_back();
        stack_scores.pop_back();
    };
    for (NodeId entity : tree.entities) descend(descend, entity);
    return paths;
}

ReasoningPath greedy_search(const ConceptTree& tree, const ScoreMap& scores,
                            SearchTrace* trace) {
    if (tree.entities.empty()) raise(ErrorCode::invalid_input, "tree has no entities");
    return beam_pass(tree, scores, 1, trace);
}

ReasoningPath beam_search(const ConceptTree& tree, const ScoreMap& scores, int k,
                          SearchTrace* trace) {
    if (k < 1) raise(ErrorCode::invalid_input, "beam width must be >= 1");
    if (tree.entities.empty()) raise(ErrorCode::invalid_input, "tree has no entities");

    int leaves = leaf_path_count(tree);
    if (k >= leaves) return beam_pass(tree, scores, leaves, trace);

    // Widening: the literal pass is not monotone in width (a wide beam can
    // crowd out the narrow beam's winner), so every width up to k runs and
    // the best finished path wins. Monotonicity in k then holds by
    // construction, and width 1 keeps beam(1) == greedy.
    std::optional<ReasoningPath> best;
    SearchTrace best_trace;
    for (int width = 1; width <= k; ++width) {
        SearchTrace pass_trace;
        ReasoningPath candidate = beam_pass(tree, scores, width, trace ? &pass_trace : nullptr);
        bool wins = !best;
        if (best) {
            PartialPath a{candidate.node_ids, candidate.node_scores, candidate.weight, true};
            PartialPath b{best->node_ids, best->node_scores, best->weight, true};
            wins = better(tree, a, b);
        }
        if (wins) {
            best = std::move(candidate);
            best_trace = std::move(pass_trace);
        }
    }
    if (trace) *trace = std::move(best_trace);
    return *best;
}

ReasoningPath find_path(const ConceptTree& tree, const ScoreMap& scores,
                        const SearchConfig& config, SearchTrace* trace) {
    if (config.strategy == Strategy::greedy) return greedy_search(tree, scores, trace);
    return beam_search(tree, scores, config.beam_width, trace);
}

double fuse(double base_score, double path_weight, double beta) {
    if (!(base_score >= 0.0 && base_score <= 1.0))
        raise(ErrorCode::invalid_input, "base_score outside [0,1]");
    if (!(path_weight >= 0.0 && path_weight <= 1.0))
        raise(ErrorCode::invalid_input, "path_weight outside [0,1]");
    if (!(beta >= 0.0 && beta <= 1.0)) raise(ErrorCode::invalid_input, "beta outside [0,1]");
    double combined = beta * base_score + (1.0 - beta) * path_weight;
    return std::clamp(combined, std::min(base_score, path_weight),
                      std::max(base_score, path_weight));
}

int leaf_path_count(const ConceptTree& tree) {
    int count = 0;
    for (NodeId entity : tree.entities) count_leaves(tree, entity, count);
    return count;
}

std::string render_trace(const SearchTrace& trace, const ConceptTree& tree) {
    std::ostringstream out;
    for (size_t level = 0; level < trace.levels.size(); ++level) {
        out << "level " << level << ":\n";
        for (const SearchTrace::Candidate& c : trace.levels[level].candidates) {
            out << "  " << (c.kept ? "[kept] " : "[cut]  ");
            out << "weight=" << c.weight << (c.complete ? " complete " : "          ");
            for (size_t i = 0; i < c.node_ids.size(); ++i) {
                if (i) out << " > ";
                out << tree.node(c.node_ids[i]).text;
            }
            out << "\n";
        }
    }
    return out.str();
}

}  // namespace cocotree
