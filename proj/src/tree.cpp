#include "cocotree/tree.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include <json.hpp>

#include "cocotree/decompose.hpp"
#include "cocotree/image_ref.hpp"
#include "cocotree/model_ops.hpp"
#include "cocotree/parallel.hpp"
#include "cocotree/prompts.hpp"

namespace cocotree {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string fold_case(const std::string& text) {
    std::string out = text;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

const ConceptNode& ConceptTree::node(NodeId id) const {
    if (id < 0 || static_cast<size_t>(id) >= nodes.size())
        raise(ErrorCode::invariant, "node id out of range: " + std::to_string(id));
    return nodes[static_cast<size_t>(id)];
}

std::vector<std::string> ConceptTree::ancestor_texts(NodeId id) const {
    std::vector<std::string> texts;
    std::optional<NodeId> cursor = id;
    while (cursor) {
        const ConceptNode& n = node(*cursor);
        texts.push_back(n.text);
        if (texts.size() > nodes.size())
            raise(ErrorCode::invariant, "parent chain longer than the tree; cycle suspected");
        cursor = n.parent;
    }
    return texts;
}

void ConceptTree::validate() const {
    if (nodes.empty()) raise(ErrorCode::invariant, "tree has no nodes");
    if (nodes[0].level != 0 || nodes[0].parent)
        raise(ErrorCode::invariant, "node 0 must be the parentless root");
    if (nodes[0].text != root_caption)
        raise(ErrorCode::invariant, "root node text differs from root_caption");

    for (size_t i = 0; i < nodes.size(); ++i) {
        const ConceptNode& n = nodes[i];
        if (n.id != static_cast<NodeId>(i))
            raise(ErrorCode::invariant, "node id does not match its position");
        if (n.text.empty()) raise(ErrorCode::invariant, "node text is empty");
        if (i > 0) {
            if (!n.parent) raise(ErrorCode::invariant, "non-root node lacks a parent");
            const ConceptNode& p = node(*n.parent);
            if (n.level != p.level + 1)
                raise(ErrorCode::invariant, "child level must be parent level + 1");
            if (std::find(p.children.begin(), p.children.end(), n.id) == p.children.end())
                raise(ErrorCode::invariant, "parent does not list this child");
        }
        std::set<std::string> texts;
        for (NodeId child : n.children) {
            const ConceptNode& c = node(child);
            if (!c.parent || *c.parent != n.id)
                raise(ErrorCode::invariant, "child does not point back at its parent");
            if (!texts.insert(c.text).second)
                raise(ErrorCode::invariant, "children of one node must have distinct texts");
        }
    }

    // Reachability: walk each parent chain to the root. ancestor_texts
    // already bounds chain length, which also rules out cycles.
    for (size_t i = 1; i < nodes.size(); ++i) {
        std::vector<std::string> chain = ancestor_texts(static_cast<NodeId>(i));
        if (chain.back() != root_caption)
            raise(ErrorCode::invariant, "node is not connected to the root");
    }

    for (NodeId e : entities)
        if (node(e).level != 1) raise(ErrorCode::invariant, "entities must sit at level 1");
}

double composite_score(double l_s, double v_s, double alpha) {
    if (!(l_s >= 0.0 && l_s <= 1.0)) raise(ErrorCode::invalid_input, "l_s outside [0,1]");
    if (!(v_s >= 0.0 && v_s <= 1.0)) raise(ErrorCode::invalid_input, "v_s outside [0,1]");
    if (!(alpha >= 0.0 && alpha <= 1.0)) raise(ErrorCode::invalid_input, "alpha outside [0,1]");
    double combined = alpha * l_s + (1.0 - alpha) * v_s;
    double lo = std::min(l_s, v_s);
    double hi = std::max(l_s, v_s);
    return std::clamp(combined, lo, hi);
}

std::vector<std::string> expand_node(ModelBackend& llm, ResponseCache* cache,
                                     const ConceptTree& tree, NodeId node_id, int s) {
    if (s < 1) raise(ErrorCode::invalid_input, "s must be >= 1");
    const ConceptNode& origin = tree.node(node_id);
    if (origin.text.empty()) raise(ErrorCode::invalid_input, "cannot expand an empty concept");

    std::string prompt = prompts::render_expand(origin.text, tree.root_caption, s);
    std::map<std::string, std::string> slots = {{"op", "expand"},
                                                {"node", origin.text},
                                                {"caption", tree.root_caption},
                                                {"s", std::to_string(s)}};

    auto attempt = [&](const std::string& request_prompt) -> std::optional<NumberedList> {
        std::string completion;
        try {
            completion = llm_generate(llm, cache, request_prompt, slots);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::empty_generation) return std::nullopt;
            throw;
        }
        try {
            return parse_numbered_list(completion, s);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::parse) return std::nullopt;
            throw;
        }
    };

    std::optional<NumberedList> list = attempt(prompt);
    if (!list) list = attempt(prompts::corrective_reprompt(prompt));
    if (!list)
        raise(ErrorCode::expansion_failed,
              "concept '" + origin.text + "' yielded no parseable children after a "
              "corrective reprompt");

    std::set<std::string> taken;
    for (const std::string& ancestor : tree.ancestor_texts(node_id))
        taken.insert(fold_case(ancestor));

    std::vector<std::string> children;
    for (const std::string& item : list->items) {
        std::string folded = fold_case(item);
        if (!taken.insert(folded).second) continue;
        children.push_back(item);
    }
    return children;
}

ConceptTree build_tree(ModelBackend& llm, ResponseCache* cache, const std::string& caption,
                       int m, int s, int l, const BuildOptions& options) {
    if (caption.empty()) raise(ErrorCode::invalid_input, "caption is empty");
    if (m < 1 || s < 1 || l < 1)
        raise(ErrorCode::invalid_input, "m, s, and l must all be >= 1");

    ConceptTree tree;
    tree.root_caption = caption;
    tree.params = {m, s, l};
    tree.nodes.push_back({0, caption, 0, std::nullopt, {}});

    std::vector<MorphologicalEntity> entities = decompose_caption(llm, cache, caption, m);
    for (const MorphologicalEntity& entity : entities) {
        NodeId id = static_cast<NodeId>(tree.nodes.size());
        tree.nodes.push_back({id, entity.text, 1, 0, {}});
        tree.nodes[0].children.push_back(id);
        tree.entities.push_back(id);
    }

    auto prune_frontier = [&](std::vector<NodeId>& frontier) {
        if (options.prune_width < 1 ||
            frontier.size() <= static_cast<size_t>(options.prune_width))
            return;
        // Rank by caption entailment; scoring a frontier needs no image, so
        // the tree still depends on the caption alone.
        std::vector<std::pair<double, NodeId>> ranked;
        ranked.reserve(frontier.size());
        for (NodeId id : frontier)
            ranked.emplace_back(llm_entailment(llm, cache, caption, tree.node(id).text), id);
        std::stable_sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return tree.node(a.second).text < tree.node(b.second).text;
        });
        ranked.resize(static_cast<size_t>(options.prune_width));
        std::set<NodeId> keep;
        for (const auto& [score, id] : ranked) keep.insert(id);
        std::erase_if(frontier, [&](NodeId id) { return !keep.contains(id); });
    };

    std::vector<NodeId> frontier = tree.entities;
    for (int level = 2; level <= l + 1; ++level) {
        prune_frontier(frontier);
        std::vector<std::vector<std::string>> expansions(frontier.size());
        std::vector<std::optional<Degradation>> failures(frontier.size());
        parallel_for(frontier.size(), options.parallelism, [&](size_t i) {
            try {
                expansions[i] = expand_node(llm, cache, tree, frontier[i], s);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::expansion_failed) throw;
                failures[i] = Degradation{frontier[i], e.what()};
            }
        });

        std::vector<NodeId> next;
        for (size_t i = 0; i < frontier.size(); ++i) {
            if (failures[i]) {
                tree.degradations.push_back(*failures[i]);
                continue;
            }
            for (const std::string& text : expansions[i]) {
                NodeId id = static_cast<NodeId>(tree.nodes.size());
                tree.nodes.push_back({id, text, level, frontier[i], {}});
                tree.nodes[static_cast<size_t>(frontier[i])].children.push_back(id);
                next.push_back(id);
            }
        }
        frontier = std::move(next);
        if (frontier.empty()) break;
    }

    tree.validate();
    return tree;
}

ScoreMap score_tree(ModelBackend& vlm, ModelBackend& llm, ResponseCache* cache,
                    const ConceptTree& tree, const std::string& image, double alpha,
                    int parallelism) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) raise(ErrorCode::invalid_input, "alpha outside [0,1]");
    if (image.empty()) raise(ErrorCode::invalid_input, "image reference is empty");
    tree.validate();

    std::string digest = image_ref_digest(image);
    size_t below_root = tree.nodes.size() - 1;
    std::vector<std::optional<NodeScore>> slots(below_root);

    auto gather = [&] {
        ScoreMap scores;
        for (const auto& slot : slots)
            if (slot) scores[slot->node_id] = *slot;
        return scores;
    };

    try {
        parallel_for(below_root, parallelism, [&](size_t i) {
            const ConceptNode& n = tree.nodes[i + 1];
            double l_s = llm_entailment(llm, cache, tree.root_caption, n.text);
            double v_s = vlm_relevance(vlm, cache, image, n.text);
            slots[i] = NodeScore{n.id, l_s, v_s, composite_score(l_s, v_s, alpha), digest};
        });
    } catch (const Error& e) {
        throw ScoringError(e.code(), std::string("tree scoring aborted: ") + e.what(), gather());
    } catch (const std::exception& e) {
        throw ScoringError(ErrorCode::invariant, std::string("tree scoring aborted: ") + e.what(),
                           gather());
    }
    return gather();
}

std::string serialize_tree(const ConceptTree& tree, const ScoreMap* scores, double alpha) {
    ordered_json doc;
    doc["schema"] = "cocotree.tree/v1";
    doc["root"] = tree.root_caption;
    doc["params"] = {{"m", tree.params.m}, {"s", tree.params.s}, {"l", tree.params.l},
                     {"alpha", alpha}};

    ordered_json nodes = ordered_json::array();
    for (const ConceptNode& n : tree.nodes) {
        ordered_json record;
        record["id"] = n.id;
        record["text"] = n.text;
        record["level"] = n.level;
        record["parent"] = n.parent ? ordered_json(*n.parent) : ordered_json(nullptr);
        record["children"] = n.children;
        const NodeScore* score = nullptr;
        if (scores) {
            auto it = scores->find(n.id);
            if (it != scores->end()) score = &it->second;
        }
        record["l_s"] = score ? ordered_json(score->l_s) : ordered_json(nullptr);
        record["v_s"] = score ? ordered_json(score->v_s) : ordered_json(nullptr);
        record["c_s"] = score ? ordered_json(score->c_s) : ordered_json(nullptr);
        nodes.push_back(std::move(record));
    }
    doc["nodes"] = std::move(nodes);

    ordered_json degradations = ordered_json::array();
    for (const Degradation& d : tree.degradations)
        degradations.push_back({{"node", d.node}, {"reason", d.reason}});
    doc["degradations"] = std::move(degradations);

    std::string image_digest;
    if (scores && !scores->empty()) image_digest = scores->begin()->second.image_digest;
    doc["image_digest"] = image_digest.empty() ? ordered_json(nullptr)
                                               : ordered_json(image_digest);
    return doc.dump(2) + "\n";
}

TreeDocument deserialize_tree(const std::string& document) {
    json doc = json::parse(document, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        raise(ErrorCode::schema, "tree document is not a JSON object");
    auto need = [&](const char* key) -> const json& {
        if (!doc.contains(key))
            raise(ErrorCode::schema, std::string("tree document lacks '") + key + "'");
        return doc[key];
    };
    if (need("schema").get<std::string>() != "cocotree.tree/v1")
        raise(ErrorCode::schema, "unsupported tree document schema");
    const json& params = need("params");
    for (const char* key : {"m", "s", "l", "alpha"})
        if (!params.contains(key))
            raise(ErrorCode::schema, std::string("params block lacks '") + key + "'");

    TreeDocument out;
    out.tree.root_caption = need("root").get<std::string>();
    out.tree.params = {params["m"].get<int>(), params["s"].get<int>(), params["l"].get<int>()};
    out.alpha = params["alpha"].get<double>();

    const json& nodes = need("nodes");
    if (!nodes.is_array() || nodes.empty())
        raise(ErrorCode::schema, "tree document has no nodes");
    ScoreMap scores;
    std::string digest;
    if (doc.contains("image_digest") && doc["image_digest"].is_string())
        digest = doc["image_digest"].get<std::string>();
    try {
        for (size_t i = 0; i < nodes.size(); ++i) {
            const json& record = nodes[i];
            ConceptNode n;
            n.id = record.at("id").get<NodeId>();
            n.text = record.at("text").get<std::string>();
            n.level = record.at("level").get<int>();
            if (!record.at("parent").is_null()) n.parent = record["parent"].get<NodeId>();
            n.children = record.at("children").get<std::vector<NodeId>>();
            if (n.level == 1) out.tree.entities.push_back(n.id);
            if (record.contains("c_s") && !record["c_s"].is_null()) {
                NodeScore score;
                score.node_id = n.id;
                score.l_s = record.at("l_s").get<double>();
                score.v_s = record.at("v_s").get<double>();
                score.c_s = record["c_s"].get<double>();
                score.image_digest = digest;
                scores[n.id] = score;
            }
            out.tree.nodes.push_back(std::move(n));
        }
        for (const json& d : need("degradations"))
            out.tree.degradations.push_back(
                {d.at("node").get<NodeId>(), d.at("reason").get<std::string>()});
    } catch (const json::exception& e) {
        raise(ErrorCode::schema, std::string("malformed tree document: ") + e.what());
    }

    try {
        out.tree.validate();
    } catch (const Error& e) {
        raise(ErrorCode::schema, std::string("tree document violates invariants: ") + e.what());
    }
    if (!scores.empty()) out.scores = std::move(scores);
    if (!digest.empty()) out.image_digest = digest;
    return out;
}

}  // namespace cocotree
