#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cocotree/backend.hpp"
#include "cocotree/cache.hpp"
#include "cocotree/dataset.hpp"
#include "cocotree/search.hpp"
#include "cocotree/tree.hpp"

namespace cocotree {

enum class ScorerKind { vqascore_baseline, coco_tree };

const char* scorer_kind_name(ScorerKind kind);
ScorerKind parse_scorer_kind(const std::string& name);

struct ScorerConfig {
    ScorerKind kind = ScorerKind::coco_tree;
    double alpha = 0.6;
    double beta = 0.8;
    int m = 2;
    int s = 3;
    int l = 3;
    Strategy strategy = Strategy::beam;
    int k = 3;
    int prune_width = 0;
    // Thread budget for one pair's tree build and node scoring; kept at 1
    // when samples themselves run in parallel.
    int inner_parallelism = 1;
};

struct Backends {
    ModelBackend* llm = nullptr;
    ModelBackend* vlm = nullptr;
    ModelBackend* judge = nullptr;
    ResponseCache* cache = nullptr;
};

// Everything one (image, caption) scoring produced, for artifacts and the
// explain output. The baseline fills only base and fused.
struct ScoreDetail {
    double base = 0.0;
    double fused = 0.0;
    std::optional<double> path_weight;
    std::optional<ReasoningPath> path;
    std::shared_ptr<const ConceptTree> tree;
    ScoreMap scores;
};

// f(I, C): the baseline asks the vision endpoint directly; the tree scorer
// fuses that base score with the best reasoning-path weight. Each caption's
// tree is built once and reused across images. Thread-safe.
class PairScorer {
public:
    PairScorer(ScorerConfig config, Backends backends);

    double score(const std::string& image, const std::string& caption);
    ScoreDetail score_detail(const std::string& image, const std::string& caption);
    std::shared_ptr<const ConceptTree> tree_for(const std::string& caption);

    const ScorerConfig& config() const { return config_; }
    const Backends& backends() const { return backends_; }

private:
    ScorerConfig config_;
    Backends backends_;
    std::mutex mutex_;
    std::map<std::string, std::shared_ptr<const ConceptTree>> trees_;
};

struct TaskCell {
    int correct = 0;
    int total = 0;
    double fraction() const { return total == 0 ? 0.0 : static_cast<double>(correct) / total; }
};

struct TaskScores {
    TaskCell text;
    TaskCell image;
    TaskCell group;
};

// Indicator per image: does its own caption outscore the other one?
// Strict inequality; a tie scores zero.
std::array<int, 2> text_task(PairScorer& scorer, const QuadrupletSample& sample);
// Indicator per caption: does its own image outscore the other one?
std::array<int, 2> image_task(PairScorer& scorer, const QuadrupletSample& sample);
int group_task(const std::array<int, 2>& text, const std::array<int, 2>& image);

struct SampleOutcome {
    std::string id;
    std::vector<std::string> tags;
    bool failed = false;
    std::string error;
    std::array<int, 2> text{0, 0};
    std::array<int, 2> image{0, 0};
    int group = 0;
    // quadruplet: i0_c0, i0_c1, i1_c0, i1_c1; pair: pos, neg
    std::map<std::string, double> scores;
};

struct EvalOptions {
    int parallelism = 1;
    // When set, one JSON artifact per sample (trees, chosen paths, node
    // scores) lands here for the explain command and the entailment report.
    std::filesystem::path artifacts_dir;
};

struct EvalReport {
    std::string dataset_name;
    DatasetKind dataset_kind = DatasetKind::quadruplet;
    TaskScores overall;  // pair datasets use the text cell only
    std::map<std::string, TaskScores> per_tag;
    std::vector<SampleOutcome> samples;
    std::vector<std::string> dataset_warnings;
    int failed_count = 0;

    // Scorer-blind results block: two scorers that assign identical scores
    // serialize to identical bytes.
    nlohmann::ordered_json results_json() const;
    std::string render_summary() const;

    static EvalReport from_results_json(const std::string& bytes);
};

// Scores every sample (failures are recorded and skipped in aggregates;
// more than half failing aborts the run) and aggregates the task
// indicators overall and per tag.
EvalReport evaluate_dataset(PairScorer& scorer, const Dataset& dataset,
                            const EvalOptions& options);

// Fraction of shared tags where a beats b on the group fraction (text
// fraction for pair datasets). Ties are not wins.
double subset_winrate(const EvalReport& a, const EvalReport& b);

}  // namespace cocotree
