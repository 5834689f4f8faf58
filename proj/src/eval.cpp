#include "cocotree/eval.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "cocotree/error.hpp"
#include "cocotree/model_ops.hpp"
#include "cocotree/parallel.hpp"

namespace cocotree {

using nlohmann::ordered_json;

const char* scorer_kind_name(ScorerKind kind) {
    return kind == ScorerKind::vqascore_baseline ? "vqascore_baseline" : "coco_tree";
}

ScorerKind parse_scorer_kind(const std::string& name) {
    if (name == "vqascore_baseline" || name == "vqascore") return ScorerKind::vqascore_baseline;
    if (name == "coco_tree" || name == "cocotree") return ScorerKind::coco_tree;
    raise(ErrorCode::config, "unknown scorer '" + name + "'");
}

PairScorer::PairScorer(ScorerConfig config, Backends backends)
    : config_(config), backends_(backends) {
    if (!backends_.vlm) raise(ErrorCode::config, "scorer needs a vlm backend");
    if (config_.kind == ScorerKind::coco_tree && !backends_.llm)
        raise(ErrorCode::config, "tree scorer needs an llm backend");
    if (!(config_.alpha >= 0.0 && config_.alpha <= 1.0))
        raise(ErrorCode::config, "alpha outside [0,1]");
    if (!(config_.beta >= 0.0 && config_.beta <= 1.0))
        raise(ErrorCode::config, "beta outside [0,1]");
    if (config_.m < 1 || config_.s < 1 || config_.l < 1 || config_.k < 1)
        raise(ErrorCode::config, "m, s, l, and k must all be >= 1");
}

std::shared_ptr<const ConceptTree> PairScorer::tree_for(const std::string& caption) {
    {
        std::lock_guard lock(mutex_);
        auto it = trees_.find(caption);
        if (it != trees_.end()) return it->second;
    }
    BuildOptions options;
    options.parallelism = config_.inner_parallelism;
    options.prune_width = config_.prune_width;
    auto tree = std::make_shared<const ConceptTree>(
        build_tree(*backends_.llm, backends_.cache, caption, config_.m, config_.s, config_.l,
                   options));
    std::lock_guard lock(mutex_);
    auto [it, inserted] = trees_.emplace(caption, std::move(tree));
    return it->second;
}

ScoreDetail PairScorer::score_detail(const std::string& image, const std::string& caption) {
    ScoreDetail detail;
    detail.base = vlm_relevance(*backends_.vlm, backends_.cache, image, caption);
    if (config_.kind == ScorerKind::vqascore_baseline) {
        detail.fused = detail.base;
        return detail;
    }
    detail.tree = tree_for(caption);
    detail.scores = score_tree(*backends_.vlm, *backends_.llm, backends_.cache, *detail.tree,
                               image, config_.alpha, config_.inner_parallelism);
    detail.path = find_path(*detail.tree, detail.scores,
                            {config_.strategy, config_.k});
    detail.path_weight = detail.path->weight;
    detail.fused = fuse(detail.base, detail.path->weight, config_.beta);
    return detail;
}

double PairScorer::score(const std::string& image, const std::string& caption) {
    return score_detail(image, caption).fused;
}

std::array<int, 2> text_task(PairScorer& scorer, const QuadrupletSample& sample) {
    double s00 = scorer.score(sample.image_0, sample.caption_0);
    double s01 = scorer.score(sample.image_0, sample.caption_1);
    double s10 = scorer.score(sample.image_1, sample.caption_0);
    double s11 = scorer.score(sample.image_1, sample.caption_1);
    return {s00 > s01 ? 1 : 0, s11 > s10 ? 1 : 0};
}

std::array<int, 2> image_task(PairScorer& scorer, const QuadrupletSample& sample) {
    double s00 = scorer.score(sample.image_0, sample.caption_0);
    double s01 = scorer.score(sample.image_0, sample.caption_1);
    double s10 = scorer.score(sample.image_1, sample.caption_0);
    double s11 = scorer.score(sample.image_1, sample.caption_1);
    return {s00 > s10 ? 1 : 0, s11 > s01 ? 1 : 0};
}

int group_task(const std::array<int, 2>& text, const std::array<int, 2>& image) {
    return text[0] && text[1] && image[0] && image[1] ? 1 : 0;
}

namespace {

std::string sanitize_id(const std::string& id) {
    std::string out = id;
    for (char& c : out) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '.' || c == '_' || c == '-';
        if (!ok) c = '_';
    }
    return out;
}

ordered_json pairing_json(const std::string& image, const std::string& caption, bool positive,
                          const ScoreDetail& detail, double alpha) {
    ordered_json out;
    out["image"] = image;
    out["caption"] = caption;
    out["positive"] = positive;
    out["base"] = detail.base;
    out["path_weight"] = detail.path_weight ? ordered_json(*detail.path_weight)
                                            : ordered_json(nullptr);
    out["fused"] = detail.fused;
    if (detail.path) {
        out["path_node_ids"] = detail.path->node_ids;
        out["path_texts"] = detail.path->texts(*detail.tree);
    } else {
        out["path_node_ids"] = nullptr;
        out["path_texts"] = nullptr;
    }
    if (detail.tree) {
        out["tree"] = ordered_json::parse(serialize_tree(*detail.tree, &detail.scores, alpha));
    } else {
        out["tree"] = nullptr;
    }
    return out;
}

void write_artifact(const std::filesystem::path& dir, const std::string& id,
                    const ScorerConfig& config, std::vector<ordered_json> pairings) {
    ordered_json artifact;
    artifact["id"] = id;
    artifact["scorer"] = scorer_kind_name(config.kind);
    artifact["alpha"] = config.alpha;
    artifact["beta"] = config.beta;
    artifact["pairings"] = std::move(pairings);
    std::filesystem::path path = dir / (sanitize_id(id) + ".json");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorCode::invalid_input, "cannot write artifact: " + path.string());
    out << artifact.dump(2) << "\n";
}

SampleOutcome eval_quadruplet(PairScorer& scorer, const QuadrupletSample& sample,
                              const std::filesystem::path& artifacts_dir) {
    SampleOutcome out;
    out.id = sample.id;
    out.tags = sample.tags;
    try {
        ScoreDetail d00 = scorer.score_detail(sample.image_0, sample.caption_0);
        ScoreDetail d01 = scorer.score_detail(sample.image_0, sample.caption_1);
        ScoreDetail d10 = scorer.score_detail(sample.image_1, sample.caption_0);
        ScoreDetail d11 = scorer.score_detail(sample.image_1, sample.caption_1);
        out.scores = {{"i0_c0", d00.fused},
                      {"i0_c1", d01.fused},
                      {"i1_c0", d10.fused},
                      {"i1_c1", d11.fused}};
        out.text = {d00.fused > d01.fused ? 1 : 0, d11.fused > d10.fused ? 1 : 0};
        out.image = {d00.fused > d10.fused ? 1 : 0, d11.fused > d01.fused ? 1 : 0};
        out.group = group_task(out.text, out.image);
        if (!artifacts_dir.empty()) {
            std::vector<ordered_json> pairings;
            pairings.push_back(pairing_json(sample.image_0, sample.caption_0, true, d00,
                                            scorer.config().alpha));
            pairings.push_back(pairing_json(sample.image_0, sample.caption_1, false, d01,
                                            scorer.config().alpha));
            pairings.push_back(pairing_json(sample.image_1, sample.caption_0, false, d10,
                                            scorer.config().alpha));
            pairings.push_back(pairing_json(sample.image_1, sample.caption_1, true, d11,
                                            scorer.config().alpha));
            write_artifact(artifacts_dir, sample.id, scorer.config(), std::move(pairings));
        }
    } catch (const Error& e) {
        out.failed = true;
        out.error = std::string(error_code_name(e.code())) + ": " + e.what();
    } catch (const std::exception& e) {
        out.failed = true;
        out.error = e.what();
    }
    return out;
}

SampleOutcome eval_pair(PairScorer& scorer, const PairSample& sample,
                        const std::filesystem::path& artifacts_dir) {
    SampleOutcome out;
    out.id = sample.id;
    if (!sample.category.empty()) out.tags.push_back(sample.category);
    try {
        ScoreDetail pos = scorer.score_detail(sample.image, sample.caption_pos);
        ScoreDetail neg = scorer.score_detail(sample.image, sample.caption_neg);
        out.scores = {{"pos", pos.fused}, {"neg", neg.fused}};
        out.text = {pos.fused > neg.fused ? 1 : 0, 0};
        if (!artifacts_dir.empty()) {
            std::vector<ordered_json> pairings;
            pairings.push_back(pairing_json(sample.image, sample.caption_pos, true, pos,
                                            scorer.config().alpha));
            pairings.push_back(pairing_json(sample.image, sample.caption_neg, false, neg,
                                            scorer.config().alpha));
            write_artifact(artifacts_dir, sample.id, scorer.config(), std::move(pairings));
        }
    } catch (const Error& e) {
        out.failed = true;
        out.error = std::string(error_code_name(e.code())) + ": " + e.what();
    } catch (const std::exception& e) {
        out.failed = true;
        out.error = e.what();
    }
    return out;
}

ordered_json cell_json(const TaskCell& cell) {
    return {{"correct", cell.correct}, {"total", cell.total}, {"fraction", cell.fraction()}};
}

ordered_json task_scores_json(const TaskScores& scores, DatasetKind kind) {
    ordered_json out;
    out["text"] = cell_json(scores.text);
    if (kind == DatasetKind::quadruplet) {
        out["image"] = cell_json(scores.image);
        out["group"] = cell_json(scores.group);
    }
    return out;
}

TaskCell cell_from_json(const nlohmann::json& value) {
    TaskCell cell;
    cell.correct = value.at("correct").get<int>();
    cell.total = value.at("total").get<int>();
    return cell;
}

}  // namespace

EvalReport evaluate_dataset(PairScorer& scorer, const Dataset& dataset,
                            const EvalOptions& options) {
    if (dataset.size() == 0) raise(ErrorCode::invalid_input, "dataset is empty");
    if (!options.artifacts_dir.empty())
        std::filesystem::create_directories(options.artifacts_dir);

    size_t n = dataset.size();
    std::vector<SampleOutcome> outcomes(n);
    parallel_for(n, options.parallelism, [&](size_t i) {
        outcomes[i] = dataset.kind == DatasetKind::quadruplet
                          ? eval_quadruplet(scorer, dataset.quadruplets[i], options.artifacts_dir)
                          : eval_pair(scorer, dataset.pairs[i], options.artifacts_dir);
    });

    EvalReport report;
    report.dataset_name = dataset.name;
    report.dataset_kind = dataset.kind;
    report.dataset_warnings = dataset.warnings;
    report.samples = std::move(outcomes);

    std::string first_error;
    for (const SampleOutcome& outcome : report.samples) {
        if (outcome.failed) {
            ++report.failed_count;
            if (first_error.empty()) first_error = outcome.id + ": " + outcome.error;
            continue;
        }
        // One indicator per sample and task: both halves must be right
        // (the quadruplet text/image convention); pairs use text[0] alone.
        int text_sample = dataset.kind == DatasetKind::quadruplet
                              ? (outcome.text[0] && outcome.text[1] ? 1 : 0)
                              : outcome.text[0];
        int image_sample = outcome.image[0] && outcome.image[1] ? 1 : 0;
        auto bump = [&](TaskScores& scores) {
            scores.text.correct += text_sample;
            scores.text.total += 1;
            if (dataset.kind == DatasetKind::quadruplet) {
                scores.image.correct += image_sample;
                scores.image.total += 1;
                scores.group.correct += outcome.group;
                scores.group.total += 1;
            }
        };
        bump(report.overall);
        for (const std::string& tag : outcome.tags) bump(report.per_tag[tag]);
    }

    if (report.failed_count * 2 > static_cast<int>(n))
        raise(ErrorCode::backend_unavailable,
              "more than half the samples failed (" + std::to_string(report.failed_count) + "/" +
                  std::to_string(n) + "); first failure: " + first_error);
    return report;
}

ordered_json EvalReport::results_json() const {
    ordered_json out;
    out["dataset"] = {{"name", dataset_name},
                      {"kind", dataset_kind_name(dataset_kind)},
                      {"size", samples.size()}};
    out["overall"] = task_scores_json(overall, dataset_kind);
    ordered_json tags;
    for (const auto& [tag, scores] : per_tag) tags[tag] = task_scores_json(scores, dataset_kind);
    out["per_tag"] = std::move(tags);

    ordered_json sample_rows = ordered_json::array();
    ordered_json failures = ordered_json::array();
    for (const SampleOutcome& outcome : samples) {
        if (outcome.failed) {
            failures.push_back({{"id", outcome.id}, {"error", outcome.error}});
            continue;
        }
        ordered_json row;
        row["id"] = outcome.id;
        row["tags"] = outcome.tags;
        if (dataset_kind == DatasetKind::quadruplet) {
            row["text"] = outcome.text;
            row["image"] = outcome.image;
            row["group"] = outcome.group;
        } else {
            row["text"] = {outcome.text[0]};
        }
        row["scores"] = outcome.scores;
        sample_rows.push_back(std::move(row));
    }
    out["samples"] = std::move(sample_rows);
    out["failures"] = std::move(failures);
    out["warnings"] = dataset_warnings;
    return out;
}

std::string EvalReport::render_summary() const {
    std::ostringstream out;
    out << "dataset: " << dataset_name << " (" << dataset_kind_name(dataset_kind) << ", "
        << samples.size() << " samples";
    if (failed_count) out << ", " << failed_count << " failed";
    out << ")\n";
    out << std::fixed << std::setprecision(1);

    bool quad = dataset_kind == DatasetKind::quadruplet;
    auto row = [&](const std::string& label, const TaskScores& scores) {
        out << std::left << std::setw(16) << label << std::right;
        out << std::setw(8) << scores.text.fraction() * 100.0;
        if (quad) {
            out << std::setw(8) << scores.image.fraction() * 100.0;
            out << std::setw(8) << scores.group.fraction() * 100.0;
        }
        out << "\n";
    };
    out << std::left << std::setw(16) << "" << std::right << std::setw(8) << "text";
    if (quad) out << std::setw(8) << "image" << std::setw(8) << "group";
    out << "\n";
    row("overall", overall);
    for (const auto& [tag, scores] : per_tag) row(tag, scores);
    return out.str();
}

EvalReport EvalReport::from_results_json(const std::string& bytes) {
    nlohmann::json doc = nlohmann::json::parse(bytes, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        raise(ErrorCode::schema, "report is not a JSON object");
    EvalReport report;
    try {
        report.dataset_name = doc.at("dataset").at("name").get<std::string>();
        std::string kind = doc.at("dataset").at("kind").get<std::string>();
        report.dataset_kind = kind == "pair" ? DatasetKind::pair : DatasetKind::quadruplet;
        const nlohmann::json& overall = doc.at("overall");
        report.overall.text = cell_from_json(overall.at("text"));
        if (report.dataset_kind == DatasetKind::quadruplet) {
            report.overall.image = cell_from_json(overall.at("image"));
            report.overall.group = cell_from_json(overall.at("group"));
        }
        for (auto it = doc.at("per_tag").begin(); it != doc.at("per_tag").end(); ++it) {
            TaskScores scores;
            scores.text = cell_from_json(it.value().at("text"));
            if (report.dataset_kind == DatasetKind::quadruplet) {
                scores.image = cell_from_json(it.value().at("image"));
                scores.group = cell_from_json(it.value().at("group"));
            }
            report.per_tag[it.key()] = scores;
        }
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::schema, std::string("malformed report: ") + e.what());
    }
    return report;
}

double subset_winrate(const EvalReport& a, const EvalReport& b) {
    if (a.dataset_kind != b.dataset_kind)
        raise(ErrorCode::invalid_input, "reports cover different dataset kinds");
    auto metric = [&](const TaskScores& scores) {
        return a.dataset_kind == DatasetKind::pair ? scores.text.fraction()
                                                   : scores.group.fraction();
    };
    int shared = 0;
    int wins = 0;
    for (const auto& [tag, scores_a] : a.per_tag) {
        auto it = b.per_tag.find(tag);
        if (it == b.per_tag.end()) continue;
        ++shared;
        if (metric(scores_a) > metric(it->second)) ++wins;
    }
    if (shared == 0) raise(ErrorCode::invalid_input, "reports share no tags");
    return static_cast<double>(wins) / static_cast<double>(shared);
}

}  // namespace cocotree
