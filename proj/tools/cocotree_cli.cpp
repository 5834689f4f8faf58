#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cocotree/config.hpp"
#include "cocotree/dataset.hpp"
#include "cocotree/decompose.hpp"
#include "cocotree/error.hpp"
#include "cocotree/eval.hpp"
#include "cocotree/http_backend.hpp"
#include "cocotree/mock_backend.hpp"
#include "cocotree/model_ops.hpp"
#include "cocotree/rules.hpp"
#include "cocotree/search.hpp"
#include "cocotree/tree.hpp"

namespace ct = cocotree;
using nlohmann::ordered_json;

namespace {

// One CLI process per cache directory.
class CacheLock {
public:
    void acquire(const std::filesystem::path& dir) {
        std::filesystem::create_directories(dir);
        std::filesystem::path lock_path = dir / ".lock";
        fd_ = ::open(lock_path.string().c_str(), O_CREAT | O_RDWR, 0644);
        if (fd_ < 0) ct::raise(ct::ErrorCode::cache, "cannot open lock file: " + lock_path.string());
        if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
            ::close(fd_);
            fd_ = -1;
            ct::raise(ct::ErrorCode::cache,
                      "another instance is already using cache directory " + dir.string());
        }
    }

    ~CacheLock() {
        if (fd_ >= 0) {
            ::flock(fd_, LOCK_UN);
            ::close(fd_);
        }
    }

private:
    int fd_ = -1;
};

struct BackendSet {
    std::unique_ptr<ct::ModelBackend> llm;
    std::unique_ptr<ct::ModelBackend> vlm;
    std::unique_ptr<ct::ModelBackend> judge;
    std::unique_ptr<ct::ResponseCache> cache;

    ct::Backends view() { return {llm.get(), vlm.get(), judge.get(), cache.get()}; }
};

BackendSet make_backends(const ct::RunConfig& cfg, bool need_llm, bool need_vlm,
                         bool need_judge) {
    BackendSet set;
    set.cache = std::make_unique<ct::ResponseCache>(cfg.cache_dir);
    auto fill = [&](std::unique_ptr<ct::ModelBackend>& slot, const char* role,
                    const std::optional<ct::EndpointConfig>& endpoint) {
        if (cfg.mock_table) {
            slot = std::make_unique<ct::MockBackend>(*cfg.mock_table, role);
            return;
        }
        if (!endpoint)
            ct::raise(ct::ErrorCode::config,
                      std::string("no ") + role + " endpoint configured and no mock table given");
        slot = std::make_unique<ct::HttpBackend>(*endpoint);
    };
    if (need_llm) fill(set.llm, "llm", cfg.llm);
    if (need_vlm) fill(set.vlm, "vlm", cfg.vlm);
    if (need_judge) fill(set.judge, "judge", cfg.judge);
    return set;
}

void write_cache_stats(const ct::ResponseCache& cache) {
    ordered_json stats;
    stats["hits"] = cache.hits();
    stats["misses"] = cache.misses();
    std::ofstream out(cache.dir() / "stats.json", std::ios::trunc);
    if (out) out << stats.dump(2) << "\n";
}

ct::ScorerConfig scorer_config(const ct::RunConfig& cfg, ct::ScorerKind kind,
                               int inner_parallelism) {
    ct::ScorerConfig sc;
    sc.kind = kind;
    sc.alpha = cfg.alpha;
    sc.beta = cfg.beta;
    sc.m = cfg.m;
    sc.s = cfg.s;
    sc.l = cfg.l;
    sc.strategy = cfg.strategy;
    sc.k = cfg.k;
    sc.prune_width = cfg.prune_width;
    sc.inner_parallelism = inner_parallelism;
    return sc;
}

ordered_json run_config_json(const ct::RunConfig& cfg, ct::ScorerKind kind) {
    ordered_json out;
    out["scorer"] = ct::scorer_kind_name(kind);
    out["alpha"] = cfg.alpha;
    out["beta"] = cfg.beta;
    out["m"] = cfg.m;
    out["s"] = cfg.s;
    out["l"] = cfg.l;
    out["k"] = cfg.k;
    out["strategy"] = ct::strategy_name(cfg.strategy);
    out["prune_width"] = cfg.prune_width;
    out["seed"] = cfg.seed;
    out["parallelism"] = cfg.parallelism;
    out["dataset"] = cfg.dataset ? cfg.dataset->string() : "";
    return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) ct::raise(ct::ErrorCode::invalid_input, "cannot write file: " + path.string());
    out << content;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) ct::raise(ct::ErrorCode::invalid_input, "cannot read file: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

int run_build_tree(const ct::RunConfig& cfg, const std::string& caption) {
    BackendSet backends = make_backends(cfg, true, false, false);
    ct::BuildOptions options;
    options.parallelism = cfg.parallelism;
    options.prune_width = cfg.prune_width;
    ct::ConceptTree tree = ct::build_tree(*backends.llm, backends.cache.get(), caption, cfg.m,
                                          cfg.s, cfg.l, options);
    std::string document = ct::serialize_tree(tree, nullptr, cfg.alpha);
    if (cfg.out)
        write_text_file(*cfg.out, document);
    else
        std::cout << document;
    write_cache_stats(*backends.cache);
    return 0;
}

int run_score(const ct::RunConfig& cfg, const std::string& image, const std::string& caption,
              const std::string& scorer_name) {
    ct::ScorerKind kind = ct::parse_scorer_kind(scorer_name);
    BackendSet backends = make_backends(cfg, kind == ct::ScorerKind::coco_tree, true, false);
    ct::PairScorer scorer(scorer_config(cfg, kind, cfg.parallelism), backends.view());
    ct::ScoreDetail detail = scorer.score_detail(image, caption);

    ordered_json out;
    out["image"] = image;
    out["caption"] = caption;
    out["scorer"] = ct::scorer_kind_name(kind);
    out["base"] = detail.base;
    out["path_weight"] =
        detail.path_weight ? ordered_json(*detail.path_weight) : ordered_json(nullptr);
    out["fused"] = detail.fused;
    out["path_texts"] = detail.path ? ordered_json(detail.path->texts(*detail.tree))
                                    : ordered_json(nullptr);
    std::string rendered = out.dump(2) + "\n";
    std::cout << rendered;
    if (cfg.out) write_text_file(*cfg.out, rendered);
    write_cache_stats(*backends.cache);
    return 0;
}

void write_eval_outputs(const std::filesystem::path& out_dir, const ct::RunConfig& cfg,
                        ct::ScorerKind kind, const ct::EvalReport& report) {
    write_text_file(out_dir / "report.json", report.results_json().dump(2) + "\n");
    write_text_file(out_dir / "run.json", run_config_json(cfg, kind).dump(2) + "\n");
}

std::vector<ct::EntailmentInput> entailment_inputs_from_artifacts(
    const std::filesystem::path& artifacts_dir, const ct::EvalReport& report) {
    std::vector<ct::EntailmentInput> inputs;
    for (const ct::SampleOutcome& outcome : report.samples) {
        if (outcome.failed) continue;
        for (const auto& entry : std::filesystem::directory_iterator(artifacts_dir)) {
            if (entry.path().extension() != ".json") continue;
            nlohmann::json artifact = nlohmann::json::parse(read_text_file(entry.path()));
            if (artifact.value("id", "") != outcome.id) continue;
            for (const nlohmann::json& pairing : artifact.at("pairings")) {
                if (!pairing.value("positive", false)) continue;
                ct::EntailmentInput input;
                input.image = pairing.at("image").get<std::string>();
                input.caption = pairing.at("caption").get<std::string>();
                if (pairing.contains("path_texts") && pairing["path_texts"].is_array())
                    input.path_texts =
                        pairing["path_texts"].get<std::vector<std::string>>();
                inputs.push_back(std::move(input));
            }
            break;
        }
    }
    return inputs;
}

int run_eval(const ct::RunConfig& cfg, const std::string& scorer_name, bool entailment,
             const std::string& winrate_against) {
    if (!cfg.dataset) ct::raise(ct::ErrorCode::config, "no dataset configured");
    ct::ScorerKind kind = ct::parse_scorer_kind(scorer_name);
    std::filesystem::path out_dir = cfg.out.value_or("cocotree-out");

    BackendSet backends =
        make_backends(cfg, kind == ct::ScorerKind::coco_tree, true, entailment);
    ct::Dataset dataset = ct::load_dataset(*cfg.dataset, cfg.seed);
    for (const std::string& warning : dataset.warnings) ct::warn(warning);

    ct::PairScorer scorer(scorer_config(cfg, kind, 1), backends.view());
    ct::EvalOptions options;
    options.parallelism = cfg.parallelism;
    options.artifacts_dir = out_dir / "artifacts";
    ct::EvalReport report = ct::evaluate_dataset(scorer, dataset, options);

    write_eval_outputs(out_dir, cfg, kind, report);
    std::cout << report.render_summary();
    std::cout << "report: " << (out_dir / "report.json").string() << "\n";

    if (entailment) {
        std::vector<ct::EntailmentInput> inputs =
            entailment_inputs_from_artifacts(options.artifacts_dir, report);
        ct::EntailmentReport grid = ct::entailment_report(*backends.judge, backends.cache.get(),
                                                          inputs, cfg.parallelism);
        write_text_file(out_dir / "entailment.json", grid.to_json().dump(2) + "\n");
        std::cout << "\n" << grid.render_table();
    }

    if (!winrate_against.empty()) {
        ct::EvalReport other = ct::EvalReport::from_results_json(read_text_file(winrate_against));
        double rate = ct::subset_winrate(report, other);
        std::cout << "\nsubset win rate vs " << winrate_against << ": " << rate << "\n";
    }

    write_cache_stats(*backends.cache);
    return 0;
}

struct SweepAxis {
    std::string param;
    std::vector<double> values;
};

SweepAxis parse_sweep(const std::string& spec) {
    size_t eq = spec.find('=');
    if (eq == std::string::npos)
        ct::raise(ct::ErrorCode::config, "sweep spec must look like param=start:stop:step");
    SweepAxis axis;
    axis.param = spec.substr(0, eq);
    const std::set<std::string> known = {"alpha", "beta", "m", "s", "l", "k", "prune_width"};
    if (!known.contains(axis.param))
        ct::raise(ct::ErrorCode::config, "unknown sweep parameter '" + axis.param + "'");

    std::string rest = spec.substr(eq + 1);
    double start = 0.0;
    double stop = 0.0;
    double step = 0.0;
    char colon1 = 0;
    char colon2 = 0;
    std::istringstream in(rest);
    if (!(in >> start >> colon1 >> stop >> colon2 >> step) || colon1 != ':' || colon2 != ':' ||
        !(in >> std::ws).eof())
        ct::raise(ct::ErrorCode::config, "cannot parse sweep range '" + rest + "'");
    if (step <= 0 || stop < start)
        ct::raise(ct::ErrorCode::config, "sweep range needs start <= stop and step > 0");

    bool integral = axis.param != "alpha" && axis.param != "beta";
    for (double v = start; v <= stop + 1e-9; v += step) {
        double snapped = std::round(v * 1e9) / 1e9;
        if (integral && std::abs(snapped - std::round(snapped)) > 1e-9)
            ct::raise(ct::ErrorCode::config,
                      "sweep parameter '" + axis.param + "' takes integer values");
        axis.values.push_back(snapped);
    }
    return axis;
}

void apply_sweep_value(ct::RunConfig& cfg, const std::string& param, double value) {
    if (param == "alpha")
        cfg.alpha = value;
    else if (param == "beta")
        cfg.beta = value;
    else if (param == "m")
        cfg.m = static_cast<int>(std::llround(value));
    else if (param == "s")
        cfg.s = static_cast<int>(std::llround(value));
    else if (param == "l")
        cfg.l = static_cast<int>(std::llround(value));
    else if (param == "k")
        cfg.k = static_cast<int>(std::llround(value));
    else if (param == "prune_width")
        cfg.prune_width = static_cast<int>(std::llround(value));
}

std::string sweep_value_label(const std::string& param, double value) {
    bool integral = param != "alpha" && param != "beta";
    if (integral) return std::to_string(std::llround(value));
    return nlohmann::json(value).dump();
}

int run_sweep(const ct::RunConfig& cfg, const std::string& scorer_name,
              const std::vector<std::string>& sweep_specs) {
    if (!cfg.dataset) ct::raise(ct::ErrorCode::config, "no dataset configured");
    if (sweep_specs.empty())
        ct::raise(ct::ErrorCode::config, "sweep needs at least one --sweep param=start:stop:step");
    ct::ScorerKind kind = ct::parse_scorer_kind(scorer_name);
    std::filesystem::path out_base = cfg.out.value_or("cocotree-sweep");

    std::vector<SweepAxis> axes;
    for (const std::string& spec : sweep_specs) axes.push_back(parse_sweep(spec));

    BackendSet backends =
        make_backends(cfg, kind == ct::ScorerKind::coco_tree, true, false);
    ct::Dataset dataset = ct::load_dataset(*cfg.dataset, cfg.seed);
    for (const std::string& warning : dataset.warnings) ct::warn(warning);

    std::vector<size_t> cursor(axes.size(), 0);
    ordered_json index = ordered_json::array();
    for (;;) {
        ct::RunConfig cell_cfg = cfg;
        std::string label;
        ordered_json params;
        for (size_t i = 0; i < axes.size(); ++i) {
            double value = axes[i].values[cursor[i]];
            apply_sweep_value(cell_cfg, axes[i].param, value);
            if (i) label += "_";
            label += axes[i].param + "=" + sweep_value_label(axes[i].param, value);
            params[axes[i].param] = value;
        }
        cell_cfg.validate();

        ct::PairScorer scorer(scorer_config(cell_cfg, kind, 1), backends.view());
        ct::EvalOptions options;
        options.parallelism = cell_cfg.parallelism;
        options.artifacts_dir = out_base / label / "artifacts";
        ct::EvalReport report = ct::evaluate_dataset(scorer, dataset, options);
        write_eval_outputs(out_base / label, cell_cfg, kind, report);

        ordered_json row;
        row["label"] = label;
        row["params"] = params;
        row["overall"] = report.results_json()["overall"];
        index.push_back(std::move(row));
        std::cout << label << ": text=" << report.overall.text.fraction();
        if (dataset.kind == ct::DatasetKind::quadruplet)
            std::cout << " image=" << report.overall.image.fraction()
                      << " group=" << report.overall.group.fraction();
        std::cout << "\n";

        size_t axis = axes.size();
        while (axis > 0) {
            --axis;
            if (++cursor[axis] < axes[axis].values.size()) break;
            cursor[axis] = 0;
            if (axis == 0) {
                write_text_file(out_base / "sweep.json", index.dump(2) + "\n");
                write_cache_stats(*backends.cache);
                return 0;
            }
        }
    }
}

struct ExplainSource {
    ct::ConceptTree tree;
    ct::ScoreMap scores;
    double base = 0.0;
    std::string caption;
    std::string image;
};

ExplainSource explain_from_artifacts(const std::filesystem::path& artifacts_dir,
                                     const std::string& id, int pairing_index) {
    if (!std::filesystem::is_directory(artifacts_dir))
        ct::raise(ct::ErrorCode::invalid_input,
                  "artifacts directory not found: " + artifacts_dir.string());
    for (const auto& entry : std::filesystem::directory_iterator(artifacts_dir)) {
        if (entry.path().extension() != ".json") continue;
        nlohmann::json artifact = nlohmann::json::parse(read_text_file(entry.path()), nullptr,
                                                        false);
        if (artifact.is_discarded() || artifact.value("id", "") != id) continue;
        const nlohmann::json& pairings = artifact.at("pairings");
        const nlohmann::json* chosen = nullptr;
        if (pairing_index >= 0) {
            if (pairing_index >= static_cast<int>(pairings.size()))
                ct::raise(ct::ErrorCode::invalid_input, "pairing index out of range");
            chosen = &pairings[pairing_index];
        } else {
            for (const nlohmann::json& pairing : pairings)
                if (pairing.value("positive", false)) {
                    chosen = &pairing;
                    break;
                }
        }
        if (!chosen) ct::raise(ct::ErrorCode::invalid_input, "sample has no positive pairing");
        if (!chosen->contains("tree") || (*chosen)["tree"].is_null())
            ct::raise(ct::ErrorCode::incomplete_input,
                      "sample was scored without trees; re-run eval with the tree scorer");
        ct::TreeDocument doc = ct::deserialize_tree((*chosen)["tree"].dump());
        if (!doc.scores)
            ct::raise(ct::ErrorCode::incomplete_input, "stored tree carries no node scores");
        ExplainSource source;
        source.tree = std::move(doc.tree);
        source.scores = std::move(*doc.scores);
        source.base = chosen->at("base").get<double>();
        source.caption = chosen->at("caption").get<std::string>();
        source.image = chosen->at("image").get<std::string>();
        return source;
    }
    ct::raise(ct::ErrorCode::invalid_input, "no artifact found for sample id '" + id + "'");
}

int run_explain(const ct::RunConfig& cfg, const std::string& id,
                const std::string& artifacts_flag, const std::string& image,
                const std::string& caption, const std::string& connective, bool show_trace) {
    ExplainSource source;
    std::unique_ptr<BackendSet> backends;
    if (!id.empty()) {
        std::filesystem::path artifacts_dir;
        if (!artifacts_flag.empty())
            artifacts_dir = artifacts_flag;
        else if (cfg.out)
            artifacts_dir = *cfg.out / "artifacts";
        else
            ct::raise(ct::ErrorCode::config, "explain --id needs --artifacts or --out");
        source = explain_from_artifacts(artifacts_dir, id, -1);
    } else if (!image.empty() && !caption.empty()) {
        backends = std::make_unique<BackendSet>(make_backends(cfg, true, true, false));
        ct::BuildOptions options;
        options.parallelism = cfg.parallelism;
        options.prune_width = cfg.prune_width;
        source.tree = ct::build_tree(*backends->llm, backends->cache.get(), caption, cfg.m, cfg.s,
                                     cfg.l, options);
        source.scores = ct::score_tree(*backends->vlm, *backends->llm, backends->cache.get(),
                                       source.tree, image, cfg.alpha, cfg.parallelism);
        source.base = ct::vlm_relevance(*backends->vlm, backends->cache.get(), image, caption);
        source.caption = caption;
        source.image = image;
    } else {
        ct::raise(ct::ErrorCode::config, "explain needs --id or both --image and --caption");
    }

    ct::SearchTrace trace;
    ct::ReasoningPath path = ct::find_path(source.tree, source.scores,
                                           {cfg.strategy, cfg.k}, &trace);
    double fused = ct::fuse(source.base, path.weight, cfg.beta);

    std::cout << "caption: " << source.caption << "\n";
    std::cout << "image:   " << source.image << "\n";
    std::cout << "strategy: " << ct::strategy_name(cfg.strategy);
    if (cfg.strategy == ct::Strategy::beam) std::cout << " (k=" << cfg.k << ")";
    std::cout << "\n\npath:\n";
    std::cout << "  level  l_s     v_s     c_s     concept\n";
    for (size_t i = 0; i < path.node_ids.size(); ++i) {
        const ct::ConceptNode& node = source.tree.node(path.node_ids[i]);
        const ct::NodeScore& score = source.scores.at(node.id);
        char line[64];
        std::snprintf(line, sizeof(line), "  %-6d %.4f  %.4f  %.4f  ", node.level, score.l_s,
                      score.v_s, score.c_s);
        std::cout << line << node.text << "\n";
    }
    std::cout << "\npath weight: " << path.weight << "\n";
    std::cout << "base score:  " << source.base << "\n";
    std::cout << "fused (beta=" << cfg.beta << "): " << fused << "\n\n";

    auto print_rule = [&](ct::Connective c) {
        ct::NeurosymbolicRule rule = ct::build_rule(path, source.tree, c, source.caption);
        std::cout << "rule (" << ct::connective_name(c) << "): " << rule.rendered << "\n";
    };
    if (connective.empty() || connective == "and") print_rule(ct::Connective::and_);
    if (connective.empty() || connective == "or") print_rule(ct::Connective::or_);
    if (!connective.empty() && connective != "and" && connective != "or")
        ct::raise(ct::ErrorCode::config, "connective must be 'and' or 'or'");

    if (show_trace) std::cout << "\nsearch trace:\n" << ct::render_trace(trace, source.tree);
    if (backends) write_cache_stats(*backends->cache);
    return 0;
}

int run_cache(const ct::RunConfig& cfg, const std::string& action) {
    ct::ResponseCache cache(cfg.cache_dir);
    if (action == "stats") {
        std::cout << "cache directory: " << cfg.cache_dir.string() << "\n";
        std::cout << "entries: " << cache.entry_count() << "\n";
        std::cout << "bytes: " << cache.total_bytes() << "\n";
        std::filesystem::path stats_path = cfg.cache_dir / "stats.json";
        if (std::filesystem::exists(stats_path)) {
            nlohmann::json stats = nlohmann::json::parse(read_text_file(stats_path), nullptr,
                                                         false);
            if (!stats.is_discarded())
                std::cout << "last run: " << stats.value("hits", 0) << " hits, "
                          << stats.value("misses", 0) << " misses\n";
        } else {
            std::cout << "last run: no recorded runs\n";
        }
        return 0;
    }
    if (action == "clear") {
        cache.clear();
        std::error_code ec;
        std::filesystem::remove(cfg.cache_dir / "stats.json", ec);
        std::cout << "cache cleared\n";
        return 0;
    }
    ct::raise(ct::ErrorCode::config, "cache action must be 'stats' or 'clear'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"concept-tree reasoning and evaluation for image-text matching"};
    app.require_subcommand(1);

    std::string config_path;
    std::string llm_endpoint;
    std::string vlm_endpoint;
    std::string judge_endpoint;
    std::string mock_table;
    double alpha = 0.0;
    double beta = 0.0;
    int entities = 0;
    int split = 0;
    int depth = 0;
    int beam_width = 0;
    std::string strategy;
    int prune_width = 0;
    std::string cache_dir;
    std::string dataset;
    std::string out;
    std::uint64_t seed = 0;
    int parallelism = 0;

    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--llm-endpoint", llm_endpoint, "LLM endpoint URL, optional #model suffix");
    app.add_option("--vlm-endpoint", vlm_endpoint, "VLM endpoint URL, optional #model suffix");
    app.add_option("--judge-endpoint", judge_endpoint,
                   "judge endpoint URL, optional #model suffix");
    app.add_option("--mock", mock_table, "response table file; replaces live endpoints");
    app.add_option("--alpha", alpha, "linguistic/visual mix for node scores [0,1]");
    app.add_option("--beta", beta, "base/path mix for the fused score [0,1]");
    app.add_option("--entities", entities, "statements per caption (m)");
    app.add_option("--split", split, "children per concept (s)");
    app.add_option("--depth", depth, "expansion depth (l)");
    app.add_option("--beam-width", beam_width, "beam width (k)");
    app.add_option("--strategy", strategy, "path search strategy: max or beam");
    app.add_option("--prune-width", prune_width, "frontier cap during tree building; 0 = off");
    app.add_option("--cache-dir", cache_dir, "response cache directory");
    app.add_option("--dataset", dataset, "dataset manifest path");
    app.add_option("--out", out, "output file or directory");
    app.add_option("--seed", seed, "subsampling seed");
    app.add_option("--parallelism", parallelism, "worker thread budget");

    auto* cmd_build = app.add_subcommand("build-tree", "build and print a concept tree");
    std::string caption;
    cmd_build->add_option("--caption", caption, "caption to decompose")->required();
    cmd_build->fallthrough();

    auto* cmd_score = app.add_subcommand("score", "score one image/caption pair");
    std::string score_image;
    std::string score_caption;
    std::string scorer_name = "coco_tree";
    cmd_score->add_option("--image", score_image, "image path or URL")->required();
    cmd_score->add_option("--caption", score_caption, "caption text")->required();
    cmd_score->add_option("--scorer", scorer_name, "coco_tree or vqascore_baseline");
    cmd_score->fallthrough();

    auto* cmd_eval = app.add_subcommand("eval", "evaluate a dataset");
    std::string eval_scorer = "coco_tree";
    bool entailment = false;
    std::string winrate_against;
    cmd_eval->add_option("--scorer", eval_scorer, "coco_tree or vqascore_baseline");
    cmd_eval->add_flag("--entailment", entailment, "judge rule entailment over best paths");
    cmd_eval->add_option("--winrate-against", winrate_against,
                         "existing report.json to compare per-tag scores against");
    cmd_eval->fallthrough();

    auto* cmd_explain = app.add_subcommand("explain", "print the reasoning behind one score");
    std::string explain_id;
    std::string artifacts_dir;
    std::string explain_image;
    std::string explain_caption;
    std::string connective;
    bool show_trace = false;
    cmd_explain->add_option("--id", explain_id, "sample id from a previous eval");
    cmd_explain->add_option("--artifacts", artifacts_dir, "artifacts directory of that eval");
    cmd_explain->add_option("--image", explain_image, "image path or URL (live mode)");
    cmd_explain->add_option("--caption", explain_caption, "caption text (live mode)");
    cmd_explain->add_option("--connective", connective, "render only this rule: and | or");
    cmd_explain->add_flag("--trace", show_trace, "dump the per-level search frontier");
    cmd_explain->fallthrough();

    auto* cmd_cache = app.add_subcommand("cache", "inspect or clear the response cache");
    std::string cache_action;
    cmd_cache->add_option("action", cache_action, "stats or clear")->required();
    cmd_cache->fallthrough();

    auto* cmd_sweep = app.add_subcommand("sweep", "grid of eval runs over parameter ranges");
    std::string sweep_scorer = "coco_tree";
    std::vector<std::string> sweep_specs;
    cmd_sweep->add_option("--scorer", sweep_scorer, "coco_tree or vqascore_baseline");
    cmd_sweep->add_option("--sweep", sweep_specs, "param=start:stop:step (repeatable)");
    cmd_sweep->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        ct::RunConfig cfg;
        ct::apply_environment(cfg);
        if (app.count("--config")) ct::apply_config_file(cfg, config_path);
        if (app.count("--llm-endpoint")) ct::merge_endpoint_url(cfg.llm, llm_endpoint);
        if (app.count("--vlm-endpoint")) ct::merge_endpoint_url(cfg.vlm, vlm_endpoint);
        if (app.count("--judge-endpoint")) ct::merge_endpoint_url(cfg.judge, judge_endpoint);
        if (app.count("--mock")) cfg.mock_table = mock_table;
        if (app.count("--alpha")) cfg.alpha = alpha;
        if (app.count("--beta")) cfg.beta = beta;
        if (app.count("--entities")) cfg.m = entities;
        if (app.count("--split")) cfg.s = split;
        if (app.count("--depth")) cfg.l = depth;
        if (app.count("--beam-width")) cfg.k = beam_width;
        if (app.count("--strategy")) cfg.strategy = ct::parse_strategy(strategy);
        if (app.count("--prune-width")) cfg.prune_width = prune_width;
        if (app.count("--cache-dir")) cfg.cache_dir = cache_dir;
        if (app.count("--dataset")) cfg.dataset = dataset;
        if (app.count("--out")) cfg.out = out;
        if (app.count("--seed")) cfg.seed = seed;
        if (app.count("--parallelism")) cfg.parallelism = parallelism;
        ct::finalize_endpoints(cfg);
        cfg.validate();

        CacheLock lock;
        lock.acquire(cfg.cache_dir);

        if (cmd_build->parsed()) return run_build_tree(cfg, caption);
        if (cmd_score->parsed()) return run_score(cfg, score_image, score_caption, scorer_name);
        if (cmd_eval->parsed()) return run_eval(cfg, eval_scorer, entailment, winrate_against);
        if (cmd_explain->parsed())
            return run_explain(cfg, explain_id, artifacts_dir, explain_image, explain_caption,
                               connective, show_trace);
        if (cmd_cache->parsed()) return run_cache(cfg, cache_action);
        if (cmd_sweep->parsed()) return run_sweep(cfg, sweep_scorer, sweep_specs);
        ct::raise(ct::ErrorCode::config, "no subcommand given");
    } catch (const ct::Error& e) {
        std::cerr << "error (" << ct::error_code_name(e.code()) << "): " << e.what() << "\n";
        return ct::error_exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
