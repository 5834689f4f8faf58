#include "cocotree/rules.hpp"

#include <iomanip>
#include <sstream>

#include "cocotree/model_ops.hpp"
#include "cocotree/parallel.hpp"

namespace cocotree {

const char* connective_name(Connective connective) {
    return connective == Connective::and_ ? "AND" : "OR";
}

const char* rule_setting_name(RuleSetting setting) {
    switch (setting) {
        case RuleSetting::only_rule_and: return "only_rule_and";
        case RuleSetting::only_rule_or: return "only_rule_or";
        case RuleSetting::only_caption: return "only_caption";
        case RuleSetting::rule_caption_and: return "rule_caption_and";
        case RuleSetting::rule_caption_or: return "rule_caption_or";
    }
    return "unknown";
}

namespace {

std::string join_antecedents(const std::vector<std::string>& antecedents,
                             Connective connective) {
    std::string joiner = std::string(" ") + connective_name(connective) + " ";
    std::string out;
    for (size_t i = 0; i < antecedents.size(); ++i) {
        if (i) out += joiner;
        out += antecedents[i];
    }
    return out;
}

}  // namespace

NeurosymbolicRule build_rule_from_texts(std::vector<std::string> antecedents,
                                        Connective connective, const std::string& caption) {
    if (antecedents.empty()) raise(ErrorCode::invalid_input, "rule needs at least one antecedent");
    if (caption.empty()) raise(ErrorCode::invalid_input, "rule conclusion is empty");
    NeurosymbolicRule rule;
    rule.connective = connective;
    rule.conclusion = caption;
    rule.rendered = join_antecedents(antecedents, connective) + " => " + caption;
    rule.antecedents = std::move(antecedents);
    return rule;
}

NeurosymbolicRule build_rule(const ReasoningPath& path, const ConceptTree& tree,
                             Connective connective, const std::string& caption) {
    if (path.node_ids.empty()) raise(ErrorCode::invalid_input, "path is empty");
    return build_rule_from_texts(path.texts(tree), connective, caption);
}

double evaluate_rule(ModelBackend& judge, ResponseCache* cache, const NeurosymbolicRule& rule,
                     RuleMode mode, const std::optional<std::string>& image) {
    std::string statement;
    switch (mode) {
        case RuleMode::rule_only:
            statement = join_antecedents(rule.antecedents, rule.connective);
            break;
        case RuleMode::caption_only:
            statement = rule.conclusion;
            break;
        case RuleMode::rule_plus_caption:
            statement = rule.rendered;
            break;
    }
    return judge_entailment(judge, cache, statement, rule.conclusion, image);
}

nlohmann::ordered_json EntailmentReport::to_json() const {
    nlohmann::ordered_json out;
    out["sample_count"] = sample_count;
    nlohmann::ordered_json grid;
    for (size_t i = 0; i < kRuleSettings.size(); ++i) {
        grid[rule_setting_name(kRuleSettings[i])] = {{"without_image", means[i][0]},
                                                     {"with_image", means[i][1]}};
    }
    out["means"] = std::move(grid);
    return out;
}

std::string EntailmentReport::render_table() const {
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    out << std::left << std::setw(20) << "setting" << std::right << std::setw(12)
        << "w/o image" << std::setw(12) << "w/ image" << "\n";
    for (size_t i = 0; i < kRuleSettings.size(); ++i) {
        out << std::left << std::setw(20) << rule_setting_name(kRuleSettings[i]) << std::right
            << std::setw(12) << means[i][0] << std::setw(12) << means[i][1] << "\n";
    }
    return out.str();
}

EntailmentReport entailment_report(ModelBackend& judge, ResponseCache* cache,
                                   const std::vector<EntailmentInput>& inputs,
                                   int parallelism) {
    if (inputs.empty()) raise(ErrorCode::invalid_input, "no inputs to judge");
    for (size_t i = 0; i < inputs.size(); ++i) {
        if (inputs[i].path_texts.empty())
            raise(ErrorCode::incomplete_input,
                  "input " + std::to_string(i) + " has no stored reasoning path");
        if (inputs[i].caption.empty() || inputs[i].image.empty())
            raise(ErrorCode::incomplete_input,
                  "input " + std::to_string(i) + " lacks a caption or image");
    }

    std::vector<std::array<std::array<double, 2>, 5>> cells(inputs.size());
    parallel_for(inputs.size(), parallelism, [&](size_t i) {
        const EntailmentInput& input = inputs[i];
        NeurosymbolicRule and_rule =
            build_rule_from_texts(input.path_texts, Connective::and_, input.caption);
        NeurosymbolicRule or_rule =
            build_rule_from_texts(input.path_texts, Connective::or_, input.caption);

        auto judge_cell = [&](const NeurosymbolicRule& rule, RuleMode mode, bool with_image) {
            return evaluate_rule(judge, cache, rule, mode,
                                 with_image ? std::optional<std::string>(input.image)
                                            : std::nullopt);
        };
        for (int img = 0; img < 2; ++img) {
            cells[i][0][img] = judge_cell(and_rule, RuleMode::rule_only, img == 1);
            cells[i][1][img] = judge_cell(or_rule, RuleMode::rule_only, img == 1);
            cells[i][2][img] = judge_cell(and_rule, RuleMode::caption_only, img == 1);
            cells[i][3][img] = judge_cell(and_rule, RuleMode::rule_plus_caption, img == 1);
            cells[i][4][img] = judge_cell(or_rule, RuleMode::rule_plus_caption, img == 1);
        }
    });

    EntailmentReport report;
    report.sample_count = static_cast<int>(inputs.size());
    for (size_t setting = 0; setting < 5; ++setting) {
        for (int img = 0; img < 2; ++img) {
            double sum = 0.0;
            for (const auto& cell : cells) sum += cell[setting][img];
            report.means[setting][img] = sum / static_cast<double>(inputs.size());
        }
    }
    return report;
}

}  // namespace cocotree
