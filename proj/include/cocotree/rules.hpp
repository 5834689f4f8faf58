#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cocotree/backend.hpp"
#include "cocotree/cache.hpp"
#include "cocotree/search.hpp"
#include "cocotree/tree.hpp"

namespace cocotree {

enum class Connective { and_, or_ };

const char* connective_name(Connective connective);

// Path concepts joined by one connective, implying the caption.
struct NeurosymbolicRule {
    std::vector<std::string> antecedents;
    Connective connective = Connective::and_;
    std::string conclusion;
    std::string rendered;  // "A AND B => conclusion"
};

// Canonical rendering: antecedents joined by " AND " / " OR ", then " => ",
// then the conclusion.
NeurosymbolicRule build_rule_from_texts(std::vector<std::string> antecedents,
                                        Connective connective, const std::string& caption);

NeurosymbolicRule build_rule(const ReasoningPath& path, const ConceptTree& tree,
                             Connective connective, const std::string& caption);

enum class RuleMode { rule_only, caption_only, rule_plus_caption };

// Asks the judge whether the caption follows from the mode's evidence:
// the antecedent clause alone, the caption alone, or the rendered rule.
double evaluate_rule(ModelBackend& judge, ResponseCache* cache, const NeurosymbolicRule& rule,
                     RuleMode mode, const std::optional<std::string>& image);

// One judged unit: a positive image/caption pairing plus the concept texts
// of its selected reasoning path.
struct EntailmentInput {
    std::string image;
    std::string caption;
    std::vector<std::string> path_texts;
};

enum class RuleSetting {
    only_rule_and,
    only_rule_or,
    only_caption,
    rule_caption_and,
    rule_caption_or,
};

constexpr std::array<RuleSetting, 5> kRuleSettings = {
    RuleSetting::only_rule_and, RuleSetting::only_rule_or, RuleSetting::only_caption,
    RuleSetting::rule_caption_and, RuleSetting::rule_caption_or};

const char* rule_setting_name(RuleSetting setting);

// Mean judge entailment per (setting, image presence) over all inputs.
struct EntailmentReport {
    // means[setting][0] = without image, means[setting][1] = with image
    std::array<std::array<double, 2>, 5> means{};
    int sample_count = 0;

    nlohmann::ordered_json to_json() const;
    std::string render_table() const;
};

EntailmentReport entailment_report(ModelBackend& judge, ResponseCache* cache,
                                   const std::vector<EntailmentInput>& inputs,
                                   int parallelism = 1);

}  // namespace cocotree
