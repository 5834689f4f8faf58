#include "cocotree/prompts.hpp"

namespace cocotree::prompts {

const std::string_view kDecomposeTemplate =
    "You are a helpful chatbot. Divide the caption into {M} smaller independent statements "
    "which entail the caption based on Subject and Object. Caption: {C}. The output format is:\n"
    "1. Subject 2. Object\n"
    "Assistant:";

const std::string_view kExpandTemplate =
    "You are a helpful chatbot. List {S} binary visual concepts to verify the {n^l_i}. "
    "Ensure the outputs are possible for {C}. Answer in small phrases and focus on "
    "verifiable things like objects, locations, actions, etc. Output format is: "
    "1. xxx 2. xxx 3. xxx 4. xxx 5. xxx.\n"
    "Assistant:";

const std::string_view kVisualTemplate =
    "<image> {I} Does this figure show: {C}? Please answer Yes or No.";

const std::string_view kLinguisticTemplate =
    "Given we observe {C1}. Is it possible {C2}? Answer yes or no. Assistant: ";

const std::string_view kJudgeTemplate =
    "You are a careful judge of entailment. Statement: {S}. Conclusion: {Q}. "
    "Does the statement entail the conclusion? Answer Yes or No.";

std::string replace_all(std::string text, std::string_view slot, std::string_view value) {
    size_t pos = 0;
    while ((pos = text.find(slot, pos)) != std::string::npos) {
        text.replace(pos, slot.size(), value);
        pos += value.size();
    }
    return text;
}

std::string render_decompose(const std::string& caption, int m) {
    std::string out = replace_all(std::string(kDecomposeTemplate), "{M}", std::to_string(m));
    return replace_all(std::move(out), "{C}", caption);
}

std::string render_expand(const std::string& node_text, const std::string& caption, int s) {
    std::string out = replace_all(std::string(kExpandTemplate), "{S}", std::to_string(s));
    out = replace_all(std::move(out), "{n^l_i}", node_text);
    return replace_all(std::move(out), "{C}", caption);
}

std::string render_visual(const std::string& statement) {
    std::string out = replace_all(std::string(kVisualTemplate), "{I}", "");
    return replace_all(std::move(out), "{C}", statement);
}

std::string render_linguistic(const std::string& premise, const std::string& hypothesis) {
    std::string out = replace_all(std::string(kLinguisticTemplate), "{C1}", premise);
    return replace_all(std::move(out), "{C2}", hypothesis);
}

std::string render_judge(const std::string& statement, const std::string& conclusion) {
    std::string out = replace_all(std::string(kJudgeTemplate), "{S}", statement);
    return replace_all(std::move(out), "{Q}", conclusion);
}

std::string corrective_reprompt(const std::string& original_prompt) {
    return "Your previous answer did not follow the required format. "
           "Answer again and follow the output format exactly.\n" +
           original_prompt;
}

}  // namespace cocotree::prompts
