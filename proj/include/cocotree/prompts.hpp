#pragma once

#include <string>
#include <string_view>

namespace cocotree::prompts {

// Versioned prompt templates. Each constant mirrors a resource file under
// prompts/ byte for byte; a test pins that equivalence so edits to one side
// without the other fail loudly.
extern const std::string_view kDecomposeTemplate;   // prompts/decompose_v1.txt
extern const std::string_view kExpandTemplate;      // prompts/expand_v1.txt
extern const std::string_view kVisualTemplate;      // prompts/visual_v1.txt
extern const std::string_view kLinguisticTemplate;  // prompts/linguistic_v1.txt
extern const std::string_view kJudgeTemplate;       // prompts/judge_v1.txt

std::string replace_all(std::string text, std::string_view slot, std::string_view value);

// Caption -> M independent statements.
std::string render_decompose(const std::string& caption, int m);

// Concept node -> S child concepts grounded in the root caption.
std::string render_expand(const std::string& node_text, const std::string& caption, int s);

// Yes/no visual check of one statement against the attached image. The {I}
// placeholder marks where the image rides in the request; the rendered text
// drops it and the image travels out of band.
std::string render_visual(const std::string& statement);

// Yes/no plausibility of hypothesis given premise.
std::string render_linguistic(const std::string& premise, const std::string& hypothesis);

// Yes/no entailment judgment of a conclusion from a statement.
std::string render_judge(const std::string& statement, const std::string& conclusion);

// Prefix a format reminder onto a prompt whose first answer failed to parse.
std::string corrective_reprompt(const std::string& original_prompt);

}  // namespace cocotree::prompts
