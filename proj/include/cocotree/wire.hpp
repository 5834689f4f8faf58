#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "cocotree/backend.hpp"

// Building and parsing of chat-completions request/response bodies.
namespace cocotree::wire {

// Request body for one prompt. image_payload, when present, is either a
// data: URI or a plain URL and rides as an image_url content part.
nlohmann::json build_chat_request(const std::string& model_id, const ModelRequest& request,
                                  const std::optional<std::string>& image_payload);

struct YesNoExtraction {
    // Present when the first generated token resolved to yes/no logits.
    std::optional<YesNoLogits> logits;
    // Set when logprobs were missing or lacked both answer tokens and the
    // greedy token still reads as yes or no.
    std::optional<bool> fallback_yes;
    std::string first_token;
};

// Pulls yes/no evidence out of a response body. Throws protocol error on
// bodies that are not valid chat completions or whose first token is
// neither yes nor no.
YesNoExtraction extract_yes_no(const std::string& body);

// Message content of the first choice. Throws protocol error on malformed
// bodies.
std::string extract_completion(const std::string& body);

// Normalization used for answer-token matching: strip whitespace and
// leading non-alphanumerics, lowercase.
std::string normalize_token(std::string_view token);

// Response synthesis for simulated backends, shaped like live bodies.
std::string make_completion_body(const std::string& text);
std::string make_yes_no_body(double logit_yes, double logit_no);

}  // namespace cocotree::wire
