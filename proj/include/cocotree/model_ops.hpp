#pragma once

#include <map>
#include <optional>
#include <string>

#include "cocotree/backend.hpp"
#include "cocotree/cache.hpp"

namespace cocotree {

// Two-way softmax over the yes/no logits, stable for |logit| up to ~1e4.
double yes_no_probability(const YesNoLogits& logits);

void warn(const std::string& message);

// Runs a request through the response cache (when one is given): a stored
// raw body is returned as-is, otherwise the backend is asked once and the
// body stored. Callers parse the body identically either way.
std::string run_cached(ModelBackend& backend, ResponseCache* cache, const ModelRequest& request);

// P(statement visible in image) from the vision endpoint's yes/no answer.
double vlm_relevance(ModelBackend& vlm, ResponseCache* cache, const std::string& image,
                     const std::string& statement);

// P(hypothesis plausible given premise) from the language endpoint.
double llm_entailment(ModelBackend& llm, ResponseCache* cache, const std::string& premise,
                      const std::string& hypothesis);

// P(conclusion entailed by statement) from the judge endpoint, optionally
// grounded in an image.
double judge_entailment(ModelBackend& judge, ResponseCache* cache, const std::string& statement,
                        const std::string& conclusion, const std::optional<std::string>& image);

// Free-form completion. Raises empty-generation when the endpoint returns
// an empty message.
std::string llm_generate(ModelBackend& llm, ResponseCache* cache, const std::string& prompt,
                         std::map<std::string, std::string> slots);

}  // namespace cocotree
