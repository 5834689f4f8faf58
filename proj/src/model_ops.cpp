#include "cocotree/model_ops.hpp"

#include <cmath>
#include <iostream>
#include <mutex>

#include "cocotree/error.hpp"
#include "cocotree/image_ref.hpp"
#include "cocotree/prompts.hpp"
#include "cocotree/wire.hpp"

namespace cocotree {

double yes_no_probability(const YesNoLogits& logits) {
    double peak = std::max(logits.logit_yes, logits.logit_no);
    double e_yes = std::exp(logits.logit_yes - peak);
    double e_no = std::exp(logits.logit_no - peak);
    return e_yes / (e_yes + e_no);
}

void warn(const std::string& message) {
    static std::mutex mutex;
    std::lock_guard lock(mutex);
    std::cerr << "[cocotree] warning: " << message << "\n";
}

std::string run_cached(ModelBackend& backend, ResponseCache* cache, const ModelRequest& request) {
    if (!cache) return backend.complete(request);
    std::string image_digest = request.image ? image_ref_digest(*request.image) : "";
    const char* kind = request.kind == ModelRequest::Kind::yes_no ? "yes_no" : "generate";
    std::string key = ResponseCache::make_key(backend.identity(), kind, request.prompt,
                                              image_digest);
    if (auto stored = cache->get(key)) return *stored;
    std::string body = backend.complete(request);
    cache->put(key, body);
    return body;
}

namespace {

double yes_no_request(ModelBackend& backend, ResponseCache* cache, ModelRequest request) {
    request.kind = ModelRequest::Kind::yes_no;
    request.max_tokens = 1;
    std::string body = run_cached(backend, cache, request);
    wire::YesNoExtraction extraction = wire::extract_yes_no(body);
    if (extraction.logits) return yes_no_probability(*extraction.logits);
    warn("yes/no logits missing from response; using hard " +
         std::string(*extraction.fallback_yes ? "1" : "0") + " for prompt '" +
         request.prompt.substr(0, 60) + "'");
    return *extraction.fallback_yes ? 1.0 : 0.0;
}

}  // namespace

double vlm_relevance(ModelBackend& vlm, ResponseCache* cache, const std::string& image,
                     const std::string& statement) {
    if (image.empty()) raise(ErrorCode::invalid_input, "image reference is empty");
    if (statement.empty()) raise(ErrorCode::invalid_input, "statement is empty");
    ModelRequest request;
    request.prompt = prompts::render_visual(statement);
    request.image = image;
    request.slots = {{"statement", statement}};
    return yes_no_request(vlm, cache, std::move(request));
}

double llm_entailment(ModelBackend& llm, ResponseCache* cache, const std::string& premise,
                      const std::string& hypothesis) {
    if (premise.empty()) raise(ErrorCode::invalid_input, "premise is empty");
    if (hypothesis.empty()) raise(ErrorCode::invalid_input, "hypothesis is empty");
    ModelRequest request;
    request.prompt = prompts::render_linguistic(premise, hypothesis);
    request.slots = {{"premise", premise}, {"hypothesis", hypothesis}};
    return yes_no_request(llm, cache, std::move(request));
}

double judge_entailment(ModelBackend& judge, ResponseCache* cache, const std::string& statement,
                        const std::string& conclusion, const std::optional<std::string>& image) {
    if (statement.empty()) raise(ErrorCode::invalid_input, "statement is empty");
    if (conclusion.empty()) raise(ErrorCode::invalid_input, "conclusion is empty");
    ModelRequest request;
    request.prompt = prompts::render_judge(statement, conclusion);
    request.image = image;
    request.slots = {{"statement", statement}, {"conclusion", conclusion}};
    return yes_no_request(judge, cache, std::move(request));
}

std::string llm_generate(ModelBackend& llm, ResponseCache* cache, const std::string& prompt,
                         std::map<std::string, std::string> slots) {
    ModelRequest request;
    request.kind = ModelRequest::Kind::generate;
    request.prompt = prompt;
    request.slots = std::move(slots);
    std::string body = run_cached(llm, cache, request);
    std::string completion = wire::extract_completion(body);
    if (completion.empty())
        raise(ErrorCode::empty_generation,
              "endpoint returned an empty completion for prompt '" + prompt.substr(0, 60) + "'");
    return completion;
}

}  // namespace cocotree
