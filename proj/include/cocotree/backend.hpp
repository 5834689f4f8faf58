#pragma once

#include <map>
#include <optional>
#include <string>

namespace cocotree {

struct YesNoLogits {
    double logit_yes = 0.0;
    double logit_no = 0.0;
};

struct EndpointConfig {
    std::string base_url;
    std::string model_id;
    std::optional<std::string> api_key;
    double timeout_seconds = 60.0;
    int max_retries = 3;

    // Throws config error on malformed url, empty model id, or negative
    // timeout/retries.
    void validate() const;
};

struct ModelRequest {
    enum class Kind { yes_no, generate };

    Kind kind = Kind::generate;
    std::string prompt;
    // Local file path or http(s) URL. Present only for vision requests.
    std::optional<std::string> image;
    // Slot values the prompt was rendered from. Ignored by live endpoints;
    // the table-driven backend matches on them.
    std::map<std::string, std::string> slots;
    int max_tokens = 256;
};

// A chat-completions model endpoint. complete() returns the raw response
// body so callers parse every backend, live or simulated, the same way.
class ModelBackend {
public:
    virtual ~ModelBackend() = default;

    // Stable identifier folded into response-cache keys. Two backends with
    // the same identity must be interchangeable.
    virtual std::string identity() const = 0;

    virtual std::string complete(const ModelRequest& request) = 0;
};

}  // namespace cocotree
