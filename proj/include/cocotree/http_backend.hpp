#pragma once

#include <string>

#include "cocotree/backend.hpp"

namespace cocotree {

// Client for an OpenAI-compatible chat-completions endpoint. Requests run
// at temperature zero; yes/no requests additionally ask for top token
// logprobs. Transient failures (connect errors, 429, 5xx) are retried with
// exponential backoff up to the configured retry budget.
class HttpBackend : public ModelBackend {
public:
    explicit HttpBackend(EndpointConfig config, double backoff_seconds = 0.25);

    std::string identity() const override;
    std::string complete(const ModelRequest& request) override;

private:
    EndpointConfig config_;
    double backoff_seconds_;
    std::string host_;         // scheme://host[:port]
    std::string path_prefix_;  // anything after the authority, no trailing slash
};

}  // namespace cocotree
