#include "cocotree/http_backend.hpp"

#include <chrono>
#include <cmath>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "cocotree/error.hpp"
#include "cocotree/image_ref.hpp"
#include "cocotree/wire.hpp"

namespace cocotree {

void EndpointConfig::validate() const {
    if (base_url.rfind("http://", 0) != 0 && base_url.rfind("https://", 0) != 0)
        raise(ErrorCode::config, "endpoint url must start with http:// or https://: " + base_url);
    size_t authority = base_url.find("://") + 3;
    size_t slash = base_url.find('/', authority);
    std::string host = base_url.substr(authority, slash == std::string::npos
                                                      ? std::string::npos
                                                      : slash - authority);
    if (host.empty()) raise(ErrorCode::config, "endpoint url has no host: " + base_url);
    if (model_id.empty()) raise(ErrorCode::config, "endpoint model id is empty");
    if (!(timeout_seconds > 0))
        raise(ErrorCode::config, "endpoint timeout must be positive");
    if (max_retries < 0) raise(ErrorCode::config, "endpoint max_retries must be >= 0");
}

HttpBackend::HttpBackend(EndpointConfig config, double backoff_seconds)
    : config_(std::move(config)), backoff_seconds_(backoff_seconds) {
    config_.validate();
    size_t authority = config_.base_url.find("://") + 3;
    size_t slash = config_.base_url.find('/', authority);
    if (slash == std::string::npos) {
        host_ = config_.base_url;
    } else {
        host_ = config_.base_url.substr(0, slash);
        path_prefix_ = config_.base_url.substr(slash);
        while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    }
}

std::string HttpBackend::identity() const {
    return "endpoint:" + config_.base_url + "#" + config_.model_id;
}

std::string HttpBackend::complete(const ModelRequest& request) {
    std::optional<std::string> payload;
    if (request.image) payload = image_ref_payload(*request.image);
    std::string body = wire::build_chat_request(config_.model_id, request, payload).dump();

    httplib::Headers headers = {{"Content-Type", "application/json"}};
    if (config_.api_key) headers.emplace("Authorization", "Bearer " + *config_.api_key);

    std::string last_failure;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            double delay = backoff_seconds_ * std::pow(2.0, attempt - 1);
            std::this_thread::sleep_for(std::chrono::duration<double>(delay));
        }

        httplib::Client client(host_);
        client.set_connection_timeout(std::chrono::duration<double>(config_.timeout_seconds));
        client.set_read_timeout(std::chrono::duration<double>(config_.timeout_seconds));
        client.set_write_timeout(std::chrono::duration<double>(config_.timeout_seconds));

        auto result = client.Post(path_prefix_ + "/chat/completions", headers, body,
                                  "application/json");
        if (!result) {
            last_failure = "connection failed: " + httplib::to_string(result.error());
            continue;
        }
        if (result->status == 200) return result->body;
        if (result->status == 429 || result->status >= 500) {
            last_failure = "status " + std::to_string(result->status);
            continue;
        }
        raise(ErrorCode::backend_unavailable,
              identity() + " rejected request with status " + std::to_string(result->status) +
                  ": " + result->body.substr(0, 200));
    }
    raise(ErrorCode::backend_unavailable,
          identity() + " unreachable after " + std::to_string(config_.max_retries + 1) +
              " attempts (" + last_failure + ")");
}

}  // namespace cocotree
