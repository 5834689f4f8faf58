#include "cocotree/config.hpp"

#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "cocotree/error.hpp"

namespace cocotree {

using nlohmann::json;

void RunConfig::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) raise(ErrorCode::config, "alpha outside [0,1]");
    if (!(beta >= 0.0 && beta <= 1.0)) raise(ErrorCode::config, "beta outside [0,1]");
    if (m < 1) raise(ErrorCode::config, "entities (m) must be >= 1");
    if (s < 1) raise(ErrorCode::config, "split (s) must be >= 1");
    if (l < 1) raise(ErrorCode::config, "depth (l) must be >= 1");
    if (k < 1) raise(ErrorCode::config, "beam width (k) must be >= 1");
    if (prune_width < 0) raise(ErrorCode::config, "prune width must be >= 0");
    if (parallelism < 1) raise(ErrorCode::config, "parallelism must be >= 1");
    if (llm) llm->validate();
    if (vlm) vlm->validate();
    if (judge) judge->validate();
}

Strategy parse_strategy(const std::string& name) {
    if (name == "max") return Strategy::greedy;
    if (name == "beam") return Strategy::beam;
    raise(ErrorCode::config, "strategy must be 'max' or 'beam', got '" + name + "'");
}

EndpointConfig parse_endpoint(const std::string& value) {
    EndpointConfig endpoint;
    size_t hash = value.rfind('#');
    if (hash != std::string::npos && hash + 1 < value.size()) {
        endpoint.base_url = value.substr(0, hash);
        endpoint.model_id = value.substr(hash + 1);
    } else {
        endpoint.base_url = hash == std::string::npos ? value : value.substr(0, hash);
        endpoint.model_id = "default";
    }
    endpoint.validate();
    return endpoint;
}

void merge_endpoint_url(std::optional<EndpointConfig>& slot, const std::string& value) {
    EndpointConfig parsed = parse_endpoint(value);
    if (!slot) {
        slot = parsed;
        return;
    }
    slot->base_url = parsed.base_url;
    slot->model_id = parsed.model_id;
}

namespace {

void merge_endpoint_json(std::optional<EndpointConfig>& slot, const json& value,
                         const std::string& role) {
    if (value.is_string()) {
        merge_endpoint_url(slot, value.get<std::string>());
        return;
    }
    if (!value.is_object())
        raise(ErrorCode::config, "endpoint '" + role + "' must be a URL string or an object");
    if (!slot) slot = EndpointConfig{};
    for (auto it = value.begin(); it != value.end(); ++it) {
        const std::string& key = it.key();
        if (key == "base_url")
            slot->base_url = it.value().get<std::string>();
        else if (key == "model_id")
            slot->model_id = it.value().get<std::string>();
        else if (key == "api_key")
            slot->api_key = it.value().get<std::string>();
        else if (key == "timeout_seconds")
            slot->timeout_seconds = it.value().get<double>();
        else if (key == "max_retries")
            slot->max_retries = it.value().get<int>();
        else
            raise(ErrorCode::config, "unknown endpoint key '" + key + "' for '" + role + "'");
    }
}

}  // namespace

void apply_environment(RunConfig& config) {
    if (const char* value = std::getenv("COCOTREE_LLM_URL")) merge_endpoint_url(config.llm, value);
    if (const char* value = std::getenv("COCOTREE_VLM_URL")) merge_endpoint_url(config.vlm, value);
    if (const char* value = std::getenv("COCOTREE_JUDGE_URL")) merge_endpoint_url(config.judge, value);
    if (const char* value = std::getenv("COCOTREE_API_KEY")) config.api_key_fallback = value;
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::config, "cannot read config file: " + path.string());
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        raise(ErrorCode::config, "config file is not a JSON object: " + path.string());

    for (auto it = doc.begin(); it != doc.end(); ++it) {
        const std::string& key = it.key();
        const json& value = it.value();
        try {
            if (key == "alpha")
                config.alpha = value.get<double>();
            else if (key == "beta")
                config.beta = value.get<double>();
            else if (key == "m")
                config.m = value.get<int>();
            else if (key == "s")
                config.s = value.get<int>();
            else if (key == "l")
                config.l = value.get<int>();
            else if (key == "k")
                config.k = value.get<int>();
            else if (key == "strategy")
                config.strategy = parse_strategy(value.get<std::string>());
            else if (key == "prune_width")
                config.prune_width = value.get<int>();
            else if (key == "llm")
                merge_endpoint_json(config.llm, value, "llm");
            else if (key == "vlm")
                merge_endpoint_json(config.vlm, value, "vlm");
            else if (key == "judge")
                merge_endpoint_json(config.judge, value, "judge");
            else if (key == "mock")
                config.mock_table = value.get<std::string>();
            else if (key == "cache_dir")
                config.cache_dir = value.get<std::string>();
            else if (key == "dataset")
                config.dataset = value.get<std::string>();
            else if (key == "out")
                config.out = value.get<std::string>();
            else if (key == "seed")
                config.seed = value.get<std::uint64_t>();
            else if (key == "parallelism")
                config.parallelism = value.get<int>();
            else if (key == "api_key")
                config.api_key_fallback = value.get<std::string>();
            else
                raise(ErrorCode::config, "unknown config key '" + key + "'");
        } catch (const json::exception& e) {
            raise(ErrorCode::config,
                  "bad value for config key '" + key + "': " + e.what());
        }
    }
}

void finalize_endpoints(RunConfig& config) {
    if (!config.api_key_fallback) return;
    for (std::optional<EndpointConfig>* slot : {&config.llm, &config.vlm, &config.judge}) {
        if (*slot && !(*slot)->api_key) (*slot)->api_key = config.api_key_fallback;
    }
}

}  // namespace cocotree
