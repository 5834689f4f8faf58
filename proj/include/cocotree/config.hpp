#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "cocotree/backend.hpp"
#include "cocotree/search.hpp"

namespace cocotree {

// Run-wide settings. Assembled in precedence order: defaults, then
// environment, then config file, then command-line flags.
struct RunConfig {
    double alpha = 0.6;
    double beta = 0.8;
    int m = 2;
    int s = 3;
    int l = 3;
    int k = 3;
    Strategy strategy = Strategy::beam;
    int prune_width = 0;

    std::optional<EndpointConfig> llm;
    std::optional<EndpointConfig> vlm;
    std::optional<EndpointConfig> judge;
    std::optional<std::string> api_key_fallback;  // weakest-layer key
    std::optional<std::filesystem::path> mock_table;

    std::filesystem::path cache_dir = ".cocotree-cache";
    std::optional<std::filesystem::path> dataset;
    std::optional<std::filesystem::path> out;
    std::uint64_t seed = 0;
    int parallelism = 4;

    void validate() const;  // raises config errors on out-of-range values
};

// "max" or "beam".
Strategy parse_strategy(const std::string& name);

// "http://host:port/path" with an optional "#model-id" suffix.
EndpointConfig parse_endpoint(const std::string& value);

// Overwrite a slot's URL and model from "url" or "url#model", keeping other fields.
void merge_endpoint_url(std::optional<EndpointConfig>& slot, const std::string& value);

// COCOTREE_LLM_URL, COCOTREE_VLM_URL, COCOTREE_JUDGE_URL (endpoint URLs,
// optional #model suffix) and COCOTREE_API_KEY.
void apply_environment(RunConfig& config);

// JSON config file; recognized keys mirror the CLI flags. Unknown keys are
// config errors. Endpoint values are either a URL string or an object with
// base_url / model_id / api_key / timeout_seconds / max_retries.
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

// Fills endpoint API keys from the fallback layer where none was set.
void finalize_endpoints(RunConfig& config);

}  // namespace cocotree
