#include "cocotree/error.hpp"

namespace cocotree {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_input: return "invalid-input";
        case ErrorCode::backend_unavailable: return "backend-unavailable";
        case ErrorCode::protocol: return "protocol";
        case ErrorCode::empty_generation: return "empty-generation";
        case ErrorCode::parse: return "parse";
        case ErrorCode::decomposition_failed: return "decomposition-failed";
        case ErrorCode::expansion_failed: return "expansion-failed";
        case ErrorCode::incomplete_scores: return "incomplete-scores";
        case ErrorCode::incomplete_input: return "incomplete-input";
        case ErrorCode::schema: return "schema";
        case ErrorCode::dataset: return "dataset";
        case ErrorCode::config: return "config";
        case ErrorCode::cache: return "cache";
        case ErrorCode::invariant: return "invariant";
    }
    return "unknown";
}

int error_exit_code(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_input:
        case ErrorCode::incomplete_input:
        case ErrorCode::config:
        case ErrorCode::cache:
            return 1;
        case ErrorCode::dataset:
        case ErrorCode::schema:
            return 2;
        case ErrorCode::backend_unavailable:
        case ErrorCode::protocol:
        case ErrorCode::empty_generation:
        case ErrorCode::parse:
        case ErrorCode::decomposition_failed:
        case ErrorCode::expansion_failed:
        case ErrorCode::incomplete_scores:
            return 3;
        case ErrorCode::invariant:
            return 4;
    }
    return 4;
}

}  // namespace cocotree
