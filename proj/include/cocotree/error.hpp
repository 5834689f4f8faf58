#pragma once

#include <stdexcept>
#include <string>

namespace cocotree {

enum class ErrorCode {
    invalid_input,
    backend_unavailable,
    protocol,
    empty_generation,
    parse,
    decomposition_failed,
    expansion_failed,
    incomplete_scores,
    incomplete_input,
    schema,
    dataset,
    config,
    cache,
    invariant,
};

const char* error_code_name(ErrorCode code);

// Exit code the CLI maps a failure category to.
int error_exit_code(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace cocotree
