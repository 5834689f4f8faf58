#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cocotree/backend.hpp"

namespace cocotree {

// One row of a response table. A row applies when its role covers the
// backend and every matcher it specifies holds; rows are tried in file
// order and the first hit wins.
struct MockEntry {
    std::string role = "*";  // llm | vlm | judge | *
    std::optional<std::string> prompt;          // exact prompt equality
    std::vector<std::string> contains;          // all substrings present in prompt
    std::vector<std::pair<std::string, std::string>> slots;  // slot equality
    std::optional<std::string> image;           // image reference or its filename
    std::optional<std::string> rule;            // "self_entailment"

    std::optional<std::string> completion;
    std::optional<YesNoLogits> logits;
    std::optional<double> p_yes;
};

// Deterministic stand-in for a live endpoint, driven by a JSON table. It
// synthesizes chat-completions bodies so response parsing and caching take
// the same path as with live backends. Unmatched generate requests produce
// an empty completion; unmatched yes/no requests are a protocol error.
class MockBackend : public ModelBackend {
public:
    // Tag for constructing from table bytes instead of a file.
    struct FromString {};

    MockBackend(const std::filesystem::path& table_file, std::string role);
    MockBackend(const std::string& table_bytes, std::string role, FromString);

    std::string identity() const override { return identity_; }
    std::string complete(const ModelRequest& request) override;

    const std::vector<MockEntry>& entries() const { return entries_; }

private:
    void load_table(const std::string& bytes, const std::string& origin);

    std::string role_;
    std::string identity_;
    std::vector<MockEntry> entries_;
};

}  // namespace cocotree
