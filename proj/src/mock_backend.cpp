#include "cocotree/mock_backend.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cocotree/digest.hpp"
#include "cocotree/error.hpp"
#include "cocotree/wire.hpp"

namespace cocotree {

using nlohmann::json;

namespace {

const char* kAllowedKeys[] = {"role",  "prompt",     "contains", "slots", "image",
                              "rule",  "completion", "logits",   "p_yes", "note"};

MockEntry parse_entry(const json& row, size_t index) {
    auto fail = [&](const std::string& what) {
        raise(ErrorCode::schema, "mock table entry " + std::to_string(index) + ": " + what);
    };
    if (!row.is_object()) fail("not an object");
    for (auto it = row.begin(); it != row.end(); ++it) {
        bool known = false;
        for (const char* key : kAllowedKeys)
            if (it.key() == key) known = true;
        if (!known) fail("unknown key '" + it.key() + "'");
    }

    MockEntry entry;
    if (row.contains("role")) {
        entry.role = row["role"].get<std::string>();
        if (entry.role != "llm" && entry.role != "vlm" && entry.role != "judge" &&
            entry.role != "*")
            fail("role must be llm, vlm, judge, or *");
    }
    if (row.contains("prompt")) entry.prompt = row["prompt"].get<std::string>();
    if (row.contains("contains")) {
        if (!row["contains"].is_array()) fail("contains must be an array of strings");
        for (const json& s : row["contains"]) entry.contains.push_back(s.get<std::string>());
    }
    if (row.contains("slots")) {
        if (!row["slots"].is_object()) fail("slots must be an object");
        for (auto it = row["slots"].begin(); it != row["slots"].end(); ++it)
            entry.slots.emplace_back(it.key(), it.value().get<std::string>());
    }
    if (row.contains("image")) entry.image = row["image"].get<std::string>();
    if (row.contains("rule")) {
        entry.rule = row["rule"].get<std::string>();
        if (*entry.rule != "self_entailment") fail("unknown rule '" + *entry.rule + "'");
    }

    int responses = 0;
    if (row.contains("completion")) {
        entry.completion = row["completion"].get<std::string>();
        ++responses;
    }
    if (row.contains("logits")) {
        const json& pair = row["logits"];
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number())
            fail("logits must be [logit_yes, logit_no]");
        entry.logits = YesNoLogits{pair[0].get<double>(), pair[1].get<double>()};
        ++responses;
    }
    if (row.contains("p_yes")) {
        double p = row["p_yes"].get<double>();
        if (!(p > 0.0 && p < 1.0))
            fail("p_yes must lie strictly between 0 and 1; use logits or a completion "
                 "for hard answers");
        entry.p_yes = p;
        ++responses;
    }
    if (responses != 1) fail("exactly one of completion, logits, p_yes is required");
    return entry;
}

bool slot_equals(const ModelRequest& request, const std::string& key, const std::string& value) {
    auto it = request.slots.find(key);
    return it != request.slots.end() && it->second == value;
}

bool matches(const MockEntry& entry, const std::string& role, const ModelRequest& request) {
    if (entry.role != "*" && entry.role != role) return false;
    if (entry.prompt && *entry.prompt != request.prompt) return false;
    for (const std::string& needle : entry.contains)
        if (request.prompt.find(needle) == std::string::npos) return false;
    for (const auto& [key, value] : entry.slots)
        if (!slot_equals(request, key, value)) return false;
    if (entry.image) {
        if (!request.image) return false;
        std::filesystem::path ref(*request.image);
        if (*request.image != *entry.image && ref.filename().string() != *entry.image)
            return false;
    }
    if (entry.rule) {  // self_entailment
        auto premise = request.slots.find("premise");
        auto hypothesis = request.slots.find("hypothesis");
        auto statement = request.slots.find("statement");
        auto conclusion = request.slots.find("conclusion");
        bool self = false;
        if (premise != request.slots.end() && hypothesis != request.slots.end())
            self = premise->second == hypothesis->second;
        else if (statement != request.slots.end() && conclusion != request.slots.end())
            self = statement->second == conclusion->second;
        if (!self) return false;
    }
    return true;
}

}  // namespace

MockBackend::MockBackend(const std::filesystem::path& table_file, std::string role)
    : role_(std::move(role)) {
    std::ifstream in(table_file, std::ios::binary);
    if (!in) raise(ErrorCode::config, "cannot read mock table: " + table_file.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    load_table(buffer.str(), "mock table " + table_file.string());
}

MockBackend::MockBackend(const std::string& table_bytes, std::string role, FromString)
    : role_(std::move(role)) {
    load_table(table_bytes, "mock table");
}

void MockBackend::load_table(const std::string& bytes, const std::string& origin) {
    json table = json::parse(bytes, nullptr, false);
    if (table.is_discarded()) raise(ErrorCode::schema, origin + " is not valid JSON");
    const json* rows = nullptr;
    if (table.is_array())
        rows = &table;
    else if (table.is_object() && table.contains("entries") && table["entries"].is_array())
        rows = &table["entries"];
    else
        raise(ErrorCode::schema, origin + " must be an array or {\"entries\": [...]}");

    entries_.reserve(rows->size());
    for (size_t i = 0; i < rows->size(); ++i) entries_.push_back(parse_entry((*rows)[i], i));

    identity_ = "mock:" + role_ + ":" + sha256_hex(bytes);
}

std::string MockBackend::complete(const ModelRequest& request) {
    for (const MockEntry& entry : entries_) {
        if (!matches(entry, role_, request)) continue;
        if (entry.completion) return wire::make_completion_body(*entry.completion);
        if (entry.logits) return wire::make_yes_no_body(entry.logits->logit_yes, entry.logits->logit_no);
        double p = *entry.p_yes;
        return wire::make_yes_no_body(std::log(p), std::log1p(-p));
    }
    if (request.kind == ModelRequest::Kind::generate) return wire::make_completion_body("");
    std::string head = request.prompt.substr(0, 80);
    raise(ErrorCode::protocol,
          "no " + role_ + " table entry matches yes/no request: '" + head + "'");
}

}  // namespace cocotree
