#include "cocotree/decompose.hpp"

#include <cctype>
#include <optional>
#include <set>

#include "cocotree/error.hpp"
#include "cocotree/model_ops.hpp"
#include "cocotree/prompts.hpp"

namespace cocotree {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

std::string clean_item(std::string item) {
    size_t begin = 0;
    size_t end = item.size();
    while (begin < end && is_space(item[begin])) ++begin;
    while (end > begin && is_space(item[end - 1])) --end;
    while (end > begin) {
        char c = item[end - 1];
        if (c == '.' || c == ',' || c == ';' || c == ':')
            --end;
        else
            break;
    }
    while (end > begin && is_space(item[end - 1])) --end;
    return item.substr(begin, end - begin);
}

}  // namespace

NumberedList parse_numbered_list(const std::string& text, int expected_n) {
    if (expected_n < 1) raise(ErrorCode::invalid_input, "expected_n must be >= 1");

    // A marker is a digit run plus '.', at the start or after whitespace,
    // not immediately followed by another digit (so "1.5 km" is content).
    std::vector<size_t> marker_pos;      // where the digits start
    std::vector<size_t> content_start;   // just past the '.'
    for (size_t i = 0; i < text.size(); ++i) {
        if (!is_digit(text[i])) continue;
        if (i > 0 && !is_space(text[i - 1])) continue;
        size_t j = i;
        while (j < text.size() && is_digit(text[j])) ++j;
        if (j >= text.size() || text[j] != '.') continue;
        if (j + 1 < text.size() && is_digit(text[j + 1])) continue;
        marker_pos.push_back(i);
        content_start.push_back(j + 1);
        i = j;
    }

    NumberedList out;
    for (size_t idx = 0; idx < marker_pos.size(); ++idx) {
        size_t begin = content_start[idx];
        size_t end = idx + 1 < marker_pos.size() ? marker_pos[idx + 1] : text.size();
        std::string item = clean_item(text.substr(begin, end - begin));
        if (item.empty()) continue;
        ++out.total_found;
        if (static_cast<int>(out.items.size()) < expected_n) out.items.push_back(std::move(item));
    }
    if (out.total_found == 0)
        raise(ErrorCode::parse, "no numbered items found in completion: '" +
                                    text.substr(0, 80) + "'");
    return out;
}

namespace {

std::optional<std::vector<MorphologicalEntity>> try_decompose(const std::string& completion,
                                                              const std::string& caption, int m) {
    NumberedList list;
    try {
        list = parse_numbered_list(completion, m);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::parse) return std::nullopt;
        throw;
    }
    if (list.total_found != m) return std::nullopt;

    std::set<std::string> seen;
    std::vector<MorphologicalEntity> entities;
    entities.reserve(list.items.size());
    for (size_t i = 0; i < list.items.size(); ++i) {
        const std::string& item = list.items[i];
        if (item == caption) return std::nullopt;
        if (!seen.insert(item).second) return std::nullopt;
        entities.push_back({item, static_cast<int>(i) + 1, caption});
    }
    return entities;
}

}  // namespace

std::vector<MorphologicalEntity> decompose_caption(ModelBackend& llm, ResponseCache* cache,
                                                   const std::string& caption, int m) {
    if (caption.empty()) raise(ErrorCode::invalid_input, "caption is empty");
    if (m < 1) raise(ErrorCode::invalid_input, "m must be >= 1");

    std::string prompt = prompts::render_decompose(caption, m);
    std::map<std::string, std::string> slots = {
        {"op", "decompose"}, {"caption", caption}, {"m", std::to_string(m)}};

    bool first_empty = false;
    std::string completion;
    try {
        completion = llm_generate(llm, cache, prompt, slots);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::empty_generation) throw;
        first_empty = true;
    }
    if (!first_empty) {
        if (auto entities = try_decompose(completion, caption, m)) return *entities;
    }

    std::string retry_prompt = prompts::corrective_reprompt(prompt);
    try {
        completion = llm_generate(llm, cache, retry_prompt, slots);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::empty_generation) throw;
        raise(ErrorCode::decomposition_failed,
              "caption decomposition produced no output after a corrective reprompt: '" +
                  caption + "'");
    }
    if (auto entities = try_decompose(completion, caption, m)) return *entities;
    raise(ErrorCode::decomposition_failed,
          "caption did not decompose into " + std::to_string(m) +
              " distinct statements after a corrective reprompt: '" + caption + "'");
}

}  // namespace cocotree
