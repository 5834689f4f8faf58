#pragma once

#include <string>
#include <vector>

#include "cocotree/backend.hpp"
#include "cocotree/cache.hpp"

namespace cocotree {

struct MorphologicalEntity {
    std::string text;
    int index = 1;  // position in the decomposition, 1-based
    std::string source_caption;
};

struct NumberedList {
    std::vector<std::string> items;  // first expected_n non-empty items, cleaned
    int total_found = 0;             // all non-empty items seen, pre-truncation
};

// Extracts "1. xxx 2. xxx" style items from a completion. Items are trimmed
// of whitespace and trailing punctuation; empty items are dropped. Raises a
// parse error when no item is found.
NumberedList parse_numbered_list(const std::string& text, int expected_n);

// Splits a caption into exactly m self-contained statements. A reply with
// the wrong item count, duplicates, or an item echoing the caption gets one
// corrective reprompt; a second bad reply fails the decomposition.
std::vector<MorphologicalEntity> decompose_caption(ModelBackend& llm, ResponseCache* cache,
                                                   const std::string& caption, int m);

}  // namespace cocotree
