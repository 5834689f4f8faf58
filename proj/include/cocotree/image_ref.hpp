#pragma once

#include <string>
#include <string_view>

namespace cocotree {

// An image reference is a local file path or an http(s) URL.
bool is_url_ref(const std::string& ref);

// Content identity used in cache keys: digest of the file bytes, or of the
// URL string itself for remote references.
std::string image_ref_digest(const std::string& ref);

// Wire form: data: URI with the file's bytes, or the URL unchanged.
std::string image_ref_payload(const std::string& ref);

std::string base64_encode(std::string_view bytes);

}  // namespace cocotree
