#include "cocotree/cache.hpp"

#include <chrono>
#include <fstream>
#include <mutex>
#include <system_error>

#include <json.hpp>

#include "cocotree/digest.hpp"
#include "cocotree/error.hpp"

namespace cocotree {

using nlohmann::json;

namespace {

bool is_hex(char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'); }

bool is_key(const std::string& text) {
    if (text.size() != 64) return false;
    for (char c : text)
        if (!is_hex(c)) return false;
    return true;
}

}  // namespace

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec || !std::filesystem::is_directory(dir_))
        raise(ErrorCode::cache, "cannot create cache directory: " + dir_.string());
}

std::string ResponseCache::make_key(const std::string& backend_identity, const std::string& kind,
                                    const std::string& prompt, const std::string& image_digest) {
    // Length-prefixed fields so no two field combinations collide.
    std::string material;
    for (const std::string* part : {&backend_identity, &kind, &prompt, &image_digest}) {
        material += std::to_string(part->size());
        material += ':';
        material += *part;
    }
    return sha256_hex(material);
}

std::filesystem::path ResponseCache::entry_path(const std::string& key) const {
    return dir_ / key.substr(0, 2) / (key + ".json");
}

std::optional<std::string> ResponseCache::get(const std::string& key) {
    if (!is_key(key)) raise(ErrorCode::cache, "malformed cache key: " + key);
    std::shared_lock lock(mutex_);
    std::ifstream in(entry_path(key), std::ios::binary);
    if (!in) {
        misses_.fetch_add(1);
        return std::nullopt;
    }
    json entry = json::parse(in, nullptr, false);
    if (entry.is_discarded() || !entry.contains("response") || !entry["response"].is_string()) {
        misses_.fetch_add(1);
        return std::nullopt;
    }
    hits_.fetch_add(1);
    return entry["response"].get<std::string>();
}

void ResponseCache::put(const std::string& key, const std::string& response) {
    if (!is_key(key)) raise(ErrorCode::cache, "malformed cache key: " + key);
    json entry;
    entry["key"] = key;
    entry["created_at"] = std::chrono::duration_cast<std::chrono::seconds>(
                              std::chrono::system_clock::now().time_since_epoch())
                              .count();
    entry["response"] = response;
    std::string payload = entry.dump();

    std::unique_lock lock(mutex_);
    std::filesystem::path target = entry_path(key);
    std::error_code ec;
    std::filesystem::create_directories(target.parent_path(), ec);
    if (ec) raise(ErrorCode::cache, "cannot create cache shard: " + target.parent_path().string());

    std::filesystem::path temp =
        target.parent_path() / (key + ".tmp" + std::to_string(seq_.fetch_add(1)));
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) raise(ErrorCode::cache, "cannot write cache entry: " + temp.string());
        out << payload;
        out.flush();
        if (!out) raise(ErrorCode::cache, "short write on cache entry: " + temp.string());
    }
    std::filesystem::rename(temp, target, ec);
    if (ec) {
        std::filesystem::remove(temp, ec);
        raise(ErrorCode::cache, "cannot publish cache entry: " + target.string());
    }
}

namespace {

// Entry shards are the two-hex-char subdirectories; anything else in the
// cache directory (lock file, run stats) is not ours to touch.
bool is_shard_dir(const std::filesystem::directory_entry& entry) {
    if (!entry.is_directory()) return false;
    std::string name = entry.path().filename().string();
    return name.size() == 2 && is_hex(name[0]) && is_hex(name[1]);
}

}  // namespace

std::uint64_t ResponseCache::entry_count() const {
    std::shared_lock lock(mutex_);
    std::uint64_t count = 0;
    std::error_code ec;
    for (const auto& shard : std::filesystem::directory_iterator(dir_, ec)) {
        if (!is_shard_dir(shard)) continue;
        for (const auto& entry : std::filesystem::directory_iterator(shard.path(), ec))
            if (entry.is_regular_file() && entry.path().extension() == ".json") ++count;
    }
    return count;
}

std::uintmax_t ResponseCache::total_bytes() const {
    std::shared_lock lock(mutex_);
    std::uintmax_t bytes = 0;
    std::error_code ec;
    for (const auto& shard : std::filesystem::directory_iterator(dir_, ec)) {
        if (!is_shard_dir(shard)) continue;
        for (const auto& entry : std::filesystem::directory_iterator(shard.path(), ec))
            if (entry.is_regular_file() && entry.path().extension() == ".json")
                bytes += entry.file_size(ec);
    }
    return bytes;
}

void ResponseCache::clear() {
    std::unique_lock lock(mutex_);
    std::error_code ec;
    for (const auto& shard : std::filesystem::directory_iterator(dir_, ec)) {
        if (is_shard_dir(shard)) std::filesystem::remove_all(shard.path(), ec);
    }
    hits_.store(0);
    misses_.store(0);
}

}  // namespace cocotree
