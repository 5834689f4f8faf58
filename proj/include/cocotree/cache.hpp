#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <shared_mutex>
#include <string>

namespace cocotree {

// Content-addressed store of raw model responses, one JSON file per entry,
// safe for concurrent readers and writers in one process. Writes go through
// a temp file plus atomic rename so a crash never leaves a torn entry.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    // Key for one completed request. Everything that could change the
    // response participates: backend identity, request kind, prompt text,
    // and the image content digest (empty for text-only requests).
    static std::string make_key(const std::string& backend_identity, const std::string& kind,
                                const std::string& prompt, const std::string& image_digest);

    std::optional<std::string> get(const std::string& key);
    void put(const std::string& key, const std::string& response);

    std::uint64_t hits() const { return hits_.load(); }
    std::uint64_t misses() const { return misses_.load(); }

    // Walks the directory; O(entries).
    std::uint64_t entry_count() const;
    std::uintmax_t total_bytes() const;
    void clear();

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path entry_path(const std::string& key) const;

    std::filesystem::path dir_;
    mutable std::shared_mutex mutex_;
    std::atomic<std::uint64_t> hits_{0};
    std::atomic<std::uint64_t> misses_{0};
    std::atomic<std::uint64_t> seq_{0};
};

}  // namespace cocotree
