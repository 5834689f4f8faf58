#include "cocotree/digest.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <memory>
#include <vector>

#include "cocotree/error.hpp"

namespace cocotree {

namespace {

std::string to_hex(const unsigned char* bytes, unsigned int len) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(digits[bytes[i] >> 4]);
        out.push_back(digits[bytes[i] & 0x0f]);
    }
    return out;
}

struct CtxDeleter {
    void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};

}  // namespace

std::string sha256_hex(std::string_view data) {
    std::unique_ptr<EVP_MD_CTX, CtxDeleter> ctx(EVP_MD_CTX_new());
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
        raise(ErrorCode::invariant, "sha256 init failed");
    if (EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1)
        raise(ErrorCode::invariant, "sha256 update failed");
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1)
        raise(ErrorCode::invariant, "sha256 final failed");
    return to_hex(md.data(), len);
}

std::string sha256_file(const std::filesystem::path& path) {
    std::unique_ptr<std::FILE, int (*)(std::FILE*)> file(
        std::fopen(path.string().c_str(), "rb"), &std::fclose);
    if (!file)
        raise(ErrorCode::invalid_input, "cannot read file: " + path.string());

    std::unique_ptr<EVP_MD_CTX, CtxDeleter> ctx(EVP_MD_CTX_new());
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
        raise(ErrorCode::invariant, "sha256 init failed");

    std::vector<unsigned char> buf(1 << 16);
    size_t n = 0;
    while ((n = std::fread(buf.data(), 1, buf.size(), file.get())) > 0) {
        if (EVP_DigestUpdate(ctx.get(), buf.data(), n) != 1)
            raise(ErrorCode::invariant, "sha256 update failed");
    }
    if (std::ferror(file.get()))
        raise(ErrorCode::invalid_input, "read error: " + path.string());

    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1)
        raise(ErrorCode::invariant, "sha256 final failed");
    return to_hex(md.data(), len);
}

}  // namespace cocotree
