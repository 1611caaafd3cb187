#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/evp.h>

#include "ovd/errors.hpp"

namespace ovd::detail {

/// SHA-256 of a byte buffer, lowercase hex.
inline std::string sha256_hex(const void* data, std::size_t size) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int digest_len = 0;
    if (EVP_Digest(data, size, digest, &digest_len, EVP_sha256(), nullptr) != 1) {
        throw NumericalError("SHA-256 digest computation failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * digest_len);
    for (unsigned int i = 0; i < digest_len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

inline std::string sha256_hex(std::string_view text) {
    return sha256_hex(text.data(), text.size());
}

/// SHA-256 of a file's contents, lowercase hex.
inline std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file for hashing: " + path);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
    return sha256_hex(bytes.data(), bytes.size());
}

} // namespace ovd::detail
