#pragma once
#include <cstdint>
#include <string>
#include <string_view>

namespace apiforge {

// FNV-1a, 64 bit. Used for content digests (prompt/cassette matching,
// state checksums, embedding cache keys). Not cryptographic.
constexpr std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string to_hex(std::uint64_t value);

inline std::string digest_hex(std::string_view data) { return to_hex(fnv1a64(data)); }

} // namespace apiforge
