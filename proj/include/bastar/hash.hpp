#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <string>

namespace bastar {

// SipHash-2-4. Keyed PRF used as the stand-in for VRF outputs and seed
// evolution; we need stake-proportional selection statistics and replayable
// verification, not unforgeability.
inline std::uint64_t siphash24(std::uint64_t k0, std::uint64_t k1,
                               const std::uint8_t* data, std::size_t len) {
    auto rotl = [](std::uint64_t x, int b) { return (x << b) | (x >> (64 - b)); };
    std::uint64_t v0 = 0x736f6d6570736575ULL ^ k0;
    std::uint64_t v1 = 0x646f72616e646f6dULL ^ k1;
    std::uint64_t v2 = 0x6c7967656e657261ULL ^ k0;
    std::uint64_t v3 = 0x7465646279746573ULL ^ k1;

    auto round = [&] {
        v0 += v1; v1 = rotl(v1, 13); v1 ^= v0; v0 = rotl(v0, 32);
        v2 += v3; v3 = rotl(v3, 16); v3 ^= v2;
        v0 += v3; v3 = rotl(v3, 21); v3 ^= v0;
        v2 += v1; v1 = rotl(v1, 17); v1 ^= v2; v2 = rotl(v2, 32);
    };

    const std::size_t end = len - (len % 8);
    for (std::size_t i = 0; i < end; i += 8) {
        std::uint64_t m;
        std::memcpy(&m, data + i, 8);
        v3 ^= m;
        round();
        round();
        v0 ^= m;
    }
    std::uint64_t b = static_cast<std::uint64_t>(len) << 56;
    for (std::size_t i = end; i < len; ++i) {
        b |= static_cast<std::uint64_t>(data[i]) << (8 * (i - end));
    }
    v3 ^= b;
    round();
    round();
    v0 ^= b;
    v2 ^= 0xff;
    round();
    round();
    round();
    round();
    return v0 ^ v1 ^ v2 ^ v3;
}

// Fixed-capacity little-endian message buffer for hash inputs. All call sites
// pack fixed-width integers, which keeps hashing platform independent.
struct HashMsg {
    std::array<std::uint8_t, 96> buf{};
    std::size_t len = 0;

    HashMsg& u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf[len++] = static_cast<std::uint8_t>(v >> (8 * i));
        return *this;
    }
    HashMsg& u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf[len++] = static_cast<std::uint8_t>(v >> (8 * i));
        return *this;
    }
};

struct HashKey {
    std::uint64_t k0 = 0;
    std::uint64_t k1 = 0;
};

inline std::uint64_t hash64(const HashKey& key, const HashMsg& msg) {
    return siphash24(key.k0, key.k1, msg.buf.data(), msg.len);
}

// 256-bit opaque value (seeds, block hashes, sortition priorities).
struct Hash256 {
    std::array<std::uint64_t, 4> w{};

    friend bool operator==(const Hash256& a, const Hash256& b) { return a.w == b.w; }
    friend bool operator!=(const Hash256& a, const Hash256& b) { return !(a == b); }
    // Lexicographic over the big-endian rendering: w[0] is the most
    // significant lane, so "numerically smallest hash" compares w[0] first.
    friend bool operator<(const Hash256& a, const Hash256& b) { return a.w < b.w; }

    bool is_zero() const { return w[0] == 0 && w[1] == 0 && w[2] == 0 && w[3] == 0; }

    std::string hex() const {
        static const char* digits = "0123456789abcdef";
        std::string out;
        out.reserve(64);
        for (std::uint64_t lane : w) {
            for (int i = 15; i >= 0; --i) out.push_back(digits[(lane >> (4 * i)) & 0xf]);
        }
        return out;
    }

    HashKey as_key() const { return HashKey{w[0] ^ w[2], w[1] ^ w[3]}; }
};

// Expands SipHash to 256 bits with four domain-separated lanes.
inline Hash256 hash256(const HashKey& key, const HashMsg& msg) {
    Hash256 h;
    for (std::uint64_t lane = 0; lane < 4; ++lane) {
        h.w[lane] = siphash24(key.k0 ^ (0x9e3779b97f4a7c15ULL * (lane + 1)), key.k1 + lane,
                              msg.buf.data(), msg.len);
    }
    return h;
}

// Fast non-cryptographic mixer for bulk per-edge delay draws.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace bastar
