#pragma once

#include <array>
#include <cstdint>

namespace mxdp::detail {

// Signed 256-bit two's-complement integer, little-endian limbs.
// Only the handful of operations the accumulation window needs.
struct Int256 {
    std::array<uint64_t, 4> limb{0, 0, 0, 0};

    static Int256 zero() { return {}; }

    static Int256 from_u64(uint64_t v) {
        Int256 r;
        r.limb[0] = v;
        return r;
    }

    // mag << n, n in [0, 255]. Caller guarantees the result fits.
    static Int256 shifted(uint64_t mag, unsigned n) {
        Int256 r;
        unsigned word = n / 64, bit = n % 64;
        r.limb[word] = mag << bit;
        if (bit != 0 && word + 1 < 4) {
            r.limb[word + 1] = mag >> (64 - bit);
        }
        return r;
    }

    bool is_zero() const {
        return (limb[0] | limb[1] | limb[2] | limb[3]) == 0;
    }

    bool is_negative() const { return (limb[3] >> 63) != 0; }

    Int256& operator+=(const Int256& o) {
        unsigned __int128 carry = 0;
        for (int i = 0; i < 4; ++i) {
            unsigned __int128 s = carry + limb[i];
            s += o.limb[i];
            limb[i] = static_cast<uint64_t>(s);
            carry = s >> 64;
        }
        return *this;
    }

    Int256 operator-() const {
        Int256 r;
        unsigned __int128 carry = 1;
        for (int i = 0; i < 4; ++i) {
            unsigned __int128 s = carry + static_cast<uint64_t>(~limb[i]);
            r.limb[i] = static_cast<uint64_t>(s);
            carry = s >> 64;
        }
        return r;
    }

    Int256& operator-=(const Int256& o) { return *this += -o; }

    friend Int256 operator+(Int256 a, const Int256& b) { return a += b; }
    friend Int256 operator-(Int256 a, const Int256& b) { return a -= b; }

    friend bool operator==(const Int256& a, const Int256& b) {
        return a.limb == b.limb;
    }

    // Magnitude as unsigned limbs. Valid for |value| < 2^255.
    std::array<uint64_t, 4> magnitude() const {
        return is_negative() ? (-*this).limb : limb;
    }
};

// Index of the highest set bit, or -1 for zero.
inline int msb_index(const std::array<uint64_t, 4>& m) {
    for (int i = 3; i >= 0; --i) {
        if (m[i] != 0) {
            return i * 64 + 63 - __builtin_clzll(m[i]);
        }
    }
    return -1;
}

inline bool test_bit(const std::array<uint64_t, 4>& m, int pos) {
    if (pos < 0 || pos >= 256) return false;
    return (m[pos / 64] >> (pos % 64)) & 1u;
}

// True if any bit strictly below `pos` is set.
inline bool any_below(const std::array<uint64_t, 4>& m, int pos) {
    if (pos <= 0) return false;
    if (pos > 256) pos = 256;
    int word = pos / 64, bit = pos % 64;
    for (int i = 0; i < word; ++i) {
        if (m[i] != 0) return true;
    }
    if (word < 4 && bit != 0 && (m[word] & ((uint64_t{1} << bit) - 1)) != 0) {
        return true;
    }
    return false;
}

// Bits [pos, pos+63] as one u64 (here always used with results < 2^25).
inline uint64_t extract_u64(const std::array<uint64_t, 4>& m, int pos) {
    if (pos >= 256) return 0;
    if (pos < 0) pos = 0;  // callers never pass negative
    int word = pos / 64, bit = pos % 64;
    uint64_t lo = m[word] >> bit;
    if (bit != 0 && word + 1 < 4) {
        lo |= m[word + 1] << (64 - bit);
    }
    return lo;
}

}  // namespace mxdp::detail
