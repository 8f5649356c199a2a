#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "mxdp/fp8.hpp"

namespace mxdp {

// 9-bit E5M3 intermediate format (1 sign, 5 exponent, 3 mantissa, bias 15).
// It represents every finite value of both FP8 formats exactly.
struct Fp9Code {
    uint16_t bits = 0;  // low 9 bits used

    friend bool operator==(const Fp9Code&, const Fp9Code&) = default;
};

constexpr uint16_t kFp9CanonicalNan = 0x0FC;  // 0.11111.100

enum class Fp9Class : uint8_t { Finite, Infinity, NaN };

// Unpacked FP9: value = (negative ? -1 : 1) * mag * 2^(exp-3), mag in [0,15].
// Subnormals keep exp = -14 and mag in [0,7]; no normalization step.
struct Fp9Unpacked {
    Fp9Class cls = Fp9Class::Finite;
    bool negative = false;
    uint8_t mag = 0;
    int exp = -14;
};

inline Fp9Unpacked fp9_unpack(Fp9Code code) {
    Fp9Unpacked r;
    r.negative = (code.bits >> 8) & 1;
    const int exp_field = (code.bits >> 3) & 0x1F;
    const int mant = code.bits & 0x7;
    if (exp_field == 31) {
        r.cls = mant == 0 ? Fp9Class::Infinity : Fp9Class::NaN;
        return r;
    }
    if (exp_field == 0) {
        r.mag = static_cast<uint8_t>(mant);
        r.exp = -14;
    } else {
        r.mag = static_cast<uint8_t>(8 | mant);
        r.exp = exp_field - 15;
    }
    return r;
}

inline double decode_fp9(Fp9Code code) {
    const Fp9Unpacked u = fp9_unpack(code);
    if (u.cls == Fp9Class::NaN) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    if (u.cls == Fp9Class::Infinity) {
        return u.negative ? -std::numeric_limits<double>::infinity()
                          : std::numeric_limits<double>::infinity();
    }
    const double v = std::ldexp(static_cast<double>(u.mag), u.exp - 3);
    return u.negative ? -v : v;
}

// Exact embedding of either FP8 format. Finite values convert with value
// equality; specials map to the corresponding FP9 specials.
inline Fp9Code fp8_to_fp9(Fp8Code code) {
    const uint16_t sign = (code.bits & 0x80) ? 0x100 : 0;

    if (code.format == Fp8Format::E5M2) {
        const int exp_field = (code.bits >> 2) & 0x1F;
        const int mant = code.bits & 0x3;
        if (exp_field == 31 && mant != 0) {
            return {static_cast<uint16_t>(sign | kFp9CanonicalNan)};
        }
        // same bias and exponent width: widen the mantissa by one bit
        return {static_cast<uint16_t>(sign | (exp_field << 3) | (mant << 1))};
    }

    // E4M3
    const int exp_field = (code.bits >> 3) & 0xF;
    const int mant = code.bits & 0x7;
    if (exp_field == 15 && mant == 7) {
        return {static_cast<uint16_t>(sign | kFp9CanonicalNan)};
    }
    if (exp_field != 0) {
        // normal: exponent re-biased from 7 to 15, mantissa width matches
        return {static_cast<uint16_t>(sign | ((exp_field + 8) << 3) | mant)};
    }
    if (mant == 0) {
        return {sign};
    }
    // E4M3 subnormal mant*2^-9 normalizes into FP9's wider exponent range:
    // mant<<shift lands in [8,15] and the exponent field becomes 9-shift.
    int shift = 1;
    while ((mant << shift) < 8) {
        ++shift;
    }
    const int m_norm = mant << shift;
    const int fp9_exp_field = 9 - shift;
    return {static_cast<uint16_t>(sign | (fp9_exp_field << 3) | (m_norm & 0x7))};
}

}  // namespace mxdp
