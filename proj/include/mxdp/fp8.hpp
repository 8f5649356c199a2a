#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace mxdp {

// The two 8-bit element formats. E5M2 follows the IEEE-style convention
// (exponent all-ones encodes Inf/NaN); E4M3 has no Inf and a single NaN
// pattern S.1111.111, so its exponent range extends one binade higher.
enum class Fp8Format : uint8_t { E5M2 = 0, E4M3 = 1 };

struct Fp8Params {
    int exp_bits;
    int mant_bits;
    int bias;
    int emax;          // largest exponent of a finite normal value
    int min_sub_exp;   // exponent of the smallest subnormal
    double max_finite;
    bool has_inf;
    uint8_t canonical_nan;
};

constexpr Fp8Params fp8_params(Fp8Format f) {
    if (f == Fp8Format::E5M2) {
        return {5, 2, 15, 15, -16, 57344.0, true, 0x7E};
    }
    return {4, 3, 7, 8, -9, 448.0, false, 0x7F};
}

struct Fp8Code {
    uint8_t bits = 0;
    Fp8Format format = Fp8Format::E5M2;

    friend bool operator==(const Fp8Code&, const Fp8Code&) = default;
};

// All 256 patterns are valid; the result is exact (every finite FP8 value
// is a dyadic rational well inside double range).
inline double decode_fp8(Fp8Code code) {
    const Fp8Params p = fp8_params(code.format);
    const int sign = (code.bits >> 7) & 1;
    const int exp_field = (code.bits >> p.mant_bits) & ((1 << p.exp_bits) - 1);
    const int mant = code.bits & ((1 << p.mant_bits) - 1);

    if (code.format == Fp8Format::E5M2 && exp_field == 31) {
        if (mant == 0) {
            return sign ? -std::numeric_limits<double>::infinity()
                        : std::numeric_limits<double>::infinity();
        }
        return std::numeric_limits<double>::quiet_NaN();
    }
    if (code.format == Fp8Format::E4M3 && exp_field == 15 && mant == 7) {
        return std::numeric_limits<double>::quiet_NaN();
    }

    double v;
    if (exp_field == 0) {
        v = std::ldexp(static_cast<double>(mant), 1 - p.bias - p.mant_bits);
    } else {
        v = std::ldexp(static_cast<double>((1 << p.mant_bits) | mant),
                       exp_field - p.bias - p.mant_bits);
    }
    return sign ? -v : v;
}

// Round-to-nearest-even onto the format grid. Rounding happens as if the
// exponent range were unbounded; a rounded magnitude above the largest
// finite value overflows (clamp when saturating, else Inf for E5M2 and
// NaN for E4M3). Inputs must be exactly representable in double, which
// every value this library produces is.
inline Fp8Code encode_fp8(double value, Fp8Format format, bool saturating) {
    const Fp8Params p = fp8_params(format);
    const uint8_t sign = std::signbit(value) ? 0x80 : 0x00;

    if (std::isnan(value)) {
        return {p.canonical_nan, format};
    }
    if (std::isinf(value)) {
        if (p.has_inf && !saturating) {
            return {static_cast<uint8_t>(sign | 0x7C), format};
        }
        if (saturating) {
            // max-magnitude finite code
            uint8_t mag = format == Fp8Format::E5M2 ? 0x7B : 0x7E;
            return {static_cast<uint8_t>(sign | mag), format};
        }
        return {p.canonical_nan, format};
    }
    if (value == 0.0) {
        return {sign, format};
    }

    // Exact decomposition |value| = m53 * 2^w with m53 in [2^52, 2^53).
    int x;
    const double frac = std::frexp(std::fabs(value), &x);
    const auto m53 = static_cast<uint64_t>(std::ldexp(frac, 53));
    const int w = x - 53;

    // Grid ulp exponent at this magnitude (subnormal floor included).
    int u = std::max(x - 1 - p.mant_bits, p.min_sub_exp);
    // m53 carries 53 significant bits, the target at most mant_bits+1,
    // so d >= 1 always. d > 53 means the value is below half an ulp.
    const int d = u - w;
    uint64_t n = 0, round = 0, sticky = 0;
    if (d <= 53) {
        n = m53 >> d;
        round = (m53 >> (d - 1)) & 1;
        sticky = (d >= 2) ? ((m53 & ((uint64_t{1} << (d - 1)) - 1)) != 0) : 0;
    } else {
        sticky = 1;
    }
    if (round && (sticky || (n & 1))) {
        ++n;
    }
    if (n == (uint64_t{1} << (p.mant_bits + 1))) {
        n >>= 1;
        ++u;
    }

    if (n == 0) {
        return {sign, format};
    }

    // Overflow test on the exact rounded value n * 2^u.
    const double rounded = std::ldexp(static_cast<double>(n), u);
    if (rounded > p.max_finite) {
        if (saturating) {
            uint8_t mag = format == Fp8Format::E5M2 ? 0x7B : 0x7E;
            return {static_cast<uint8_t>(sign | mag), format};
        }
        if (p.has_inf) {
            return {static_cast<uint8_t>(sign | 0x7C), format};
        }
        return {p.canonical_nan, format};
    }

    if (n < (uint64_t{1} << p.mant_bits)) {
        // subnormal: exponent field zero
        return {static_cast<uint8_t>(sign | n), format};
    }
    const int exp_field = u + p.mant_bits + p.bias;
    const uint8_t mant = static_cast<uint8_t>(n - (uint64_t{1} << p.mant_bits));
    return {static_cast<uint8_t>(sign | (exp_field << p.mant_bits) | mant),
            format};
}

// 8-bit power-of-two block scale: 2^(bits-127), NaN at 0xFF. No zero, no sign.
struct ScaleE8M0 {
    uint8_t bits = 127;

    friend bool operator==(const ScaleE8M0&, const ScaleE8M0&) = default;
};

inline bool e8m0_is_nan(ScaleE8M0 s) { return s.bits == 0xFF; }

inline double decode_e8m0(ScaleE8M0 s) {
    if (e8m0_is_nan(s)) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return std::ldexp(1.0, static_cast<int>(s.bits) - 127);
}

// FP32 bit-pattern helpers shared by the datapath and the simulator.
inline uint32_t fp32_bits(float f) { return std::bit_cast<uint32_t>(f); }
inline float fp32_value(uint32_t b) { return std::bit_cast<float>(b); }

constexpr uint32_t kFp32QuietNan = 0x7FC00000u;
constexpr uint32_t kFp32PosInf = 0x7F800000u;
constexpr uint32_t kFp32NegInf = 0xFF800000u;

inline bool fp32_is_nan(uint32_t b) {
    return (b & 0x7F800000u) == 0x7F800000u && (b & 0x007FFFFFu) != 0;
}
inline bool fp32_is_inf(uint32_t b) {
    return (b & 0x7FFFFFFFu) == 0x7F800000u;
}
inline bool fp32_is_zero(uint32_t b) { return (b & 0x7FFFFFFFu) == 0; }

// Finite nonzero decomposition: |value| = mag * 2^lsb_exp, mag < 2^24.
struct Fp32Parts {
    bool negative;
    uint32_t mag;
    int lsb_exp;
};

inline Fp32Parts fp32_decompose(uint32_t b) {
    Fp32Parts r;
    r.negative = (b >> 31) != 0;
    const int exp_field = (b >> 23) & 0xFF;
    const uint32_t mant = b & 0x7FFFFFu;
    if (exp_field == 0) {
        r.mag = mant;
        r.lsb_exp = -149;
    } else {
        r.mag = mant | 0x800000u;
        r.lsb_exp = exp_field - 127 - 23;
    }
    return r;
}

}  // namespace mxdp
