#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cstdint>
#include <span>

#include "mxdp/detail/int256.hpp"
#include "mxdp/fp8.hpp"
#include "mxdp/fp9.hpp"

namespace mxdp {

// ---------------------------------------------------------------------------
// Scaled dot-product-accumulate datapath:
//   eight FP9 products, fixed-point accumulation, the FP32 accumulator
//   shifted in by the combined block-scale exponent, one RNE conversion
//   back to FP32 at the end. Integer arithmetic throughout; FP32 appears
//   only as a bit pattern, so results are platform-independent.
//
// The accumulation window nominally anchors its LSB at 2^-34 (the weight
// of the smallest FP9 product) and spans 95 bits. To make the single final
// rounding exact for *every* finite accumulator/scale combination, this
// model keeps 26 additional guard bits below the anchor (internal LSB
// 2^-60), a signed sticky tail for accumulator bits falling below even
// that, and a far-path carry for accumulators too large to enter the
// window at all. Soundness of the three paths:
//
//   exact path (aligned accumulator LSB exponent e in [-60, 171]):
//     every bit of the accumulator and of the product sum is held
//     exactly in the 256-bit window, so rounding is trivially exact.
//
//   carried path (e >= 172, or the product sum is zero):
//     |sum of products| < 2^35 while the accumulator's ulp weighs
//     2^e >= 2^172, so the products perturb the accumulator by strictly
//     less than a quarter ulp; round-to-nearest-even then always returns
//     the accumulator itself, including at binade boundaries.
//
//   sticky path (e <= -61, nonzero product sum):
//     the product sum is a nonzero multiple of 2^-34 and the whole
//     accumulator is smaller than 2^-37, so the exact total exceeds
//     (7/8)*2^-34 in magnitude and its rounding position sits at
//     2^-58 or above. Accumulator bits at or above 2^-60 enter the
//     window exactly; the rest influence rounding only through the
//     signed sticky tail, which is below every rounding boundary.
// ---------------------------------------------------------------------------

// Exact product of two FP9 values in unnormalized (significand, weight)
// form: value = sign * significand * 2^exponent, significand <= 225,
// exponent >= -34 (two minimum subnormals land exactly on the anchor).
struct Fp9Product {
    Fp9Class cls = Fp9Class::Finite;
    bool negative = false;
    uint16_t significand = 0;
    int exponent = -34;

    friend bool operator==(const Fp9Product&, const Fp9Product&) = default;
};

inline Fp9Product fp9_product(Fp9Code a, Fp9Code b) {
    const Fp9Unpacked ua = fp9_unpack(a), ub = fp9_unpack(b);
    Fp9Product r;
    r.negative = ua.negative != ub.negative;
    if (ua.cls == Fp9Class::NaN || ub.cls == Fp9Class::NaN) {
        r.cls = Fp9Class::NaN;
        return r;
    }
    const bool a_zero = ua.cls == Fp9Class::Finite && ua.mag == 0;
    const bool b_zero = ub.cls == Fp9Class::Finite && ub.mag == 0;
    if (ua.cls == Fp9Class::Infinity || ub.cls == Fp9Class::Infinity) {
        r.cls = (a_zero || b_zero) ? Fp9Class::NaN : Fp9Class::Infinity;
        return r;
    }
    r.significand = static_cast<uint16_t>(ua.mag * ub.mag);
    r.exponent = ua.exp + ub.exp - 6;
    return r;
}

// Fixed-point accumulation window.
struct AccWindow {
    static constexpr int kAnchor = 34;     // nominal LSB weight 2^-34
    static constexpr int kGuardBits = 26;  // extra bits kept below the anchor
    static constexpr int kLsbExp = -(kAnchor + kGuardBits);  // internal LSB

    // Window content = units * 2^kLsbExp, plus (if sticky) a tail of the
    // recorded sign strictly below 2^kLsbExp.
    detail::Int256 units;
    bool sticky = false;
    bool tail_negative = false;

    // Far path: the rounded result is pinned to the carried accumulator.
    bool carried = false;
    uint32_t carried_bits = 0;

    // True while every contribution so far is a negative zero; decides the
    // sign of an exact-zero result.
    bool all_negative_zero = false;

    bool empty() const { return units.is_zero() && !sticky && !carried; }
};

// Exact fixed-point sum of eight finite products. No rounding, no sticky:
// the window holds any such sum with room to spare.
inline AccWindow sum_products(std::span<const Fp9Product, 8> products) {
    AccWindow w;
    bool all_neg_zero = true;
    for (const Fp9Product& p : products) {
        assert(p.cls == Fp9Class::Finite);
        all_neg_zero = all_neg_zero && p.significand == 0 && p.negative;
        if (p.significand == 0) continue;
        const auto term = detail::Int256::shifted(
            p.significand, static_cast<unsigned>(p.exponent - AccWindow::kLsbExp));
        if (p.negative) {
            w.units -= term;
        } else {
            w.units += term;
        }
    }
    w.all_negative_zero = all_neg_zero;
    return w;
}

// Adds c * 2^-s into the window, where c is a finite FP32 bit pattern and
// s is the combined scale exponent (xa-127)+(xb-127).
inline AccWindow align_accumulator(AccWindow w, uint32_t c_bits, int s) {
    assert(!w.carried && !w.sticky);
    if (fp32_is_zero(c_bits)) {
        w.all_negative_zero = w.all_negative_zero && c_bits == 0x80000000u;
        return w;
    }
    w.all_negative_zero = false;

    const Fp32Parts c = fp32_decompose(c_bits);
    const int e = c.lsb_exp - s;  // weight exponent of the accumulator's LSB

    if (w.units.is_zero()) {
        // Nothing to merge with: the exact result is c itself.
        w.carried = true;
        w.carried_bits = c_bits;
        return w;
    }
    if (e >= 172) {
        w.carried = true;
        w.carried_bits = c_bits;
        return w;
    }
    if (e >= AccWindow::kLsbExp) {
        const auto term = detail::Int256::shifted(
            c.mag, static_cast<unsigned>(e - AccWindow::kLsbExp));
        if (c.negative) {
            w.units -= term;
        } else {
            w.units += term;
        }
        return w;
    }
    // Accumulator LSB below the window: keep its high bits, fold the rest.
    const int shift = AccWindow::kLsbExp - e;  // >= 1
    const uint64_t hi = shift < 64 ? (c.mag >> shift) : 0;
    const bool lo = shift < 64 ? (c.mag & ((uint64_t{1} << shift) - 1)) != 0
                               : c.mag != 0;
    if (hi != 0) {
        const auto term = detail::Int256::from_u64(hi);
        if (c.negative) {
            w.units -= term;
        } else {
            w.units += term;
        }
    }
    if (lo) {
        w.sticky = true;
        w.tail_negative = c.negative;
    }
    return w;
}

namespace detail {

// RNE of sign * mag * 2^exp to an FP32 bit pattern. `mag` is exact;
// rounding handles subnormals, underflow to zero and overflow to Inf.
inline uint32_t rne_to_fp32(bool negative, const std::array<uint64_t, 4>& mag,
                            int exp) {
    const uint32_t sign = negative ? 0x80000000u : 0;
    const int msb = msb_index(mag);
    if (msb < 0) {
        return sign;
    }
    const int pmin = -149 - exp;
    const int p = std::max(msb - 23, pmin);

    uint64_t n;
    if (p <= 0) {
        n = mag[0] << -p;  // msb <= 23+p, all bits live in limb 0
    } else {
        n = extract_u64(mag, p);  // msb-p <= 23, so n < 2^24
        const bool round = test_bit(mag, p - 1);
        const bool sticky = any_below(mag, p - 1);
        if (round && (sticky || (n & 1))) {
            ++n;
        }
    }
    int lsb_exp = exp + p;
    if (n == (uint64_t{1} << 24)) {
        n >>= 1;
        ++lsb_exp;
    }
    if (n == 0) {
        return sign;
    }
    if (n >= (uint64_t{1} << 23)) {
        const int biased = lsb_exp + 23 + 127;
        if (biased >= 255) {
            return sign | kFp32PosInf;
        }
        return sign | (static_cast<uint32_t>(biased) << 23) |
               static_cast<uint32_t>(n & 0x7FFFFFu);
    }
    // subnormal: by construction lsb_exp == -149 here
    return sign | static_cast<uint32_t>(n);
}

}  // namespace detail

// Single RNE conversion of the window, scaled by 2^s, to FP32.
inline uint32_t round_result(const AccWindow& w, int s) {
    if (w.carried) {
        return w.carried_bits;
    }
    if (w.units.is_zero() && !w.sticky) {
        return w.all_negative_zero ? 0x80000000u : 0u;
    }
    assert(!w.units.is_zero());  // sticky implies a nonzero window
    const bool negative = w.units.is_negative();
    std::array<uint64_t, 4> m2 = w.units.magnitude();
    // Work at grid 2^(kLsbExp-1): 2*units + (signed tail as a half-unit).
    uint64_t carry_top = m2[3] >> 63;
    for (int i = 3; i > 0; --i) {
        m2[i] = (m2[i] << 1) | (m2[i - 1] >> 63);
    }
    m2[0] <<= 1;
    assert(carry_top == 0);
    (void)carry_top;
    if (w.sticky) {
        // An odd value is never on a rounding boundary, and every value
        // strictly between 2*units and 2*(units +- 1) rounds identically.
        if (w.tail_negative == negative) {
            m2[0] |= 1;  // |value| grows: 2*|units| + 1
        } else {
            // |value| shrinks: 2*|units| - 1 (no borrow: units != 0)
            if (m2[0] == 0) {
                m2[0] = ~uint64_t{0};
                int i = 1;
                while (m2[i] == 0) {
                    m2[i] = ~uint64_t{0};
                    ++i;
                }
                m2[i] -= 1;
            } else {
                m2[0] -= 1;
            }
        }
    }
    return detail::rne_to_fp32(negative, m2, s + AccWindow::kLsbExp - 1);
}

// Full scaled dot-product-accumulate over packed FP8 lanes:
//   result = RNE( 2^((xa-127)+(xb-127)) * sum_i pa[i]*pb[i] + c )
// with IEEE special-value algebra and a NaN block scale yielding NaN.
inline uint32_t mx_dotp(std::span<const Fp8Code, 8> pa,
                        std::span<const Fp8Code, 8> pb, ScaleE8M0 xa,
                        ScaleE8M0 xb, uint32_t c_bits, Fp8Format format) {
    (void)format;  // lanes carry their format; asserted coherent below
    if (e8m0_is_nan(xa) || e8m0_is_nan(xb) || fp32_is_nan(c_bits)) {
        return kFp32QuietNan;
    }

    std::array<Fp9Product, 8> products;
    bool pos_inf = false, neg_inf = false;
    for (int i = 0; i < 8; ++i) {
        assert(pa[i].format == format && pb[i].format == format);
        const Fp9Product p = fp9_product(fp8_to_fp9(pa[i]), fp8_to_fp9(pb[i]));
        if (p.cls == Fp9Class::NaN) {
            return kFp32QuietNan;  // NaN element or Inf*0
        }
        if (p.cls == Fp9Class::Infinity) {
            (p.negative ? neg_inf : pos_inf) = true;
        }
        products[i] = p;
    }
    if (pos_inf && neg_inf) {
        return kFp32QuietNan;
    }
    if (pos_inf || neg_inf) {
        if (fp32_is_inf(c_bits) && ((c_bits >> 31) != 0) != neg_inf) {
            return kFp32QuietNan;
        }
        return neg_inf ? kFp32NegInf : kFp32PosInf;
    }
    if (fp32_is_inf(c_bits)) {
        return c_bits;
    }

    const int s = static_cast<int>(xa.bits) + static_cast<int>(xb.bits) - 254;
    AccWindow w = sum_products(products);
    w = align_accumulator(w, c_bits, s);
    return round_result(w, s);
}

}  // namespace mxdp
