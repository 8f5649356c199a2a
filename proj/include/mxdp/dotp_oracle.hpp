#pragma once

#include <array>
#include <cstdint>
#include <span>

#include <gmp.h>
#include <mpfr.h>

#include "mxdp/fp8.hpp"
#include "mxdp/fp9.hpp"

namespace mxdp {

namespace detail {

inline void mpz_set_i128(mpz_t rop, __int128 v) {
    const bool neg = v < 0;
    unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v)
                              : static_cast<unsigned __int128>(v);
    mpz_set_ui(rop, static_cast<unsigned long>(u >> 64));
    mpz_mul_2exp(rop, rop, 64);
    mpz_add_ui(rop, rop, static_cast<unsigned long>(u));
    if (neg) {
        mpz_neg(rop, rop);
    }
}

// One correctly-rounded RNE conversion of an exact dyadic value z * 2^exp
// to an FP32 bit pattern, through MPFR with single-precision exponent
// range and subnormal handling. Not thread-safe (the MPFR exponent range
// is process-global); callers serialize.
inline uint32_t oracle_rne_fp32(const mpz_t z, long exp) {
    if (mpz_sgn(z) == 0) {
        return 0;
    }
    const mpfr_exp_t old_emin = mpfr_get_emin();
    const mpfr_exp_t old_emax = mpfr_get_emax();
    mpfr_set_emin(-148);  // smallest FP32 subnormal = 0.5 * 2^-148
    mpfr_set_emax(128);

    mpfr_t wide, narrow;
    mpfr_init2(wide, 600);  // enough for any exact sum this model forms
    mpfr_init2(narrow, 24);
    mpfr_set_z_2exp(wide, z, exp, MPFR_RNDN);
    int t = mpfr_set(narrow, wide, MPFR_RNDN);
    t = mpfr_check_range(narrow, t, MPFR_RNDN);
    mpfr_subnormalize(narrow, t, MPFR_RNDN);
    const float f = mpfr_get_flt(narrow, MPFR_RNDN);
    mpfr_clear(narrow);
    mpfr_clear(wide);

    mpfr_set_emin(old_emin);
    mpfr_set_emax(old_emax);
    return fp32_bits(f);
}

}  // namespace detail

// Ground-truth evaluation of the scaled dot-product-accumulate: the sum
//   2^s * sum_i pa[i]*pb[i] + c
// is formed as one exact dyadic rational (an arbitrary-precision integer
// times a power of two) and rounded to FP32 exactly once. Shares nothing
// with the fixed-point window datapath.
inline uint32_t mx_dotp_oracle(std::span<const Fp8Code, 8> pa,
                               std::span<const Fp8Code, 8> pb, ScaleE8M0 xa,
                               ScaleE8M0 xb, uint32_t c_bits,
                               Fp8Format format) {
    (void)format;
    if (e8m0_is_nan(xa) || e8m0_is_nan(xb) || fp32_is_nan(c_bits)) {
        return kFp32QuietNan;
    }

    // Exact product sum on the 2^-34 grid; |sum| < 2^69.
    bool pos_inf = false, neg_inf = false, all_neg_zero = true;
    __int128 sum_grid = 0;
    for (int i = 0; i < 8; ++i) {
        const Fp9Unpacked a = fp9_unpack(fp8_to_fp9(pa[i]));
        const Fp9Unpacked b = fp9_unpack(fp8_to_fp9(pb[i]));
        if (a.cls == Fp9Class::NaN || b.cls == Fp9Class::NaN) {
            return kFp32QuietNan;
        }
        const bool negative = a.negative != b.negative;
        const bool a_zero = a.cls == Fp9Class::Finite && a.mag == 0;
        const bool b_zero = b.cls == Fp9Class::Finite && b.mag == 0;
        if (a.cls == Fp9Class::Infinity || b.cls == Fp9Class::Infinity) {
            if (a_zero || b_zero) {
                return kFp32QuietNan;
            }
            (negative ? neg_inf : pos_inf) = true;
            all_neg_zero = false;
            continue;
        }
        const __int128 term = static_cast<__int128>(a.mag * b.mag)
                              << (a.exp + b.exp - 6 + 34);
        sum_grid += negative ? -term : term;
        all_neg_zero = all_neg_zero && a.mag * b.mag == 0 && negative;
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

    if (sum_grid == 0 && fp32_is_zero(c_bits)) {
        const bool neg = all_neg_zero && c_bits == 0x80000000u;
        return neg ? 0x80000000u : 0u;
    }

    // Assemble N * 2^q = sum_grid * 2^(s-34) + c exactly.
    mpz_t n, term;
    mpz_init(n);
    mpz_init(term);
    long q;
    if (fp32_is_zero(c_bits)) {
        detail::mpz_set_i128(n, sum_grid);
        q = s - 34;
    } else {
        const Fp32Parts c = fp32_decompose(c_bits);
        const long qs = s - 34;
        const long qc = c.lsb_exp;
        q = qs < qc ? qs : qc;
        detail::mpz_set_i128(n, sum_grid);
        mpz_mul_2exp(n, n, static_cast<mp_bitcnt_t>(qs - q));
        mpz_set_ui(term, c.mag);
        mpz_mul_2exp(term, term, static_cast<mp_bitcnt_t>(qc - q));
        if (c.negative) {
            mpz_sub(n, n, term);
        } else {
            mpz_add(n, n, term);
        }
    }
    const uint32_t result = detail::oracle_rne_fp32(n, q);
    mpz_clear(term);
    mpz_clear(n);
    return result;
}

}  // namespace mxdp
