#include "mxdp/dotp.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>

#include "mxdp/dotp_oracle.hpp"

using namespace mxdp;

namespace {

Fp9Code fp9_of(double v) {
    // test helper: build an FP9 code by exhaustive match
    for (int b = 0; b < 512; ++b) {
        const Fp9Code c{static_cast<uint16_t>(b)};
        if (decode_fp9(c) == v && std::signbit(decode_fp9(c)) == std::signbit(v)) {
            return c;
        }
    }
    ADD_FAILURE() << "no FP9 code for " << v;
    return {};
}

std::array<Fp8Code, 8> lanes(uint8_t bits, Fp8Format fmt) {
    std::array<Fp8Code, 8> a;
    a.fill({bits, fmt});
    return a;
}

TEST(Fp9ProductOp, ZeroTimesFiniteKeepsXorSign) {
    const Fp9Code zero = fp9_of(0.0);
    const Fp9Code x = fp9_of(1.5);
    const Fp9Code minus_x = fp9_of(-1.5);

    Fp9Product p = fp9_product(zero, x);
    EXPECT_EQ(p.cls, Fp9Class::Finite);
    EXPECT_EQ(p.significand, 0);
    EXPECT_FALSE(p.negative);

    p = fp9_product(zero, minus_x);
    EXPECT_EQ(p.significand, 0);
    EXPECT_TRUE(p.negative);
}

TEST(Fp9ProductOp, MinimumSubnormalsLandOnAnchor) {
    const Fp9Code tiny{0x001};  // 2^-17
    const Fp9Product p = fp9_product(tiny, tiny);
    EXPECT_EQ(p.cls, Fp9Class::Finite);
    EXPECT_EQ(p.significand, 1);
    EXPECT_EQ(p.exponent, -34);
}

TEST(Fp9ProductOp, MaxTimesMax) {
    const Fp9Code max{0x0F7};  // 61440 = 15 * 2^12
    const Fp9Product p = fp9_product(max, max);
    EXPECT_EQ(p.significand, 225);
    EXPECT_EQ(p.exponent, 24);
}

TEST(Fp9ProductOp, SpecialPropagation) {
    const Fp9Code inf{0x0F8}, nan{kFp9CanonicalNan}, zero{0}, one = fp9_of(1.0);
    EXPECT_EQ(fp9_product(nan, one).cls, Fp9Class::NaN);
    EXPECT_EQ(fp9_product(inf, zero).cls, Fp9Class::NaN);
    EXPECT_EQ(fp9_product(inf, one).cls, Fp9Class::Infinity);
    EXPECT_FALSE(fp9_product(inf, one).negative);
    EXPECT_TRUE(fp9_product(inf, fp9_of(-2.0)).negative);
}

TEST(SumProductsOp, EightZeros) {
    std::array<Fp9Product, 8> ps{};
    for (auto& p : ps) p = fp9_product({0}, {0});
    const AccWindow w = sum_products(ps);
    EXPECT_TRUE(w.units.is_zero());
    EXPECT_FALSE(w.sticky);
}

TEST(SumProductsOp, RepeatedMinimumSitsAtAnchor) {
    const Fp9Code tiny{0x001};
    std::array<Fp9Product, 8> ps;
    ps.fill(fp9_product(tiny, tiny));
    const AccWindow w = sum_products(ps);
    // 8 * 2^-34 exactly
    EXPECT_EQ(w.units, detail::Int256::shifted(8, -34 - AccWindow::kLsbExp));
    EXPECT_FALSE(w.sticky);
}

TEST(SumProductsOp, MatchesWideIntegerOracle) {
    std::mt19937_64 rng(7);
    for (int iter = 0; iter < 2000; ++iter) {
        std::array<Fp9Product, 8> ps;
        __int128 expected = 0;  // on the 2^-34 grid
        for (auto& p : ps) {
            p.cls = Fp9Class::Finite;
            p.negative = rng() & 1;
            p.significand = static_cast<uint16_t>(rng() % 226);
            p.exponent = static_cast<int>(rng() % 59) - 34;
            const __int128 term = static_cast<__int128>(p.significand)
                                  << (p.exponent + 34);
            expected += p.negative ? -term : term;
        }
        const AccWindow w = sum_products(ps);
        detail::Int256 want;
        const bool neg = expected < 0;
        unsigned __int128 m = neg ? -static_cast<unsigned __int128>(expected)
                                  : static_cast<unsigned __int128>(expected);
        want += detail::Int256::shifted(static_cast<uint64_t>(m >> 64),
                                        64 + AccWindow::kGuardBits);
        want += detail::Int256::shifted(static_cast<uint64_t>(m),
                                        AccWindow::kGuardBits);
        if (neg) want = -want;
        EXPECT_EQ(w.units, want) << "iter " << iter;
    }
}

TEST(AlignAccumulatorOp, ZeroAccumulatorIsIdentity) {
    const Fp9Code one = fp9_of(1.0);
    std::array<Fp9Product, 8> ps;
    ps.fill(fp9_product(one, one));
    const AccWindow before = sum_products(ps);
    const AccWindow after = align_accumulator(before, 0u, 0);
    EXPECT_EQ(after.units, before.units);
    EXPECT_FALSE(after.sticky);
    EXPECT_FALSE(after.carried);
}

TEST(AlignAccumulatorOp, UnitEmbedding) {
    std::array<Fp9Product, 8> ps{};
    for (auto& p : ps) p = fp9_product({0}, {0});
    AccWindow w = sum_products(ps);
    w = align_accumulator(w, fp32_bits(1.0f), 0);
    if (w.carried) {
        EXPECT_EQ(w.carried_bits, fp32_bits(1.0f));
    } else {
        // exactly 1.0 at the nominal anchor: bit 34 of the 95-bit window
        EXPECT_EQ(w.units,
                  detail::Int256::shifted(1, AccWindow::kAnchor +
                                                 AccWindow::kGuardBits));
    }
    EXPECT_EQ(round_result(w, 0), fp32_bits(1.0f));
}

TEST(RoundResultOp, ZeroWindow) {
    AccWindow w;
    EXPECT_EQ(round_result(w, 0), 0u);
    EXPECT_EQ(round_result(w, 100), 0u);
    w.all_negative_zero = true;
    EXPECT_EQ(round_result(w, 0), 0x80000000u);
}

TEST(RoundResultOp, ExactPowerOfTwoScaling) {
    AccWindow w;
    w.units = detail::Int256::shifted(
        1, AccWindow::kAnchor + AccWindow::kGuardBits);  // exactly 1.0
    EXPECT_EQ(round_result(w, 3), fp32_bits(8.0f));
    EXPECT_EQ(round_result(w, 0), fp32_bits(1.0f));
    EXPECT_EQ(round_result(w, -1), fp32_bits(0.5f));
}

TEST(RoundResultOp, StickyBreaksTies) {
    // window = 3 * 2^-34, s = 0: exactly representable, half-way cases
    // probe the sticky logic
    AccWindow w;
    w.units = detail::Int256::shifted(3, AccWindow::kGuardBits);
    EXPECT_EQ(round_result(w, 0), fp32_bits(std::exp2f(-34) * 3));

    // 2^-149 is the smallest subnormal; half of it with sticky set must
    // round away from zero, without sticky ties to even (zero)
    AccWindow h;
    h.units = detail::Int256::shifted(1, 0);  // 2^-60
    EXPECT_EQ(round_result(h, -90), 0u);      // exactly 2^-150, tie to even
    h.sticky = true;
    h.tail_negative = false;
    EXPECT_EQ(round_result(h, -90), 1u);  // just above the tie: min subnormal

    // midpoint between normal neighbours: 1 + 2^-24 ties to 1.0, sticky
    // in either direction moves it off the tie
    AccWindow g;
    g.units = detail::Int256::shifted(1, 60) +
              detail::Int256::shifted(1, 36);  // 1 + 2^-24
    EXPECT_EQ(round_result(g, 0), fp32_bits(1.0f));
    g.sticky = true;
    g.tail_negative = false;
    EXPECT_EQ(round_result(g, 0), fp32_bits(1.0f) + 1);  // next value up
    g.tail_negative = true;
    EXPECT_EQ(round_result(g, 0), fp32_bits(1.0f));
}

// ---- mx_dotp composite ----

TEST(MxDotp, AllZeroLanesReturnAccumulator) {
    const auto zero = lanes(0x00, Fp8Format::E4M3);
    const uint32_t c = fp32_bits(5.0f);
    EXPECT_EQ(mx_dotp(zero, zero, {127}, {127}, c, Fp8Format::E4M3), c);
}

TEST(MxDotp, EightOnes) {
    const auto ones = lanes(0x38, Fp8Format::E4M3);  // 1.0
    EXPECT_EQ(mx_dotp(ones, ones, {127}, {127}, 0u, Fp8Format::E4M3),
              fp32_bits(8.0f));
}

TEST(MxDotp, NanScaleWins) {
    const auto ones = lanes(0x38, Fp8Format::E4M3);
    const uint32_t r =
        mx_dotp(ones, ones, {0xFF}, {127}, fp32_bits(1.0f), Fp8Format::E4M3);
    EXPECT_TRUE(fp32_is_nan(r));
    const uint32_t r2 =
        mx_dotp(ones, ones, {127}, {0xFF}, fp32_bits(1.0f), Fp8Format::E4M3);
    EXPECT_TRUE(fp32_is_nan(r2));
}

TEST(MxDotp, SpecialAlgebra) {
    const Fp8Format f = Fp8Format::E5M2;
    auto inf = lanes(0x7C, f);
    auto ones = lanes(0x3C, f);  // E5M2 1.0
    auto zeros = lanes(0x00, f);

    EXPECT_EQ(mx_dotp(inf, ones, {127}, {127}, 0u, f), kFp32PosInf);
    // Inf * 0 -> NaN
    EXPECT_TRUE(fp32_is_nan(mx_dotp(inf, zeros, {127}, {127}, 0u, f)));
    // conflicting infinities -> NaN
    auto mixed = ones;
    mixed[0] = {0x7C, f};
    auto partner = ones;
    partner[1] = {0xFC, f};  // -Inf via negative element times positive
    auto both = ones;
    both[0] = {0x7C, f};
    both[1] = {0xFC, f};
    EXPECT_TRUE(fp32_is_nan(mx_dotp(both, ones, {127}, {127}, 0u, f)));
    // Inf accumulator passes through; opposing Inf products poison it
    EXPECT_EQ(mx_dotp(ones, ones, {127}, {127}, kFp32NegInf, f), kFp32NegInf);
    EXPECT_TRUE(fp32_is_nan(mx_dotp(mixed, ones, {127}, {127}, kFp32NegInf, f)));
    // NaN element
    auto nan_lane = ones;
    nan_lane[3] = {0x7F, f};
    EXPECT_TRUE(fp32_is_nan(mx_dotp(nan_lane, ones, {127}, {127}, 0u, f)));
}

TEST(MxDotp, SignOfExactZero) {
    const Fp8Format f = Fp8Format::E4M3;
    auto neg_zeros = lanes(0x80, f);
    auto pos_ones = lanes(0x38, f);
    // -0 products with -0 accumulator stay -0
    EXPECT_EQ(mx_dotp(neg_zeros, pos_ones, {127}, {127}, 0x80000000u, f),
              0x80000000u);
    // +0 accumulator flips the result to +0
    EXPECT_EQ(mx_dotp(neg_zeros, pos_ones, {127}, {127}, 0u, f), 0u);
    // cancellation of nonzero terms gives +0 even with a -0 accumulator:
    // lanes 1*1 and 1*(-1), everything else zero
    auto a = lanes(0x00, f);
    auto b = lanes(0x00, f);
    a[0] = {0x38, f};
    b[0] = {0x38, f};
    a[1] = {0x38, f};
    b[1] = {0xB8, f};  // -1.0
    const uint32_t r = mx_dotp(a, b, {127}, {127}, 0x80000000u, f);
    EXPECT_EQ(r, 0u);
}

TEST(MxDotp, ScaleShiftDoublesResult) {
    std::mt19937_64 rng(11);
    for (int iter = 0; iter < 500; ++iter) {
        std::array<Fp8Code, 8> pa, pb;
        for (int i = 0; i < 8; ++i) {
            pa[i] = {static_cast<uint8_t>(rng()), Fp8Format::E4M3};
            pb[i] = {static_cast<uint8_t>(rng()), Fp8Format::E4M3};
        }
        const ScaleE8M0 xa{static_cast<uint8_t>(64 + rng() % 64)};
        const ScaleE8M0 xb{static_cast<uint8_t>(64 + rng() % 64)};
        const uint32_t r1 = mx_dotp(pa, pb, xa, xb, 0u, Fp8Format::E4M3);
        const uint32_t r2 = mx_dotp(pa, pb, {static_cast<uint8_t>(xa.bits + 1)},
                                    xb, 0u, Fp8Format::E4M3);
        const float f1 = fp32_value(r1), f2 = fp32_value(r2);
        if (std::isfinite(f1) && std::isfinite(f2) && std::isfinite(2 * f1)) {
            EXPECT_EQ(2 * f1, f2) << "iter " << iter;
        }
    }
}

TEST(MxDotp, OperandSymmetryAndLanePermutation) {
    std::mt19937_64 rng(13);
    for (int iter = 0; iter < 500; ++iter) {
        const Fp8Format f = iter % 2 ? Fp8Format::E4M3 : Fp8Format::E5M2;
        std::array<Fp8Code, 8> pa, pb;
        for (int i = 0; i < 8; ++i) {
            pa[i] = {static_cast<uint8_t>(rng()), f};
            pb[i] = {static_cast<uint8_t>(rng()), f};
        }
        const ScaleE8M0 xa{static_cast<uint8_t>(rng() % 255)};
        const ScaleE8M0 xb{static_cast<uint8_t>(rng() % 255)};
        const uint32_t c = static_cast<uint32_t>(rng());
        const uint32_t r = mx_dotp(pa, pb, xa, xb, c, f);
        const uint32_t swapped = mx_dotp(pb, pa, xb, xa, c, f);
        EXPECT_EQ(r, swapped);

        std::array<Fp8Code, 8> qa = pa, qb = pb;
        const int rot = 1 + static_cast<int>(rng() % 7);
        std::rotate(qa.begin(), qa.begin() + rot, qa.end());
        std::rotate(qb.begin(), qb.begin() + rot, qb.end());
        EXPECT_EQ(mx_dotp(qa, qb, xa, xb, c, f), r);
    }
}

// The central property, small smoke version; the acceptance suite runs the
// 10^6-case campaign with directed corners.
TEST(MxDotpOracle, RandomizedEquivalenceSmoke) {
    std::mt19937_64 rng(42);
    for (int iter = 0; iter < 20000; ++iter) {
        const Fp8Format f = iter % 2 ? Fp8Format::E4M3 : Fp8Format::E5M2;
        std::array<Fp8Code, 8> pa, pb;
        for (int i = 0; i < 8; ++i) {
            pa[i] = {static_cast<uint8_t>(rng()), f};
            pb[i] = {static_cast<uint8_t>(rng()), f};
        }
        const ScaleE8M0 xa{static_cast<uint8_t>(rng() % 256)};
        const ScaleE8M0 xb{static_cast<uint8_t>(rng() % 256)};
        const uint32_t c = static_cast<uint32_t>(rng());
        const uint32_t got = mx_dotp(pa, pb, xa, xb, c, f);
        const uint32_t want = mx_dotp_oracle(pa, pb, xa, xb, c, f);
        ASSERT_EQ(got, want) << "iter " << iter << " xa=" << int(xa.bits)
                             << " xb=" << int(xb.bits) << " c=0x" << std::hex
                             << c;
    }
}

TEST(MxDotpOracle, StraddleCancellationCorners) {
    // The accumulator's low bits fall below the window anchor while its
    // high bits cancel the product sum; the guard bits must preserve the
    // exact result.
    const Fp8Format f = Fp8Format::E5M2;
    auto a = lanes(0x00, f);
    auto b = lanes(0x00, f);
    a[0] = {0x01, f};  // 2^-16
    b[0] = {0x01, f};  // product 2^-32

    for (int low = -60; low >= -140; --low) {
        const float c = -(std::exp2f(-32) - std::exp2f(low));
        if (!std::isfinite(c) || c == -std::exp2f(-32)) continue;
        const uint32_t cb = fp32_bits(c);
        const uint32_t got = mx_dotp(a, b, {127}, {127}, cb, f);
        const uint32_t want = mx_dotp_oracle(a, b, {127}, {127}, cb, f);
        EXPECT_EQ(got, want) << "low=" << low;
        // exact result is 2^low, representable
        EXPECT_EQ(fp32_value(got), std::exp2f(low)) << "low=" << low;
    }
}

TEST(MxDotpOracle, ExhaustiveSingleLanePairs) {
    // every (a, b) element combination on one lane, remaining lanes zero
    for (Fp8Format f : {Fp8Format::E5M2, Fp8Format::E4M3}) {
        auto pa = lanes(0x00, f);
        auto pb = lanes(0x00, f);
        const std::array<std::pair<uint8_t, uint8_t>, 2> scale_pairs = {
            {{127, 127}, {0, 254}}};
        for (int a = 0; a < 256; ++a) {
            for (int b = 0; b < 256; ++b) {
                pa[3] = {static_cast<uint8_t>(a), f};
                pb[3] = {static_cast<uint8_t>(b), f};
                for (const auto& [sa, sb] : scale_pairs) {
                    for (uint32_t c : {0u, fp32_bits(1.0f)}) {
                        const uint32_t got =
                            mx_dotp(pa, pb, {sa}, {sb}, c, f);
                        const uint32_t want =
                            mx_dotp_oracle(pa, pb, {sa}, {sb}, c, f);
                        ASSERT_EQ(got, want)
                            << "fmt=" << int(f) << " a=" << a << " b=" << b
                            << " sa=" << int(sa) << " c=" << c;
                    }
                }
            }
        }
    }
}

TEST(MxDotpOracle, AccumulatorDominantMagnitudes) {
    const Fp8Format f = Fp8Format::E4M3;
    const auto ones = lanes(0x38, f);
    for (uint8_t sbits : {uint8_t{0}, uint8_t{127}, uint8_t{254}}) {
        for (float c : {3.4028235e38f, -3.4028235e38f, 1.1754944e-38f,
                        std::exp2f(100), -std::exp2f(100)}) {
            const uint32_t cb = fp32_bits(c);
            const uint32_t got = mx_dotp(ones, ones, {sbits}, {sbits}, cb, f);
            const uint32_t want =
                mx_dotp_oracle(ones, ones, {sbits}, {sbits}, cb, f);
            EXPECT_EQ(got, want) << "s=" << int(sbits) << " c=" << c;
        }
    }
}

}  // namespace
