#include "mxdp/fp8.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <map>
#include <vector>

using namespace mxdp;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Independent enumeration oracle: decode a code straight from the format
// definition, value = sign * (implicit + mant/2^m) * 2^(E-bias).
double oracle_decode(uint8_t bits, Fp8Format fmt) {
    const Fp8Params p = fp8_params(fmt);
    const int sign = bits >> 7;
    const int exp_field = (bits >> p.mant_bits) & ((1 << p.exp_bits) - 1);
    const int mant = bits & ((1 << p.mant_bits) - 1);
    const int all_ones = (1 << p.exp_bits) - 1;

    if (fmt == Fp8Format::E5M2 && exp_field == all_ones) {
        if (mant == 0) return sign ? -kInf : kInf;
        return std::numeric_limits<double>::quiet_NaN();
    }
    if (fmt == Fp8Format::E4M3 && exp_field == all_ones &&
        mant == (1 << p.mant_bits) - 1) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    double v;
    if (exp_field == 0) {
        v = (mant / std::exp2(p.mant_bits)) * std::exp2(1 - p.bias);
    } else {
        v = (1.0 + mant / std::exp2(p.mant_bits)) * std::exp2(exp_field - p.bias);
    }
    return sign ? -v : v;
}

// All finite values of a format, sorted, with one representative code each.
std::map<double, uint8_t> finite_grid(Fp8Format fmt) {
    std::map<double, uint8_t> grid;
    for (int b = 0; b < 256; ++b) {
        const double v = oracle_decode(static_cast<uint8_t>(b), fmt);
        if (std::isfinite(v)) {
            grid.emplace(v, static_cast<uint8_t>(b));  // keeps +0 over -0
        }
    }
    return grid;
}

// Nearest-even rounding by brute force over the enumerated grid.
double oracle_round(double v, Fp8Format fmt, const std::map<double, uint8_t>& grid) {
    double best = 0.0, best_dist = kInf;
    bool tie = false;
    double tie_other = 0.0;
    for (const auto& [g, bits] : grid) {
        const double dist = std::fabs(v - g);
        if (dist < best_dist) {
            best = g;
            best_dist = dist;
            tie = false;
        } else if (dist == best_dist && g != best) {
            tie = true;
            tie_other = g;
        }
    }
    if (!tie) return best;
    // ties-to-even on the grid index: even significand = even code
    const uint8_t b1 = grid.at(best), b2 = grid.at(tie_other);
    return (b1 & 1) == 0 ? oracle_decode(b1, fmt) : oracle_decode(b2, fmt);
}

const Fp8Format kFormats[] = {Fp8Format::E5M2, Fp8Format::E4M3};

TEST(Fp8Decode, MatchesEnumerationOracle) {
    for (Fp8Format fmt : kFormats) {
        for (int b = 0; b < 256; ++b) {
            const uint8_t bits = static_cast<uint8_t>(b);
            const double got = decode_fp8({bits, fmt});
            const double want = oracle_decode(bits, fmt);
            if (std::isnan(want)) {
                EXPECT_TRUE(std::isnan(got)) << "bits=" << b;
            } else {
                EXPECT_EQ(got, want) << "bits=" << b;
                EXPECT_EQ(std::signbit(got), std::signbit(want)) << "bits=" << b;
            }
        }
    }
}

TEST(Fp8Decode, DirectedValues) {
    EXPECT_EQ(decode_fp8({0x00, Fp8Format::E5M2}), 0.0);
    EXPECT_FALSE(std::signbit(decode_fp8({0x00, Fp8Format::E5M2})));
    EXPECT_EQ(decode_fp8({0x7E, Fp8Format::E4M3}), 448.0);
    EXPECT_EQ(decode_fp8({0x7C, Fp8Format::E5M2}), kInf);
    EXPECT_TRUE(std::isnan(decode_fp8({0x7F, Fp8Format::E4M3})));
    EXPECT_TRUE(std::isnan(decode_fp8({0xFF, Fp8Format::E4M3})));
    // E4M3 has no infinity: S.1111.mmm with mmm != 111 stays finite
    EXPECT_EQ(decode_fp8({0x78, Fp8Format::E4M3}), 256.0);
}

TEST(Fp8Encode, RoundtripIdentityOnRepresentables) {
    for (Fp8Format fmt : kFormats) {
        for (int b = 0; b < 256; ++b) {
            const uint8_t bits = static_cast<uint8_t>(b);
            const double v = oracle_decode(bits, fmt);
            if (std::isnan(v)) {
                const Fp8Code back = encode_fp8(v, fmt, false);
                EXPECT_TRUE(std::isnan(decode_fp8(back)));
                continue;
            }
            for (bool sat : {false, true}) {
                const Fp8Code back = encode_fp8(v, fmt, sat);
                if (v == 0.0 && (b & 0x7F) == 0) {
                    EXPECT_EQ(back.bits, bits) << "zero sign, bits=" << b;
                } else if (std::isinf(v)) {
                    if (!sat) {
                        EXPECT_EQ(back.bits, bits);
                    }
                } else {
                    EXPECT_EQ(back.bits, bits)
                        << "fmt=" << static_cast<int>(fmt) << " bits=" << b;
                }
            }
        }
    }
}

TEST(Fp8Encode, DirectedValues) {
    EXPECT_EQ(encode_fp8(1.0, Fp8Format::E4M3, false).bits, 0x38);
    EXPECT_EQ(encode_fp8(1.0, Fp8Format::E4M3, true).bits, 0x38);
    EXPECT_EQ(encode_fp8(std::exp2(20), Fp8Format::E5M2, true).bits, 0x7B);
    EXPECT_EQ(encode_fp8(-0.0, Fp8Format::E5M2, false).bits, 0x80);
    EXPECT_EQ(encode_fp8(-0.0, Fp8Format::E4M3, true).bits, 0x80);
    // non-saturating overflow: Inf for E5M2, NaN for E4M3
    EXPECT_EQ(encode_fp8(std::exp2(20), Fp8Format::E5M2, false).bits, 0x7C);
    EXPECT_TRUE(std::isnan(decode_fp8(encode_fp8(1.0e6, Fp8Format::E4M3, false))));
    EXPECT_EQ(encode_fp8(1.0e6, Fp8Format::E4M3, true).bits, 0x7E);
}

TEST(Fp8Encode, MatchesBruteForceRounding) {
    for (Fp8Format fmt : kFormats) {
        const auto grid = finite_grid(fmt);
        const double maxf = fp8_params(fmt).max_finite;
        std::vector<double> probes;
        // grid points, midpoints between neighbours, and off-midpoint nudges
        double prev = 0.0;
        bool have_prev = false;
        for (const auto& [g, bits] : grid) {
            probes.push_back(g);
            if (have_prev) {
                const double mid = prev + (g - prev) / 2;
                probes.push_back(mid);
                probes.push_back(prev + (g - prev) * 0.25);
                probes.push_back(prev + (g - prev) * 0.75);
            }
            prev = g;
            have_prev = true;
        }
        for (double v : probes) {
            if (std::fabs(v) > maxf) continue;
            const double got = decode_fp8(encode_fp8(v, fmt, true));
            const double want = oracle_round(v, fmt, grid);
            EXPECT_EQ(got, want) << "fmt=" << static_cast<int>(fmt) << " v=" << v;
        }
    }
}

TEST(Fp8Encode, MonotoneOnFiniteReals) {
    for (Fp8Format fmt : kFormats) {
        const double maxf = fp8_params(fmt).max_finite;
        double last = -kInf;
        for (int i = -4000; i <= 4000; ++i) {
            const double v = maxf * i / 4000.0;
            const double d = decode_fp8(encode_fp8(v, fmt, true));
            EXPECT_GE(d, last) << "fmt=" << static_cast<int>(fmt) << " v=" << v;
            last = d;
        }
    }
}

TEST(ScaleE8M0Decode, Directed) {
    EXPECT_EQ(decode_e8m0({127}), 1.0);
    EXPECT_EQ(decode_e8m0({0}), std::exp2(-127));
    EXPECT_EQ(decode_e8m0({254}), std::exp2(127));
    EXPECT_TRUE(std::isnan(decode_e8m0({255})));
}

TEST(ScaleE8M0Decode, InjectiveOnNonNanCodes) {
    std::map<double, int> seen;
    for (int b = 0; b <= 254; ++b) {
        const double v = decode_e8m0({static_cast<uint8_t>(b)});
        EXPECT_EQ(v, std::exp2(b - 127));
        auto [it, inserted] = seen.emplace(v, b);
        EXPECT_TRUE(inserted) << "codes " << it->second << " and " << b;
    }
}

}  // namespace
