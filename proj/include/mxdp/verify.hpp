#pragma once

#include <array>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "mxdp/dotp.hpp"
#include "mxdp/dotp_oracle.hpp"

namespace mxdp {

// Equivalence campaign between the fixed-point datapath and the
// arbitrary-precision oracle: seeded random cases per format plus a
// directed corner sweep (subnormal extremes, anchor-LSB products,
// accumulator-dominant magnitudes, RNE ties on the sticky path, full and
// straddling cancellation, special values).

struct VerifyCase {
    std::array<Fp8Code, 8> pa, pb;
    ScaleE8M0 xa, xb;
    uint32_t c_bits;
    Fp8Format format;
};

struct VerifyResult {
    uint64_t cases_run = 0;
    uint64_t mismatches = 0;
    std::string first_failure;  // reproducible description of the first one
};

namespace detail {

inline std::string describe_case(const VerifyCase& vc, uint32_t got,
                                 uint32_t want) {
    std::string s = "format=";
    s += vc.format == Fp8Format::E5M2 ? "e5m2" : "e4m3";
    char buf[64];
    s += " pa=";
    for (const Fp8Code& c : vc.pa) {
        std::snprintf(buf, sizeof buf, "%02x", c.bits);
        s += buf;
    }
    s += " pb=";
    for (const Fp8Code& c : vc.pb) {
        std::snprintf(buf, sizeof buf, "%02x", c.bits);
        s += buf;
    }
    std::snprintf(buf, sizeof buf, " xa=%u xb=%u c=0x%08x got=0x%08x want=0x%08x",
                  vc.xa.bits, vc.xb.bits, vc.c_bits, got, want);
    s += buf;
    return s;
}

inline void check_case(const VerifyCase& vc, VerifyResult& result) {
    ++result.cases_run;
    const uint32_t got =
        mx_dotp(vc.pa, vc.pb, vc.xa, vc.xb, vc.c_bits, vc.format);
    const uint32_t want =
        mx_dotp_oracle(vc.pa, vc.pb, vc.xa, vc.xb, vc.c_bits, vc.format);
    if (got != want) {
        if (result.mismatches == 0) {
            result.first_failure = describe_case(vc, got, want);
        }
        ++result.mismatches;
    }
}

inline std::vector<VerifyCase> directed_corner_cases() {
    std::vector<VerifyCase> cases;
    const float flt_max = 3.4028234663852886e38f;
    const auto fill = [](uint8_t bits, Fp8Format f) {
        std::array<Fp8Code, 8> a;
        a.fill({bits, f});
        return a;
    };

    for (Fp8Format f : {Fp8Format::E5M2, Fp8Format::E4M3}) {
        const uint8_t max_mag = f == Fp8Format::E5M2 ? 0x7B : 0x7E;
        const std::vector<std::array<Fp8Code, 8>> lane_sets = {
            fill(0x00, f),                     // zeros
            fill(0x80, f),                     // negative zeros
            fill(0x01, f),                     // minimum subnormals
            fill(0x81, f),                     // negative minimum subnormals
            fill(max_mag, f),                  // maximum finite
            fill(max_mag | 0x80, f),           // negative maximum
            fill(f == Fp8Format::E5M2 ? 0x3C : 0x38, f),  // ones
        };
        const std::vector<uint8_t> scale_bits = {0, 1, 63, 127, 191, 254, 255};
        const std::vector<uint32_t> c_values = {
            0u,
            0x80000000u,
            fp32_bits(1.0f),
            fp32_bits(-1.0f),
            fp32_bits(flt_max),
            fp32_bits(-flt_max),
            1u,           // minimum subnormal
            0x80000001u,  // negative minimum subnormal
            fp32_bits(std::exp2f(-126)),
            fp32_bits(std::exp2f(100)),
            fp32_bits(-std::exp2f(100)),
            kFp32PosInf,
            kFp32NegInf,
            kFp32QuietNan,
        };
        for (const auto& lanes : lane_sets) {
            for (uint8_t sa : scale_bits) {
                for (uint32_t c : c_values) {
                    cases.push_back({lanes, lanes, {sa}, {127}, c, f});
                }
            }
        }
        // mixed specials: Inf lanes, NaN lanes, Inf*0
        if (f == Fp8Format::E5M2) {
            auto inf = fill(0x7C, f);
            auto zeros = fill(0x00, f);
            auto ones = fill(0x3C, f);
            auto conflict = ones;
            conflict[0] = {0x7C, f};
            conflict[1] = {0xFC, f};
            for (uint32_t c : c_values) {
                cases.push_back({inf, ones, {127}, {127}, c, f});
                cases.push_back({inf, zeros, {127}, {127}, c, f});
                cases.push_back({conflict, ones, {127}, {127}, c, f});
            }
        }
        auto nan_lane = fill(0x00, f);
        nan_lane[5] = {f == Fp8Format::E5M2 ? uint8_t{0x7D} : uint8_t{0x7F}, f};
        cases.push_back({nan_lane, fill(0x00, f), {127}, {127}, 0u, f});
        cases.push_back({fill(0x00, f), nan_lane, {0xFF}, {127}, 0u, f});

        // full cancellation: sum of products exactly annihilates c
        auto ones = fill(f == Fp8Format::E5M2 ? 0x3C : 0x38, f);
        for (int s_off : {-16, -4, 0, 4, 16}) {
            const uint8_t sa = static_cast<uint8_t>(127 + s_off);
            const float c = -std::ldexp(8.0f, 2 * s_off);
            cases.push_back({ones, ones, {sa}, {sa}, fp32_bits(c), f});
        }
    }

    // straddling cancellation: the accumulator's high bits cancel the
    // product sum while its low bits sit below the window anchor
    {
        const Fp8Format f = Fp8Format::E5M2;
        auto a = fill(0x00, f);
        auto b = fill(0x00, f);
        a[0] = {0x01, f};
        b[0] = {0x01, f};  // single product 2^-32
        for (int low = -40; low >= -148; low -= 3) {
            const float c = -(std::exp2f(-32) - std::exp2f(low));
            if (c == -std::exp2f(-32)) continue;
            cases.push_back({a, b, {127}, {127}, fp32_bits(c), f});
            // shifted variants exercise different window offsets
            cases.push_back({a, b, {130}, {127}, fp32_bits(c * 64), f});
            cases.push_back({a, b, {100}, {127}, fp32_bits(c / 16), f});
        }
    }

    // RNE ties resolved by sticky: 1 + 2^-24 is an exact tie, tiny
    // perturbations below the round bit must break it
    {
        const Fp8Format f = Fp8Format::E4M3;
        auto one_lane = fill(0x00, f);
        auto one_lane_b = fill(0x00, f);
        one_lane[0] = {0x38, f};
        one_lane_b[0] = {0x38, f};  // single product 1.0
        for (float c : {std::exp2f(-24), std::exp2f(-24) + std::exp2f(-48),
                        -std::exp2f(-24), -std::exp2f(-24) - std::exp2f(-48),
                        3 * std::exp2f(-25)}) {
            for (uint8_t sa : {uint8_t{126}, uint8_t{127}, uint8_t{128}}) {
                cases.push_back({one_lane, one_lane_b, {sa}, {128}, fp32_bits(c),
                                 f});
            }
        }
    }
    return cases;
}

}  // namespace detail

inline VerifyResult run_verification(uint64_t random_cases_per_format,
                                     uint64_t seed) {
    VerifyResult result;

    for (const VerifyCase& vc : detail::directed_corner_cases()) {
        detail::check_case(vc, result);
    }

    std::mt19937_64 rng(seed);
    for (Fp8Format f : {Fp8Format::E5M2, Fp8Format::E4M3}) {
        for (uint64_t i = 0; i < random_cases_per_format; ++i) {
            VerifyCase vc;
            vc.format = f;
            for (int l = 0; l < 8; ++l) {
                vc.pa[l] = {static_cast<uint8_t>(rng()), f};
                vc.pb[l] = {static_cast<uint8_t>(rng()), f};
            }
            vc.xa = {static_cast<uint8_t>(rng())};
            vc.xb = {static_cast<uint8_t>(rng())};
            // bias the accumulator toward finite values but keep all bit
            // patterns reachable
            vc.c_bits = static_cast<uint32_t>(rng());
            detail::check_case(vc, result);
        }
    }

    // adversarial cancellation: accumulators built to annihilate (or nearly
    // annihilate) the scaled product sum, the regime where alignment and
    // rounding interact hardest
    std::mt19937_64 rng2(seed ^ 0xA5A5A5A5A5A5A5A5ull);
    const uint64_t adversarial =
        std::min<uint64_t>(random_cases_per_format / 4, 50000);
    for (Fp8Format f : {Fp8Format::E5M2, Fp8Format::E4M3}) {
        for (uint64_t i = 0; i < adversarial; ++i) {
            VerifyCase vc;
            vc.format = f;
            for (int l = 0; l < 8; ++l) {
                vc.pa[l] = {static_cast<uint8_t>(rng2() & 0x7F), f};
                vc.pb[l] = {static_cast<uint8_t>(rng2()), f};
            }
            vc.xa = {static_cast<uint8_t>(rng2() % 255)};
            vc.xb = {static_cast<uint8_t>(rng2() % 255)};
            const uint32_t sum =
                mx_dotp_oracle(vc.pa, vc.pb, vc.xa, vc.xb, 0u, f);
            if (fp32_is_nan(sum)) continue;
            const uint32_t mag = sum & 0x7FFFFFFFu;
            static const int32_t kOffsets[] = {0, 1, -1, 2, -7, 64, -4096};
            const int32_t off = kOffsets[rng2() % 7];
            uint32_t c = sum ^ 0x80000000u;  // exact annihilator
            if (mag != 0 &&
                (off >= 0 || mag >= static_cast<uint32_t>(-off))) {
                c = (c & 0x80000000u) | (mag + static_cast<uint32_t>(off));
            }
            vc.c_bits = c;
            detail::check_case(vc, result);
        }
    }
    return result;
}

}  // namespace mxdp
