#pragma once

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mxdp/fp8.hpp"
#include "mxdp/isa/metrics.hpp"

namespace mxdp::io {

struct BenchRecord {
    isa::KernelVariant variant;
    size_t k;
    uint64_t cycles;
    double utilization;
    double gflops;
    std::optional<double> speedup_vs_fp32;
    std::optional<double> speedup_vs_fp8_to_fp32;
};

struct BenchReport {
    size_t m = 0, n = 0;
    unsigned cores = 0;
    double freq_ghz = 1.0;
    uint64_t seed = 0;
    Fp8Format format = Fp8Format::E4M3;
    uint64_t cycle_model_fingerprint = 0;
    std::vector<BenchRecord> records;
};

namespace detail {

// full round-trip precision so CSV and JSON carry identical values
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string fmt_fingerprint(uint64_t fp) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, fp);
    return buf;
}

}  // namespace detail

inline nlohmann::ordered_json bench_report_json(const BenchReport& r) {
    nlohmann::ordered_json j;
    j["m"] = r.m;
    j["n"] = r.n;
    j["cores"] = r.cores;
    j["freq_ghz"] = r.freq_ghz;
    j["seed"] = r.seed;
    j["format"] = r.format == Fp8Format::E5M2 ? "e5m2" : "e4m3";
    j["cycle_model_fingerprint"] = detail::fmt_fingerprint(
        r.cycle_model_fingerprint);
    j["records"] = nlohmann::ordered_json::array();
    for (const BenchRecord& rec : r.records) {
        nlohmann::ordered_json e;
        e["variant"] = std::string(isa::kernel_variant_name(rec.variant));
        e["k"] = rec.k;
        e["cycles"] = rec.cycles;
        e["utilization"] = rec.utilization;
        e["gflops"] = rec.gflops;
        if (rec.speedup_vs_fp32) {
            e["speedup_vs_fp32"] = *rec.speedup_vs_fp32;
        } else {
            e["speedup_vs_fp32"] = nullptr;
        }
        if (rec.speedup_vs_fp8_to_fp32) {
            e["speedup_vs_fp8_to_fp32"] = *rec.speedup_vs_fp8_to_fp32;
        } else {
            e["speedup_vs_fp8_to_fp32"] = nullptr;
        }
        j["records"].push_back(e);
    }
    return j;
}

inline std::string bench_report_csv(const BenchReport& r) {
    std::string out =
        "variant,k,cycles,utilization,gflops,speedup_vs_fp32,"
        "speedup_vs_fp8_to_fp32\n";
    for (const BenchRecord& rec : r.records) {
        out += std::string(isa::kernel_variant_name(rec.variant));
        out += ',' + std::to_string(rec.k);
        out += ',' + std::to_string(rec.cycles);
        out += ',' + detail::fmt_double(rec.utilization);
        out += ',' + detail::fmt_double(rec.gflops);
        out += ',';
        if (rec.speedup_vs_fp32) out += detail::fmt_double(*rec.speedup_vs_fp32);
        out += ',';
        if (rec.speedup_vs_fp8_to_fp32) {
            out += detail::fmt_double(*rec.speedup_vs_fp8_to_fp32);
        }
        out += '\n';
    }
    return out;
}

}  // namespace mxdp::io
