#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string_view>

#include "mxdp/isa/cycle_model.hpp"

namespace mxdp::isa {

enum class KernelVariant : uint8_t { FP32, FP8_TO_FP32, MXFP8 };

constexpr std::string_view kernel_variant_name(KernelVariant v) {
    switch (v) {
        case KernelVariant::FP32: return "fp32";
        case KernelVariant::FP8_TO_FP32: return "fp8_to_fp32";
        case KernelVariant::MXFP8: return "mxfp8";
    }
    return "?";
}

// One FLOP = one FP multiply or one FP add; scaling operations and format
// conversions are not counted.
struct CycleReport {
    KernelVariant variant = KernelVariant::MXFP8;
    size_t m = 0, n = 0, k = 0;
    unsigned cores = 0;
    uint64_t total_cycles = 0;   // slowest core
    uint64_t useful_flops = 0;   // 2*m*n*k
    uint32_t peak_flops_per_cycle_core = 0;
    std::map<InstrClass, uint64_t> issued;  // summed over cores

    uint64_t peak_flops_per_cycle_cluster() const {
        return static_cast<uint64_t>(peak_flops_per_cycle_core) * cores;
    }
    double utilization() const {
        return static_cast<double>(useful_flops) /
               (static_cast<double>(peak_flops_per_cycle_cluster()) *
                static_cast<double>(total_cycles));
    }
    double gflops_at(double freq_ghz) const {
        return static_cast<double>(useful_flops) * freq_ghz /
               static_cast<double>(total_cycles);
    }
};

// speedup of v1 over v2 = cycles(v2) / cycles(v1)
inline double speedup(const CycleReport& v1, const CycleReport& v2) {
    if (v1.m != v2.m || v1.n != v2.n || v1.k != v2.k || v1.cores != v2.cores) {
        throw std::invalid_argument(
            "speedup requires identical (m, n, k, cores)");
    }
    return static_cast<double>(v2.total_cycles) /
           static_cast<double>(v1.total_cycles);
}

struct MetricsRow {
    KernelVariant variant;
    uint64_t cycles;
    double utilization;
    double gflops;
    // missing baseline (e.g. FP32 skipped at large k) stays at 0
    double speedup_vs_fp32 = 0.0;
    double speedup_vs_fp8_to_fp32 = 0.0;
};

inline std::vector<MetricsRow> compute_metrics(
    std::span<const CycleReport> reports, double freq_ghz) {
    const CycleReport* fp32 = nullptr;
    const CycleReport* fp8 = nullptr;
    for (const CycleReport& r : reports) {
        if (r.variant == KernelVariant::FP32) fp32 = &r;
        if (r.variant == KernelVariant::FP8_TO_FP32) fp8 = &r;
    }
    std::vector<MetricsRow> rows;
    for (const CycleReport& r : reports) {
        MetricsRow row{r.variant, r.total_cycles, r.utilization(),
                       r.gflops_at(freq_ghz)};
        if (fp32 && fp32 != &r) row.speedup_vs_fp32 = speedup(r, *fp32);
        if (fp8 && fp8 != &r) row.speedup_vs_fp8_to_fp32 = speedup(r, *fp8);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace mxdp::isa
