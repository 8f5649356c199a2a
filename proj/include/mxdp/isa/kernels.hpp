#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mxdp/isa/core.hpp"
#include "mxdp/isa/cycle_model.hpp"
#include "mxdp/isa/metrics.hpp"
#include "mxdp/mx.hpp"

namespace mxdp::isa {

// ---------------------------------------------------------------------------
// The three matrix-multiplication kernels. B is always supplied
// pre-transposed (n x k) so that both element streams walk the reduction
// dimension contiguously.
//
// The functional result and the cycle count are fully decoupled: numbers
// come from the datapath model (or plain FP32 arithmetic for the software
// kernels), cycles from per-kernel instruction templates priced by the
// CycleModel. Cores own disjoint output rows and share read-only inputs,
// so results do not depend on how core execution is interleaved; this
// implementation advances them sequentially. Template instruction counts that the kernel listings do not
// spell out (loop scaffolding, address generation, dependency stalls) are
// calibration constants: they absorb issue-stage and memory effects the
// ideal-L1 model does not represent and were fixed once against the
// reference implementation's published endpoint throughputs.
// ---------------------------------------------------------------------------

constexpr size_t kUnroll = 8;  // output columns per tile

// calibrated template constants
constexpr uint64_t kRowBookkeepingInt = 6;
constexpr uint64_t kMxTileBookkeepingInt = 20;
constexpr uint64_t kF32TileBookkeepingInt = 44;
constexpr uint64_t kF32ColReduceStall = 4;
constexpr uint64_t kFp8GroupStall = 2;
constexpr uint64_t kFp8OutPrologueInt = 104;
constexpr uint64_t kFp8OutEpilogueInt = 21;

struct GemmResult {
    std::vector<float> c;  // m x n row-major
    CycleReport report;
};

// --- scale reshaping -------------------------------------------------------

// Materializes the third stream's words: for each (row, column-tile,
// scale-block) two 64-bit words, each holding four (A-scale, B-scale)
// pairs for four consecutive output columns. Together with 4x read
// repetition this delivers, for every mxdotp in program order, the word
// whose pair slot `sl` (= column mod 4) holds the right scales.
inline std::vector<uint64_t> reshape_scales(const MxTensor& a,
                                            const MxTensor& bt) {
    const size_t m = a.rows, n = bt.rows, kb = a.blocks_per_row();
    std::vector<uint64_t> words;
    words.reserve(m * (n / kUnroll) * kb * 2);
    for (size_t r = 0; r < m; ++r) {
        for (size_t nt = 0; nt < n / kUnroll; ++nt) {
            for (size_t g = 0; g < kb; ++g) {
                for (size_t wp = 0; wp < 2; ++wp) {
                    std::array<std::pair<uint8_t, uint8_t>, 4> pairs;
                    for (size_t j = 0; j < 4; ++j) {
                        const size_t col = nt * kUnroll + wp * 4 + j;
                        pairs[j] = {a.scale_at(r, g).bits,
                                    bt.scale_at(col, g).bits};
                    }
                    words.push_back(pack_scale_word(pairs));
                }
            }
        }
    }
    return words;
}

// --- shared validation -----------------------------------------------------

namespace detail {

inline void validate_dims(size_t m, size_t n, size_t k, unsigned cores,
                          size_t k_multiple) {
    if (cores == 0 || m == 0 || n == 0 || k == 0) {
        throw std::invalid_argument("empty GEMM dimensions");
    }
    if (m % cores != 0) {
        throw std::invalid_argument("m must divide evenly across cores");
    }
    if (n % kUnroll != 0) {
        throw std::invalid_argument("n must be a multiple of the unroll "
                                    "factor 8");
    }
    if (k % k_multiple != 0) {
        throw std::invalid_argument("k not a multiple of the kernel's "
                                    "reduction granule");
    }
}

inline void validate_mx_pair(const MxTensor& a, const MxTensor& bt) {
    if (a.format != bt.format) {
        throw std::invalid_argument("operand format mismatch");
    }
    if (a.cols != bt.cols) {
        throw std::invalid_argument("reduction dimension mismatch");
    }
    if (a.block_size != kDefaultBlockSize || bt.block_size != kDefaultBlockSize) {
        throw std::invalid_argument("kernels assume block size 32");
    }
}

struct CoreCost {
    uint64_t cycles = 0;
    std::map<InstrClass, uint64_t> issued;

    void add(InstrClass c, uint64_t count, const CycleModel& model) {
        issued[c] += count;
        cycles += count * model.issue(c);
    }
    void stall(uint64_t cycles_) { cycles += cycles_; }
};

inline uint64_t ssr_cfg_writes(unsigned dims) { return 2 * dims + 2; }

}  // namespace detail

// --- MXFP8 kernel ----------------------------------------------------------

namespace detail {

// Per-core timing: per tile, eight accumulator inits, one hardware-loop
// setup, k back-to-back mxdotps (eight independent accumulators keep the
// three-stage pipeline full), a drain before the eight stores.
inline CoreCost mxfp8_core_cost(size_t n, size_t k, size_t rows_per_core,
                                const CycleModel& model) {
    CoreCost cost;
    cost.add(InstrClass::CsrWrite, 1, model);
    cost.add(InstrClass::SsrCfg,
             ssr_cfg_writes(3) + ssr_cfg_writes(4) + ssr_cfg_writes(4) + 1,
             model);
    const size_t tiles = n / kUnroll;
    cost.add(InstrClass::IntAlu, kRowBookkeepingInt * rows_per_core, model);
    cost.add(InstrClass::FpMove, 8 * tiles * rows_per_core, model);
    cost.add(InstrClass::FrepCfg, tiles * rows_per_core, model);
    cost.add(InstrClass::Mxdotp, k * tiles * rows_per_core, model);
    cost.stall(model.drain(InstrClass::Mxdotp) * tiles * rows_per_core);
    cost.add(InstrClass::FpStore, 8 * tiles * rows_per_core, model);
    cost.add(InstrClass::IntAlu, kMxTileBookkeepingInt * tiles * rows_per_core,
             model);
    return cost;
}

}  // namespace detail

// Runs the MXFP8 kernel through the instruction-level machinery: elements
// and scale words are laid out in an L1 image, three streams feed each
// core, and every mxdotp executes via the datapath model.
inline GemmResult run_mxfp8(const MxTensor& a, const MxTensor& bt,
                            unsigned cores, const CycleModel& model) {
    detail::validate_mx_pair(a, bt);
    const size_t m = a.rows, n = bt.rows, k = a.cols;
    detail::validate_dims(m, n, k, cores, kDefaultBlockSize);

    const size_t rows_pc = m / cores;
    const size_t tiles = n / kUnroll;
    const size_t kb_words = k / 8;     // element words per row
    const size_t kb_scales = k / 32;   // scale blocks per row

    // L1 image: A elements | BT elements | reshaped scale words | C
    const uint64_t addr_a = 0;
    const uint64_t addr_b = addr_a + m * k;
    const uint64_t addr_s = addr_b + n * k;
    const std::vector<uint64_t> scale_words = reshape_scales(a, bt);
    const uint64_t addr_c = addr_s + scale_words.size() * 8;
    Memory mem(addr_c + m * n * 4);
    std::copy(a.elements.begin(), a.elements.end(), mem.bytes.begin() + addr_a);
    std::copy(bt.elements.begin(), bt.elements.end(),
              mem.bytes.begin() + addr_b);
    for (size_t i = 0; i < scale_words.size(); ++i) {
        mem.store_u64(addr_s + i * 8, scale_words[i]);
    }

    for (unsigned core = 0; core < cores; ++core) {
        const size_t r0 = core * rows_pc;
        CoreState st;
        st.memory = &mem;
        st.csr.fp8_format = a.format;
        st.ssr_enabled = true;

        SsrConfig sa;
        sa.base = addr_a + r0 * k;
        sa.repeat = 7;
        sa.bounds = {kb_words, tiles, rows_pc, 1};
        sa.strides = {8, 0, static_cast<int64_t>(k), 0};
        sa.dims = 3;
        st.configure_stream(0, sa);

        SsrConfig sb;
        sb.base = addr_b;
        sb.bounds = {8, kb_words, tiles, rows_pc};
        sb.strides = {static_cast<int64_t>(k), 8,
                      static_cast<int64_t>(8 * k), 0};
        sb.dims = 4;
        st.configure_stream(1, sb);

        SsrConfig ss;
        ss.base = addr_s + r0 * tiles * kb_scales * 16;
        ss.repeat = 3;
        ss.bounds = {2, 4, kb_scales, rows_pc * tiles};
        ss.strides = {8, 0, 16, static_cast<int64_t>(kb_scales * 16)};
        ss.dims = 4;
        st.configure_stream(2, ss);

        for (size_t r = r0; r < r0 + rows_pc; ++r) {
            for (size_t nt = 0; nt < tiles; ++nt) {
                for (size_t j = 0; j < 8; ++j) {
                    st.fp_regs[3 + j] = 0;  // accumulator init
                }
                for (size_t kb = 0; kb < kb_words; ++kb) {
                    for (uint8_t j = 0; j < 8; ++j) {
                        execute_mxdotp(
                            st, {static_cast<uint8_t>(3 + j), 0, 1, 2,
                                 static_cast<uint8_t>(j % 4)});
                    }
                }
                for (size_t j = 0; j < 8; ++j) {
                    mem.store_u32(addr_c + (r * n + nt * kUnroll + j) * 4,
                                  static_cast<uint32_t>(st.fp_regs[3 + j]));
                }
            }
        }
        for (const auto& stream : st.streams) {
            if (stream && !stream->exhausted()) {
                throw std::logic_error("stream not fully consumed");
            }
        }
    }

    GemmResult out;
    out.c.resize(m * n);
    for (size_t i = 0; i < m * n; ++i) {
        out.c[i] = fp32_value(mem.load_u32(addr_c + i * 4));
    }

    const detail::CoreCost cost = detail::mxfp8_core_cost(n, k, rows_pc, model);
    out.report.variant = KernelVariant::MXFP8;
    out.report.m = m;
    out.report.n = n;
    out.report.k = k;
    out.report.cores = cores;
    out.report.total_cycles = cost.cycles;
    out.report.useful_flops = 2ull * m * n * k;
    out.report.peak_flops_per_cycle_core = 16;
    for (const auto& [cls, cnt] : cost.issued) {
        out.report.issued[cls] = cnt * cores;
    }
    return out;
}

// --- FP32 kernel -----------------------------------------------------------

namespace detail {

inline CoreCost fp32_core_cost(size_t n, size_t k, size_t rows_per_core,
                               const CycleModel& model) {
    CoreCost cost;
    cost.add(InstrClass::SsrCfg, ssr_cfg_writes(3) + ssr_cfg_writes(4) + 1,
             model);
    const size_t tiles = n / kUnroll;
    cost.add(InstrClass::IntAlu, kRowBookkeepingInt * rows_per_core, model);
    const uint64_t per_tile = tiles * rows_per_core;
    cost.add(InstrClass::FpMove, 8 * per_tile, model);
    cost.add(InstrClass::FrepCfg, per_tile, model);
    cost.add(InstrClass::SimdFma, 4 * k * per_tile, model);  // k/2 iters x 8
    cost.stall(model.drain(InstrClass::SimdFma) * per_tile);
    // per column: SIMD pair collapse plus repack for the store
    cost.add(InstrClass::SimdFma, 8 * per_tile, model);
    cost.add(InstrClass::FpMove, 16 * per_tile, model);
    cost.stall(kF32ColReduceStall * 8 * per_tile);
    cost.add(InstrClass::FpStore, 8 * per_tile, model);
    cost.add(InstrClass::IntAlu, kF32TileBookkeepingInt * per_tile, model);
    return cost;
}

}  // namespace detail

// Plain FP32 GEMM with the SIMD kernel's accumulation order: two lanes
// accumulate even/odd reduction indices with fused multiply-adds, then one
// final add collapses the pair.
inline GemmResult run_fp32(const std::vector<float>& a,
                           const std::vector<float>& bt, size_t m, size_t n,
                           size_t k, unsigned cores, const CycleModel& model) {
    detail::validate_dims(m, n, k, cores, 2);
    if (a.size() != m * k || bt.size() != n * k) {
        throw std::invalid_argument("operand shape mismatch");
    }

    GemmResult out;
    out.c.resize(m * n);
    for (size_t i = 0; i < m; ++i) {
        for (size_t j = 0; j < n; ++j) {
            float lane0 = 0.0f, lane1 = 0.0f;
            for (size_t kk = 0; kk < k; kk += 2) {
                lane0 = std::fmaf(a[i * k + kk], bt[j * k + kk], lane0);
                lane1 = std::fmaf(a[i * k + kk + 1], bt[j * k + kk + 1], lane1);
            }
            out.c[i * n + j] = lane0 + lane1;
        }
    }

    const detail::CoreCost cost =
        detail::fp32_core_cost(n, k, m / cores, model);
    out.report.variant = KernelVariant::FP32;
    out.report.m = m;
    out.report.n = n;
    out.report.k = k;
    out.report.cores = cores;
    out.report.total_cycles = cost.cycles;
    out.report.useful_flops = 2ull * m * n * k;
    out.report.peak_flops_per_cycle_core = 4;
    for (const auto& [cls, cnt] : cost.issued) {
        out.report.issued[cls] = cnt * cores;
    }
    return out;
}

// --- FP8-to-FP32 software kernel -------------------------------------------

namespace detail {

inline CoreCost fp8_to_fp32_core_cost(size_t n, size_t k,
                                      size_t rows_per_core,
                                      const CycleModel& model) {
    CoreCost cost;
    cost.add(InstrClass::IntAlu, kRowBookkeepingInt * rows_per_core, model);
    const uint64_t outputs = n * rows_per_core;
    const uint64_t groups = (k / 8) * outputs;
    const uint64_t blocks = (k / 32) * outputs;
    // per output: pointer setup, accumulator init, store
    cost.add(InstrClass::IntAlu, kFp8OutPrologueInt * outputs, model);
    cost.add(InstrClass::FpMove, 6 * outputs, model);
    // per 8 elements: 4x(16-bit load + convert) per matrix, 4 SIMD FMAs
    cost.add(InstrClass::FpLoad, 8 * groups, model);
    cost.add(InstrClass::FpCvt, 8 * groups, model);
    cost.add(InstrClass::SimdFma, 4 * groups, model);
    cost.add(InstrClass::IntAlu, 2 * groups, model);
    cost.stall(kFp8GroupStall * groups);
    // per block boundary: scale loads, biased-exponent arithmetic, the
    // four-instruction reduction, scale apply, accumulator re-init
    cost.add(InstrClass::IntLoad, 2 * blocks, model);
    cost.add(InstrClass::IntAlu, 3 * blocks, model);
    cost.add(InstrClass::SimdFma, 5 * blocks, model);
    cost.add(InstrClass::FpMove, 5 * blocks, model);
    cost.add(InstrClass::FpStore, outputs, model);
    cost.add(InstrClass::IntAlu, kFp8OutEpilogueInt * outputs, model);
    return cost;
}

}  // namespace detail

// Converts FP8 elements to FP32, accumulates across eight SIMD lanes, and
// applies the block scale after each 32-element block:
//   scale bits = (sa + sb - 127) << 23, i.e. exactly 2^((sa-127)+(sb-127)).
inline GemmResult run_fp8_to_fp32(const MxTensor& a, const MxTensor& bt,
                                  unsigned cores, const CycleModel& model) {
    detail::validate_mx_pair(a, bt);
    const size_t m = a.rows, n = bt.rows, k = a.cols;
    detail::validate_dims(m, n, k, cores, kDefaultBlockSize);

    GemmResult out;
    out.c.resize(m * n);
    for (size_t i = 0; i < m; ++i) {
        for (size_t j = 0; j < n; ++j) {
            float total = 0.0f;
            for (size_t b = 0; b < k / 32; ++b) {
                float acc[4][2] = {};
                for (size_t g = 0; g < 4; ++g) {
                    for (size_t p = 0; p < 4; ++p) {
                        const size_t kk = b * 32 + g * 8 + 2 * p;
                        for (size_t lane = 0; lane < 2; ++lane) {
                            const float av = static_cast<float>(
                                decode_fp8(a.element_at(i, kk + lane)));
                            const float bv = static_cast<float>(
                                decode_fp8(bt.element_at(j, kk + lane)));
                            acc[p][lane] = std::fmaf(av, bv, acc[p][lane]);
                        }
                    }
                }
                // reduce: two SIMD adds, one more, then a lane collapse
                float v01[2] = {acc[0][0] + acc[1][0], acc[0][1] + acc[1][1]};
                float v23[2] = {acc[2][0] + acc[3][0], acc[2][1] + acc[3][1]};
                float v[2] = {v01[0] + v23[0], v01[1] + v23[1]};
                const float block_sum = v[0] + v[1];
                const int biased = static_cast<int>(a.scale_at(i, b).bits) +
                                   static_cast<int>(bt.scale_at(j, b).bits) -
                                   127;
                const float scale =
                    fp32_value(static_cast<uint32_t>(biased) << 23);
                total = std::fmaf(block_sum, scale, total);
            }
            out.c[i * n + j] = total;
        }
    }

    const detail::CoreCost cost =
        detail::fp8_to_fp32_core_cost(n, k, m / cores, model);
    out.report.variant = KernelVariant::FP8_TO_FP32;
    out.report.m = m;
    out.report.n = n;
    out.report.k = k;
    out.report.cores = cores;
    out.report.total_cycles = cost.cycles;
    out.report.useful_flops = 2ull * m * n * k;
    out.report.peak_flops_per_cycle_core = 4;
    for (const auto& [cls, cnt] : cost.issued) {
        out.report.issued[cls] = cnt * cores;
    }
    return out;
}

// --- dispatcher ------------------------------------------------------------

struct GemmOperands {
    std::optional<MxTensor> a_mx, bt_mx;
    std::optional<std::vector<float>> a_f32, bt_f32;
    size_t m = 0, n = 0, k = 0;
};

inline GemmResult run_kernel(KernelVariant variant, const GemmOperands& ops,
                             unsigned cores, const CycleModel& model) {
    switch (variant) {
        case KernelVariant::FP32:
            if (!ops.a_f32 || !ops.bt_f32) {
                throw std::invalid_argument("fp32 kernel needs FP32 operands");
            }
            return run_fp32(*ops.a_f32, *ops.bt_f32, ops.m, ops.n, ops.k,
                            cores, model);
        case KernelVariant::FP8_TO_FP32:
            if (!ops.a_mx || !ops.bt_mx) {
                throw std::invalid_argument("fp8 kernel needs MX operands");
            }
            return run_fp8_to_fp32(*ops.a_mx, *ops.bt_mx, cores, model);
        case KernelVariant::MXFP8:
            if (!ops.a_mx || !ops.bt_mx) {
                throw std::invalid_argument("mxfp8 kernel needs MX operands");
            }
            return run_mxfp8(*ops.a_mx, *ops.bt_mx, cores, model);
    }
    throw std::logic_error("unknown kernel variant");
}

}  // namespace mxdp::isa
