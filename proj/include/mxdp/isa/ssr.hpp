#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>

namespace mxdp::isa {

// Affine hardware stream: up to four nested loop dimensions plus per-item
// read repetition. Dimension 0 is innermost. For nested indices
// (i3,i2,i1,i0) the generated address is base + sum_d i_d * stride_d,
// and each address is delivered repeat+1 times.
struct SsrConfig {
    uint64_t base = 0;
    std::array<int64_t, 4> strides{0, 0, 0, 0};
    std::array<uint64_t, 4> bounds{1, 1, 1, 1};
    uint32_t repeat = 0;
    uint32_t dims = 1;  // dimensions actually programmed (for config cost)

    uint64_t total_reads() const {
        uint64_t n = repeat + 1;
        for (uint64_t b : bounds) n *= b;
        return n;
    }
};

// Cursor over an SsrConfig's address sequence.
class SsrStream {
  public:
    SsrStream() = default;
    explicit SsrStream(const SsrConfig& cfg) : cfg_(cfg) {
        for (uint64_t b : cfg_.bounds) {
            if (b == 0) throw std::invalid_argument("ssr bound must be nonzero");
        }
    }

    bool exhausted() const { return done_; }

    // Next address in the sequence; advances the cursor.
    uint64_t next() {
        if (done_) {
            throw std::runtime_error("stream exhausted");
        }
        uint64_t addr = cfg_.base;
        for (int d = 0; d < 4; ++d) {
            addr += static_cast<uint64_t>(static_cast<int64_t>(idx_[d]) *
                                          cfg_.strides[d]);
        }
        if (rep_ < cfg_.repeat) {
            ++rep_;
            return addr;
        }
        rep_ = 0;
        for (int d = 0; d < 4; ++d) {
            if (++idx_[d] < cfg_.bounds[d]) {
                return addr;
            }
            idx_[d] = 0;
        }
        done_ = true;
        return addr;
    }

  private:
    SsrConfig cfg_;
    std::array<uint64_t, 4> idx_{0, 0, 0, 0};
    uint32_t rep_ = 0;
    bool done_ = false;
};

}  // namespace mxdp::isa
