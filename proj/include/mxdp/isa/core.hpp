#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mxdp/dotp.hpp"
#include "mxdp/fp8.hpp"
#include "mxdp/isa/encoding.hpp"
#include "mxdp/isa/ssr.hpp"

namespace mxdp::isa {

// Byte-addressable L1 image, 64-bit little-endian word access.
struct Memory {
    std::vector<uint8_t> bytes;

    explicit Memory(size_t size = 0) : bytes(size, 0) {}

    uint64_t load_u64(uint64_t addr) const {
        check(addr);
        uint64_t v;
        std::memcpy(&v, bytes.data() + addr, 8);
        return v;
    }
    void store_u64(uint64_t addr, uint64_t v) {
        check(addr);
        std::memcpy(bytes.data() + addr, &v, 8);
    }
    uint32_t load_u32(uint64_t addr) const {
        if (addr % 4 != 0 || addr + 4 > bytes.size()) {
            throw std::out_of_range("bad word access");
        }
        uint32_t v;
        std::memcpy(&v, bytes.data() + addr, 4);
        return v;
    }
    void store_u32(uint64_t addr, uint32_t v) {
        if (addr % 4 != 0 || addr + 4 > bytes.size()) {
            throw std::out_of_range("bad word access");
        }
        std::memcpy(bytes.data() + addr, &v, 4);
    }

  private:
    void check(uint64_t addr) const {
        if (addr % 8 != 0) {
            throw std::out_of_range("misaligned 64-bit access");
        }
        if (addr + 8 > bytes.size()) {
            throw std::out_of_range("access past end of memory");
        }
    }
};

struct CsrState {
    std::optional<Fp8Format> fp8_format;  // set before any mxdotp executes
};

// One compute core: 32 64-bit FP registers (three read ports, one write
// port), three streams hard-wired to register indices 0..2, the format
// CSR, and a view of the shared L1.
struct CoreState {
    std::array<uint64_t, 32> fp_regs{};
    std::array<std::optional<SsrStream>, 3> streams;
    bool ssr_enabled = false;
    CsrState csr;
    Memory* memory = nullptr;

    void configure_stream(int index, const SsrConfig& cfg) {
        streams.at(index).emplace(cfg);
    }

    bool stream_mapped(uint8_t reg) const {
        return ssr_enabled && reg < 3 && streams[reg].has_value();
    }

    uint64_t read_operand(uint8_t reg) {
        if (stream_mapped(reg)) {
            return memory->load_u64(streams[reg]->next());
        }
        return fp_regs[reg];
    }
};

// Unpacks the four 16-bit scale pairs in a 64-bit word; within a pair the
// low byte is the A scale and the high byte the B scale.
inline std::pair<ScaleE8M0, ScaleE8M0> select_scale_pair(uint64_t word,
                                                         unsigned sl) {
    const uint16_t pair = static_cast<uint16_t>(word >> (16 * sl));
    return {ScaleE8M0{static_cast<uint8_t>(pair & 0xFF)},
            ScaleE8M0{static_cast<uint8_t>(pair >> 8)}};
}

inline uint64_t pack_scale_word(
    const std::array<std::pair<uint8_t, uint8_t>, 4>& pairs) {
    uint64_t w = 0;
    for (int i = 0; i < 4; ++i) {
        const uint16_t p = static_cast<uint16_t>(pairs[i].first) |
                           (static_cast<uint16_t>(pairs[i].second) << 8);
        w |= static_cast<uint64_t>(p) << (16 * i);
    }
    return w;
}

// Executes one mxdotp: rs1/rs2 supply 8 packed FP8 elements each (byte i
// is lane i), rs3 supplies four scale pairs, rd holds the FP32 accumulator
// in its low 32 bits and receives the result (upper bits cleared).
inline void execute_mxdotp(CoreState& state, const MxdotpInstruction& inst) {
    if (!state.csr.fp8_format.has_value()) {
        throw std::runtime_error("fp8 format CSR not configured");
    }
    const bool s1 = state.stream_mapped(inst.rs1);
    const bool s2 = state.stream_mapped(inst.rs2);
    const bool s3 = state.stream_mapped(inst.rs3);
    // With rd always read from the register file, a fourth register-file
    // read would be required if no source is stream-mapped.
    if (!s1 && !s2 && !s3) {
        throw std::runtime_error("register-port violation");
    }
    if (state.stream_mapped(inst.rd)) {
        throw std::runtime_error("write to a stream-mapped register");
    }

    const Fp8Format fmt = *state.csr.fp8_format;
    const uint64_t wa = state.read_operand(inst.rs1);
    const uint64_t wb = state.read_operand(inst.rs2);
    const uint64_t ws = state.read_operand(inst.rs3);

    std::array<Fp8Code, 8> pa, pb;
    for (int i = 0; i < 8; ++i) {
        pa[i] = {static_cast<uint8_t>(wa >> (8 * i)), fmt};
        pb[i] = {static_cast<uint8_t>(wb >> (8 * i)), fmt};
    }
    const auto [xa, xb] = select_scale_pair(ws, inst.sl);
    const uint32_t acc = static_cast<uint32_t>(state.fp_regs[inst.rd]);
    const uint32_t result = mx_dotp(pa, pb, xa, xb, acc, fmt);
    state.fp_regs[inst.rd] = result;
}

}  // namespace mxdp::isa
