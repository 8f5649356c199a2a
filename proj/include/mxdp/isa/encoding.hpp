#pragma once

#include <cstdint>
#include <stdexcept>

namespace mxdp::isa {

// Scaled dot-product-accumulate instruction,
//   mxdotp rd, rs1, rs2, rs3, sl
// rs1/rs2 name the packed element vectors, rs3 the packed scale pairs
// (sl selects one of the four pairs in the 64-bit word), rd the FP32
// accumulator. Layout:
//   [31:27]=rs3  [26:25]=sl  [24:20]=rs2  [19:15]=rs1  [14:12]=0
//   [11:7]=rd    [6:0]=opcode (1110111)
struct MxdotpInstruction {
    uint8_t rd = 0;
    uint8_t rs1 = 0;
    uint8_t rs2 = 0;
    uint8_t rs3 = 0;
    uint8_t sl = 0;

    friend bool operator==(const MxdotpInstruction&,
                           const MxdotpInstruction&) = default;
};

constexpr uint32_t kMxdotpOpcode = 0b1110111;

inline uint32_t encode_instruction(const MxdotpInstruction& inst) {
    if (inst.rd > 31 || inst.rs1 > 31 || inst.rs2 > 31 || inst.rs3 > 31 ||
        inst.sl > 3) {
        throw std::out_of_range("mxdotp field out of range");
    }
    return (static_cast<uint32_t>(inst.rs3) << 27) |
           (static_cast<uint32_t>(inst.sl) << 25) |
           (static_cast<uint32_t>(inst.rs2) << 20) |
           (static_cast<uint32_t>(inst.rs1) << 15) |
           (static_cast<uint32_t>(inst.rd) << 7) | kMxdotpOpcode;
}

inline MxdotpInstruction decode_instruction(uint32_t word) {
    if ((word & 0x7F) != kMxdotpOpcode) {
        throw std::invalid_argument("not an mxdotp instruction");
    }
    if (((word >> 12) & 0x7) != 0) {
        throw std::invalid_argument("not an mxdotp instruction");
    }
    MxdotpInstruction inst;
    inst.rs3 = (word >> 27) & 0x1F;
    inst.sl = (word >> 25) & 0x3;
    inst.rs2 = (word >> 20) & 0x1F;
    inst.rs1 = (word >> 15) & 0x1F;
    inst.rd = (word >> 7) & 0x1F;
    return inst;
}

}  // namespace mxdp::isa
