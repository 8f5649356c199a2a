#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "mxdp/fp8.hpp"

namespace mxdp {

constexpr int kDefaultBlockSize = 32;

// One block: k elements of a single FP8 format sharing an E8M0 scale.
struct MxBlock {
    ScaleE8M0 scale;
    std::vector<Fp8Code> elements;
};

// Row-major matrix of FP8 elements with one scale per (row, column-block).
// Blocks partition each row along the column (reduction) dimension.
struct MxTensor {
    size_t rows = 0;
    size_t cols = 0;
    Fp8Format format = Fp8Format::E4M3;
    size_t block_size = kDefaultBlockSize;
    std::vector<ScaleE8M0> scales;   // rows x (cols / block_size)
    std::vector<uint8_t> elements;   // rows x cols

    size_t blocks_per_row() const { return cols / block_size; }

    ScaleE8M0 scale_at(size_t row, size_t block) const {
        return scales[row * blocks_per_row() + block];
    }
    Fp8Code element_at(size_t row, size_t col) const {
        return {elements[row * cols + col], format};
    }
};

// Shared scale exponent: floor(log2(max |v|)) - emax of the element format,
// clamped to E8M0's range. Elements are cast with saturation.
inline MxBlock quantize_block(std::span<const double> values, Fp8Format format) {
    if (values.empty()) {
        throw std::invalid_argument("quantize_block: empty input");
    }
    double max_abs = 0.0;
    for (double v : values) {
        if (std::isnan(v) || std::isinf(v)) {
            throw std::invalid_argument("unquantizable input");
        }
        max_abs = std::max(max_abs, std::fabs(v));
    }

    MxBlock block;
    if (max_abs == 0.0) {
        block.scale.bits = 127;  // canonical scale for an all-zero block
    } else {
        // ilogb is floor(log2|x|) exactly, including at powers of two
        const int shared = std::ilogb(max_abs) - fp8_params(format).emax;
        const int clamped = std::clamp(shared, -127, 127);
        block.scale.bits = static_cast<uint8_t>(clamped + 127);
    }
    const double inv = std::ldexp(1.0, -(static_cast<int>(block.scale.bits) - 127));
    block.elements.reserve(values.size());
    for (double v : values) {
        block.elements.push_back(encode_fp8(v * inv, format, /*saturating=*/true));
    }
    return block;
}

inline std::vector<double> dequantize_block(const MxBlock& block) {
    if (e8m0_is_nan(block.scale)) {
        throw std::invalid_argument("NaN-scaled block");
    }
    const double scale = decode_e8m0(block.scale);
    std::vector<double> out;
    out.reserve(block.elements.size());
    for (Fp8Code c : block.elements) {
        out.push_back(decode_fp8(c) * scale);
    }
    return out;
}

inline MxTensor quantize_matrix(std::span<const double> values, size_t rows,
                                size_t cols, Fp8Format format,
                                size_t block_size = kDefaultBlockSize) {
    if (block_size == 0 || cols % block_size != 0) {
        throw std::invalid_argument("block misalignment");
    }
    if (values.size() != rows * cols) {
        throw std::invalid_argument("dimension mismatch");
    }
    MxTensor t;
    t.rows = rows;
    t.cols = cols;
    t.format = format;
    t.block_size = block_size;
    t.scales.reserve(rows * (cols / block_size));
    t.elements.resize(rows * cols);
    for (size_t r = 0; r < rows; ++r) {
        for (size_t b = 0; b < cols / block_size; ++b) {
            const MxBlock block = quantize_block(
                values.subspan(r * cols + b * block_size, block_size), format);
            t.scales.push_back(block.scale);
            for (size_t i = 0; i < block_size; ++i) {
                t.elements[r * cols + b * block_size + i] =
                    block.elements[i].bits;
            }
        }
    }
    return t;
}

inline std::vector<double> dequantize_matrix(const MxTensor& t) {
    std::vector<double> out(t.rows * t.cols);
    for (size_t r = 0; r < t.rows; ++r) {
        for (size_t b = 0; b < t.blocks_per_row(); ++b) {
            const double scale = decode_e8m0(t.scale_at(r, b));
            for (size_t i = 0; i < t.block_size; ++i) {
                const size_t idx = r * t.cols + b * t.block_size + i;
                out[idx] = decode_fp8({t.elements[idx], t.format}) * scale;
            }
        }
    }
    return out;
}

}  // namespace mxdp
