#pragma once

#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include "mxdp/io/tensor_file.hpp"

namespace mxdp::io {

// Raw FP32 matrix: 8-byte header (rows, cols as little-endian u32), then
// row-major 32-bit floats.
struct Fp32Matrix {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<float> values;
};

inline std::string serialize_matrix(const Fp32Matrix& m) {
    if (m.values.size() != m.rows * m.cols) {
        throw std::invalid_argument("matrix shape mismatch");
    }
    std::string out;
    detail::put_u32(out, static_cast<uint32_t>(m.rows));
    detail::put_u32(out, static_cast<uint32_t>(m.cols));
    const size_t bytes = m.values.size() * 4;
    const size_t base = out.size();
    out.resize(base + bytes);
    std::memcpy(out.data() + base, m.values.data(), bytes);
    return out;
}

inline Fp32Matrix parse_matrix(const std::string& data) {
    if (data.size() < 8) {
        throw std::runtime_error("truncated FP32 matrix file");
    }
    Fp32Matrix m;
    m.rows = detail::get_u32(data, 0);
    m.cols = detail::get_u32(data, 4);
    if (data.size() != 8 + m.rows * m.cols * 4) {
        throw std::runtime_error("FP32 matrix file length mismatch");
    }
    m.values.resize(m.rows * m.cols);
    std::memcpy(m.values.data(), data.data() + 8, m.values.size() * 4);
    return m;
}

inline void save_matrix(const Fp32Matrix& m, const std::string& path) {
    detail::write_all(path, serialize_matrix(m));
}

inline Fp32Matrix load_matrix(const std::string& path) {
    return parse_matrix(detail::read_all(path));
}

}  // namespace mxdp::io
