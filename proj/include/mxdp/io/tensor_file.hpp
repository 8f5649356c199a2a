#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mxdp/mx.hpp"

namespace mxdp::io {

// MXT1 container, all multi-byte fields little-endian:
//   magic "MXT1" | format code (1 byte: 0=E5M2, 1=E4M3) | block size (1)
//   | rows (u32) | cols (u32)
//   | scales: rows * (cols/block_size) bytes, row-major
//   | elements: rows * cols bytes, row-major
// File length is exactly 14 + scale count + element count.

constexpr std::array<char, 4> kTensorMagic = {'M', 'X', 'T', '1'};

namespace detail {

inline void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
}

inline uint32_t get_u32(const std::string& in, size_t pos) {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<uint32_t>(static_cast<uint8_t>(in[pos + i]))
             << (8 * i);
    }
    return v;
}

inline std::string read_all(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open file: " + path);
    }
    std::string data((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return data;
}

inline void write_all(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open file for writing: " + path);
    }
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) {
        throw std::runtime_error("write failed: " + path);
    }
}

}  // namespace detail

inline std::string serialize_tensor(const MxTensor& t) {
    if (t.block_size == 0 || t.block_size > 255) {
        throw std::invalid_argument("block size does not fit the container");
    }
    std::string out;
    out.append(kTensorMagic.data(), 4);
    out.push_back(t.format == Fp8Format::E5M2 ? 0 : 1);
    out.push_back(static_cast<char>(t.block_size));
    detail::put_u32(out, static_cast<uint32_t>(t.rows));
    detail::put_u32(out, static_cast<uint32_t>(t.cols));
    for (const ScaleE8M0& s : t.scales) {
        out.push_back(static_cast<char>(s.bits));
    }
    out.append(reinterpret_cast<const char*>(t.elements.data()),
               t.elements.size());
    return out;
}

inline MxTensor parse_tensor(const std::string& data) {
    if (data.size() < 14 || std::string_view(data.data(), 4) !=
                                std::string_view(kTensorMagic.data(), 4)) {
        throw std::runtime_error("not an MXT1 tensor file");
    }
    MxTensor t;
    const uint8_t fmt = static_cast<uint8_t>(data[4]);
    if (fmt > 1) {
        throw std::runtime_error("unknown element format code");
    }
    t.format = fmt == 0 ? Fp8Format::E5M2 : Fp8Format::E4M3;
    t.block_size = static_cast<uint8_t>(data[5]);
    t.rows = detail::get_u32(data, 6);
    t.cols = detail::get_u32(data, 10);
    if (t.block_size == 0 || t.cols % t.block_size != 0) {
        throw std::runtime_error("block misalignment in tensor file");
    }
    const size_t n_scales = t.rows * (t.cols / t.block_size);
    const size_t n_elems = t.rows * t.cols;
    if (data.size() != 14 + n_scales + n_elems) {
        throw std::runtime_error("tensor file length mismatch");
    }
    t.scales.resize(n_scales);
    for (size_t i = 0; i < n_scales; ++i) {
        t.scales[i].bits = static_cast<uint8_t>(data[14 + i]);
    }
    t.elements.assign(data.begin() + 14 + n_scales, data.end());
    return t;
}

inline void save_tensor(const MxTensor& t, const std::string& path) {
    detail::write_all(path, serialize_tensor(t));
}

inline MxTensor load_tensor(const std::string& path) {
    return parse_tensor(detail::read_all(path));
}

}  // namespace mxdp::io
