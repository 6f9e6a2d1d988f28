#pragma once

// TRT1 files: "TRT1" | u32 order | order x u64 dims | prod(dims) x f64,
// all little-endian, values in first-index-fastest order.

#include <trstream/errors.hpp>
#include <trstream/tensor.hpp>

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

namespace trstream {

namespace detail {

static_assert(std::endian::native == std::endian::little, "TRT1 I/O assumes a little-endian host");

inline constexpr std::array<char, 4> kTrt1Magic{'T', 'R', 'T', '1'};

template <class T> void write_le(std::ostream& out, T v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }

} // namespace detail

inline void save_tensor(const TensorView& x, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write(detail::kTrt1Magic.data(), 4);
    detail::write_le(out, static_cast<std::uint32_t>(x.order()));
    for (std::size_t d : x.shape()) detail::write_le(out, static_cast<std::uint64_t>(d));
    out.write(reinterpret_cast<const char*>(x.data()), static_cast<std::streamsize>(x.size() * sizeof(double)));
    if (!out) throw std::runtime_error("write failed on " + path);
}

inline DenseTensor load_tensor(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    in.seekg(0, std::ios::end);
    const auto file_size = static_cast<std::uint64_t>(in.tellg());
    in.seekg(0);

    std::uint64_t offset = 0;
    auto need = [&](std::uint64_t bytes, const char* what) {
        if (file_size - offset < bytes)
            throw format_error(std::string("truncated TRT1 file: expected ") + std::to_string(bytes) + " bytes of " + what +
                                   ", " + std::to_string(file_size - offset) + " available",
                               offset);
    };

    need(4, "magic");
    std::array<char, 4> magic{};
    in.read(magic.data(), 4);
    if (magic != detail::kTrt1Magic) throw format_error("bad magic, not a TRT1 file", 0);
    offset = 4;

    need(4, "order");
    std::uint32_t order = 0;
    in.read(reinterpret_cast<char*>(&order), 4);
    if (order == 0) throw format_error("TRT1 order must be >= 1", offset);
    offset += 4;

    need(std::uint64_t{8} * order, "dims");
    Shape shape(order);
    std::uint64_t count = 1;
    for (std::uint32_t k = 0; k < order; ++k) {
        std::uint64_t d = 0;
        in.read(reinterpret_cast<char*>(&d), 8);
        if (d == 0) throw format_error("dimension " + std::to_string(k + 1) + " is zero", offset);
        if (count > std::numeric_limits<std::uint64_t>::max() / 8 / d)
            throw format_error("dimension product overflows", offset);
        count *= d;
        shape[k] = static_cast<std::size_t>(d);
        offset += 8;
    }

    const std::uint64_t payload = count * 8;
    if (file_size - offset != payload)
        throw format_error("payload length mismatch: header " + shape_string(shape) + " needs " + std::to_string(payload) +
                               " bytes, file has " + std::to_string(file_size - offset),
                           offset);
    DenseTensor x(shape);
    in.read(reinterpret_cast<char*>(x.data()), static_cast<std::streamsize>(payload));
    if (!in) throw format_error("read failed", offset);
    return x;
}

} // namespace trstream
