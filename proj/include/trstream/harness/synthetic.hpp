#pragma once

#include <trstream/errors.hpp>
#include <trstream/rng.hpp>
#include <trstream/tr_algebra.hpp>

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>

namespace trstream::harness {

struct SyntheticSpec {
    Shape shape;
    std::size_t rank = 1;
};

struct SyntheticData {
    DenseTensor tensor;
    TRCores truth;
};

/// Cores with i.i.d. standard normal entries (all ranks equal) and their
/// reconstruction.
inline SyntheticData generate_synthetic(const Shape& shape, std::size_t rank, std::uint64_t seed) {
    if (rank < 1) throw domain_error("generate_synthetic: rank must be >= 1");
    if (shape.size() < 2) throw domain_error("generate_synthetic: order must be >= 2");
    Rng rng(seed);
    std::vector<DenseTensor> cores;
    for (std::size_t d : shape) {
        DenseTensor g(Shape{rank, d, rank});
        for (double& v : g.values()) v = rng.normal();
        cores.push_back(std::move(g));
    }
    TRCores truth(std::move(cores));
    DenseTensor x = tr_reconstruct(truth);
    return {std::move(x), std::move(truth)};
}

inline std::size_t parse_positive(std::string_view s, std::string_view what) {
    std::size_t v = 0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size() || v == 0)
        throw config_error(std::string(what) + ": expected a positive integer, got '" + std::string(s) + "'");
    return v;
}

/// "I1xI2x...xIN:R".
inline SyntheticSpec parse_synthetic_spec(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) throw config_error("synthetic spec must look like I1xI2x...xIN:R");
    SyntheticSpec spec;
    spec.rank = parse_positive(text.substr(colon + 1), "synthetic rank");
    std::string_view dims = text.substr(0, colon);
    while (true) {
        const auto x = dims.find('x');
        spec.shape.push_back(parse_positive(dims.substr(0, x), "synthetic dimension"));
        if (x == std::string_view::npos) break;
        dims.remove_prefix(x + 1);
    }
    if (spec.shape.size() < 2) throw config_error("synthetic spec needs at least two modes");
    return spec;
}

inline Shape parse_shape(std::string_view text) {
    Shape s;
    while (true) {
        const auto x = text.find('x');
        s.push_back(parse_positive(text.substr(0, x), "shape dimension"));
        if (x == std::string_view::npos) break;
        text.remove_prefix(x + 1);
    }
    return s;
}

} // namespace trstream::harness
