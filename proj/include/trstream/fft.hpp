#pragma once

// Unitary DFTs along one mode of a complex tensor, backed by FFTW (any length,
// O(I log I)). F(j, k) = exp(-2 pi i j k / I) / sqrt(I).

#include <trstream/tensor.hpp>

#include <fftw3.h>

#include <cmath>
#include <mutex>

namespace trstream {

enum class DftDirection { Forward, Inverse };

namespace detail {

// FFTW's planner is not re-entrant.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

} // namespace detail

/// In place: x <- x x_mode F (Forward) or x x_mode F^* (Inverse), where x has
/// `shape` and first-index-fastest layout.
inline void unitary_dft_mode(Complex* data, const Shape& shape, std::size_t mode, DftDirection dir) {
    detail::check_mode(mode, shape.size(), "unitary_dft_mode");
    const std::size_t k = mode - 1;
    const std::size_t I = shape[k];
    if (I == 1) return;
    const std::size_t P = detail::prod_before(shape, k);
    const std::size_t Q = detail::prod_after(shape, k);
    fftw_iodim dim{static_cast<int>(I), static_cast<int>(P), static_cast<int>(P)};
    fftw_iodim loops[2] = {{static_cast<int>(P), 1, 1},
                           {static_cast<int>(Q), static_cast<int>(P * I), static_cast<int>(P * I)}};
    auto* buf = reinterpret_cast<fftw_complex*>(data);
    fftw_plan plan;
    {
        std::lock_guard lock(detail::fftw_planner_mutex());
        plan = fftw_plan_guru_dft(1, &dim, 2, loops, buf, buf, dir == DftDirection::Forward ? FFTW_FORWARD : FFTW_BACKWARD,
                                  FFTW_ESTIMATE);
    }
    if (plan == nullptr) throw numeric_error("unitary_dft_mode: FFTW could not plan a length-" + std::to_string(I) + " DFT");
    fftw_execute(plan);
    {
        std::lock_guard lock(detail::fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(I));
    const std::size_t total = P * I * Q;
    for (std::size_t i = 0; i < total; ++i) data[i] *= scale;
}

inline void unitary_dft_mode(ComplexDenseTensor& x, std::size_t mode, DftDirection dir) {
    unitary_dft_mode(x.data(), x.shape(), mode, dir);
}

/// Dense unitary DFT matrix; test and small-size use only.
inline CMatrix dft_matrix(std::size_t n) {
    const double pi = std::acos(-1.0);
    CMatrix f(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
            f(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) =
                std::polar(scale, -2.0 * pi * static_cast<double>((j * k) % n) / static_cast<double>(n));
    return f;
}

} // namespace trstream
