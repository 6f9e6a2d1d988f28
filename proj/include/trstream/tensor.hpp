#pragma once

// Dense N-way tensors stored first-index-fastest, their three unfoldings,
// tensor-times-matrix products and norms.
//
// Element (i_1, ..., i_N) (1-based) lives at flat position
//   1 + sum_n (i_n - 1) * prod_{j<n} I_j,
// i.e. a generalized column-major layout. Every unfolding is an index remap
// over that single layout; an order-2 tensor is byte-for-byte an Eigen
// column-major matrix.

#include <trstream/errors.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace trstream {

using Shape = std::vector<std::size_t>;
using Complex = std::complex<double>;

template <class T> using MatrixOf = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
using Matrix = MatrixOf<double>;
using CMatrix = MatrixOf<Complex>;
using Vector = Eigen::VectorXd;

inline std::size_t element_count(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string shape_string(const Shape& shape) {
    std::string s = "(";
    for (std::size_t k = 0; k < shape.size(); ++k) {
        if (k) s += ",";
        s += std::to_string(shape[k]);
    }
    return s + ")";
}

namespace detail {

inline void check_mode(std::size_t mode, std::size_t order, const char* who) {
    if (mode < 1 || mode > order)
        throw domain_error(std::string(who) + ": mode " + std::to_string(mode) +
                           " outside [1, " + std::to_string(order) + "]");
}

// Product of dims strictly before / after the 0-based mode k.
inline std::size_t prod_before(const Shape& s, std::size_t k) {
    return std::accumulate(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(k), std::size_t{1},
                           std::multiplies<>());
}
inline std::size_t prod_after(const Shape& s, std::size_t k) {
    return std::accumulate(s.begin() + static_cast<std::ptrdiff_t>(k) + 1, s.end(), std::size_t{1},
                           std::multiplies<>());
}

} // namespace detail

template <class T> class BasicTensorView;

/// Owning dense tensor.
template <class T> class BasicTensor {
public:
    using value_type = T;

    BasicTensor() = default;

    explicit BasicTensor(Shape shape) : shape_(std::move(shape)), values_(element_count(shape_), T{}) {
        validate_shape();
    }

    BasicTensor(Shape shape, std::vector<T> values) : shape_(std::move(shape)), values_(std::move(values)) {
        validate_shape();
        if (values_.size() != element_count(shape_))
            throw domain_error("tensor of shape " + shape_string(shape_) + " needs " +
                               std::to_string(element_count(shape_)) + " values, got " +
                               std::to_string(values_.size()));
    }

    const Shape& shape() const noexcept { return shape_; }
    std::size_t order() const noexcept { return shape_.size(); }
    std::size_t size() const noexcept { return values_.size(); }

    std::span<T> values() noexcept { return values_; }
    std::span<const T> values() const noexcept { return values_; }
    T* data() noexcept { return values_.data(); }
    const T* data() const noexcept { return values_.data(); }

    /// Element access by 0-based offsets, one per mode.
    template <class... Idx> T& operator()(Idx... idx) { return values_[offset({static_cast<std::size_t>(idx)...})]; }
    template <class... Idx> const T& operator()(Idx... idx) const {
        return values_[offset({static_cast<std::size_t>(idx)...})];
    }

    T& at(std::span<const std::size_t> idx) { return values_[offset(idx)]; }
    const T& at(std::span<const std::size_t> idx) const { return values_[offset(idx)]; }

    friend bool operator==(const BasicTensor& a, const BasicTensor& b) {
        return a.shape_ == b.shape_ && a.values_ == b.values_;
    }

private:
    void validate_shape() const {
        for (std::size_t k = 0; k < shape_.size(); ++k)
            if (shape_[k] == 0) throw domain_error("tensor dims must be positive, mode " + std::to_string(k + 1) + " is 0");
    }

    std::size_t offset(std::span<const std::size_t> idx) const {
        std::size_t off = 0, stride = 1;
        for (std::size_t k = 0; k < shape_.size(); ++k) {
            off += idx[k] * stride;
            stride *= shape_[k];
        }
        return off;
    }
    std::size_t offset(std::initializer_list<std::size_t> idx) const {
        return offset(std::span<const std::size_t>(idx.begin(), idx.size()));
    }

    Shape shape_;
    std::vector<T> values_;
};

using DenseTensor = BasicTensor<double>;
using ComplexDenseTensor = BasicTensor<Complex>;

/// Non-owning read-only view: a shape over contiguous storage.
template <class T> class BasicTensorView {
public:
    BasicTensorView(const T* data, Shape shape) : data_(data), shape_(std::move(shape)) {}
    BasicTensorView(const BasicTensor<T>& t) : data_(t.data()), shape_(t.shape()) {} // NOLINT(implicit)

    const Shape& shape() const noexcept { return shape_; }
    std::size_t order() const noexcept { return shape_.size(); }
    std::size_t size() const noexcept { return element_count(shape_); }
    const T* data() const noexcept { return data_; }
    std::span<const T> values() const noexcept { return {data_, size()}; }

    BasicTensor<T> to_tensor() const { return BasicTensor<T>(shape_, std::vector<T>(data_, data_ + size())); }

private:
    const T* data_;
    Shape shape_;
};

using TensorView = BasicTensorView<double>;
using ComplexTensorView = BasicTensorView<Complex>;

/// Slices [begin, begin+count) of the last mode. Contiguous because the last
/// mode varies slowest.
template <class T>
BasicTensorView<T> temporal_slab(const BasicTensorView<T>& x, std::size_t begin, std::size_t count) {
    if (x.order() == 0) throw domain_error("temporal_slab: empty tensor");
    Shape s = x.shape();
    if (count == 0 || begin + count > s.back())
        throw domain_error("temporal_slab: range [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                           ") outside last mode of size " + std::to_string(s.back()));
    const std::size_t slice = element_count(s) / s.back();
    s.back() = count;
    return BasicTensorView<T>(x.data() + begin * slice, std::move(s));
}

/// 1-based multi-index -> 1-based flat index.
inline std::size_t linear_index(std::span<const std::size_t> multi_index, const Shape& shape) {
    if (multi_index.size() != shape.size())
        throw domain_error("linear_index: index has " + std::to_string(multi_index.size()) + " entries for order " +
                           std::to_string(shape.size()));
    std::size_t off = 0, stride = 1;
    for (std::size_t k = 0; k < shape.size(); ++k) {
        if (multi_index[k] < 1 || multi_index[k] > shape[k])
            throw domain_error("linear_index: index " + std::to_string(multi_index[k]) + " out of range for mode " +
                               std::to_string(k + 1) + " of size " + std::to_string(shape[k]));
        off += (multi_index[k] - 1) * stride;
        stride *= shape[k];
    }
    return off + 1;
}

inline std::size_t linear_index(std::initializer_list<std::size_t> multi_index, const Shape& shape) {
    return linear_index(std::span<const std::size_t>(multi_index.begin(), multi_index.size()), shape);
}

/// Which matricization: X_(n) (Classical), X_[n] (ModeN) or X_<n> (Prefix).
struct UnfoldKind {
    enum class Type { Classical, ModeN, Prefix };
    Type type;
    std::size_t mode; // 1-based

    static constexpr UnfoldKind classical(std::size_t n) { return {Type::Classical, n}; }
    static constexpr UnfoldKind mode_n(std::size_t n) { return {Type::ModeN, n}; }
    static constexpr UnfoldKind prefix(std::size_t n) { return {Type::Prefix, n}; }
};

namespace detail {

struct UnfoldMap {
    std::size_t rows = 1, cols = 1;
    std::vector<std::size_t> row_stride, col_stride;
};

inline UnfoldMap unfold_map(const Shape& shape, UnfoldKind kind) {
    const std::size_t N = shape.size();
    check_mode(kind.mode, N, "unfold");
    const std::size_t n = kind.mode - 1;
    UnfoldMap m;
    m.row_stride.assign(N, 0);
    m.col_stride.assign(N, 0);
    auto push_col = [&](std::size_t k) {
        m.col_stride[k] = m.cols;
        m.cols *= shape[k];
    };
    switch (kind.type) {
    case UnfoldKind::Type::Classical:
        m.row_stride[n] = 1;
        m.rows = shape[n];
        for (std::size_t k = 0; k < N; ++k)
            if (k != n) push_col(k);
        break;
    case UnfoldKind::Type::ModeN:
        m.row_stride[n] = 1;
        m.rows = shape[n];
        for (std::size_t k = n + 1; k < N; ++k) push_col(k);
        for (std::size_t k = 0; k < n; ++k) push_col(k);
        break;
    case UnfoldKind::Type::Prefix:
        for (std::size_t k = 0; k <= n; ++k) {
            m.row_stride[k] = m.rows;
            m.rows *= shape[k];
        }
        for (std::size_t k = n + 1; k < N; ++k) push_col(k);
        break;
    }
    return m;
}

// Visits every element in layout order, passing (flat offset, target offset
// in the rows x cols column-major matrix).
template <class F> void for_each_unfolded(const Shape& shape, const UnfoldMap& m, F&& f) {
    const std::size_t N = shape.size();
    const std::size_t total = element_count(shape);
    std::vector<std::size_t> idx(N, 0);
    std::size_t r = 0, c = 0;
    for (std::size_t flat = 0; flat < total; ++flat) {
        f(flat, r + m.rows * c);
        for (std::size_t k = 0; k < N; ++k) {
            ++idx[k];
            r += m.row_stride[k];
            c += m.col_stride[k];
            if (idx[k] < shape[k]) break;
            r -= m.row_stride[k] * shape[k];
            c -= m.col_stride[k] * shape[k];
            idx[k] = 0;
        }
    }
}

} // namespace detail

/// Matricization per `kind`, returned as an order-2 tensor.
template <class T> BasicTensor<T> unfold(const BasicTensorView<T>& x, UnfoldKind kind) {
    const auto m = detail::unfold_map(x.shape(), kind);
    BasicTensor<T> out(Shape{m.rows, m.cols});
    T* dst = out.data();
    const T* src = x.data();
    detail::for_each_unfolded(x.shape(), m, [&](std::size_t from, std::size_t to) { dst[to] = src[from]; });
    return out;
}
template <class T> BasicTensor<T> unfold(const BasicTensor<T>& x, UnfoldKind kind) {
    return unfold(BasicTensorView<T>(x), kind);
}

/// Inverse of unfold: rebuilds a tensor of `shape` from its matricization.
template <class T> BasicTensor<T> fold(const BasicTensor<T>& matrix, UnfoldKind kind, const Shape& shape) {
    const auto m = detail::unfold_map(shape, kind);
    if (matrix.order() != 2 || matrix.shape()[0] != m.rows || matrix.shape()[1] != m.cols)
        throw domain_error("fold: expected a " + std::to_string(m.rows) + "x" + std::to_string(m.cols) +
                           " matrix for shape " + shape_string(shape) + ", got " + shape_string(matrix.shape()));
    BasicTensor<T> out(shape);
    T* dst = out.data();
    const T* src = matrix.data();
    detail::for_each_unfolded(shape, m, [&](std::size_t to, std::size_t from) { dst[to] = src[from]; });
    return out;
}

/// Read-only Eigen view of an order-2 tensor.
template <class T> Eigen::Map<const MatrixOf<T>> as_matrix(const BasicTensor<T>& t) {
    if (t.order() != 2) throw domain_error("as_matrix: tensor of order " + std::to_string(t.order()));
    return {t.data(), static_cast<Eigen::Index>(t.shape()[0]), static_cast<Eigen::Index>(t.shape()[1])};
}

template <class Derived> auto to_tensor(const Eigen::MatrixBase<Derived>& m) {
    using T = typename Derived::Scalar;
    BasicTensor<T> out(Shape{static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
    Eigen::Map<MatrixOf<T>>(out.data(), m.rows(), m.cols()) = m;
    return out;
}

/// Y = X x_mode U with U of size J x I_mode.
template <class T, class U>
BasicTensor<T> ttm(const BasicTensorView<T>& x, std::size_t mode, const Eigen::MatrixBase<U>& factor) {
    detail::check_mode(mode, x.order(), "ttm");
    const std::size_t n = mode - 1;
    const Shape& s = x.shape();
    if (static_cast<std::size_t>(factor.cols()) != s[n])
        throw domain_error("ttm: factor has " + std::to_string(factor.cols()) + " columns, mode " +
                           std::to_string(mode) + " has size " + std::to_string(s[n]));
    const auto P = static_cast<Eigen::Index>(detail::prod_before(s, n));
    const auto Q = detail::prod_after(s, n);
    const auto I = static_cast<Eigen::Index>(s[n]);
    const auto J = factor.rows();
    Shape out_shape = s;
    out_shape[n] = static_cast<std::size_t>(J);
    BasicTensor<T> y(out_shape);
    const MatrixOf<T> ut = factor.transpose().template cast<T>();
    for (std::size_t q = 0; q < Q; ++q) {
        Eigen::Map<const MatrixOf<T>> xb(x.data() + q * P * I, P, I);
        Eigen::Map<MatrixOf<T>> yb(y.data() + q * P * J, P, J);
        yb.noalias() = xb * ut;
    }
    return y;
}

/// Sequential TTMs on distinct modes; (mode, matrix) pairs with 1-based modes.
template <class T>
BasicTensor<T> multi_ttm(const BasicTensorView<T>& x, const std::vector<std::pair<std::size_t, MatrixOf<T>>>& factors) {
    std::vector<bool> seen(x.order() + 1, false);
    for (const auto& [mode, u] : factors) {
        detail::check_mode(mode, x.order(), "multi_ttm");
        if (seen[mode]) throw domain_error("multi_ttm: mode " + std::to_string(mode) + " given twice");
        seen[mode] = true;
    }
    BasicTensor<T> y = x.to_tensor();
    for (const auto& [mode, u] : factors) y = ttm(BasicTensorView<T>(y), mode, u);
    return y;
}
template <class T>
BasicTensor<T> multi_ttm(const BasicTensor<T>& x, const std::vector<std::pair<std::size_t, MatrixOf<T>>>& factors) {
    return multi_ttm(BasicTensorView<T>(x), factors);
}

template <class T> double frobenius_norm(const BasicTensorView<T>& x) {
    double s = 0.0;
    for (const T& v : x.values()) {
        if constexpr (std::is_same_v<T, Complex>)
            s += std::norm(v);
        else
            s += v * v;
    }
    return std::sqrt(s);
}
template <class T> double frobenius_norm(const BasicTensor<T>& x) { return frobenius_norm(BasicTensorView<T>(x)); }

/// X_[mode] * B without materializing the unfolding. B has prod_{j != mode} I_j
/// rows in mode-n column order (i_{n+1} ... i_N i_1 ... i_{n-1}).
template <class T>
MatrixOf<T> unfolding_times(const BasicTensorView<T>& x, std::size_t mode, const Eigen::Ref<const MatrixOf<T>>& b) {
    detail::check_mode(mode, x.order(), "unfolding_times");
    const std::size_t n = mode - 1;
    const Shape& s = x.shape();
    const auto P = static_cast<Eigen::Index>(detail::prod_before(s, n));
    const auto Q = static_cast<Eigen::Index>(detail::prod_after(s, n));
    const auto I = static_cast<Eigen::Index>(s[n]);
    if (b.rows() != P * Q)
        throw domain_error("unfolding_times: right factor has " + std::to_string(b.rows()) + " rows, expected " +
                           std::to_string(P * Q));
    using Strided = Eigen::Map<const MatrixOf<T>, 0, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>>;
    MatrixOf<T> out = MatrixOf<T>::Zero(I, b.cols());
    if (P == 1) {
        out.noalias() = Eigen::Map<const MatrixOf<T>>(x.data(), I, Q) * b;
    } else if (Q == 1) {
        out.noalias() = Eigen::Map<const MatrixOf<T>>(x.data(), P, I).transpose() * b;
    } else if (const Eigen::Index chunk = (Eigen::Index{1} << 15) / (P * I); P <= Q && chunk >= 16) {
        // X(p, :, q0:q0+c) is an I x c slab; matching rows of B are the contiguous
        // block Q*p + q0. Chunks over q keep the P x I x c block cache-resident
        // while every p is visited.
        for (Eigen::Index q0 = 0; q0 < Q; q0 += chunk) {
            const Eigen::Index c = std::min(chunk, Q - q0);
            for (Eigen::Index p = 0; p < P; ++p) {
                Strided slab(x.data() + p + P * I * q0, I, c, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>(P * I, P));
                out.noalias() += slab * b.middleRows(p * Q + q0, c);
            }
        }
    } else {
        // X(p0:p0+c, :, q) is a c x I block; matching rows of B are q + Q*p. Chunks
        // over p keep the rows of B for one chunk cache-resident across every q.
        const Eigen::Index pchunk = std::max<Eigen::Index>(64, (Eigen::Index{1} << 15) / (Q * b.cols()));
        for (Eigen::Index p0 = 0; p0 < P; p0 += pchunk) {
            const Eigen::Index c = std::min(pchunk, P - p0);
            for (Eigen::Index q = 0; q < Q; ++q) {
                Strided block(x.data() + p0 + q * P * I, c, I, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>(P, 1));
                Strided rows(b.data() + q + Q * p0, c, b.cols(), Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>(b.outerStride(), Q));
                out.noalias() += block.transpose() * rows;
            }
        }
    }
    return out;
}

} // namespace trstream
