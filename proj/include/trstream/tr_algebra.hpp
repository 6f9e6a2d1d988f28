#pragma once

// Tensor-ring cores and the products built on them.
//
// Core n has shape R_n x I_n x R_{n+1} with R_{N+1} = R_1; its lateral slice
// G_n(i) is the R_n x R_{n+1} matrix core(:, i, :).
//
// Column conventions (checked against the brute-force Gram oracle in tests):
//  * core_unfolding(G_n) is the classical mode-2 unfolding, I_n x R_n R_{n+1},
//    column a + R_n * b for core(a, i, b)   (R_n index fastest);
//  * subchain_matrix(cores, n) is the mode-2 unfolding of G^{!=n}, with the
//    same column order, so X_[n] ~= core_unfolding(G_n) * subchain_matrix^T;
//  * gram_chain(...) under the prefix-2 unfolding equals
//    subchain_matrix^T * subchain_matrix.

#include <trstream/tensor.hpp>

#include <functional>
#include <string>
#include <vector>

namespace trstream {

/// Ring of N >= 2 third-order cores whose rank chain closes cyclically.
class TRCores {
public:
    TRCores() = default;

    explicit TRCores(std::vector<DenseTensor> cores) : cores_(std::move(cores)) { validate(); }

    std::size_t order() const noexcept { return cores_.size(); }

    /// 1-based access.
    const DenseTensor& core(std::size_t mode) const {
        detail::check_mode(mode, order(), "TRCores::core");
        return cores_[mode - 1];
    }

    /// Replaces core `mode`. Ranks must stay the same; the mode dimension may change.
    void set_core(std::size_t mode, DenseTensor g) {
        detail::check_mode(mode, order(), "TRCores::set_core");
        const DenseTensor& old = cores_[mode - 1];
        if (g.order() != 3 || g.shape()[0] != old.shape()[0] || g.shape()[2] != old.shape()[2])
            throw domain_error("TRCores::set_core: core " + std::to_string(mode) + " must keep ranks " +
                               std::to_string(old.shape()[0]) + "x" + std::to_string(old.shape()[2]) + ", got " +
                               shape_string(g.shape()));
        cores_[mode - 1] = std::move(g);
    }

    const std::vector<DenseTensor>& cores() const noexcept { return cores_; }

    /// (R_1, ..., R_N).
    std::vector<std::size_t> ranks() const {
        std::vector<std::size_t> r;
        for (const auto& g : cores_) r.push_back(g.shape()[0]);
        return r;
    }

    /// (I_1, ..., I_N).
    Shape dims() const {
        Shape d;
        for (const auto& g : cores_) d.push_back(g.shape()[1]);
        return d;
    }

    std::size_t parameter_count() const {
        std::size_t c = 0;
        for (const auto& g : cores_) c += g.size();
        return c;
    }

    friend bool operator==(const TRCores& a, const TRCores& b) { return a.cores_ == b.cores_; }

private:
    void validate() const {
        const std::size_t N = cores_.size();
        if (N < 2) throw domain_error("TRCores: need at least 2 cores, got " + std::to_string(N));
        for (std::size_t k = 0; k < N; ++k) {
            if (cores_[k].order() != 3)
                throw domain_error("TRCores: core " + std::to_string(k + 1) + " has order " +
                                   std::to_string(cores_[k].order()));
            const std::size_t next = cores_[(k + 1) % N].shape()[0];
            if (cores_[k].shape()[2] != next)
                throw domain_error("TRCores: rank chain broken between core " + std::to_string(k + 1) + " (R=" +
                                   std::to_string(cores_[k].shape()[2]) + ") and core " +
                                   std::to_string((k + 1) % N + 1) + " (R=" + std::to_string(next) + ")");
        }
    }

    std::vector<DenseTensor> cores_;
};

/// Checks that (R_1..R_N) and (I_1..I_N) describe a valid ring.
inline void check_ranks(const std::vector<std::size_t>& ranks, const Shape& dims) {
    if (ranks.size() != dims.size())
        throw domain_error("rank vector has " + std::to_string(ranks.size()) + " entries for an order-" +
                           std::to_string(dims.size()) + " tensor");
    if (ranks.size() < 2) throw domain_error("tensor ring needs order >= 2");
    for (std::size_t k = 0; k < ranks.size(); ++k)
        if (ranks[k] == 0) throw domain_error("TR-rank R_" + std::to_string(k + 1) + " is zero");
}

inline void check_cores_match(const TRCores& cores, const std::vector<std::size_t>& ranks, const Shape& dims) {
    check_ranks(ranks, dims);
    if (cores.order() != dims.size() || cores.ranks() != ranks || cores.dims() != dims)
        throw domain_error("initial cores do not match ranks/dims: cores have ranks/dims of order " +
                           std::to_string(cores.order()));
}

// ---------------------------------------------------------------------------
// Core unfoldings

/// Classical mode-2 unfolding G_(2): I x R_n R_{n+1}, column a + R_n b.
inline Matrix core_unfolding(const DenseTensor& core) {
    const auto R0 = static_cast<Eigen::Index>(core.shape()[0]);
    const auto I = static_cast<Eigen::Index>(core.shape()[1]);
    const auto R1 = static_cast<Eigen::Index>(core.shape()[2]);
    Matrix m(I, R0 * R1);
    for (Eigen::Index b = 0; b < R1; ++b)
        for (Eigen::Index a = 0; a < R0; ++a)
            m.col(a + R0 * b) = Eigen::Map<const Vector, 0, Eigen::InnerStride<>>(core.data() + a + R0 * I * b, I,
                                                                                  Eigen::InnerStride<>(R0));
    return m;
}

/// Inverse of core_unfolding.
inline DenseTensor core_from_unfolding(const Matrix& m, std::size_t r_left, std::size_t r_right) {
    if (static_cast<std::size_t>(m.cols()) != r_left * r_right)
        throw domain_error("core_from_unfolding: " + std::to_string(m.cols()) + " columns for ranks " +
                           std::to_string(r_left) + "x" + std::to_string(r_right));
    const auto R0 = static_cast<Eigen::Index>(r_left);
    const auto I = m.rows();
    DenseTensor g(Shape{r_left, static_cast<std::size_t>(I), r_right});
    for (Eigen::Index b = 0; b < static_cast<Eigen::Index>(r_right); ++b)
        for (Eigen::Index a = 0; a < R0; ++a)
            Eigen::Map<Vector, 0, Eigen::InnerStride<>>(g.data() + a + R0 * I * b, I, Eigen::InnerStride<>(R0)) =
                m.col(a + R0 * b);
    return g;
}

/// Mode-2 unfolding of a third-order A x J x C tensor: J x (C*A), column c + C*a.
template <class T> MatrixOf<T> mode2_unfolding(const BasicTensor<T>& t) {
    const auto A = static_cast<Eigen::Index>(t.shape()[0]);
    const auto J = static_cast<Eigen::Index>(t.shape()[1]);
    const auto C = static_cast<Eigen::Index>(t.shape()[2]);
    MatrixOf<T> m(J, A * C);
    for (Eigen::Index a = 0; a < A; ++a)
        for (Eigen::Index c = 0; c < C; ++c)
            m.col(c + C * a) = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>, 0, Eigen::InnerStride<>>(
                t.data() + a + A * J * c, J, Eigen::InnerStride<>(A));
    return m;
}

/// Rows `idx` (0-based) of the lateral slices: G(:, idx, :).
template <class T> BasicTensor<T> gather_slices(const BasicTensor<T>& core, std::span<const std::size_t> idx) {
    const std::size_t R0 = core.shape()[0], I = core.shape()[1], R1 = core.shape()[2];
    const std::size_t m = idx.size();
    BasicTensor<T> out(Shape{R0, m, R1});
    for (std::size_t b = 0; b < R1; ++b)
        for (std::size_t j = 0; j < m; ++j) {
            if (idx[j] >= I)
                throw domain_error("sample index " + std::to_string(idx[j] + 1) + " outside [1, " + std::to_string(I) +
                                   "]");
            const T* src = core.data() + R0 * (idx[j] + I * b);
            std::copy(src, src + R0, out.data() + R0 * (j + m * b));
        }
    return out;
}

// ---------------------------------------------------------------------------
// Products

/// (A o B)(i..., j...) = A(i...) B(j...).
template <class T> BasicTensor<T> outer_product(const BasicTensor<T>& a, const BasicTensor<T>& b) {
    Shape s = a.shape();
    s.insert(s.end(), b.shape().begin(), b.shape().end());
    BasicTensor<T> out(s);
    const std::size_t na = a.size();
    for (std::size_t j = 0; j < b.size(); ++j)
        for (std::size_t i = 0; i < na; ++i) out.data()[i + na * j] = a.data()[i] * b.data()[j];
    return out;
}

/// C(i1,i2,r1,r2) = sum_{j,k} A(i1,j,r1,k) B(j,i2,k,r2) for A: I1xJxR1xK, B: JxI2xKxR2.
template <class T> BasicTensor<T> contracted_product(const BasicTensor<T>& a, const BasicTensor<T>& b) {
    if (a.order() != 4 || b.order() != 4) throw domain_error("contracted_product: operands must be 4th-order");
    const std::size_t I1 = a.shape()[0], J = a.shape()[1], R1 = a.shape()[2], K = a.shape()[3];
    const std::size_t I2 = b.shape()[1], R2 = b.shape()[3];
    if (b.shape()[0] != J || b.shape()[2] != K)
        throw domain_error("contracted_product: contraction dims differ, A is " + shape_string(a.shape()) + ", B is " +
                           shape_string(b.shape()));
    BasicTensor<T> c(Shape{I1, I2, R1, R2});
    for (std::size_t r2 = 0; r2 < R2; ++r2)
        for (std::size_t r1 = 0; r1 < R1; ++r1)
            for (std::size_t i2 = 0; i2 < I2; ++i2)
                for (std::size_t i1 = 0; i1 < I1; ++i1) {
                    T s{};
                    for (std::size_t k = 0; k < K; ++k)
                        for (std::size_t j = 0; j < J; ++j) s += a(i1, j, r1, k) * b(j, i2, k, r2);
                    c(i1, i2, r1, r2) = s;
                }
    return c;
}

/// Mode-2 subchain product: A (I1 x J1 x K), B (K x J2 x I2) -> I1 x J1 J2 x I2,
/// slice j1 + J1 j2 equal to A(j1) B(j2).
template <class T> BasicTensor<T> subchain_product(const BasicTensor<T>& a, const BasicTensor<T>& b) {
    if (a.order() != 3 || b.order() != 3) throw domain_error("subchain_product: operands must be 3rd-order");
    const auto I1 = static_cast<Eigen::Index>(a.shape()[0]);
    const auto J1 = static_cast<Eigen::Index>(a.shape()[1]);
    const auto K = static_cast<Eigen::Index>(a.shape()[2]);
    const auto J2 = static_cast<Eigen::Index>(b.shape()[1]);
    const auto I2 = static_cast<Eigen::Index>(b.shape()[2]);
    if (static_cast<Eigen::Index>(b.shape()[0]) != K)
        throw domain_error("subchain_product: inner dims differ, A is " + shape_string(a.shape()) + ", B is " +
                           shape_string(b.shape()));
    BasicTensor<T> out(Shape{a.shape()[0], static_cast<std::size_t>(J1 * J2), b.shape()[2]});
    // A viewed as (I1 J1) x K; each B(j2) is K x I2 with column stride K J2.
    Eigen::Map<const MatrixOf<T>> am(a.data(), I1 * J1, K);
    for (Eigen::Index j2 = 0; j2 < J2; ++j2) {
        Eigen::Map<const MatrixOf<T>, 0, Eigen::OuterStride<>> bj(b.data() + K * j2, K, I2,
                                                                  Eigen::OuterStride<>(K * J2));
        Eigen::Map<MatrixOf<T>, 0, Eigen::OuterStride<>> dst(out.data() + I1 * J1 * j2, I1 * J1, I2,
                                                             Eigen::OuterStride<>(I1 * J1 * J2));
        dst.noalias() = am * bj;
    }
    return out;
}

/// Mode-2 slices-Hadamard product: A (I1 x J x K), B (K x J x I2) -> I1 x J x I2,
/// slice j equal to A(j) B(j).
template <class T> BasicTensor<T> slices_hadamard(const BasicTensor<T>& a, const BasicTensor<T>& b) {
    if (a.order() != 3 || b.order() != 3) throw domain_error("slices_hadamard: operands must be 3rd-order");
    const std::size_t I1 = a.shape()[0], J = a.shape()[1], K = a.shape()[2];
    const std::size_t I2 = b.shape()[2];
    if (b.shape()[1] != J || b.shape()[0] != K)
        throw domain_error("slices_hadamard: A is " + shape_string(a.shape()) + ", B is " + shape_string(b.shape()));
    BasicTensor<T> out(Shape{I1, J, I2});
    const T* ap = a.data();
    const T* bp = b.data();
    T* op = out.data();
    for (std::size_t j = 0; j < J; ++j)
        for (std::size_t c = 0; c < I2; ++c)
            for (std::size_t r = 0; r < I1; ++r) {
                T s{};
                for (std::size_t k = 0; k < K; ++k) s += ap[r + I1 * (j + J * k)] * bp[k + K * (j + J * c)];
                op[r + I1 * (j + J * c)] = s;
            }
    return out;
}

/// Left fold of subchain_product over a non-empty chain of cores.
inline DenseTensor chain_product(const std::vector<std::reference_wrapper<const DenseTensor>>& chain) {
    if (chain.empty()) throw domain_error("chain_product: empty chain");
    DenseTensor acc = chain.front().get();
    for (std::size_t k = 1; k < chain.size(); ++k) acc = subchain_product(acc, chain[k].get());
    return acc;
}

/// Ring order n+1, ..., N, 1, ..., n-1 of the cores other than `mode`.
inline std::vector<std::reference_wrapper<const DenseTensor>> ring_chain(const TRCores& cores, std::size_t mode) {
    detail::check_mode(mode, cores.order(), "subchain");
    std::vector<std::reference_wrapper<const DenseTensor>> chain;
    const std::size_t N = cores.order();
    for (std::size_t k = 1; k < N; ++k) chain.emplace_back(cores.core((mode - 1 + k) % N + 1));
    return chain;
}

/// Subchain tensor G^{!=n}: R_{n+1} x prod_{j!=n} I_j x R_n.
inline DenseTensor subchain(const TRCores& cores, std::size_t mode) { return chain_product(ring_chain(cores, mode)); }

/// Mode-2 unfolding of G^{!=n}: rows in mode-n column order of X_[n].
inline Matrix subchain_matrix(const TRCores& cores, std::size_t mode) { return mode2_unfolding(subchain(cores, mode)); }

// ---------------------------------------------------------------------------
// Gram tensors

/// Z = sum_i G(i)^T o G(i)^T, shape R_{n+1} x R_n x R_{n+1} x R_n.
inline DenseTensor gram_core(const DenseTensor& core) {
    if (core.order() != 3) throw domain_error("gram_core: core must be 3rd-order");
    const std::size_t R0 = core.shape()[0], R1 = core.shape()[2];
    const Matrix m = mode2_unfolding(core); // I x (R1 R0), column a + R1 b
    DenseTensor z(Shape{R1, R0, R1, R0});
    Eigen::Map<Matrix>(z.data(), static_cast<Eigen::Index>(R1 * R0), static_cast<Eigen::Index>(R1 * R0)).noalias() =
        m.transpose() * m;
    return z;
}

/// Left fold of contracted_product over a non-empty chain of Gram tensors.
inline DenseTensor contract_chain(const std::vector<std::reference_wrapper<const DenseTensor>>& chain) {
    if (chain.empty()) throw domain_error("gram_chain: empty chain");
    DenseTensor acc = chain.front().get();
    for (std::size_t k = 1; k < chain.size(); ++k) {
        const DenseTensor& next = chain[k].get();
        if (next.order() != 4 || acc.shape()[1] != next.shape()[0] || acc.shape()[3] != next.shape()[2])
            throw domain_error("gram_chain: rank chain mismatch between " + shape_string(acc.shape()) + " and " +
                               shape_string(next.shape()));
        acc = contracted_product(acc, next);
    }
    return acc;
}

/// H^{!=n} = Z_{n-1} x ... x Z_1 x Z_N x ... x Z_{n+1}; `grams` holds Z_1..Z_N
/// (entry n is ignored).
inline DenseTensor gram_chain(const std::vector<DenseTensor>& grams, std::size_t mode) {
    const std::size_t N = grams.size();
    detail::check_mode(mode, N, "gram_chain");
    std::vector<std::reference_wrapper<const DenseTensor>> chain;
    for (std::size_t k = 1; k < N; ++k) chain.emplace_back(grams[(mode - 1 + N - k) % N]);
    return contract_chain(chain);
}

/// Prefix-2 unfolding of a Gram tensor as a square matrix.
inline Matrix gram_matrix(const DenseTensor& h) {
    const auto n = static_cast<Eigen::Index>(h.shape()[0] * h.shape()[1]);
    const auto m = static_cast<Eigen::Index>(h.shape()[2] * h.shape()[3]);
    return Eigen::Map<const Matrix>(h.data(), n, m);
}

// ---------------------------------------------------------------------------
// Reconstruction and error

/// X(i_1..i_N) = Trace(G_1(i_1) ... G_N(i_N)).
inline DenseTensor tr_reconstruct(const TRCores& cores) {
    const std::size_t N = cores.order();
    const Matrix s = subchain_matrix(cores, N);         // prod_{j<N} I_j x R_N R_1
    const Matrix gn = core_unfolding(cores.core(N));    // I_N x R_N R_1
    DenseTensor x(cores.dims());
    Eigen::Map<Matrix>(x.data(), s.rows(), gn.rows()).noalias() = s * gn.transpose();
    return x;
}

/// ||X - TR(cores)||_F / ||X||_F, evaluated in temporal chunks so the full
/// reconstruction is never held at once.
inline double relative_error(const TensorView& x, const TRCores& cores) {
    if (x.shape() != cores.dims())
        throw domain_error("relative_error: tensor shape " + shape_string(x.shape()) + " vs cores " +
                           shape_string(cores.dims()));
    const double xnorm = frobenius_norm(x);
    if (xnorm == 0.0) throw domain_error("relative_error: tensor has zero norm");
    const std::size_t N = cores.order();
    const Matrix s = subchain_matrix(cores, N);
    const Matrix gn = core_unfolding(cores.core(N));
    const Eigen::Index rows = s.rows();
    const Eigen::Index T = gn.rows();
    Eigen::Map<const Matrix> xm(x.data(), rows, T);
    const Eigen::Index chunk = std::max<Eigen::Index>(1, (Eigen::Index{1} << 22) / std::max<Eigen::Index>(rows, 1));
    double sq = 0.0;
    for (Eigen::Index t0 = 0; t0 < T; t0 += chunk) {
        const Eigen::Index c = std::min(chunk, T - t0);
        Matrix diff = xm.middleCols(t0, c);
        diff.noalias() -= s * gn.middleRows(t0, c).transpose();
        sq += diff.squaredNorm();
    }
    return std::sqrt(sq) / xnorm;
}
inline double relative_error(const DenseTensor& x, const TRCores& cores) { return relative_error(TensorView(x), cores); }

} // namespace trstream
