#pragma once

// Sketched TR-ALS subproblems: uniform and leverage-based row sampling of the
// subchain (sampled directly in the cores) and the Kronecker SRFT (per-mode
// sign flips and unitary DFTs followed by uniform sampling).
//
// Sampling rescaling factors are omitted: every sketched solve is P Q^+ and a
// common scale on the sampled rows cancels between P and Q. The randomized
// solvers therefore only see which rows were drawn, not with what weight.

#include <trstream/batch.hpp>
#include <trstream/fft.hpp>
#include <trstream/linalg.hpp>
#include <trstream/rng.hpp>
#include <trstream/tr_algebra.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

namespace trstream {

enum class SketchKind { Uniform, Leverage, Ksrft };

inline const char* to_string(SketchKind k) {
    switch (k) {
    case SketchKind::Uniform: return "uniform";
    case SketchKind::Leverage: return "leverage";
    case SketchKind::Ksrft: return "ksrft";
    }
    return "?";
}

struct Sketch {
    SketchKind kind = SketchKind::Uniform;
    std::size_t size = 1; // m
    /// Enumerate every index combination exactly once instead of drawing
    /// `size` rows. The sketched subproblems then coincide with the exact ones;
    /// meant for verification on small tensors.
    bool exhaustive = false;
};

/// m x N table of 0-based mode indices stored column-wise; a column may be
/// empty for the mode being solved.
struct SampleIndexTable {
    std::size_t rows = 0;
    std::vector<std::vector<std::size_t>> columns;
};

namespace detail {

inline void check_sketch(const Sketch& s) {
    if (!s.exhaustive && s.size < 1) throw domain_error("sketch size m must be >= 1");
}

} // namespace detail

// ---------------------------------------------------------------------------
// Index drawing

/// Leverage-score distribution of a core over its mode-2 index:
/// p(i) = l_i(G_(2)) / rank(G_(2)).
inline Vector core_distribution(const DenseTensor& core, double rcond = kDefaultPinvRcond) {
    const Matrix g = core_unfolding(core);
    const Vector l = leverage_scores(g, rcond);
    const double total = l.sum();
    if (!(total > 0.0)) throw domain_error("core_distribution: core is numerically zero");
    return l / total;
}

/// m i.i.d. 0-based draws from [0, dim), uniform when `p` is empty.
inline std::vector<std::size_t> sample_column(std::size_t dim, const std::optional<Vector>& p, std::size_t m, Rng& rng) {
    if (dim == 0) throw domain_error("sample_column: empty index range");
    std::vector<std::size_t> out(m);
    if (!p) {
        for (auto& v : out) v = rng.uniform_index(dim);
        return out;
    }
    if (static_cast<std::size_t>(p->size()) != dim)
        throw domain_error("sample_column: distribution has " + std::to_string(p->size()) + " entries, range is " +
                           std::to_string(dim));
    double mass = 0.0;
    for (Eigen::Index i = 0; i < p->size(); ++i) {
        const double v = (*p)(i);
        if (!std::isfinite(v) || v < 0.0) throw domain_error("sample_column: negative or non-finite probability");
        mass += v;
    }
    if (!(mass > 0.0)) throw domain_error("sample_column: distribution has no mass");
    std::discrete_distribution<std::size_t> dist(p->data(), p->data() + p->size());
    for (auto& v : out) v = dist(rng.engine());
    return out;
}

/// Draws m rows for every mode except `skip` (1-based; 0 keeps all modes).
/// `dists[k]` empty means uniform over dims[k].
inline SampleIndexTable sample_indices(const Shape& dims, const std::vector<std::optional<Vector>>& dists, std::size_t m,
                                       Rng& rng, std::size_t skip = 0) {
    if (m < 1) throw domain_error("sample_indices: m must be >= 1");
    if (dists.size() != dims.size()) throw domain_error("sample_indices: one distribution slot per mode required");
    SampleIndexTable t{m, std::vector<std::vector<std::size_t>>(dims.size())};
    for (std::size_t k = 0; k < dims.size(); ++k)
        if (k + 1 != skip) t.columns[k] = sample_column(dims[k], dists[k], m, rng);
    return t;
}

/// Every combination of the modes other than `skip` exactly once (first
/// listed mode fastest).
inline SampleIndexTable exhaustive_table(const Shape& dims, std::size_t skip = 0) {
    std::size_t rows = 1;
    for (std::size_t k = 0; k < dims.size(); ++k)
        if (k + 1 != skip) rows *= dims[k];
    SampleIndexTable t{rows, std::vector<std::vector<std::size_t>>(dims.size())};
    std::size_t stride = 1;
    for (std::size_t k = 0; k < dims.size(); ++k) {
        if (k + 1 == skip) continue;
        auto& col = t.columns[k];
        col.resize(rows);
        for (std::size_t j = 0; j < rows; ++j) col[j] = (j / stride) % dims[k];
        stride *= dims[k];
    }
    return t;
}

// ---------------------------------------------------------------------------
// Sampled subchain and input tensors

template <class T> struct SampledSubproblem {
    MatrixOf<T> coefficients; // m x R_n R_{n+1}: mode-2 unfolding of the sampled subchain
    MatrixOf<T> fibers;       // I_n x m
};

/// Slices-Hadamard chain of already-gathered cores in ring order n+1..N,1..n-1.
/// Returns R_{n+1} x m x R_n.
template <class T>
BasicTensor<T> sampled_chain(const std::vector<BasicTensor<T>>& gathered, std::size_t mode) {
    const std::size_t N = gathered.size();
    detail::check_mode(mode, N, "sampled_chain");
    BasicTensor<T> acc = gathered[mode % N];
    for (std::size_t k = 2; k < N; ++k) acc = slices_hadamard(acc, gathered[(mode - 1 + k) % N]);
    return acc;
}

/// Mode-n fibers of x at the table rows: I_n x m.
template <class T>
MatrixOf<T> gather_fibers(const BasicTensorView<T>& x, std::size_t mode, const SampleIndexTable& table) {
    const std::size_t N = x.order();
    detail::check_mode(mode, N, "gather_fibers");
    const Shape& s = x.shape();
    std::vector<std::size_t> stride(N);
    std::size_t acc = 1;
    for (std::size_t k = 0; k < N; ++k) {
        stride[k] = acc;
        acc *= s[k];
    }
    for (std::size_t k = 0; k < N; ++k) {
        if (k + 1 == mode) continue;
        if (table.columns[k].size() != table.rows) throw domain_error("gather_fibers: table column size mismatch");
        for (std::size_t v : table.columns[k])
            if (v >= s[k])
                throw domain_error("sample index " + std::to_string(v + 1) + " outside [1, " + std::to_string(s[k]) +
                                   "] on mode " + std::to_string(k + 1));
    }
    const std::size_t I = s[mode - 1], step = stride[mode - 1];
    MatrixOf<T> out(static_cast<Eigen::Index>(I), static_cast<Eigen::Index>(table.rows));
    for (std::size_t j = 0; j < table.rows; ++j) {
        std::size_t base = 0;
        for (std::size_t k = 0; k < N; ++k)
            if (k + 1 != mode) base += table.columns[k][j] * stride[k];
        for (std::size_t i = 0; i < I; ++i)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = x.data()[base + i * step];
    }
    return out;
}

/// Gathers the sampled slices of every core but `mode` (which stays empty).
template <class T>
std::vector<BasicTensor<T>> gather_all(const std::vector<BasicTensor<T>>& cores, std::size_t mode,
                                       const SampleIndexTable& table) {
    std::vector<BasicTensor<T>> out(cores.size());
    for (std::size_t k = 0; k < cores.size(); ++k)
        if (k + 1 != mode) out[k] = gather_slices(cores[k], std::span<const std::size_t>(table.columns[k]));
    return out;
}

/// SSIT: sampled subchain (mode-2 unfolded) and sampled mode-n fibers.
inline SampledSubproblem<double> ssit(const TRCores& cores, const TensorView& x, std::size_t mode,
                                      const SampleIndexTable& table) {
    if (x.shape() != cores.dims())
        throw domain_error("ssit: tensor " + shape_string(x.shape()) + " vs cores " + shape_string(cores.dims()));
    const auto gathered = gather_all(cores.cores(), mode, table);
    return {mode2_unfolding(sampled_chain(gathered, mode)), gather_fibers(x, mode, table)};
}

// ---------------------------------------------------------------------------
// KSRFT

/// Per-mode Rademacher sign vectors.
using SignFlips = std::vector<std::vector<double>>;

inline std::vector<double> draw_signs(std::size_t dim, Rng& rng) {
    std::vector<double> d(dim);
    for (double& v : d) v = rng.coin() ? 1.0 : -1.0;
    return d;
}

inline SignFlips draw_sign_flips(const Shape& dims, Rng& rng) {
    SignFlips s;
    for (std::size_t d : dims) s.push_back(draw_signs(d, rng));
    return s;
}

/// G x_2 (F D).
inline ComplexDenseTensor mix_core(const DenseTensor& core, const std::vector<double>& signs) {
    const std::size_t R0 = core.shape()[0], I = core.shape()[1], R1 = core.shape()[2];
    if (signs.size() != I)
        throw domain_error("mix_core: " + std::to_string(signs.size()) + " signs for mode size " + std::to_string(I));
    ComplexDenseTensor out(core.shape());
    for (std::size_t b = 0; b < R1; ++b)
        for (std::size_t i = 0; i < I; ++i)
            for (std::size_t a = 0; a < R0; ++a) out(a, i, b) = signs[i] * core(a, i, b);
    unitary_dft_mode(out, 2, DftDirection::Forward);
    return out;
}

/// Mixes the cores of the listed 1-based `modes`; the others are returned as
/// empty tensors.
inline std::vector<ComplexDenseTensor> ksrft_mix_cores(const TRCores& cores, const SignFlips& signs,
                                                       const std::vector<std::size_t>& modes) {
    if (signs.size() != cores.order()) throw domain_error("ksrft_mix_cores: one sign vector per mode required");
    std::vector<ComplexDenseTensor> out(cores.order());
    for (std::size_t n : modes) {
        detail::check_mode(n, cores.order(), "ksrft_mix_cores");
        out[n - 1] = mix_core(cores.core(n), signs[n - 1]);
    }
    return out;
}

/// X x_1 (F_1 D_1) ... x_N (F_N D_N).
inline ComplexDenseTensor mix_tensor(const TensorView& x, const SignFlips& signs) {
    const Shape& s = x.shape();
    if (signs.size() != s.size()) throw domain_error("mix_tensor: one sign vector per mode required");
    for (std::size_t k = 0; k < s.size(); ++k)
        if (signs[k].size() != s[k]) throw domain_error("mix_tensor: sign vector length differs on mode " + std::to_string(k + 1));
    ComplexDenseTensor out(s);
    const std::size_t total = x.size();
    std::vector<std::size_t> idx(s.size(), 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
        double sign = 1.0;
        for (std::size_t k = 0; k < s.size(); ++k) sign *= signs[k][idx[k]];
        out.data()[flat] = sign * x.data()[flat];
        for (std::size_t k = 0; k < s.size(); ++k) {
            if (++idx[k] < s[k]) break;
            idx[k] = 0;
        }
    }
    for (std::size_t k = 1; k <= s.size(); ++k) unitary_dft_mode(out, k, DftDirection::Forward);
    return out;
}

/// X_S <- D F^* X_S on the rows of an I x m sampled unfolding.
inline void unmix_rows(CMatrix& xs, const std::vector<double>& signs) {
    if (static_cast<std::size_t>(xs.rows()) != signs.size()) throw domain_error("unmix_rows: sign vector length differs");
    unitary_dft_mode(xs.data(), Shape{static_cast<std::size_t>(xs.rows()), static_cast<std::size_t>(xs.cols())}, 1,
                     DftDirection::Inverse);
    for (Eigen::Index i = 0; i < xs.rows(); ++i) xs.row(i) *= signs[static_cast<std::size_t>(i)];
}

/// Sketched subproblem for `mode` from an already mixed tensor and mixed
/// cores (entry `mode` unused); the fibers are unmixed on mode n.
inline SampledSubproblem<Complex> ksrft_sketch_mixed(const std::vector<ComplexDenseTensor>& mixed_cores,
                                                     const ComplexDenseTensor& mixed_x, std::size_t mode,
                                                     const std::vector<double>& mode_signs,
                                                     const SampleIndexTable& table) {
    const auto gathered = gather_all(mixed_cores, mode, table);
    SampledSubproblem<Complex> out{mode2_unfolding(sampled_chain(gathered, mode)),
                                   gather_fibers(ComplexTensorView(mixed_x), mode, table)};
    unmix_rows(out.fibers, mode_signs);
    return out;
}

/// Full KSRFT pipeline for one mode: mix X on every mode, mix the cores other
/// than `mode`, sample uniformly at `table`, unmix mode n.
inline SampledSubproblem<Complex> ksrft_sketch(const TRCores& cores, const TensorView& x, std::size_t mode,
                                               const SignFlips& signs, const SampleIndexTable& table) {
    if (x.shape() != cores.dims())
        throw domain_error("ksrft_sketch: tensor " + shape_string(x.shape()) + " vs cores " + shape_string(cores.dims()));
    std::vector<std::size_t> others;
    for (std::size_t k = 1; k <= cores.order(); ++k)
        if (k != mode) others.push_back(k);
    return ksrft_sketch_mixed(ksrft_mix_cores(cores, signs, others), mix_tensor(x, signs), mode, signs[mode - 1], table);
}

/// Real normal-equation pieces of a complex sketch: P = Re(X_S conj(G_S)),
/// Q = Re(G_S^T conj(G_S)).
inline std::pair<Matrix, Matrix> ksrft_normal_terms(const SampledSubproblem<Complex>& s) {
    const CMatrix gc = s.coefficients.conjugate();
    return {(s.fibers * gc).real(), (s.coefficients.transpose() * gc).real()};
}

// ---------------------------------------------------------------------------
// Sketch-size guidance (advisory only, never enforced)

/// Uniform-sampling bound for (1+eps)-accurate subproblems with probability
/// 1-delta; gamma >= 1 bounds the coherence of the subchain unfolding.
inline double uniform_sketch_size(std::size_t r_n, std::size_t r_n1, double eps, double delta, double gamma) {
    if (!(eps > 0 && eps < 1 && delta > 0 && delta < 1 && gamma >= 1))
        throw domain_error("uniform_sketch_size: need eps, delta in (0,1) and gamma >= 1");
    const double r = static_cast<double>(r_n * r_n1);
    return (2.0 * gamma * r / eps) *
           std::max(48.0 / eps * std::log(96.0 * gamma * r / (eps * eps * std::sqrt(delta))), 1.0 / delta);
}

/// Leverage-sampling bound for mode n (1-based) with core-product distributions.
inline double leverage_sketch_size(const std::vector<std::size_t>& ranks, std::size_t mode, double eps, double delta) {
    detail::check_mode(mode, ranks.size(), "leverage_sketch_size");
    if (!(eps > 0 && eps < 1 && delta > 0 && delta < 1))
        throw domain_error("leverage_sketch_size: need eps, delta in (0,1)");
    double prod = 1.0;
    for (std::size_t r : ranks) prod *= static_cast<double>(r * r);
    const double rr = static_cast<double>(ranks[mode - 1] * ranks[mode % ranks.size()]);
    const double c = 16.0 / (3.0 * (std::sqrt(2.0) - 1.0) * (std::sqrt(2.0) - 1.0));
    return prod * std::max(c * std::log(4.0 * rr / delta), 4.0 / (eps * delta));
}

// ---------------------------------------------------------------------------
// Randomized batch solvers

/// TR-ALS with every subproblem replaced by its sampled counterpart
/// (uniform or leverage). Leverage distributions are refreshed for each core
/// right after it is updated.
inline SolveResult tr_als_sampled(const TensorView& x, const std::vector<std::size_t>& ranks, const TRCores& init,
                                  const Sketch& sketch, const SolveOptions& opts = {}) {
    detail::check_options(opts);
    detail::check_sketch(sketch);
    if (sketch.kind == SketchKind::Ksrft) throw domain_error("tr_als_sampled: use tr_ksrft_als for KSRFT sketches");
    check_cores_match(init, ranks, x.shape());
    const std::size_t N = x.order();
    const Shape& dims = x.shape();
    Rng rng(opts.seed);
    SolveResult res{init, {}};
    std::vector<std::optional<Vector>> dists(N);
    if (sketch.kind == SketchKind::Leverage)
        for (std::size_t k = 1; k <= N; ++k) dists[k - 1] = core_distribution(res.cores.core(k), opts.pinv_rcond);
    for (std::size_t sweep = 1; sweep <= opts.max_iters; ++sweep) {
        for (std::size_t n = 1; n <= N; ++n) {
            const SampleIndexTable table = sketch.exhaustive ? exhaustive_table(dims, n)
                                                             : sample_indices(dims, dists, sketch.size, rng, n);
            const auto sub = ssit(res.cores, x, n, table);
            const Matrix q = sub.coefficients.transpose() * sub.coefficients;
            const Matrix p = sub.fibers * sub.coefficients;
            res.cores.set_core(n, core_from_unfolding(solve_normal(q, p, opts.pinv_rcond), ranks[n - 1], ranks[n % N]));
            if (sketch.kind == SketchKind::Leverage) dists[n - 1] = core_distribution(res.cores.core(n), opts.pinv_rcond);
            if (opts.on_subproblem) opts.on_subproblem(sweep, n, res.cores);
        }
        res.errors.push_back(relative_error(x, res.cores));
        if (detail::converged(res.errors, opts.tol)) break;
    }
    return res;
}

/// TR-ALS with KSRFT-sketched subproblems. The sign flips are drawn once per
/// solve; the row sample is redrawn for every subproblem.
inline SolveResult tr_ksrft_als(const TensorView& x, const std::vector<std::size_t>& ranks, const TRCores& init,
                                const Sketch& sketch, const SolveOptions& opts = {}) {
    detail::check_options(opts);
    detail::check_sketch(sketch);
    check_cores_match(init, ranks, x.shape());
    const std::size_t N = x.order();
    const Shape& dims = x.shape();
    Rng rng(opts.seed);
    const SignFlips signs = draw_sign_flips(dims, rng);
    const ComplexDenseTensor mixed_x = mix_tensor(x, signs);
    std::vector<std::size_t> all(N);
    for (std::size_t k = 0; k < N; ++k) all[k] = k + 1;
    SolveResult res{init, {}};
    auto mixed = ksrft_mix_cores(res.cores, signs, all);
    const std::vector<std::optional<Vector>> uniform(N);
    for (std::size_t sweep = 1; sweep <= opts.max_iters; ++sweep) {
        for (std::size_t n = 1; n <= N; ++n) {
            const SampleIndexTable table = sketch.exhaustive ? exhaustive_table(dims, n)
                                                             : sample_indices(dims, uniform, sketch.size, rng, n);
            const auto [p, q] = ksrft_normal_terms(ksrft_sketch_mixed(mixed, mixed_x, n, signs[n - 1], table));
            res.cores.set_core(n, core_from_unfolding(solve_normal(q, p, opts.pinv_rcond), ranks[n - 1], ranks[n % N]));
            mixed[n - 1] = mix_core(res.cores.core(n), signs[n - 1]);
            if (opts.on_subproblem) opts.on_subproblem(sweep, n, res.cores);
        }
        res.errors.push_back(relative_error(x, res.cores));
        if (detail::converged(res.errors, opts.tol)) break;
    }
    return res;
}

} // namespace trstream
