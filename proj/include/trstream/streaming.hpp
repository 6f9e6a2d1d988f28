#pragma once

// Streaming TR trackers. The last mode is temporal and grows by one block per
// update. Each tracker keeps, per non-temporal mode n, the complementary
// matrices P_n (I_n x R_n R_{n+1}) and Q_n (R_n R_{n+1} square) summarising
// everything seen so far, so an update touches only the new block:
//
//   temporal:      G_N^new = argmin ||X_new[N] - G_N^new G^{!=N}_[2]^T||
//   non-temporal:  P_n += X_new[n] S_n,  Q_n += S_n^T S_n,  G_n(2) = P_n Q_n^+
//
// where S_n is the subchain built with G_N^new in the temporal slot.
// STR forms S_n exactly (Q_n from the Gram tensors); rSTR replaces it by a
// sketch (uniform, leverage or KSRFT).

#include <trstream/batch.hpp>
#include <trstream/sketch.hpp>

#include <optional>

namespace trstream {

struct StreamState {
    TRCores cores;               // temporal core has t_processed rows
    std::size_t t_processed = 0; // length of the temporal mode
    double pinv_rcond = kDefaultPinvRcond;

    std::vector<Matrix> p, q; // N-1 each (STR, rSTR-U/L)

    // STR: Z_1..Z_N.
    std::vector<DenseTensor> grams;

    // rSTR
    std::optional<Sketch> sketch;
    SampleIndexTable idxs;                  // shared m x N table (not used when exhaustive)
    std::vector<std::optional<Vector>> dists; // leverage distributions per mode
    std::vector<DenseTensor> sampled;         // (G_k)_S cached per mode

    // rSTR-K
    std::vector<CMatrix> p_mixed, q_mixed;
    SignFlips signs;                                  // operators of the current step
    std::vector<ComplexDenseTensor> sampled_mixed;    // (G_k x_2 F_k D_k)_S per mode

    std::size_t order() const noexcept { return cores.order(); }
    bool randomized() const noexcept { return sketch.has_value(); }
};

namespace detail {

inline Shape block_dims(const StreamState& st, std::size_t t) {
    Shape s = st.cores.dims();
    s.back() = t;
    return s;
}

inline void check_block(const StreamState& st, const TensorView& x) {
    if (x.order() != st.order() || x.shape().back() < 1 || x.shape() != block_dims(st, x.shape().back()))
        throw domain_error("stream block shape " + shape_string(x.shape()) + " does not extend " +
                           shape_string(st.cores.dims()));
}

inline void check_init(const TensorView& x, const std::vector<std::size_t>& ranks, const TRCores& init) {
    if (x.order() < 2) throw domain_error("streaming needs a tensor of order >= 2");
    if (x.shape().back() < 1) throw domain_error("initial tensor has an empty temporal mode");
    check_cores_match(init, ranks, x.shape());
}

inline void append_temporal(StreamState& st, const Matrix& fresh) {
    const std::size_t N = st.order();
    const Matrix old = core_unfolding(st.cores.core(N));
    Matrix all(old.rows() + fresh.rows(), old.cols());
    all << old, fresh;
    const auto r = st.cores.ranks();
    st.cores.set_core(N, core_from_unfolding(all, r[N - 1], r[0]));
}

inline Matrix gram_of(const Matrix& s) {
    Matrix q = Matrix::Zero(s.cols(), s.cols());
    q.selfadjointView<Eigen::Lower>().rankUpdate(s.transpose());
    q.triangularView<Eigen::StrictlyUpper>() = q.transpose();
    return q;
}

} // namespace detail

// ---------------------------------------------------------------------------
// STR

inline StreamState str_init(const TensorView& x_init, const std::vector<std::size_t>& ranks, const TRCores& init_cores,
                            double pinv_rcond = kDefaultPinvRcond) {
    detail::check_init(x_init, ranks, init_cores);
    const std::size_t N = x_init.order();
    StreamState st;
    st.cores = init_cores;
    st.t_processed = x_init.shape().back();
    st.pinv_rcond = pinv_rcond;
    for (std::size_t n = 1; n <= N; ++n) st.grams.push_back(gram_core(init_cores.core(n)));
    for (std::size_t n = 1; n < N; ++n) {
        st.p.push_back(unfolding_times<double>(x_init, n, subchain_matrix(init_cores, n)));
        st.q.push_back(gram_matrix(gram_chain(st.grams, n)));
    }
    return st;
}

inline void str_update(StreamState& st, const TensorView& x_new) {
    if (st.randomized()) throw domain_error("str_update: state was initialized for rSTR");
    detail::check_block(st, x_new);
    const std::size_t N = st.order();
    const std::size_t t_new = x_new.shape().back();
    const auto r = st.cores.ranks();

    // Temporal mode: only the fibers of the new block enter.
    const Matrix s_t = subchain_matrix(st.cores, N);
    Eigen::Map<const Matrix> xt(x_new.data(), s_t.rows(), static_cast<Eigen::Index>(t_new));
    const Matrix h = gram_matrix(gram_chain(st.grams, N));
    const Matrix g_new = solve_normal(h, xt.transpose() * s_t, st.pinv_rcond);
    const DenseTensor core_new = core_from_unfolding(g_new, r[N - 1], r[0]);
    detail::append_temporal(st, g_new);
    st.grams[N - 1] = gram_core(st.cores.core(N));

    // Non-temporal modes against the new temporal block only.
    TRCores window = st.cores;
    window.set_core(N, core_new);
    std::vector<DenseTensor> grams_new = st.grams;
    grams_new[N - 1] = gram_core(core_new);
    for (std::size_t n = 1; n < N; ++n) {
        st.p[n - 1] += unfolding_times<double>(x_new, n, subchain_matrix(window, n));
        st.q[n - 1] += gram_matrix(gram_chain(grams_new, n));
        DenseTensor g = core_from_unfolding(solve_normal(st.q[n - 1], st.p[n - 1], st.pinv_rcond), r[n - 1], r[n % N]);
        grams_new[n - 1] = gram_core(g);
        st.grams[n - 1] = grams_new[n - 1];
        window.set_core(n, g);
        st.cores.set_core(n, std::move(g));
    }
    st.t_processed += t_new;
}

// ---------------------------------------------------------------------------
// rSTR

namespace detail {

inline std::size_t sketch_rows(const StreamState& st) { return st.idxs.rows; }

/// Draws column `k` (0-based) of the shared table over [0, dim) and refreshes
/// the sampled cache of `core`.
inline void redraw_mode(StreamState& st, std::size_t k, const DenseTensor& core, Rng& rng) {
    const std::size_t m = st.sketch->size;
    if (st.sketch->kind == SketchKind::Leverage) st.dists[k] = core_distribution(core, st.pinv_rcond);
    st.idxs.columns[k] = sample_column(core.shape()[1], st.dists[k], m, rng);
    st.sampled[k] = gather_slices(core, std::span<const std::size_t>(st.idxs.columns[k]));
}

/// Sampled subproblem for `mode` on block x. The temporal slot uses
/// `temporal` (exhaustive) or the cache (shared table).
inline SampledSubproblem<double> sampled_mode(const StreamState& st, std::size_t mode, const TensorView& x,
                                              const DenseTensor& temporal) {
    const std::size_t N = st.order();
    if (st.sketch->exhaustive) {
        const SampleIndexTable table = exhaustive_table(x.shape(), mode);
        std::vector<DenseTensor> cores = st.cores.cores();
        cores[N - 1] = temporal;
        const auto gathered = gather_all(cores, mode, table);
        return {mode2_unfolding(sampled_chain(gathered, mode)), gather_fibers(x, mode, table)};
    }
    return {mode2_unfolding(sampled_chain(st.sampled, mode)), gather_fibers(x, mode, st.idxs)};
}

inline SampledSubproblem<Complex> mixed_mode(const StreamState& st, std::size_t mode, const ComplexDenseTensor& x,
                                             const std::vector<ComplexDenseTensor>& mixed_cores) {
    if (st.sketch->exhaustive)
        return ksrft_sketch_mixed(mixed_cores, x, mode, st.signs[mode - 1], exhaustive_table(x.shape(), mode));
    SampledSubproblem<Complex> out{mode2_unfolding(sampled_chain(st.sampled_mixed, mode)),
                                   gather_fibers(ComplexTensorView(x), mode, st.idxs)};
    unmix_rows(out.fibers, st.signs[mode - 1]);
    return out;
}

inline void check_sketch_size(const Sketch& s, const std::vector<std::size_t>& ranks, const Shape& dims) {
    check_sketch(s);
    std::size_t rows = s.size;
    if (s.exhaustive) {
        rows = 1;
        for (std::size_t k = 0; k + 1 < dims.size(); ++k) rows *= dims[k];
    }
    const std::size_t need = ranks.back() * ranks.front();
    if (rows < need)
        throw domain_error("rSTR: sketch size " + std::to_string(rows) + " is below R_N R_1 = " + std::to_string(need) +
                           "; the temporal least-squares problem would be underdetermined");
}

inline void rstr_init_real(StreamState& st, const TensorView& x, Rng& rng) {
    const std::size_t N = st.order();
    if (!st.sketch->exhaustive)
        for (std::size_t k = 0; k < N; ++k) redraw_mode(st, k, st.cores.core(k + 1), rng);
    for (std::size_t n = 1; n < N; ++n) {
        const auto sub = sampled_mode(st, n, x, st.cores.core(N));
        st.p.push_back(sub.fibers * sub.coefficients);
        st.q.push_back(gram_of(sub.coefficients));
    }
}

inline void rstr_init_ksrft(StreamState& st, const TensorView& x, Rng& rng) {
    const std::size_t N = st.order();
    st.signs = draw_sign_flips(x.shape(), rng);
    std::vector<std::size_t> all(N);
    for (std::size_t k = 0; k < N; ++k) all[k] = k + 1;
    const auto mixed = ksrft_mix_cores(st.cores, st.signs, all);
    const ComplexDenseTensor mx = mix_tensor(x, st.signs);
    if (!st.sketch->exhaustive)
        for (std::size_t k = 0; k < N; ++k) {
            st.idxs.columns[k] = sample_column(x.shape()[k], std::nullopt, st.sketch->size, rng);
            st.sampled_mixed[k] = gather_slices(mixed[k], std::span<const std::size_t>(st.idxs.columns[k]));
        }
    for (std::size_t n = 1; n < N; ++n) {
        const auto sub = mixed_mode(st, n, mx, mixed);
        const CMatrix gc = sub.coefficients.conjugate();
        st.p_mixed.push_back(sub.fibers * gc);
        st.q_mixed.push_back(sub.coefficients.transpose() * gc);
    }
}

} // namespace detail

/// rSTR initialization: P_n, Q_n from sketched subproblems of X_init. Requires
/// at least R_N R_1 sketch rows so the temporal solves are determined.
inline StreamState rstr_init(const TensorView& x_init, const std::vector<std::size_t>& ranks, const TRCores& init_cores,
                             const Sketch& sketch, Rng& rng, double pinv_rcond = kDefaultPinvRcond) {
    detail::check_init(x_init, ranks, init_cores);
    detail::check_sketch_size(sketch, ranks, x_init.shape());
    const std::size_t N = x_init.order();
    StreamState st;
    st.cores = init_cores;
    st.t_processed = x_init.shape().back();
    st.pinv_rcond = pinv_rcond;
    st.sketch = sketch;
    st.idxs = {sketch.exhaustive ? 0 : sketch.size, std::vector<std::vector<std::size_t>>(N)};
    st.dists.assign(N, std::nullopt);
    if (sketch.kind == SketchKind::Ksrft) {
        st.sampled_mixed.resize(N);
        detail::rstr_init_ksrft(st, x_init, rng);
    } else {
        st.sampled.resize(N);
        detail::rstr_init_real(st, x_init, rng);
    }
    return st;
}

namespace detail {

inline void rstr_update_real(StreamState& st, const TensorView& x_new, Rng& rng) {
    const std::size_t N = st.order();
    const auto r = st.cores.ranks();
    const bool exhaustive = st.sketch->exhaustive;

    // Temporal mode from the sampled subchain of cores 1..N-1.
    Matrix coef;
    Matrix fibers; // t_new x m
    if (exhaustive) {
        const SampleIndexTable table = exhaustive_table(x_new.shape(), N);
        const auto gathered = gather_all(st.cores.cores(), N, table);
        coef = mode2_unfolding(sampled_chain(gathered, N));
        fibers = gather_fibers(x_new, N, table);
    } else {
        coef = mode2_unfolding(sampled_chain(st.sampled, N));
        fibers = gather_fibers(x_new, N, st.idxs);
    }
    const Matrix g_new = solve_normal(gram_of(coef), fibers * coef, st.pinv_rcond);
    const DenseTensor core_new = core_from_unfolding(g_new, r[N - 1], r[0]);
    append_temporal(st, g_new);
    if (!exhaustive) redraw_mode(st, N - 1, core_new, rng);

    for (std::size_t n = 1; n < N; ++n) {
        const auto sub = sampled_mode(st, n, x_new, core_new);
        st.p[n - 1] += sub.fibers * sub.coefficients;
        st.q[n - 1] += gram_of(sub.coefficients);
        st.cores.set_core(n, core_from_unfolding(solve_normal(st.q[n - 1], st.p[n - 1], st.pinv_rcond), r[n - 1], r[n % N]));
        if (!exhaustive) redraw_mode(st, n - 1, st.cores.core(n), rng);
    }
}

inline void rstr_update_ksrft(StreamState& st, const TensorView& x_new, Rng& rng) {
    const std::size_t N = st.order();
    const auto r = st.cores.ranks();
    const bool exhaustive = st.sketch->exhaustive;
    const std::size_t m = st.sketch->size;

    // Fresh operators for this step; cores 1..N-1 are re-mixed under them.
    st.signs = draw_sign_flips(x_new.shape(), rng);
    const ComplexDenseTensor mx = mix_tensor(x_new, st.signs);
    std::vector<std::size_t> nontemporal(N - 1);
    for (std::size_t k = 0; k + 1 < N; ++k) nontemporal[k] = k + 1;
    auto mixed = ksrft_mix_cores(st.cores, st.signs, nontemporal);
    if (!exhaustive)
        for (std::size_t k = 0; k + 1 < N; ++k)
            st.sampled_mixed[k] = gather_slices(mixed[k], std::span<const std::size_t>(st.idxs.columns[k]));

    const auto [p_t, q_t] = ksrft_normal_terms(exhaustive ? ksrft_sketch_mixed(mixed, mx, N, st.signs[N - 1],
                                                                               exhaustive_table(x_new.shape(), N))
                                                          : mixed_mode(st, N, mx, mixed));
    const Matrix g_new = solve_normal(q_t, p_t, st.pinv_rcond);
    const DenseTensor core_new = core_from_unfolding(g_new, r[N - 1], r[0]);
    append_temporal(st, g_new);
    mixed[N - 1] = mix_core(core_new, st.signs[N - 1]);
    if (!exhaustive) {
        st.idxs.columns[N - 1] = sample_column(x_new.shape().back(), std::nullopt, m, rng);
        st.sampled_mixed[N - 1] = gather_slices(mixed[N - 1], std::span<const std::size_t>(st.idxs.columns[N - 1]));
    }

    for (std::size_t n = 1; n < N; ++n) {
        const auto sub = mixed_mode(st, n, mx, mixed);
        const CMatrix gc = sub.coefficients.conjugate();
        st.p_mixed[n - 1] += sub.fibers * gc;
        st.q_mixed[n - 1] += sub.coefficients.transpose() * gc;
        DenseTensor g = core_from_unfolding(solve_normal(st.q_mixed[n - 1].real(), st.p_mixed[n - 1].real(), st.pinv_rcond),
                                            r[n - 1], r[n % N]);
        mixed[n - 1] = mix_core(g, st.signs[n - 1]);
        st.cores.set_core(n, std::move(g));
        if (!exhaustive) {
            st.idxs.columns[n - 1] = sample_column(x_new.shape()[n - 1], std::nullopt, m, rng);
            st.sampled_mixed[n - 1] =
                gather_slices(mixed[n - 1], std::span<const std::size_t>(st.idxs.columns[n - 1]));
        }
    }
}

} // namespace detail

inline void rstr_update(StreamState& st, const TensorView& x_new, Rng& rng) {
    if (!st.randomized()) throw domain_error("rstr_update: state was initialized for STR");
    detail::check_block(st, x_new);
    if (st.sketch->kind == SketchKind::Ksrft)
        detail::rstr_update_ksrft(st, x_new, rng);
    else
        detail::rstr_update_real(st, x_new, rng);
    st.t_processed += x_new.shape().back();
}

// ---------------------------------------------------------------------------
// Memory accounting

/// Stored scalars of a tracker while it processes a block of t_new slices.
/// The formula terms count the new data block, the non-temporal cores together
/// with P, the temporal core (t_old rows) and Q; complex entries count as one
/// scalar each. Gram tensors and sample caches are listed separately.
struct MemoryFootprint {
    std::size_t data_block = 0;
    std::size_t nontemporal_cores = 0;
    std::size_t complementary_p = 0;
    std::size_t temporal_core = 0;
    std::size_t complementary_q = 0;
    std::size_t gram_tensors = 0;
    std::size_t sample_caches = 0;

    std::size_t formula_total() const {
        return data_block + nontemporal_cores + complementary_p + temporal_core + complementary_q;
    }
};

inline MemoryFootprint memory_footprint(const StreamState& st, std::size_t t_new) {
    const std::size_t N = st.order();
    MemoryFootprint f;
    f.data_block = element_count(detail::block_dims(st, t_new));
    for (std::size_t n = 1; n < N; ++n) f.nontemporal_cores += st.cores.core(n).size();
    f.temporal_core = st.cores.core(N).size();
    for (const auto& m : st.p) f.complementary_p += static_cast<std::size_t>(m.size());
    for (const auto& m : st.q) f.complementary_q += static_cast<std::size_t>(m.size());
    for (const auto& m : st.p_mixed) f.complementary_p += static_cast<std::size_t>(m.size());
    for (const auto& m : st.q_mixed) f.complementary_q += static_cast<std::size_t>(m.size());
    for (const auto& z : st.grams) f.gram_tensors += z.size();
    for (const auto& s : st.sampled) f.sample_caches += s.size();
    for (const auto& s : st.sampled_mixed) f.sample_caches += s.size();
    return f;
}

/// I^{N-1} t_new + (2(N-1) I + t_old) R^2 + (N-1) R^4 for equal dims and ranks.
inline std::size_t streaming_memory_formula(std::size_t order, std::size_t dim, std::size_t rank, std::size_t t_old,
                                            std::size_t t_new) {
    std::size_t block = t_new;
    for (std::size_t k = 0; k + 1 < order; ++k) block *= dim;
    const std::size_t r2 = rank * rank;
    return block + (2 * (order - 1) * dim + t_old) * r2 + (order - 1) * r2 * r2;
}

} // namespace trstream
