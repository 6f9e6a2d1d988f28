#pragma once

// Batch tensor-ring ALS: the plain solver (explicit subchain Gram) and the
// normal-equation variant that builds every Gram from the per-core Gram
// tensors Z_n. Both solve each subproblem as G_n(2) = P Q^+ through the shared
// solve_normal kernel, so on identical inputs they produce the same iterates.

#include <trstream/linalg.hpp>
#include <trstream/rng.hpp>
#include <trstream/tr_algebra.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace trstream {

struct SolveOptions {
    std::size_t max_iters = 50;
    double tol = 1e-10; // stop once |err_k - err_{k-1}| < tol
    std::uint64_t seed = 0;
    double pinv_rcond = kDefaultPinvRcond;
    /// Called after every subproblem solve with (sweep, mode, cores); sweep and mode are 1-based.
    std::function<void(std::size_t, std::size_t, const TRCores&)> on_subproblem;
};

struct SolveResult {
    TRCores cores;
    std::vector<double> errors; // relative error after each sweep
};

namespace detail {

inline void check_options(const SolveOptions& opts) {
    if (opts.max_iters < 1) throw domain_error("max_iters must be >= 1");
    if (!(opts.tol >= 0.0)) throw domain_error("tol must be nonnegative");
    if (!(opts.pinv_rcond >= 0.0)) throw domain_error("pinv_rcond must be nonnegative");
}

inline bool converged(const std::vector<double>& errors, double tol) {
    const std::size_t k = errors.size();
    return k >= 2 && std::abs(errors[k - 1] - errors[k - 2]) < tol;
}

} // namespace detail

/// Standard normal entries scaled by 1/sqrt(R_n R_{n+1}).
inline TRCores random_cores(const Shape& dims, const std::vector<std::size_t>& ranks, Rng& rng) {
    check_ranks(ranks, dims);
    const std::size_t N = dims.size();
    std::vector<DenseTensor> cores;
    for (std::size_t n = 0; n < N; ++n) {
        const std::size_t r0 = ranks[n], r1 = ranks[(n + 1) % N];
        DenseTensor g(Shape{r0, dims[n], r1});
        const double scale = 1.0 / std::sqrt(static_cast<double>(r0 * r1));
        for (double& v : g.values()) v = scale * rng.normal();
        cores.push_back(std::move(g));
    }
    return TRCores(std::move(cores));
}

/// Uniform ranks helper: (R, ..., R).
inline std::vector<std::size_t> uniform_ranks(std::size_t order, std::size_t r) { return std::vector<std::size_t>(order, r); }

/// TR-ALS: per sweep, each core n = 1..N is replaced by the exact minimizer of
/// ||G^{!=n}_[2] G_n(2)^T - X_[n]^T||.
inline SolveResult tr_als(const TensorView& x, const std::vector<std::size_t>& ranks, const TRCores& init,
                          const SolveOptions& opts = {}) {
    detail::check_options(opts);
    check_cores_match(init, ranks, x.shape());
    const std::size_t N = x.order();
    SolveResult res{init, {}};
    for (std::size_t sweep = 1; sweep <= opts.max_iters; ++sweep) {
        for (std::size_t n = 1; n <= N; ++n) {
            const Matrix s = subchain_matrix(res.cores, n);
            const Matrix p = unfolding_times<double>(x, n, s);
            Matrix q(s.cols(), s.cols());
            q.setZero();
            q.selfadjointView<Eigen::Lower>().rankUpdate(s.transpose());
            q.triangularView<Eigen::StrictlyUpper>() = q.transpose();
            const Matrix g = solve_normal(q, p, opts.pinv_rcond);
            res.cores.set_core(n, core_from_unfolding(g, ranks[n - 1], ranks[n % N]));
            if (opts.on_subproblem) opts.on_subproblem(sweep, n, res.cores);
        }
        res.errors.push_back(relative_error(x, res.cores));
        if (detail::converged(res.errors, opts.tol)) break;
    }
    return res;
}

/// TR-ALS-NE: same iterates as tr_als, with each Gram Q taken from the
/// contracted chain of per-core Gram tensors instead of the full subchain.
inline SolveResult tr_als_ne(const TensorView& x, const std::vector<std::size_t>& ranks, const TRCores& init,
                             const SolveOptions& opts = {}) {
    detail::check_options(opts);
    check_cores_match(init, ranks, x.shape());
    const std::size_t N = x.order();
    SolveResult res{init, {}};
    std::vector<DenseTensor> grams;
    for (std::size_t n = 1; n <= N; ++n) grams.push_back(gram_core(res.cores.core(n)));
    for (std::size_t sweep = 1; sweep <= opts.max_iters; ++sweep) {
        for (std::size_t n = 1; n <= N; ++n) {
            const Matrix h = gram_matrix(gram_chain(grams, n));
            const Matrix s = subchain_matrix(res.cores, n);
            const Matrix m = unfolding_times<double>(x, n, s);
            const Matrix g = solve_normal(h, m, opts.pinv_rcond);
            res.cores.set_core(n, core_from_unfolding(g, ranks[n - 1], ranks[n % N]));
            grams[n - 1] = gram_core(res.cores.core(n));
            if (opts.on_subproblem) opts.on_subproblem(sweep, n, res.cores);
        }
        res.errors.push_back(relative_error(x, res.cores));
        if (detail::converged(res.errors, opts.tol)) break;
    }
    return res;
}

/// Extends the temporal (last) core by the least-squares rows that best fit
/// `x_new` with every other core fixed. Used to warm-start batch solvers on a
/// tensor that has grown along the last mode.
inline TRCores append_temporal_rows(const TRCores& cores, const TensorView& x_new, double rcond = kDefaultPinvRcond) {
    const std::size_t N = cores.order();
    Shape expect = cores.dims();
    expect.back() = x_new.shape().back();
    if (x_new.shape() != expect)
        throw domain_error("append_temporal_rows: block shape " + shape_string(x_new.shape()) + ", expected " +
                           shape_string(expect));
    const Matrix s = subchain_matrix(cores, N);
    Eigen::Map<const Matrix> xt(x_new.data(), s.rows(), static_cast<Eigen::Index>(x_new.shape().back()));
    const Matrix fresh = solve_normal(s.transpose() * s, xt.transpose() * s, rcond);
    const Matrix old = core_unfolding(cores.core(N));
    Matrix all(old.rows() + fresh.rows(), old.cols());
    all << old, fresh;
    TRCores out = cores;
    const auto r = cores.ranks();
    out.set_core(N, core_from_unfolding(all, r[N - 1], r[0]));
    return out;
}

} // namespace trstream
