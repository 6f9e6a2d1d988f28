#pragma once

// Streaming experiment protocol. The first init_fraction of the temporal mode
// is decomposed once by TR-ALS; that decomposition seeds every algorithm.
// The remaining slices arrive t_new at a time (a shorter final block when they
// do not divide evenly). After each block every algorithm's update is timed
// and the relative error of its decomposition of all data seen so far is
// recorded.

#include <trstream/batch.hpp>
#include <trstream/errors.hpp>
#include <trstream/sketch.hpp>
#include <trstream/streaming.hpp>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace trstream::harness {

enum class Algorithm { TrAlsCold, TrAlsHot, TrAlsNe, TrAlsSampledU, TrAlsSampledL, TrKsrftAls, Str, RstrU, RstrL, RstrK };

inline constexpr std::array<Algorithm, 10> kAllAlgorithms{
    Algorithm::TrAlsCold, Algorithm::TrAlsHot,   Algorithm::TrAlsNe, Algorithm::TrAlsSampledU, Algorithm::TrAlsSampledL,
    Algorithm::TrKsrftAls, Algorithm::Str,       Algorithm::RstrU,   Algorithm::RstrL,         Algorithm::RstrK};

inline std::string_view algorithm_name(Algorithm a) {
    switch (a) {
    case Algorithm::TrAlsCold: return "tr-als-cold";
    case Algorithm::TrAlsHot: return "tr-als-hot";
    case Algorithm::TrAlsNe: return "tr-als-ne";
    case Algorithm::TrAlsSampledU: return "tr-als-sampled-u";
    case Algorithm::TrAlsSampledL: return "tr-als-sampled-l";
    case Algorithm::TrKsrftAls: return "tr-ksrft-als";
    case Algorithm::Str: return "str";
    case Algorithm::RstrU: return "rstr-u";
    case Algorithm::RstrL: return "rstr-l";
    case Algorithm::RstrK: return "rstr-k";
    }
    return "?";
}

inline Algorithm parse_algorithm(std::string_view name) {
    for (Algorithm a : kAllAlgorithms)
        if (algorithm_name(a) == name) return a;
    throw config_error("unknown algorithm '" + std::string(name) + "'");
}

inline bool is_streaming(Algorithm a) {
    return a == Algorithm::Str || a == Algorithm::RstrU || a == Algorithm::RstrL || a == Algorithm::RstrK;
}

struct ProtocolConfig {
    std::vector<Algorithm> algorithms{Algorithm::Str};
    std::size_t rank = 5;
    std::size_t sketch_size = 1000;
    std::size_t t_new = 5;
    double init_fraction = 0.2;
    // batch baselines, re-run at every step
    double tol = 1e-10;
    std::size_t max_iters = 50;
    // shared initial decomposition
    double init_tol = 1e-8;
    std::size_t init_max_iters = 100;
    std::size_t repetitions = 1;
    std::uint64_t seed = 0;
    double pinv_rcond = kDefaultPinvRcond;

    void validate() const {
        if (algorithms.empty()) throw config_error("no algorithms selected");
        for (std::size_t i = 0; i < algorithms.size(); ++i)
            for (std::size_t j = i + 1; j < algorithms.size(); ++j)
                if (algorithms[i] == algorithms[j])
                    throw config_error("algorithm '" + std::string(algorithm_name(algorithms[i])) + "' listed twice");
        if (rank < 1) throw config_error("rank must be >= 1");
        if (sketch_size < 1) throw config_error("sketch-size must be >= 1");
        if (t_new < 1) throw config_error("t-new must be >= 1");
        if (!(init_fraction > 0.0 && init_fraction < 1.0)) throw config_error("init-fraction must lie in (0, 1)");
        if (!(tol >= 0.0) || !(init_tol >= 0.0)) throw config_error("tolerances must be nonnegative");
        if (max_iters < 1 || init_max_iters < 1) throw config_error("iteration caps must be >= 1");
        if (repetitions < 1) throw config_error("reps must be >= 1");
    }
};

/// Temporal length of the initial block.
inline std::size_t init_length(std::size_t temporal, double fraction) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(fraction * static_cast<double>(temporal))));
}

/// Block lengths after the initial block; the last one may be shorter.
inline std::vector<std::size_t> step_lengths(std::size_t temporal, double fraction, std::size_t t_new) {
    const std::size_t t0 = init_length(temporal, fraction);
    if (t0 >= temporal)
        throw config_error("temporal mode of length " + std::to_string(temporal) + " leaves no slices after the initial " +
                           std::to_string(t0));
    std::vector<std::size_t> out;
    for (std::size_t t = t0; t < temporal; t += t_new) out.push_back(std::min(t_new, temporal - t));
    return out;
}

// ---------------------------------------------------------------------------
// Runners: one algorithm's state across the steps of one repetition

class Runner {
public:
    virtual ~Runner() = default;
    /// `seen` is all data up to and including `block`, which is its tail.
    virtual void step(const TensorView& seen, const TensorView& block) = 0;
    virtual const TRCores& cores() const = 0;
};

namespace detail {

class BatchRunner final : public Runner {
public:
    BatchRunner(Algorithm a, const ProtocolConfig& cfg, TRCores init, std::uint64_t seed)
        : algo_(a), cfg_(cfg), cores_(std::move(init)), rng_(seed) {}

    void step(const TensorView& seen, const TensorView& block) override {
        const auto ranks = cores_.ranks();
        const TRCores start = algo_ == Algorithm::TrAlsCold ? random_cores(seen.shape(), ranks, rng_)
                                                            : append_temporal_rows(cores_, block, cfg_.pinv_rcond);
        SolveOptions opts;
        opts.max_iters = cfg_.max_iters;
        opts.tol = cfg_.tol;
        opts.seed = rng_.engine()();
        opts.pinv_rcond = cfg_.pinv_rcond;
        const Sketch sketch{algo_ == Algorithm::TrAlsSampledL ? SketchKind::Leverage
                            : algo_ == Algorithm::TrKsrftAls  ? SketchKind::Ksrft
                                                              : SketchKind::Uniform,
                            cfg_.sketch_size};
        switch (algo_) {
        case Algorithm::TrAlsCold:
        case Algorithm::TrAlsHot: cores_ = tr_als(seen, ranks, start, opts).cores; break;
        case Algorithm::TrAlsNe: cores_ = tr_als_ne(seen, ranks, start, opts).cores; break;
        case Algorithm::TrAlsSampledU:
        case Algorithm::TrAlsSampledL: cores_ = tr_als_sampled(seen, ranks, start, sketch, opts).cores; break;
        case Algorithm::TrKsrftAls: cores_ = tr_ksrft_als(seen, ranks, start, sketch, opts).cores; break;
        default: throw domain_error("BatchRunner: not a batch algorithm");
        }
    }

    const TRCores& cores() const override { return cores_; }

private:
    Algorithm algo_;
    ProtocolConfig cfg_;
    TRCores cores_;
    Rng rng_;
};

class StreamRunner final : public Runner {
public:
    StreamRunner(Algorithm a, const ProtocolConfig& cfg, const TensorView& x_init, const TRCores& init,
                 std::uint64_t seed)
        : rng_(seed) {
        const auto ranks = init.ranks();
        if (a == Algorithm::Str) {
            state_ = str_init(x_init, ranks, init, cfg.pinv_rcond);
            return;
        }
        const SketchKind kind = a == Algorithm::RstrU   ? SketchKind::Uniform
                                : a == Algorithm::RstrL ? SketchKind::Leverage
                                                        : SketchKind::Ksrft;
        state_ = rstr_init(x_init, ranks, init, Sketch{kind, cfg.sketch_size}, rng_, cfg.pinv_rcond);
    }

    void step(const TensorView&, const TensorView& block) override {
        if (state_.randomized())
            rstr_update(state_, block, rng_);
        else
            str_update(state_, block);
    }

    const TRCores& cores() const override { return state_.cores; }
    const StreamState& state() const { return state_; }

private:
    Rng rng_;
    StreamState state_;
};

} // namespace detail

/// Per-algorithm stream derived from the repetition seed.
inline std::uint64_t algorithm_seed(std::uint64_t rep_seed, Algorithm a) {
    return rep_seed * 0x100000001b3ULL + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(a) + 1);
}

inline std::unique_ptr<Runner> make_runner(Algorithm a, const ProtocolConfig& cfg, const TensorView& x_init,
                                           const TRCores& init, std::uint64_t rep_seed) {
    const std::uint64_t seed = algorithm_seed(rep_seed, a);
    if (is_streaming(a)) return std::make_unique<detail::StreamRunner>(a, cfg, x_init, init, seed);
    return std::make_unique<detail::BatchRunner>(a, cfg, init, seed);
}

/// Shared initial decomposition of the initial block for one repetition.
inline TRCores initial_decomposition(const TensorView& x_init, const ProtocolConfig& cfg, std::uint64_t rep_seed) {
    Rng rng(rep_seed);
    const auto ranks = uniform_ranks(x_init.order(), cfg.rank);
    SolveOptions opts;
    opts.max_iters = cfg.init_max_iters;
    opts.tol = cfg.init_tol;
    opts.pinv_rcond = cfg.pinv_rcond;
    return tr_als(x_init, ranks, random_cores(x_init.shape(), ranks, rng), opts).cores;
}

// ---------------------------------------------------------------------------
// Report

struct ReportRow {
    std::string algorithm;
    std::size_t repetition = 0;
    std::size_t step = 0; // 1-based
    double relative_error = 0.0;
    double step_seconds = 0.0;
    double cumulative_seconds = 0.0;

    friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct SummaryRow {
    std::string algorithm;
    std::size_t step = 0;
    double mean_relative_error = 0.0;
    double mean_step_seconds = 0.0;
    double mean_cumulative_seconds = 0.0;
};

struct ExperimentReport {
    std::vector<ReportRow> rows;
    std::vector<SummaryRow> summary;
    ProtocolConfig config;
    Shape shape;
    std::size_t init_length = 0;
    std::vector<std::size_t> steps;
    std::string source;
};

/// Means over repetitions for every (algorithm, step).
inline std::vector<SummaryRow> summarize(const std::vector<ReportRow>& rows) {
    std::vector<SummaryRow> out;
    std::vector<std::size_t> counts;
    for (const ReportRow& r : rows) {
        std::size_t k = 0;
        while (k < out.size() && !(out[k].algorithm == r.algorithm && out[k].step == r.step)) ++k;
        if (k == out.size()) {
            out.push_back({r.algorithm, r.step, 0.0, 0.0, 0.0});
            counts.push_back(0);
        }
        out[k].mean_relative_error += r.relative_error;
        out[k].mean_step_seconds += r.step_seconds;
        out[k].mean_cumulative_seconds += r.cumulative_seconds;
        ++counts[k];
    }
    for (std::size_t k = 0; k < out.size(); ++k) {
        const auto c = static_cast<double>(counts[k]);
        out[k].mean_relative_error /= c;
        out[k].mean_step_seconds /= c;
        out[k].mean_cumulative_seconds /= c;
    }
    return out;
}

/// Observation points for tests and tooling.
struct ProtocolHooks {
    std::function<void(Algorithm, std::size_t rep, const TRCores& init)> on_init;
    std::function<void(Algorithm, std::size_t rep, std::size_t step, const TensorView& block)> on_block;
};

inline ExperimentReport run_protocol(const TensorView& x, const ProtocolConfig& cfg, const ProtocolHooks& hooks = {}) {
    cfg.validate();
    if (x.order() < 2) throw config_error("input tensor must have order >= 2");
    for (Algorithm a : cfg.algorithms)
        if ((a == Algorithm::RstrU || a == Algorithm::RstrL || a == Algorithm::RstrK) && cfg.sketch_size < cfg.rank * cfg.rank)
            throw config_error("sketch-size " + std::to_string(cfg.sketch_size) + " is below R^2 = " +
                               std::to_string(cfg.rank * cfg.rank) + " required by " + std::string(algorithm_name(a)));
    const std::size_t T = x.shape().back();
    ExperimentReport rep;
    rep.config = cfg;
    rep.shape = x.shape();
    rep.init_length = init_length(T, cfg.init_fraction);
    rep.steps = step_lengths(T, cfg.init_fraction, cfg.t_new);

    using clock = std::chrono::steady_clock;
    const TensorView x_init = temporal_slab(x, 0, rep.init_length);
    for (std::size_t r = 0; r < cfg.repetitions; ++r) {
        const std::uint64_t rep_seed = cfg.seed + r;
        const TRCores init = initial_decomposition(x_init, cfg, rep_seed);
        for (Algorithm a : cfg.algorithms) {
            if (hooks.on_init) hooks.on_init(a, r, init);
            auto runner = make_runner(a, cfg, x_init, init, rep_seed);
            std::size_t end = rep.init_length;
            double cumulative = 0.0;
            for (std::size_t s = 0; s < rep.steps.size(); ++s) {
                const TensorView block = temporal_slab(x, end, rep.steps[s]);
                end += rep.steps[s];
                const TensorView seen = temporal_slab(x, 0, end);
                if (hooks.on_block) hooks.on_block(a, r, s + 1, block);
                const auto t0 = clock::now();
                runner->step(seen, block);
                const double dt = std::chrono::duration<double>(clock::now() - t0).count();
                cumulative += dt;
                rep.rows.push_back(
                    {std::string(algorithm_name(a)), r, s + 1, relative_error(seen, runner->cores()), dt, cumulative});
            }
        }
    }
    rep.summary = summarize(rep.rows);
    return rep;
}

} // namespace trstream::harness
