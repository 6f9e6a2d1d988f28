// trstream: run the streaming TR experiment protocol, or write synthetic TRT1
// tensors.

#include <trstream/trstream.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

namespace {

using namespace trstream;
using namespace trstream::harness;

constexpr int kExitConfig = 2;
constexpr int kExitFormat = 3;

struct RunFlags {
    std::string config;
    std::map<std::string, std::string> values; // CLI overrides, keyed like the config file
};

void add_override(CLI::App* cmd, RunFlags& flags, const std::string& key, const std::string& help) {
    cmd->add_option_function<std::string>(
        "--" + key, [&flags, key](const std::string& v) { flags.values[key] = v; }, help);
}

int run(const RunFlags& flags) {
    RunSettings rs;
    if (!flags.config.empty()) load_config_file(rs, flags.config);
    for (const auto& [k, v] : flags.values) apply_setting(rs, k, v);
    // Flags on the command line replace an input source set in the file.
    if (flags.values.count("input") && !flags.values.count("synthetic")) rs.synthetic.reset();
    if (flags.values.count("synthetic") && !flags.values.count("input")) rs.input.clear();
    validate(rs);

    DenseTensor x;
    std::string source;
    if (rs.synthetic) {
        x = generate_synthetic(rs.synthetic->shape, rs.synthetic->rank, rs.protocol.seed).tensor;
        source = "synthetic " + shape_string(rs.synthetic->shape) + " rank " + std::to_string(rs.synthetic->rank);
    } else {
        if (!std::filesystem::is_regular_file(rs.input)) throw config_error("input file " + rs.input + " not found");
        x = load_tensor(rs.input);
        source = rs.input;
    }
    std::cerr << "trstream: " << source << ", " << rs.protocol.algorithms.size() << " algorithm(s), "
              << rs.protocol.repetitions << " repetition(s)\n";
    ExperimentReport rep = run_protocol(x, rs.protocol);
    rep.source = source;
    write_report(rep, rs.out, rs.format);
    for (const SummaryRow& s : rep.summary)
        if (s.step == rep.steps.size())
            std::cerr << "  " << s.algorithm << ": final error " << s.mean_relative_error << ", total "
                      << s.mean_cumulative_seconds << " s\n";
    std::cerr << "trstream: wrote " << rep.rows.size() << " rows to " << rs.out << '\n';
    return 0;
}

int gen(const std::string& shape_text, std::size_t rank, std::uint64_t seed, const std::string& out) {
    const Shape shape = parse_shape(shape_text);
    if (shape.size() < 2) throw config_error("shape needs at least two modes");
    if (rank < 1) throw config_error("rank must be >= 1");
    save_tensor(generate_synthetic(shape, rank, seed).tensor, out);
    std::cerr << "trstream: wrote " << shape_string(shape) << " to " << out << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Streaming tensor ring decomposition experiments"};
    app.require_subcommand(1);

    RunFlags flags;
    auto* run_cmd = app.add_subcommand("run", "Run the streaming protocol and write a report");
    run_cmd->add_option("--config", flags.config, "key=value settings file")->check(CLI::ExistingFile);
    add_override(run_cmd, flags, "algo", "Comma-separated algorithms");
    add_override(run_cmd, flags, "rank", "Target TR rank R");
    add_override(run_cmd, flags, "sketch-size", "Sketch size m");
    add_override(run_cmd, flags, "t-new", "Slices per time step");
    add_override(run_cmd, flags, "init-fraction", "Fraction of the temporal mode used for initialization");
    add_override(run_cmd, flags, "tol", "Batch solver tolerance");
    add_override(run_cmd, flags, "max-iters", "Batch solver sweep cap");
    add_override(run_cmd, flags, "init-tol", "Initial decomposition tolerance");
    add_override(run_cmd, flags, "init-max-iters", "Initial decomposition sweep cap");
    add_override(run_cmd, flags, "seed", "Base seed");
    add_override(run_cmd, flags, "reps", "Repetitions");
    add_override(run_cmd, flags, "input", "TRT1 tensor file");
    add_override(run_cmd, flags, "synthetic", "Synthetic tensor I1xI2x...xIN:R");
    add_override(run_cmd, flags, "out", "Report path");
    add_override(run_cmd, flags, "format", "csv or json");

    std::string shape_text, out;
    std::size_t rank = 1;
    std::uint64_t seed = 0;
    auto* gen_cmd = app.add_subcommand("gen", "Write a synthetic TR tensor as TRT1");
    gen_cmd->add_option("--shape", shape_text, "I1xI2x...xIN")->required();
    gen_cmd->add_option("--rank", rank, "TR rank")->required();
    gen_cmd->add_option("--seed", seed, "Seed");
    gen_cmd->add_option("--out", out, "Output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*run_cmd) return run(flags);
        return gen(shape_text, rank, seed, out);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const format_error& e) {
        std::cerr << "format error: " << e.what() << '\n';
        return kExitFormat;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
