// gplandmark: greedy Gaussian-process landmarking on meshes and point clouds.
//
//   gplandmark run     --input mesh.off --num-landmarks 150 --out outdir/
//   gplandmark analyze --trace outdir/landmarks.json --bound-check 5,10,20 --fit 20:100
//
// Errors print one machine-parsable line to stderr:
//   gplandmark: error: <Code>: <message>
// with exit codes 2 (config), 3 (parse), 4 (numerical), 5 (io).

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gplandmark/pipeline.hpp"

namespace {

using namespace gplandmark;

int error_exit_code(const Error& e) {
    const std::string& code = e.code();
    if (code == "ConfigError" || code == "ValidationError") return 2;
    if (code == "ParseError") return 3;
    if (code == "IoError") return 5;
    return 4; // numerical and geometric failures
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> values;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find(',', pos);
        if (end == std::string::npos) end = text.size();
        const std::string tok = text.substr(pos, end - pos);
        if (!tok.empty()) {
            try {
                values.push_back(std::stoi(tok));
            } catch (const std::exception&) {
                throw ConfigError("expected an integer list, got '" + text + "'");
            }
        }
        pos = end + 1;
        if (end == text.size()) break;
    }
    if (values.empty()) throw ConfigError("empty integer list '" + text + "'");
    return values;
}

struct CommonFlags {
    std::string epsilon = "auto";
    std::string kernel = "reweighted";
    std::string tie = "lowest";
    std::string weights = "curvature";
};

void add_run_options(CLI::App& cmd, RunConfig& config, CommonFlags& flags, bool input_required) {
    auto* input = cmd.add_option("--input", config.input_path, "input mesh or point cloud file");
    if (input_required) input->required();
    cmd.add_option("--format", config.format,
                   "input format: off | ply | obj | xyz | csv | auto (default: auto)");
    cmd.add_option("--kernel", flags.kernel, "kernel kind: euclidean | reweighted");
    cmd.add_option("--epsilon", flags.epsilon,
                   "squared-exponential bandwidth, or 'auto' for (0.1 * bbox diagonal)^2");
    cmd.add_option("--lambda", config.lambda, "Gaussian-curvature weight coefficient in [0, 1]");
    cmd.add_option("--rho", config.rho, "curvature magnitude exponent (> 0)");
    cmd.add_option("--tolerance", config.tolerance,
                   "stop when max MSPE <= tolerance * max diagonal");
    cmd.add_option("--tie", flags.tie, "tie rule: lowest | random");
    cmd.add_option("--weights", flags.weights, "weight source: curvature | uniform | file");
    cmd.add_option("--weights-file", config.weights_file, "per-vertex weight file (one value per row)");
    cmd.add_option("--knn", config.knn, "neighborhood size for point-cloud importance");
    cmd.add_option("--seed", config.seed, "seed for random tie-breaking and baselines");
}

void resolve_flags(RunConfig& config, const CommonFlags& flags) {
    config.kernel = kernel_kind_from_string(flags.kernel);
    config.tie = tie_rule_from_string(flags.tie);
    config.weights = weight_source_from_string(flags.weights);
    if (flags.epsilon == "auto") {
        config.epsilon.reset();
    } else {
        try {
            std::size_t used = 0;
            config.epsilon = std::stod(flags.epsilon, &used);
            if (used != flags.epsilon.size()) throw std::invalid_argument(flags.epsilon);
        } catch (const std::exception&) {
            throw ConfigError("epsilon must be a positive number or 'auto', got '" +
                              flags.epsilon + "'");
        }
    }
}

int run_command(RunConfig& config, CommonFlags& flags, const std::string& emit) {
    resolve_flags(config, flags);
    config.emit_trace = config.emit_mspe = config.emit_plot = config.emit_report = false;
    std::size_t pos = 0;
    while (pos <= emit.size()) {
        std::size_t end = emit.find(',', pos);
        if (end == std::string::npos) end = emit.size();
        const std::string tok = emit.substr(pos, end - pos);
        if (tok == "trace") config.emit_trace = true;
        else if (tok == "mspe_field") config.emit_mspe = true;
        else if (tok == "plot") config.emit_plot = true;
        else if (tok == "report") config.emit_report = true;
        else if (!tok.empty())
            throw ConfigError("unknown emit flag '" + tok +
                              "' (expected trace, mspe_field, plot, report)");
        pos = end + 1;
        if (end == emit.size()) break;
    }

    const RunResult result = run_landmark(config);
    for (const auto& warning : result.warnings)
        std::cerr << "gplandmark: warning: " << warning << "\n";
    std::cout << "selected " << result.trace.selected.size() << " landmarks (stop: "
              << to_string(result.trace.stop_reason) << ", epsilon "
              << format_full(result.epsilon_resolved) << ")\n";
    for (const auto& file : result.files_written) std::cout << "wrote " << file << "\n";
    return 0;
}

int analyze_command(RunConfig& config, CommonFlags& flags, const std::string& trace_path,
                    AnalyzeOptions& options, const std::string& bound_check,
                    const std::string& fit, const std::string& fill_scaling) {
    std::optional<LandmarkTrace> trace;
    if (!trace_path.empty()) {
        auto [loaded, params] = read_trace_json(trace_path);
        trace = std::move(loaded);
        const auto manifest =
            std::filesystem::path(trace_path).parent_path() / "run_manifest.json";
        if (!std::filesystem::exists(manifest))
            throw ConfigError("no run_manifest.json next to the trace; "
                              "pass the full run configuration instead");
        const std::string out_dir = config.out_dir;
        const std::uint64_t seed = config.seed;
        config = config_from_manifest(manifest.string());
        config.out_dir = out_dir.empty()
                             ? std::filesystem::path(trace_path).parent_path().string()
                             : out_dir;
        if (seed != 0) config.seed = seed;
        config.num_landmarks = static_cast<Eigen::Index>(trace->selected.size());
    } else {
        if (config.input_path.empty())
            throw ConfigError("analyze needs either --trace or a full run configuration");
        resolve_flags(config, flags);
    }

    if (!bound_check.empty()) options.bound_check_m = parse_int_list(bound_check);
    if (!fill_scaling.empty()) options.fill_scaling_n = parse_int_list(fill_scaling);
    if (!fit.empty()) {
        const auto colon = fit.find(':');
        if (colon == std::string::npos)
            throw ConfigError("fit range must read n_min:n_max, got '" + fit + "'");
        try {
            options.fit_range = {std::stoi(fit.substr(0, colon)),
                                 std::stoi(fit.substr(colon + 1))};
        } catch (const std::exception&) {
            throw ConfigError("fit range must read n_min:n_max, got '" + fit + "'");
        }
    }

    const AnalyzeResult result = run_analyze(config, options, std::move(trace));
    for (const auto& check : result.report.bound_checks)
        std::cout << "bound check m=" << check.m << ": lhs " << format_full(check.lhs)
                  << " <= rhs " << format_full(check.rhs) << " -> "
                  << (check.pass ? "pass" : "FAIL") << "\n";
    for (const auto& f : result.report.fits)
        std::cout << "fit [" << f.n_min << ", " << f.n_max << "] " << to_string(f.scale)
                  << ": slope " << format_full(f.slope) << ", R^2 "
                  << format_full(f.r_squared) << "\n";
    for (const auto& file : result.files_written) std::cout << "wrote " << file << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    gplandmark::apply_thread_cap();

    CLI::App app{"Gaussian-process landmarking on meshes and point clouds"};
    app.require_subcommand(1);

    RunConfig run_config, analyze_config;
    CommonFlags run_flags, analyze_flags;
    std::string emit = "trace";

    CLI::App* run = app.add_subcommand("run", "select landmarks and write the trace");
    add_run_options(*run, run_config, run_flags, /*input_required=*/true);
    run->add_option("--num-landmarks,-L", run_config.num_landmarks, "landmark budget")
        ->required();
    run->add_option("--out", run_config.out_dir, "output directory")->required();
    run->add_option("--emit", emit, "comma list of trace, mspe_field, plot, report");

    CLI::App* analyze = app.add_subcommand("analyze", "evaluate a trace against baselines");
    std::string trace_path, bound_check, fit, fill_scaling;
    AnalyzeOptions options;
    add_run_options(*analyze, analyze_config, analyze_flags, /*input_required=*/false);
    analyze->add_option("--trace", trace_path, "landmarks.json from a previous run");
    analyze->add_option("--num-landmarks,-L", analyze_config.num_landmarks,
                        "landmark budget for in-line traces");
    analyze->add_option("--out", analyze_config.out_dir, "output directory");
    analyze->add_option("--baselines", options.baselines,
                        "number of random candidate designs per bound check");
    analyze->add_option("--bound-check", bound_check, "comma list of m values, e.g. 5,10,20");
    analyze->add_option("--fit", fit, "convergence fit range n_min:n_max");
    analyze->add_option("--fit-scale", [&options](const std::vector<std::string>& vals) {
        if (vals.empty()) return false;
        if (vals.back() == "loglog") options.fit_scale = gplandmark::FitScale::LogLog;
        else if (vals.back() == "semilog") options.fit_scale = gplandmark::FitScale::SemiLog;
        else return false;
        return true;
    }, "fit scale: loglog | semilog");
    analyze->add_option("--fill-scaling", fill_scaling,
                        "comma list of FPS design sizes for the fill-distance scaling table");

    try {
        app.parse(argc, argv);
        if (run->parsed()) return run_command(run_config, run_flags, emit);
        return analyze_command(analyze_config, analyze_flags, trace_path, options, bound_check,
                               fit, fill_scaling);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const gplandmark::Error& e) {
        std::cerr << "gplandmark: error: " << e.what() << "\n";
        return error_exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "gplandmark: error: Unexpected: " << e.what() << "\n";
        return 1;
    }
}
