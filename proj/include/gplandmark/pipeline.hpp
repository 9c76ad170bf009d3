#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gplandmark/analysis.hpp"
#include "gplandmark/geometry.hpp"
#include "gplandmark/io.hpp"
#include "gplandmark/kernel.hpp"
#include "gplandmark/landmarking.hpp"
#include "gplandmark/mesh_io.hpp"
#include "gplandmark/parallel.hpp"
#include "gplandmark/synthetic.hpp"

namespace gplandmark {

enum class WeightSource { Curvature, Uniform, File };

inline const char* to_string(WeightSource source) {
    switch (source) {
        case WeightSource::Curvature: return "curvature";
        case WeightSource::Uniform: return "uniform";
        case WeightSource::File: return "file";
    }
    return "curvature";
}
inline WeightSource weight_source_from_string(const std::string& s) {
    if (s == "curvature") return WeightSource::Curvature;
    if (s == "uniform") return WeightSource::Uniform;
    if (s == "file") return WeightSource::File;
    throw ConfigError("unknown weight source '" + s + "'");
}

/** Fully resolved batch-run configuration; `epsilon` empty means auto. */
struct RunConfig {
    std::string input_path;
    std::string format = "auto"; // off | ply | obj | xyz | csv | auto
    KernelKind kernel = KernelKind::Reweighted;
    std::optional<double> epsilon;               // effective bandwidth; empty = auto
    double lambda = 0.5;
    double rho = 1.0;
    Eigen::Index num_landmarks = 150;
    double tolerance = 0.0;
    TieRule tie = TieRule::LowestIndex;
    WeightSource weights = WeightSource::Curvature;
    std::string weights_file;
    Eigen::Index knn = 16;
    std::uint64_t seed = 0;
    std::string out_dir;
    bool emit_trace = true;
    bool emit_mspe = false;
    bool emit_plot = false;
    bool emit_report = false;

    void validate() const {
        if (input_path.empty()) throw ConfigError("input path is required");
        if (out_dir.empty()) throw ConfigError("output directory is required");
        if (!(lambda >= 0.0 && lambda <= 1.0))
            throw ConfigError("lambda must lie in [0, 1], got " + std::to_string(lambda));
        if (!(rho > 0.0)) throw ConfigError("rho must be positive, got " + std::to_string(rho));
        if (num_landmarks < 1) throw ConfigError("num-landmarks must be at least 1");
        if (!(tolerance >= 0.0)) throw ConfigError("tolerance must be nonnegative");
        if (epsilon && !(*epsilon > 0.0))
            throw ConfigError("epsilon must be positive (or 'auto')");
        if (weights == WeightSource::File && weights_file.empty())
            throw ConfigError("weight source 'file' needs --weights-file");
        if (knn < 4) throw ConfigError("knn must be at least 4");
    }
};

struct AnalyzeOptions {
    int baselines = 200;
    std::vector<int> bound_check_m;
    std::optional<std::pair<int, int>> fit_range;
    FitScale fit_scale = FitScale::LogLog;
    std::vector<int> fill_scaling_n; // empty = skip
};

/** Input plus everything derived from it that both subcommands need. */
struct PipelineData {
    std::optional<TriangleMesh> mesh;
    PointCloud cloud;
    std::vector<std::string> warnings;
    std::string format_resolved;
    double epsilon_resolved = 0.0;
    std::optional<WeightField> weight_field;
    KernelMatrix kernel;
};

namespace detail {

inline WeightField weights_from_file(const std::string& path, const Eigen::VectorXd& areas) {
    const std::string text = read_text_file(path);
    const auto lines = split_lines(text);
    std::vector<double> values;
    for (const auto& line : lines) {
        if (is_comment_or_blank(line.text)) continue;
        const auto tokens = split_tokens(line.text);
        if (tokens.size() != 1)
            throw ParseError("weight file rows must hold one value", line.number);
        values.push_back(parse_double(tokens[0], line.number));
    }
    if (static_cast<Eigen::Index>(values.size()) != areas.size())
        throw ValidationError("weight file has " + std::to_string(values.size()) +
                              " rows, input has " + std::to_string(areas.size()) + " points");
    WeightField wf;
    wf.area = areas;
    wf.weight.resize(areas.size());
    double norm = 0.0;
    for (Eigen::Index i = 0; i < areas.size(); ++i) {
        const double v = values[static_cast<std::size_t>(i)];
        if (!std::isfinite(v) || v < 0.0)
            throw ValidationError("weights must be finite and nonnegative (row " +
                                  std::to_string(i + 1) + ")");
        wf.weight[i] = values[static_cast<std::size_t>(i)];
        norm += wf.weight[i] * wf.area[i];
    }
    if (!(norm > 0.0)) throw ValidationError("weight file is identically zero");
    wf.weight /= norm; // keep the sum w nu = 1 convention
    return wf;
}

} // namespace detail

/// Load the input, resolve the weight field and bandwidth, and assemble the kernel.
inline PipelineData prepare_pipeline(const RunConfig& config) {
    config.validate();
    PipelineData data;

    std::string format = config.format;
    if (format == "auto") {
        if (auto mf = mesh_format_from_extension(config.input_path)) {
            format = *mf == MeshFormat::Off ? "off" : (*mf == MeshFormat::PlyAscii ? "ply" : "obj");
        } else if (auto cf = cloud_format_from_extension(config.input_path)) {
            format = *cf == CloudFormat::Xyz ? "xyz" : "csv";
        } else {
            throw ConfigError("cannot infer input format from '" + config.input_path +
                              "'; pass --format");
        }
    }
    data.format_resolved = format;

    if (format == "off" || format == "ply" || format == "obj") {
        const MeshFormat mf = format == "off" ? MeshFormat::Off
                              : format == "ply" ? MeshFormat::PlyAscii
                                                : MeshFormat::Obj;
        data.mesh = load_mesh(config.input_path, mf, &data.warnings);
        data.cloud = mesh_to_cloud(*data.mesh);
    } else if (format == "xyz" || format == "csv") {
        data.cloud = load_point_cloud(config.input_path,
                                      format == "xyz" ? CloudFormat::Xyz : CloudFormat::Csv);
    } else {
        throw ConfigError("unknown input format '" + format + "'");
    }

    if (config.num_landmarks > data.cloud.size())
        throw ValidationError("num-landmarks " + std::to_string(config.num_landmarks) +
                              " exceeds the number of input points " +
                              std::to_string(data.cloud.size()));

    data.epsilon_resolved = config.epsilon ? *config.epsilon : auto_bandwidth(data.cloud);

    if (config.kernel == KernelKind::Reweighted) {
        switch (config.weights) {
            case WeightSource::Curvature:
                if (data.mesh) {
                    const Eigen::VectorXd areas = voronoi_areas(*data.mesh);
                    data.weight_field = curvature_weight(discrete_curvatures(*data.mesh, areas),
                                                         areas, config.lambda, config.rho);
                } else {
                    data.weight_field = pointcloud_importance(data.cloud, config.knn);
                }
                break;
            case WeightSource::Uniform:
                data.weight_field = uniform_weights(data.cloud.size());
                break;
            case WeightSource::File: {
                const Eigen::VectorXd areas =
                    data.mesh ? voronoi_areas(*data.mesh)
                              : Eigen::VectorXd::Constant(data.cloud.size(),
                                                          1.0 / static_cast<double>(
                                                                    data.cloud.size()));
                data.weight_field = detail::weights_from_file(config.weights_file, areas);
                break;
            }
        }
    }

    data.kernel = build_kernel(data.cloud, config.kernel, data.epsilon_resolved,
                               data.weight_field ? &*data.weight_field : nullptr);
    return data;
}

inline Json manifest_json(const RunConfig& config, const PipelineData& data,
                          const std::string& command) {
    Json j;
    j["tool"] = "gplandmark";
    j["version"] = "0.1.0";
    j["command"] = command;
    j["input"] = {{"path", config.input_path},
                  {"format", data.format_resolved},
                  {"points", data.cloud.size()}};
    j["kernel"] = {{"kind", to_string(config.kernel)},
                   {"epsilon_requested", config.epsilon ? Json(*config.epsilon) : Json("auto")},
                   {"epsilon", data.epsilon_resolved}};
    j["weights"] = {{"source", to_string(config.weights)},
                    {"lambda", config.lambda},
                    {"rho", config.rho},
                    {"knn", config.knn},
                    {"file", config.weights_file}};
    j["landmarking"] = {{"num_landmarks", config.num_landmarks},
                        {"tolerance", config.tolerance},
                        {"tie_rule", to_string(config.tie)},
                        {"seed", config.seed}};
    j["emit"] = {{"trace", config.emit_trace},
                 {"mspe_field", config.emit_mspe},
                 {"plot", config.emit_plot},
                 {"report", config.emit_report}};
    j["threads"] = effective_threads();
    return j;
}

/// Reconstruct the run configuration recorded in a manifest (for `analyze --trace`).
inline RunConfig config_from_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open manifest: " + path);
    Json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid manifest JSON: ") + e.what());
    }
    RunConfig config;
    try {
        config.input_path = j.at("input").at("path").get<std::string>();
        config.format = j.at("input").at("format").get<std::string>();
        config.kernel = kernel_kind_from_string(j.at("kernel").at("kind").get<std::string>());
        config.epsilon = j.at("kernel").at("epsilon").get<double>();
        config.weights = weight_source_from_string(j.at("weights").at("source").get<std::string>());
        config.lambda = j.at("weights").at("lambda").get<double>();
        config.rho = j.at("weights").at("rho").get<double>();
        config.knn = j.at("weights").at("knn").get<Eigen::Index>();
        config.weights_file = j.at("weights").at("file").get<std::string>();
        config.num_landmarks = j.at("landmarking").at("num_landmarks").get<Eigen::Index>();
        config.tolerance = j.at("landmarking").at("tolerance").get<double>();
        config.tie = tie_rule_from_string(j.at("landmarking").at("tie_rule").get<std::string>());
        config.seed = j.at("landmarking").at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("manifest missing fields: ") + e.what());
    }
    return config;
}

struct RunResult {
    LandmarkTrace trace;
    double epsilon_resolved = 0.0;
    std::vector<std::string> warnings;
    std::vector<std::string> files_written;
};

/// The `run` pipeline: ingest, weight, assemble, landmark, and write artifacts.
inline RunResult run_landmark(const RunConfig& config) {
    PipelineData data = prepare_pipeline(config);
    namespace fs = std::filesystem;
    fs::create_directories(config.out_dir);

    RunResult result;
    result.epsilon_resolved = data.epsilon_resolved;
    result.warnings = data.warnings;
    result.trace = gp_landmark(data.kernel, config.num_landmarks, config.tolerance, config.tie,
                               config.seed);

    const TraceParams params{data.epsilon_resolved, config.lambda, config.rho, config.kernel,
                             config.tie};
    auto out = [&](const char* name) { return (fs::path(config.out_dir) / name).string(); };

    if (config.emit_trace) {
        write_trace_json(out("landmarks.json"), result.trace, params);
        write_trace_csv(out("landmarks.csv"), result.trace);
        result.files_written.push_back(out("landmarks.json"));
        result.files_written.push_back(out("landmarks.csv"));
    }
    if (config.emit_mspe) {
        write_mspe_csv(out("mspe_field.csv"), mspe_field(data.kernel, result.trace.selected));
        result.files_written.push_back(out("mspe_field.csv"));
    }
    if (config.emit_plot) {
        write_convergence_svg(out("convergence.svg"), result.trace);
        result.files_written.push_back(out("convergence.svg"));
    }
    if (config.emit_report) {
        AnalysisReport report;
        report.designs.push_back(design_report(data.kernel, data.cloud, result.trace.selected,
                                               DesignMethod::Greedy));
        write_report_json(out("report.json"), report);
        write_report_csv(out("report.csv"), report);
        result.files_written.push_back(out("report.json"));
        result.files_written.push_back(out("report.csv"));
    }
    write_text(out("run_manifest.json"), manifest_json(config, data, "run").dump(2) + "\n");
    result.files_written.push_back(out("run_manifest.json"));
    return result;
}

struct AnalyzeResult {
    AnalysisReport report;
    LandmarkTrace trace;
    std::vector<std::string> files_written;
};

/**
 * @brief The `analyze` pipeline: evaluate the greedy trace against baseline designs,
 * run the requested oracle bound checks and convergence fits, and write
 * report.json / report.csv / convergence.svg.
 */
inline AnalyzeResult run_analyze(const RunConfig& config, const AnalyzeOptions& options,
                                 std::optional<LandmarkTrace> trace = std::nullopt) {
    if (!options.bound_check_m.empty() && options.baselines < 1)
        throw ConfigError("oracle bound checks need at least one baseline candidate design");

    PipelineData data = prepare_pipeline(config);
    namespace fs = std::filesystem;
    fs::create_directories(config.out_dir);

    AnalyzeResult result;
    result.trace = trace ? std::move(*trace)
                         : gp_landmark(data.kernel, config.num_landmarks, config.tolerance,
                                       config.tie, config.seed);

    result.report.designs.push_back(
        design_report(data.kernel, data.cloud, result.trace.selected, DesignMethod::Greedy));

    for (const int m : options.bound_check_m) {
        const auto candidates = candidate_designs(data.cloud, m, options.baselines, config.seed);
        result.report.bound_checks.push_back(
            oracle_bound_check(data.kernel, result.trace, candidates, m));

        // record the m-sized designs behind the check: greedy prefix, best random, fps
        const std::vector<Eigen::Index> prefix(result.trace.selected.begin(),
                                               result.trace.selected.begin() + m);
        result.report.designs.push_back(
            design_report(data.kernel, data.cloud, prefix, DesignMethod::Greedy));
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_idx = 0;
        for (std::size_t c = 0; c + 1 < candidates.size(); ++c) {
            const double p = power_max(data.kernel, candidates[c]);
            if (p < best) {
                best = p;
                best_idx = c;
            }
        }
        result.report.designs.push_back(design_report(data.kernel, data.cloud,
                                                      candidates[best_idx], DesignMethod::Random,
                                                      config.seed + best_idx));
        result.report.designs.push_back(design_report(data.kernel, data.cloud, candidates.back(),
                                                      DesignMethod::Fps));
    }

    if (options.fit_range) {
        result.report.fits.push_back(convergence_fit(result.trace, options.fit_range->first,
                                                     options.fit_range->second,
                                                     options.fit_scale));
    }
    if (!options.fill_scaling_n.empty()) {
        result.report.fill_scaling = fill_scaling_check(data.cloud, options.fill_scaling_n);
    }

    auto out = [&](const char* name) { return (fs::path(config.out_dir) / name).string(); };
    write_report_json(out("report.json"), result.report);
    write_report_csv(out("report.csv"), result.report);
    std::optional<ConvergenceFit> overlay;
    if (!result.report.fits.empty()) overlay = result.report.fits.front();
    write_convergence_svg(out("convergence.svg"), result.trace, overlay);
    write_text(out("run_manifest.json"), manifest_json(config, data, "analyze").dump(2) + "\n");
    result.files_written = {out("report.json"), out("report.csv"), out("convergence.svg"),
                            out("run_manifest.json")};
    return result;
}

} // namespace gplandmark
