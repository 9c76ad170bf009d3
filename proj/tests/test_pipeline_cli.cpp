#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "gplandmark/pipeline.hpp"
#include "gplandmark/synthetic.hpp"

using namespace gplandmark;

namespace {

namespace fs = std::filesystem;

fs::path work_dir() {
    const auto dir = fs::temp_directory_path() / "gplandmark_tests" / "pipeline";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string sphere_off() {
    const auto path = work_dir() / "sphere.off";
    if (!fs::exists(path)) write_off(icosphere(3), path.string());
    return path.string();
}

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string(GPLANDMARK_CLI_PATH) + " " + args + " >" + log.string() +
                            " 2>" + log.string() + ".err";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

} // namespace

TEST_CASE("run_landmark writes trace artifacts and resolves epsilon") {
    RunConfig config;
    config.input_path = sphere_off();
    config.num_landmarks = 12;
    config.out_dir = (work_dir() / "run_lib").string();
    config.emit_plot = true;
    config.emit_mspe = true;

    const RunResult result = run_landmark(config);
    CHECK(result.trace.selected.size() == 12);
    CHECK(result.epsilon_resolved == Catch::Approx(0.12).epsilon(1e-12));
    for (const char* name : {"landmarks.json", "landmarks.csv", "mspe_field.csv",
                             "convergence.svg", "run_manifest.json"})
        CHECK(fs::exists(fs::path(config.out_dir) / name));

    for (std::size_t i = 1; i < result.trace.sigma_history.size(); ++i)
        CHECK(result.trace.sigma_history[i] <= result.trace.sigma_history[i - 1] + 1e-10);

    const auto [trace, params] = read_trace_json(
        (fs::path(config.out_dir) / "landmarks.json").string());
    CHECK(trace.selected == result.trace.selected);
    CHECK(params.epsilon == result.epsilon_resolved);
    CHECK(params.kernel_kind == KernelKind::Reweighted);
}

TEST_CASE("run_landmark is byte-deterministic for a fixed seed") {
    RunConfig config;
    config.input_path = sphere_off();
    config.num_landmarks = 8;
    config.seed = 42;
    config.tie = TieRule::SeededRandom;
    config.out_dir = (work_dir() / "det").string();

    run_landmark(config);
    const std::string first = slurp(fs::path(config.out_dir) / "landmarks.json");
    const std::string first_manifest = slurp(fs::path(config.out_dir) / "run_manifest.json");
    run_landmark(config);
    CHECK(slurp(fs::path(config.out_dir) / "landmarks.json") == first);
    CHECK(slurp(fs::path(config.out_dir) / "run_manifest.json") == first_manifest);
}

TEST_CASE("config validation catches bad budgets and parameters") {
    RunConfig config;
    config.input_path = sphere_off();
    config.out_dir = (work_dir() / "bad").string();

    config.num_landmarks = 100000; // icosphere(3) has 642 vertices
    CHECK_THROWS_AS(run_landmark(config), ValidationError);

    config.num_landmarks = 5;
    config.lambda = 1.5;
    CHECK_THROWS_AS(run_landmark(config), ConfigError);

    config.lambda = 0.5;
    config.rho = -1.0;
    CHECK_THROWS_AS(run_landmark(config), ConfigError);
}

TEST_CASE("run_analyze produces reports, bound checks, and fits") {
    RunConfig config;
    config.input_path = sphere_off();
    config.num_landmarks = 30;
    config.kernel = KernelKind::Euclidean;
    config.out_dir = (work_dir() / "analyze_lib").string();

    AnalyzeOptions options;
    options.baselines = 40;
    options.bound_check_m = {5, 10};
    options.fit_range = {{5, 30}};

    const AnalyzeResult result = run_analyze(config, options);
    REQUIRE(result.report.bound_checks.size() == 2);
    for (const auto& check : result.report.bound_checks) {
        CHECK(check.pass);
        CHECK(check.lhs <= check.rhs);
    }
    REQUIRE(result.report.fits.size() == 1);
    CHECK(result.report.fits[0].slope < 0.0);
    CHECK(result.report.designs.size() == 1 + 2 * 3); // greedy full + 3 designs per m
    for (const char* name : {"report.json", "report.csv", "convergence.svg"})
        CHECK(fs::exists(fs::path(config.out_dir) / name));
}

TEST_CASE("bound checks without candidates are a config error") {
    RunConfig config;
    config.input_path = sphere_off();
    config.num_landmarks = 20;
    config.out_dir = (work_dir() / "analyze_bad").string();
    AnalyzeOptions options;
    options.baselines = 0;
    options.bound_check_m = {5};
    CHECK_THROWS_AS(run_analyze(config, options), ConfigError);
}

TEST_CASE("cli run produces artifacts and identical reruns") {
    const auto out = work_dir() / "cli_run";
    fs::remove_all(out);
    const std::string args = "run --input " + sphere_off() +
                             " --format off --kernel reweighted --epsilon auto --lambda 0.5 "
                             "--rho 1.0 --num-landmarks 10 --tolerance 0 --tie lowest --seed 42 "
                             "--out " + out.string() + " --emit trace,plot";
    REQUIRE(run_cli(args, work_dir() / "cli_run.log") == 0);
    CHECK(fs::exists(out / "landmarks.json"));
    CHECK(fs::exists(out / "landmarks.csv"));
    CHECK(fs::exists(out / "convergence.svg"));
    CHECK(fs::exists(out / "run_manifest.json"));

    const std::string trace_bytes = slurp(out / "landmarks.json");
    const std::string manifest_bytes = slurp(out / "run_manifest.json");
    REQUIRE(run_cli(args, work_dir() / "cli_run2.log") == 0);
    CHECK(slurp(out / "landmarks.json") == trace_bytes);
    CHECK(slurp(out / "run_manifest.json") == manifest_bytes);

    const auto [trace, params] = read_trace_json((out / "landmarks.json").string());
    CHECK(trace.selected.size() == 10);
    CHECK(params.tie_rule == TieRule::LowestIndex);
}

TEST_CASE("cli analyze reuses a trace through its manifest") {
    const auto run_out = work_dir() / "cli_for_analyze";
    fs::remove_all(run_out);
    REQUIRE(run_cli("run --input " + sphere_off() + " --num-landmarks 24 --kernel euclidean "
                    "--out " + run_out.string(),
                    work_dir() / "cli_an0.log") == 0);

    const auto analyze_out = work_dir() / "cli_analyze";
    fs::remove_all(analyze_out);
    const int code = run_cli("analyze --trace " + (run_out / "landmarks.json").string() +
                             " --baselines 30 --bound-check 4,8 --fit 4:24 --out " +
                             analyze_out.string(),
                             work_dir() / "cli_an1.log");
    REQUIRE(code == 0);
    CHECK(fs::exists(analyze_out / "report.json"));
    CHECK(fs::exists(analyze_out / "report.csv"));
    CHECK(fs::exists(analyze_out / "convergence.svg"));
    const std::string report = slurp(analyze_out / "report.json");
    CHECK(report.find("\"pass\": true") != std::string::npos);
}

TEST_CASE("cli maps error classes to exit codes with one-line messages") {
    SECTION("bad budget -> validation error, exit 2") {
        const int code = run_cli("run --input " + sphere_off() +
                                 " --num-landmarks 100000 --out " +
                                 (work_dir() / "err1").string(),
                                 work_dir() / "cli_err1.log");
        CHECK(code == 2);
        const std::string err = slurp(work_dir() / "cli_err1.log.err");
        CHECK(err.rfind("gplandmark: error: ValidationError:", 0) == 0);
    }
    SECTION("malformed input -> parse error, exit 3") {
        const auto bad = work_dir() / "broken.off";
        std::ofstream(bad) << "OFF\n5 1 0\n0 0 0\n3 0 1 2\n";
        const int code = run_cli("run --input " + bad.string() + " --num-landmarks 2 --out " +
                                 (work_dir() / "err2").string(),
                                 work_dir() / "cli_err2.log");
        CHECK(code == 3);
        const std::string err = slurp(work_dir() / "cli_err2.log.err");
        CHECK(err.rfind("gplandmark: error: ParseError:", 0) == 0);
    }
    SECTION("baselines 0 with bound check -> config error, exit 2") {
        const int code = run_cli("analyze --input " + sphere_off() +
                                 " --num-landmarks 10 --baselines 0 --bound-check 5 --out " +
                                 (work_dir() / "err3").string(),
                                 work_dir() / "cli_err3.log");
        CHECK(code == 2);
    }
}

TEST_CASE("point-cloud inputs run through the importance weights") {
    const auto xyz = work_dir() / "cloud.xyz";
    write_xyz(random_surface_cloud(160, 5), xyz.string());

    RunConfig config;
    config.input_path = xyz.string();
    config.num_landmarks = 10;
    config.knn = 8;
    config.out_dir = (work_dir() / "cloud_run").string();
    const RunResult result = run_landmark(config);
    CHECK(result.trace.selected.size() == 10);

    // uniform weights are accepted as the fallback
    config.weights = WeightSource::Uniform;
    config.out_dir = (work_dir() / "cloud_uniform").string();
    CHECK(run_landmark(config).trace.selected.size() == 10);
}

TEST_CASE("weight files feed the reweighted kernel after renormalization") {
    const TriangleMesh mesh = icosphere(2);
    const auto weights_path = work_dir() / "weights.txt";
    {
        std::ofstream out(weights_path);
        for (Eigen::Index i = 0; i < mesh.num_vertices(); ++i)
            out << (i % 3 == 0 ? "2.0" : "0.5") << "\n";
    }
    const auto mesh_path = work_dir() / "weighted.off";
    write_off(mesh, mesh_path.string());

    RunConfig config;
    config.input_path = mesh_path.string();
    config.num_landmarks = 6;
    config.weights = WeightSource::File;
    config.weights_file = weights_path.string();
    config.out_dir = (work_dir() / "file_weights").string();
    CHECK(run_landmark(config).trace.selected.size() == 6);

    // wrong row count is rejected
    std::ofstream(weights_path) << "1.0\n2.0\n";
    CHECK_THROWS_AS(run_landmark(config), ValidationError);
}
