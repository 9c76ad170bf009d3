#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gplandmark/errors.hpp"
#include "gplandmark/kernel.hpp"
#include "gplandmark/landmarking.hpp"
#include "gplandmark/mesh_io.hpp"
#include "gplandmark/rng.hpp"

namespace gplandmark {

enum class DesignMethod { Greedy, Random, Fps, Grid };
enum class FitScale { LogLog, SemiLog };

/** Per-design metrics for baseline comparisons. */
struct DesignReport {
    std::vector<Eigen::Index> design;
    double max_mspe = 0.0;      // squared power function maximum over the domain
    double fill_distance = 0.0; // worst-case distance to the nearest design point
    DesignMethod method = DesignMethod::Greedy;
    std::optional<std::uint64_t> seed;
};

/** Least-squares line through (log n or n, log sigma) over a trace window. */
struct ConvergenceFit {
    int n_min = 0;
    int n_max = 0;
    double slope = 0.0;     // in natural-log coordinates
    double intercept = 0.0;
    double r_squared = 0.0;
    FitScale scale = FitScale::LogLog;
    int excluded = 0; // nonpositive sigmas dropped from the window (at most 10%)
};

struct BoundCheck {
    int m = 0;
    double lhs = 0.0;        // max MSPE of the greedy 2m-prefix
    double rhs = 0.0;        // 2 sqrt(max_diag) sqrt(best candidate power)
    double best_power = 0.0; // tightest empirical upper bound on the m-point oracle
    bool pass = false;
};

struct FillScalingReport {
    std::vector<int> n_values;
    std::vector<double> fill;    // h_n for the FPS design of each size
    std::vector<double> product; // h_n * n^(1/d)
    bool flagged = false;        // true if the product grew > 25% over its first value
};

/// Maximum of the squared power function (equivalently the MSPE field) for a design.
inline double power_max(const KernelMatrix& K, const std::vector<Eigen::Index>& design) {
    return mspe_field(K, design).maxCoeff();
}

/// Fill distance h_X = max over points of the distance to the nearest design point (ambient metric).
inline double fill_distance(const PointCloud& cloud, const std::vector<Eigen::Index>& design) {
    if (design.empty()) throw EmptyDesignError("fill distance of an empty design is unbounded");
    double h = 0.0;
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto j : design)
            nearest = std::min(nearest, (cloud.points.row(i) - cloud.points.row(j)).norm());
        h = std::max(h, nearest);
    }
    return h;
}

/**
 * @brief Baseline designs: `Random` draws n distinct indices from the seeded generator;
 * `Fps` is farthest point sampling seeded at index 0, each step adding the point with
 * the largest distance to the chosen set (ties to the lowest index).
 */
inline std::vector<Eigen::Index> baseline_design(const PointCloud& cloud, DesignMethod method,
                                                 Eigen::Index n, std::uint64_t seed = 0) {
    if (n < 1 || n > cloud.size())
        throw ValidationError("design size " + std::to_string(n) + " must lie in [1, " +
                              std::to_string(cloud.size()) + "]");
    if (method == DesignMethod::Random) {
        std::mt19937_64 gen(seed);
        return sample_without_replacement(gen, cloud.size(), n);
    }
    if (method != DesignMethod::Fps)
        throw ValidationError("baseline_design supports random and fps methods");

    std::vector<Eigen::Index> design;
    design.reserve(static_cast<std::size_t>(n));
    Eigen::VectorXd nearest =
        Eigen::VectorXd::Constant(cloud.size(), std::numeric_limits<double>::infinity());
    Eigen::Index next = 0; // lowest index starts the sampling
    for (Eigen::Index step = 0; step < n; ++step) {
        design.push_back(next);
        for (Eigen::Index i = 0; i < cloud.size(); ++i)
            nearest[i] =
                std::min(nearest[i], (cloud.points.row(i) - cloud.points.row(next)).norm());
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < cloud.size(); ++i)
            if (nearest[i] > nearest[best]) best = i;
        next = best;
    }
    return design;
}

/// Evaluate one design into a DesignReport.
inline DesignReport design_report(const KernelMatrix& K, const PointCloud& cloud,
                                  std::vector<Eigen::Index> design, DesignMethod method,
                                  std::optional<std::uint64_t> seed = std::nullopt) {
    DesignReport report;
    report.max_mspe = power_max(K, design);
    report.fill_distance = fill_distance(cloud, design);
    report.design = std::move(design);
    report.method = method;
    report.seed = seed;
    return report;
}

/**
 * @brief Check the compact greedy-vs-oracle inequality at size m:
 * the greedy max MSPE after 2m selections must not exceed
 * 2 (max_diag)^(1/2) (min over candidate m-designs of the max power)^(1/2).
 *
 * Any candidate design upper-bounds the m-point oracle error, so a correct
 * implementation always passes; a failure indicates a bug.
 */
inline BoundCheck oracle_bound_check(const KernelMatrix& K, const LandmarkTrace& trace,
                                     const std::vector<std::vector<Eigen::Index>>& candidates,
                                     int m) {
    if (m < 1) throw ValidationError("m must be at least 1");
    if (static_cast<int>(trace.selected.size()) < 2 * m)
        throw ValidationError("greedy trace of length " + std::to_string(trace.selected.size()) +
                              " is too short for a 2m = " + std::to_string(2 * m) + " prefix");
    if (candidates.empty())
        throw ConfigError("oracle bound check needs at least one candidate design");

    BoundCheck check;
    check.m = m;
    const std::vector<Eigen::Index> prefix(trace.selected.begin(),
                                           trace.selected.begin() + 2 * m);
    check.lhs = power_max(K, prefix);

    double best = std::numeric_limits<double>::infinity();
    for (const auto& design : candidates) {
        if (static_cast<int>(design.size()) != m)
            throw ValidationError("candidate design size " + std::to_string(design.size()) +
                                  " does not match m = " + std::to_string(m));
        best = std::min(best, power_max(K, design));
    }
    check.best_power = best;
    check.rhs = 2.0 * std::sqrt(K.max_diag()) * std::sqrt(best);
    check.pass = check.lhs <= check.rhs;
    return check;
}

/// The standard candidate pool for the bound check: `n_random` seeded random designs plus one FPS design.
inline std::vector<std::vector<Eigen::Index>> candidate_designs(const PointCloud& cloud, int m,
                                                                int n_random,
                                                                std::uint64_t seed) {
    std::vector<std::vector<Eigen::Index>> designs;
    designs.reserve(static_cast<std::size_t>(n_random) + 1);
    for (int r = 0; r < n_random; ++r)
        designs.push_back(baseline_design(cloud, DesignMethod::Random, m,
                                          seed + static_cast<std::uint64_t>(r)));
    designs.push_back(baseline_design(cloud, DesignMethod::Fps, m));
    return designs;
}

/**
 * @brief Ordinary least squares on the trace window n in [n_min, n_max] (1-based over
 * sigma_history): log sigma_n against log n (loglog) or against n (semilog).
 * Nonpositive sigmas are dropped with a warning when they are at most 10% of the
 * window, otherwise NonpositiveSigmaError.
 */
inline ConvergenceFit convergence_fit(const LandmarkTrace& trace, int n_min, int n_max,
                                      FitScale scale = FitScale::LogLog) {
    if (n_min < 1 || n_min >= n_max)
        throw ValidationError("fit range must satisfy 1 <= n_min < n_max");
    if (n_max > static_cast<int>(trace.sigma_history.size()))
        throw ValidationError("fit range end " + std::to_string(n_max) +
                              " exceeds the trace length " +
                              std::to_string(trace.sigma_history.size()));

    std::vector<double> xs, ys;
    int excluded = 0;
    for (int n = n_min; n <= n_max; ++n) {
        const double sigma = trace.sigma_history[static_cast<std::size_t>(n - 1)];
        if (!(sigma > 0.0)) {
            ++excluded;
            continue;
        }
        xs.push_back(scale == FitScale::LogLog ? std::log(static_cast<double>(n))
                                               : static_cast<double>(n));
        ys.push_back(std::log(sigma));
    }
    const int total = n_max - n_min + 1;
    if (excluded > 0 && 10 * excluded > total)
        throw NonpositiveSigmaError(std::to_string(excluded) + " of " + std::to_string(total) +
                                    " sigma values in the fit window are nonpositive");
    if (xs.size() < 2)
        throw NonpositiveSigmaError("fewer than two usable sigma values in the fit window");

    const double count = static_cast<double>(xs.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / count, my = sy / count;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (!(sxx > 0.0)) throw ValidationError("degenerate fit window: constant abscissa");

    ConvergenceFit fit;
    fit.n_min = n_min;
    fit.n_max = n_max;
    fit.scale = scale;
    fit.excluded = excluded;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (syy > 0.0) {
        double ss_res = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
            ss_res += r * r;
        }
        fit.r_squared = 1.0 - ss_res / syy;
    } else {
        fit.r_squared = 1.0; // constant data, perfectly matched by the constant line
    }
    return fit;
}

/**
 * @brief Empirical fill-distance scaling: FPS designs at each requested size, reporting
 * h_n * n^(1/d). Flags the report when the product grows by more than 25% over its
 * value at the smallest n.
 */
inline FillScalingReport fill_scaling_check(const PointCloud& cloud, std::vector<int> n_values,
                                            int intrinsic_dim = 2) {
    if (n_values.empty()) throw ValidationError("fill scaling check needs at least one size");
    if (intrinsic_dim < 1) throw ValidationError("intrinsic dimension must be positive");
    std::sort(n_values.begin(), n_values.end());

    FillScalingReport report;
    report.n_values = n_values;
    for (const int n : n_values) {
        const auto design = baseline_design(cloud, DesignMethod::Fps, n);
        const double h = fill_distance(cloud, design);
        report.fill.push_back(h);
        report.product.push_back(h * std::pow(static_cast<double>(n),
                                              1.0 / static_cast<double>(intrinsic_dim)));
    }
    const double base = report.product.front();
    for (const double p : report.product)
        if (p > 1.25 * base) report.flagged = true;
    return report;
}

} // namespace gplandmark
