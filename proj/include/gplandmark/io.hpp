#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gplandmark/analysis.hpp"
#include "gplandmark/errors.hpp"
#include "gplandmark/kernel.hpp"
#include "gplandmark/landmarking.hpp"

namespace gplandmark {

// All writers here are deterministic: key order is fixed, doubles use shortest
// round-trip formatting (JSON) or %.17g (CSV/SVG), and nothing records wall time.

using Json = nlohmann::ordered_json;

/** Run parameters echoed into the trace artifact so it is self-describing. */
struct TraceParams {
    double epsilon = 0.0;
    double lambda = 0.5;
    double rho = 1.0;
    KernelKind kernel_kind = KernelKind::Reweighted;
    TieRule tie_rule = TieRule::LowestIndex;
};

inline const char* to_string(KernelKind kind) {
    return kind == KernelKind::Euclidean ? "euclidean" : "reweighted";
}
inline const char* to_string(TieRule rule) {
    return rule == TieRule::LowestIndex ? "lowest_index" : "seeded_random";
}
inline const char* to_string(StopReason reason) {
    return reason == StopReason::Budget ? "budget" : "tolerance";
}
inline const char* to_string(DesignMethod method) {
    switch (method) {
        case DesignMethod::Greedy: return "greedy";
        case DesignMethod::Random: return "random";
        case DesignMethod::Fps: return "fps";
        case DesignMethod::Grid: return "grid";
    }
    return "greedy";
}
inline const char* to_string(FitScale scale) {
    return scale == FitScale::LogLog ? "loglog" : "semilog";
}

inline KernelKind kernel_kind_from_string(const std::string& s) {
    if (s == "euclidean") return KernelKind::Euclidean;
    if (s == "reweighted") return KernelKind::Reweighted;
    throw ConfigError("unknown kernel kind '" + s + "'");
}
inline TieRule tie_rule_from_string(const std::string& s) {
    if (s == "lowest_index" || s == "lowest") return TieRule::LowestIndex;
    if (s == "seeded_random" || s == "random") return TieRule::SeededRandom;
    throw ConfigError("unknown tie rule '" + s + "'");
}
inline StopReason stop_reason_from_string(const std::string& s) {
    if (s == "budget") return StopReason::Budget;
    if (s == "tolerance") return StopReason::Tolerance;
    throw ConfigError("unknown stop reason '" + s + "'");
}

inline void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path);
    out << content;
}

inline std::string format_full(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

// ---------------------------------------------------------------------------
// landmark trace
// ---------------------------------------------------------------------------

inline Json trace_to_json(const LandmarkTrace& trace, const TraceParams& params) {
    Json j;
    j["selected"] = trace.selected;
    j["sigma_history"] = trace.sigma_history;
    j["stop_reason"] = to_string(trace.stop_reason);
    j["params"] = {{"epsilon", params.epsilon},
                   {"lambda", params.lambda},
                   {"rho", params.rho},
                   {"kernel_kind", to_string(params.kernel_kind)},
                   {"tie_rule", to_string(params.tie_rule)}};
    return j;
}

inline void write_trace_json(const std::string& path, const LandmarkTrace& trace,
                             const TraceParams& params) {
    write_text(path, trace_to_json(trace, params).dump(2) + "\n");
}

inline std::pair<LandmarkTrace, TraceParams> read_trace_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    Json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid trace JSON: ") + e.what());
    }
    LandmarkTrace trace;
    TraceParams params;
    try {
        trace.selected = j.at("selected").get<std::vector<Eigen::Index>>();
        trace.sigma_history = j.at("sigma_history").get<std::vector<double>>();
        trace.stop_reason = stop_reason_from_string(j.at("stop_reason").get<std::string>());
        const auto& p = j.at("params");
        params.epsilon = p.at("epsilon").get<double>();
        params.lambda = p.at("lambda").get<double>();
        params.rho = p.at("rho").get<double>();
        params.kernel_kind = kernel_kind_from_string(p.at("kernel_kind").get<std::string>());
        params.tie_rule = tie_rule_from_string(p.at("tie_rule").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("trace JSON missing fields: ") + e.what());
    }
    return {std::move(trace), params};
}

inline void write_trace_csv(const std::string& path, const LandmarkTrace& trace) {
    std::string out = "step,vertex_index,sigma\n";
    for (std::size_t i = 0; i < trace.selected.size(); ++i) {
        out += std::to_string(i + 1) + "," + std::to_string(trace.selected[i]) + "," +
               format_full(trace.sigma_history[i]) + "\n";
    }
    write_text(path, out);
}

inline void write_mspe_csv(const std::string& path, const Eigen::VectorXd& mspe) {
    std::string out = "vertex_index,mspe\n";
    for (Eigen::Index i = 0; i < mspe.size(); ++i)
        out += std::to_string(i) + "," + format_full(mspe[i]) + "\n";
    write_text(path, out);
}

// ---------------------------------------------------------------------------
// analysis report
// ---------------------------------------------------------------------------

struct AnalysisReport {
    std::vector<DesignReport> designs;
    std::vector<BoundCheck> bound_checks;
    std::vector<ConvergenceFit> fits;
    std::optional<FillScalingReport> fill_scaling;
};

inline Json report_to_json(const AnalysisReport& report) {
    Json j;
    j["designs"] = Json::array();
    for (const auto& d : report.designs) {
        Json jd;
        jd["method"] = to_string(d.method);
        jd["size"] = d.design.size();
        if (d.seed) jd["seed"] = *d.seed;
        else jd["seed"] = nullptr;
        jd["max_mspe"] = d.max_mspe;
        jd["fill_distance"] = d.fill_distance;
        jd["design"] = d.design;
        j["designs"].push_back(std::move(jd));
    }
    j["bound_checks"] = Json::array();
    for (const auto& b : report.bound_checks) {
        j["bound_checks"].push_back({{"m", b.m},
                                     {"lhs", b.lhs},
                                     {"rhs", b.rhs},
                                     {"best_power", b.best_power},
                                     {"pass", b.pass}});
    }
    j["fits"] = Json::array();
    for (const auto& f : report.fits) {
        j["fits"].push_back({{"scale", to_string(f.scale)},
                             {"n_min", f.n_min},
                             {"n_max", f.n_max},
                             {"slope", f.slope},
                             {"intercept", f.intercept},
                             {"r_squared", f.r_squared},
                             {"excluded", f.excluded}});
    }
    if (report.fill_scaling) {
        Json js;
        js["n"] = report.fill_scaling->n_values;
        js["fill_distance"] = report.fill_scaling->fill;
        js["product"] = report.fill_scaling->product;
        js["flagged"] = report.fill_scaling->flagged;
        j["fill_scaling"] = std::move(js);
    }
    return j;
}

inline void write_report_json(const std::string& path, const AnalysisReport& report) {
    write_text(path, report_to_json(report).dump(2) + "\n");
}

inline void write_report_csv(const std::string& path, const AnalysisReport& report) {
    std::string out;
    out += "# designs\nmethod,size,seed,max_mspe,fill_distance\n";
    for (const auto& d : report.designs) {
        out += std::string(to_string(d.method)) + "," + std::to_string(d.design.size()) + ",";
        if (d.seed) out += std::to_string(*d.seed);
        out += "," + format_full(d.max_mspe) + "," + format_full(d.fill_distance) + "\n";
    }
    out += "# bound_checks\nm,lhs,rhs,best_power,pass\n";
    for (const auto& b : report.bound_checks) {
        out += std::to_string(b.m) + "," + format_full(b.lhs) + "," + format_full(b.rhs) + "," +
               format_full(b.best_power) + "," + (b.pass ? "true" : "false") + "\n";
    }
    out += "# fits\nscale,n_min,n_max,slope,intercept,r_squared,excluded\n";
    for (const auto& f : report.fits) {
        out += std::string(to_string(f.scale)) + "," + std::to_string(f.n_min) + "," +
               std::to_string(f.n_max) + "," + format_full(f.slope) + "," +
               format_full(f.intercept) + "," + format_full(f.r_squared) + "," +
               std::to_string(f.excluded) + "\n";
    }
    if (report.fill_scaling) {
        out += "# fill_scaling\nn,fill_distance,product\n";
        for (std::size_t i = 0; i < report.fill_scaling->n_values.size(); ++i) {
            out += std::to_string(report.fill_scaling->n_values[i]) + "," +
                   format_full(report.fill_scaling->fill[i]) + "," +
                   format_full(report.fill_scaling->product[i]) + "\n";
        }
    }
    write_text(path, out);
}

// ---------------------------------------------------------------------------
// convergence plot (native SVG, no plotting dependency)
// ---------------------------------------------------------------------------

namespace detail {

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline std::string svg_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

} // namespace detail

/**
 * @brief Line chart of log10 sigma_n against log10 n, with the fitted line overlaid
 * when a loglog fit is supplied. Pure SVG primitives, deterministic output.
 */
inline void write_convergence_svg(const std::string& path, const LandmarkTrace& trace,
                                  const std::optional<ConvergenceFit>& fit = std::nullopt) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < trace.sigma_history.size(); ++i) {
        if (trace.sigma_history[i] > 0.0) {
            xs.push_back(std::log10(static_cast<double>(i + 1)));
            ys.push_back(std::log10(trace.sigma_history[i]));
        }
    }
    const double width = 720, height = 480, margin = 64;
    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"480\" "
                      "viewBox=\"0 0 720 480\">\n<rect width=\"720\" height=\"480\" "
                      "fill=\"white\"/>\n";
    if (xs.size() >= 2) {
        double xlo = xs.front(), xhi = xs.front(), ylo = ys.front(), yhi = ys.front();
        for (std::size_t i = 0; i < xs.size(); ++i) {
            xlo = std::min(xlo, xs[i]);
            xhi = std::max(xhi, xs[i]);
            ylo = std::min(ylo, ys[i]);
            yhi = std::max(yhi, ys[i]);
        }
        if (xhi == xlo) xhi = xlo + 1;
        if (yhi == ylo) yhi = ylo + 1;
        const double xpad = 0.05 * (xhi - xlo), ypad = 0.05 * (yhi - ylo);
        xlo -= xpad; xhi += xpad; ylo -= ypad; yhi += ypad;
        auto px = [&](double x) { return margin + (x - xlo) / (xhi - xlo) * (width - 2 * margin); };
        auto py = [&](double y) {
            return height - margin - (y - ylo) / (yhi - ylo) * (height - 2 * margin);
        };

        // axes and ticks
        svg += "<g stroke=\"black\" fill=\"none\">\n";
        svg += "<line x1=\"" + detail::svg_num(margin) + "\" y1=\"" +
               detail::svg_num(height - margin) + "\" x2=\"" + detail::svg_num(width - margin) +
               "\" y2=\"" + detail::svg_num(height - margin) + "\"/>\n";
        svg += "<line x1=\"" + detail::svg_num(margin) + "\" y1=\"" + detail::svg_num(margin) +
               "\" x2=\"" + detail::svg_num(margin) + "\" y2=\"" +
               detail::svg_num(height - margin) + "\"/>\n</g>\n";
        svg += "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"black\">\n";
        for (int t = 0; t <= 4; ++t) {
            const double xv = xlo + (xhi - xlo) * t / 4.0;
            const double yv = ylo + (yhi - ylo) * t / 4.0;
            svg += "<text x=\"" + detail::svg_num(px(xv) - 10) + "\" y=\"" +
                   detail::svg_num(height - margin + 18) + "\">" + detail::svg_label(xv) +
                   "</text>\n";
            svg += "<text x=\"" + detail::svg_num(margin - 54) + "\" y=\"" +
                   detail::svg_num(py(yv) + 4) + "\">" + detail::svg_label(yv) + "</text>\n";
        }
        svg += "<text x=\"" + detail::svg_num(width / 2 - 30) + "\" y=\"" +
               detail::svg_num(height - 16) + "\">log10 n</text>\n";
        svg += "<text x=\"8\" y=\"" + detail::svg_num(height / 2) +
               "\" transform=\"rotate(-90 14 " + detail::svg_num(height / 2) +
               ")\">log10 sigma</text>\n</g>\n";

        svg += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (i) svg += ' ';
            svg += detail::svg_num(px(xs[i])) + "," + detail::svg_num(py(ys[i]));
        }
        svg += "\"/>\n";

        if (fit && fit->scale == FitScale::LogLog) {
            const double ln10 = std::log(10.0);
            auto fit_y = [&](double log10n) {
                return (fit->intercept + fit->slope * log10n * ln10) / ln10;
            };
            const double fx0 = std::log10(static_cast<double>(fit->n_min));
            const double fx1 = std::log10(static_cast<double>(fit->n_max));
            svg += "<line stroke=\"#d62728\" stroke-width=\"1.5\" stroke-dasharray=\"6,4\" x1=\"" +
                   detail::svg_num(px(fx0)) + "\" y1=\"" + detail::svg_num(py(fit_y(fx0))) +
                   "\" x2=\"" + detail::svg_num(px(fx1)) + "\" y2=\"" +
                   detail::svg_num(py(fit_y(fx1))) + "\"/>\n";
            svg += "<text font-family=\"sans-serif\" font-size=\"12\" fill=\"#d62728\" x=\"" +
                   detail::svg_num(width - margin - 180) + "\" y=\"" + detail::svg_num(margin) +
                   "\">slope " + detail::svg_label(fit->slope) + ", R^2 " +
                   detail::svg_label(fit->r_squared) + "</text>\n";
        }
    } else {
        svg += "<text font-family=\"sans-serif\" font-size=\"14\" x=\"40\" y=\"40\">"
               "not enough positive sigma values to plot</text>\n";
    }
    svg += "</svg>\n";
    write_text(path, svg);
}

} // namespace gplandmark
