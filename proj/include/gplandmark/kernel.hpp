#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <utility>

#include <Eigen/Core>

#include "gplandmark/errors.hpp"
#include "gplandmark/geometry.hpp"
#include "gplandmark/mesh_io.hpp"

namespace gplandmark {

enum class KernelKind { Euclidean, Reweighted };
enum class JitterPolicy { None, Relative };

/**
 * @brief Dense symmetric kernel matrix on the sample points.
 *
 * Euclidean kind: K_ij = exp(-|x_i - x_j|^2 / bandwidth), unit diagonal.
 * Reweighted kind: K^w = A^T diag(w nu) A where A is the Euclidean kernel assembled
 * at bandwidth/2, which makes K^w positive semidefinite by construction. `bandwidth`
 * always stores the effective (user-facing) value. Symmetry is exact: the upper
 * triangle is mirrored from the lower at assembly time.
 */
struct KernelMatrix {
    Eigen::MatrixXd entries;
    Eigen::VectorXd diag; // cached copy of entries.diagonal()
    double bandwidth = 0.0;
    KernelKind kind = KernelKind::Euclidean;
    double jitter = 0.0; // diagonal shift recorded by psd_floor

    Eigen::Index size() const { return entries.rows(); }
    double max_diag() const { return diag.maxCoeff(); }
};

namespace detail {

inline void mirror_lower_to_upper(Eigen::MatrixXd& m) {
    const Eigen::Index n = m.rows();
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = j + 1; i < n; ++i) m(j, i) = m(i, j);
}

} // namespace detail

/// Default bandwidth: (0.1 * bounding-box diagonal)^2, so behaviour is scale invariant.
inline double auto_bandwidth(const PointCloud& cloud) {
    const Eigen::RowVectorXd lo = cloud.points.colwise().minCoeff();
    const Eigen::RowVectorXd hi = cloud.points.colwise().maxCoeff();
    const double diag = (hi - lo).norm();
    if (!(diag > 0.0)) throw InvalidBandwidth("degenerate point cloud: bounding box has no extent");
    const double eps = 0.01 * diag * diag;
    return eps;
}

/// K_ij = exp(-|x_i - x_j|^2 / eps).
inline KernelMatrix squared_exponential_kernel(const PointCloud& cloud, double eps) {
    if (!(eps > 0.0)) // also rejects NaN
        throw InvalidBandwidth("bandwidth must be a positive number");
    const Eigen::Index n = cloud.size();

    KernelMatrix K;
    K.bandwidth = eps;
    K.kind = KernelKind::Euclidean;
    K.entries.resize(n, n);

    const Eigen::VectorXd sq = cloud.points.rowwise().squaredNorm();
    Eigen::MatrixXd gram(n, n);
    gram.setZero();
    gram.selfadjointView<Eigen::Lower>().rankUpdate(cloud.points);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = j; i < n; ++i) {
            // squared distance with the cross term from the Gram matrix; clamp the
            // tiny negatives that cancellation can leave behind
            const double d2 = std::max(sq[i] + sq[j] - 2.0 * gram(i, j), 0.0);
            K.entries(i, j) = std::exp(-d2 / eps);
        }
    }
    detail::mirror_lower_to_upper(K.entries);
    K.entries.diagonal().setOnes();
    K.diag = K.entries.diagonal();
    return K;
}

/**
 * @brief Reweighted kernel K^w = K^T diag(w_k nu_k) K from a Euclidean kernel K.
 *
 * Callers wanting an effective bandwidth eps must assemble `inner` at eps/2;
 * build_kernel below does exactly that. The Gram form keeps the result PSD for any
 * nonnegative weight field.
 */
inline KernelMatrix reweighted_kernel(const KernelMatrix& inner, const WeightField& wf) {
    if (inner.kind != KernelKind::Euclidean)
        throw ValidationError("reweighted_kernel expects a Euclidean-kind kernel");
    const Eigen::Index n = inner.size();
    if (wf.weight.size() != n || wf.area.size() != n)
        throw DimensionMismatch("weight field length " + std::to_string(wf.weight.size()) +
                                " does not match kernel size " + std::to_string(n));

    const Eigen::VectorXd scale = (wf.weight.array() * wf.area.array()).sqrt();
    Eigen::MatrixXd half = scale.asDiagonal() * inner.entries; // rows scaled by sqrt(w nu)

    KernelMatrix K;
    K.bandwidth = 2.0 * inner.bandwidth;
    K.kind = KernelKind::Reweighted;
    K.entries.resize(n, n);
    K.entries.setZero();
    K.entries.selfadjointView<Eigen::Lower>().rankUpdate(half.transpose());
    detail::mirror_lower_to_upper(K.entries);
    K.diag = K.entries.diagonal();
    return K;
}

/// Wrap an existing symmetric matrix (e.g. a hand-built PSD Gram matrix) as a KernelMatrix.
inline KernelMatrix kernel_from_entries(Eigen::MatrixXd entries,
                                        KernelKind kind = KernelKind::Euclidean,
                                        double bandwidth = 0.0) {
    if (entries.rows() != entries.cols())
        throw DimensionMismatch("kernel matrix must be square");
    KernelMatrix K;
    K.entries = std::move(entries);
    K.diag = K.entries.diagonal();
    K.kind = kind;
    K.bandwidth = bandwidth;
    return K;
}

/// Relative policy adds 1e-12 * max_diag to the diagonal and records the shift; `none` is the identity.
inline KernelMatrix psd_floor(KernelMatrix K, JitterPolicy policy) {
    if (policy == JitterPolicy::Relative) {
        const double shift = 1e-12 * K.max_diag();
        K.entries.diagonal().array() += shift;
        K.diag = K.entries.diagonal();
        K.jitter += shift;
    }
    return K;
}

/// Assemble the requested kernel kind at the effective bandwidth (Reweighted uses inner factors at eps/2).
inline KernelMatrix build_kernel(const PointCloud& cloud, KernelKind kind, double eps,
                                 const WeightField* wf = nullptr) {
    if (kind == KernelKind::Euclidean) return squared_exponential_kernel(cloud, eps);
    if (!wf) throw ValidationError("reweighted kernel needs a weight field");
    return reweighted_kernel(squared_exponential_kernel(cloud, eps / 2.0), *wf);
}

// Binary dump layout: uint64 N, uint32 kind, float64 bandwidth, then N*N row-major float64.
inline void write_kernel_binary(const KernelMatrix& K, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path);
    const std::uint64_t n = static_cast<std::uint64_t>(K.size());
    const std::uint32_t kind = static_cast<std::uint32_t>(K.kind);
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    out.write(reinterpret_cast<const char*>(&kind), sizeof kind);
    out.write(reinterpret_cast<const char*>(&K.bandwidth), sizeof K.bandwidth);
    for (Eigen::Index i = 0; i < K.size(); ++i)
        for (Eigen::Index j = 0; j < K.size(); ++j) {
            const double v = K.entries(i, j);
            out.write(reinterpret_cast<const char*>(&v), sizeof v);
        }
}

inline KernelMatrix read_kernel_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::uint64_t n = 0;
    std::uint32_t kind = 0;
    KernelMatrix K;
    in.read(reinterpret_cast<char*>(&n), sizeof n);
    in.read(reinterpret_cast<char*>(&kind), sizeof kind);
    in.read(reinterpret_cast<char*>(&K.bandwidth), sizeof K.bandwidth);
    if (!in || kind > 1) throw ParseError("malformed kernel dump header");
    K.kind = static_cast<KernelKind>(kind);
    K.entries.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < K.size(); ++i)
        for (Eigen::Index j = 0; j < K.size(); ++j) {
            double v = 0.0;
            in.read(reinterpret_cast<char*>(&v), sizeof v);
            K.entries(i, j) = v;
        }
    if (!in) throw ParseError("kernel dump truncated");
    K.diag = K.entries.diagonal();
    return K;
}

} // namespace gplandmark
