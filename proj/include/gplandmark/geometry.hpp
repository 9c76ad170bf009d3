#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "gplandmark/errors.hpp"
#include "gplandmark/mesh_io.hpp"

namespace gplandmark {

/** Per-vertex discrete curvatures: Gaussian kappa (length^-2) and scalar mean eta (length^-1). */
struct CurvatureField {
    Eigen::VectorXd gaussian;
    Eigen::VectorXd mean;
};

/** Per-vertex weight w >= 0 and Voronoi cell area nu > 0; the measure carried by the reweighted kernel. */
struct WeightField {
    Eigen::VectorXd weight;
    Eigen::VectorXd area;
};

namespace detail {

struct FaceCorners {
    // cotangent and angle at each corner, plus the face area
    std::array<double, 3> cot;
    std::array<double, 3> angle;
    double area;
    int obtuse_corner; // -1 when none
};

inline FaceCorners face_corners(const TriangleMesh& mesh, Eigen::Index f) {
    const Eigen::RowVector3d p0 = mesh.vertices.row(mesh.faces(f, 0));
    const Eigen::RowVector3d p1 = mesh.vertices.row(mesh.faces(f, 1));
    const Eigen::RowVector3d p2 = mesh.vertices.row(mesh.faces(f, 2));

    FaceCorners out{};
    out.obtuse_corner = -1;
    const std::array<Eigen::RowVector3d, 3> p{p0, p1, p2};
    for (int k = 0; k < 3; ++k) {
        const Eigen::RowVector3d u = p[static_cast<std::size_t>((k + 1) % 3)] -
                                     p[static_cast<std::size_t>(k)];
        const Eigen::RowVector3d v = p[static_cast<std::size_t>((k + 2) % 3)] -
                                     p[static_cast<std::size_t>(k)];
        const double cross = u.cross(v).norm();
        const double dot = u.dot(v);
        if (cross == 0.0)
            throw DegenerateGeometryError("face " + std::to_string(f) +
                                          " has zero area (collinear vertices)");
        out.cot[static_cast<std::size_t>(k)] = dot / cross;
        out.angle[static_cast<std::size_t>(k)] = std::atan2(cross, dot);
        if (dot < 0.0) out.obtuse_corner = k;
    }
    out.area = 0.5 * (p1 - p0).cross(p2 - p0).norm();
    return out;
}

// Undirected edge -> number of incident faces. Keys are (min,max) vertex pairs.
inline std::map<std::pair<Eigen::Index, Eigen::Index>, int>
edge_face_counts(const TriangleMesh& mesh) {
    std::map<std::pair<Eigen::Index, Eigen::Index>, int> counts;
    for (Eigen::Index f = 0; f < mesh.num_faces(); ++f) {
        for (int k = 0; k < 3; ++k) {
            Eigen::Index u = mesh.faces(f, k), v = mesh.faces(f, (k + 1) % 3);
            if (u > v) std::swap(u, v);
            ++counts[{u, v}];
        }
    }
    return counts;
}

} // namespace detail

/// Number of distinct undirected edges.
inline Eigen::Index mesh_edge_count(const TriangleMesh& mesh) {
    return static_cast<Eigen::Index>(detail::edge_face_counts(mesh).size());
}

/// Euler characteristic N - E + F.
inline Eigen::Index euler_characteristic(const TriangleMesh& mesh) {
    return mesh.num_vertices() - mesh_edge_count(mesh) + mesh.num_faces();
}

/**
 * @brief Per-vertex mixed Voronoi cell areas.
 *
 * Non-obtuse triangles contribute the circumcentric split
 * (|e_ij|^2 cot(angle_k) + |e_ik|^2 cot(angle_j)) / 8; obtuse triangles give half
 * their area to the obtuse corner and a quarter to each other corner. The per-vertex
 * cells therefore tile the surface: the areas sum exactly to the total face area.
 */
inline Eigen::VectorXd voronoi_areas(const TriangleMesh& mesh) {
    Eigen::VectorXd area = Eigen::VectorXd::Zero(mesh.num_vertices());
    for (Eigen::Index f = 0; f < mesh.num_faces(); ++f) {
        const auto corners = detail::face_corners(mesh, f);
        if (corners.obtuse_corner < 0) {
            for (int k = 0; k < 3; ++k) {
                const Eigen::Index i = mesh.faces(f, k);
                const Eigen::Index j = mesh.faces(f, (k + 1) % 3);
                const Eigen::Index l = mesh.faces(f, (k + 2) % 3);
                const double sq_ij =
                    (mesh.vertices.row(i) - mesh.vertices.row(j)).squaredNorm();
                const double sq_il =
                    (mesh.vertices.row(i) - mesh.vertices.row(l)).squaredNorm();
                area[i] += (sq_ij * corners.cot[static_cast<std::size_t>((k + 2) % 3)] +
                            sq_il * corners.cot[static_cast<std::size_t>((k + 1) % 3)]) /
                           8.0;
            }
        } else {
            for (int k = 0; k < 3; ++k)
                area[mesh.faces(f, k)] +=
                    corners.area * (k == corners.obtuse_corner ? 0.5 : 0.25);
        }
    }
    for (Eigen::Index i = 0; i < area.size(); ++i) {
        if (!(area[i] > 0.0))
            throw DegenerateGeometryError("vertex " + std::to_string(i) +
                                          " has nonpositive Voronoi area (isolated vertex?)");
    }
    return area;
}

/**
 * @brief Angle-deficit Gaussian curvature and cotangent-Laplacian mean curvature.
 *
 * kappa_i = (2*pi - sum of incident angles) / nu_i at interior vertices, with pi
 * replacing 2*pi on the boundary. eta_i = |sum_j (cot a_ij + cot b_ij)(x_i - x_j)| / (4 nu_i),
 * the half-norm of the mean-curvature normal; boundary vertices use the same sum
 * restricted to their incident faces.
 */
inline CurvatureField discrete_curvatures(const TriangleMesh& mesh, const Eigen::VectorXd& areas) {
    const Eigen::Index n = mesh.num_vertices();
    if (areas.size() != n)
        throw DimensionMismatch("area vector length " + std::to_string(areas.size()) +
                                " does not match vertex count " + std::to_string(n));

    Eigen::VectorXd angle_sum = Eigen::VectorXd::Zero(n);
    Eigen::MatrixX3d normal_sum = Eigen::MatrixX3d::Zero(n, 3);

    for (Eigen::Index f = 0; f < mesh.num_faces(); ++f) {
        const auto corners = detail::face_corners(mesh, f);
        for (int k = 0; k < 3; ++k) {
            angle_sum[mesh.faces(f, k)] += corners.angle[static_cast<std::size_t>(k)];
            // edge (k+1, k+2) is opposite corner k; its cotangent weights that edge
            const Eigen::Index a = mesh.faces(f, (k + 1) % 3);
            const Eigen::Index b = mesh.faces(f, (k + 2) % 3);
            const Eigen::RowVector3d d = mesh.vertices.row(a) - mesh.vertices.row(b);
            normal_sum.row(a) += corners.cot[static_cast<std::size_t>(k)] * d;
            normal_sum.row(b) -= corners.cot[static_cast<std::size_t>(k)] * d;
        }
    }

    std::vector<bool> on_boundary(static_cast<std::size_t>(n), false);
    for (const auto& [edge, count] : detail::edge_face_counts(mesh)) {
        if (count == 1) {
            on_boundary[static_cast<std::size_t>(edge.first)] = true;
            on_boundary[static_cast<std::size_t>(edge.second)] = true;
        }
    }

    CurvatureField curv;
    curv.gaussian.resize(n);
    curv.mean.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double full = on_boundary[static_cast<std::size_t>(i)] ? std::numbers::pi
                                                                     : 2.0 * std::numbers::pi;
        curv.gaussian[i] = (full - angle_sum[i]) / areas[i];
        curv.mean[i] = normal_sum.row(i).norm() / (4.0 * areas[i]);
        if (!std::isfinite(curv.gaussian[i]) || !std::isfinite(curv.mean[i]))
            throw DegenerateGeometryError("non-finite curvature at vertex " + std::to_string(i));
    }
    return curv;
}

inline CurvatureField discrete_curvatures(const TriangleMesh& mesh) {
    return discrete_curvatures(mesh, voronoi_areas(mesh));
}

/**
 * @brief Curvature-based weight field
 * w_i = lambda |kappa_i|^rho / sum_k |kappa_k|^rho nu_k
 *     + (1 - lambda) |eta_i|^rho / sum_k |eta_k|^rho nu_k,
 * so that sum_i w_i nu_i = 1 by construction. A term whose coefficient is nonzero
 * but whose curvatures all vanish has no normalization; that raises
 * AllZeroCurvatureError (e.g. a flat mesh with lambda > 0).
 */
inline WeightField curvature_weight(const CurvatureField& curv, const Eigen::VectorXd& areas,
                                    double lambda, double rho) {
    const Eigen::Index n = areas.size();
    if (curv.gaussian.size() != n || curv.mean.size() != n)
        throw DimensionMismatch("curvature and area vectors differ in length");
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw ValidationError("lambda must lie in [0, 1], got " + std::to_string(lambda));
    if (!(rho > 0.0)) throw ValidationError("rho must be positive, got " + std::to_string(rho));

    Eigen::VectorXd gauss_term = curv.gaussian.array().abs().pow(rho);
    Eigen::VectorXd mean_term = curv.mean.array().abs().pow(rho);

    double gauss_norm = 0.0, mean_norm = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        gauss_norm += gauss_term[i] * areas[i];
        mean_norm += mean_term[i] * areas[i];
    }
    if (lambda > 0.0 && !(gauss_norm > 0.0))
        throw AllZeroCurvatureError("Gaussian curvature vanishes identically; "
                                    "the lambda term cannot be normalized");
    if (lambda < 1.0 && !(mean_norm > 0.0))
        throw AllZeroCurvatureError("mean curvature vanishes identically; "
                                    "the (1 - lambda) term cannot be normalized");

    WeightField wf;
    wf.area = areas;
    wf.weight.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double w = 0.0;
        if (lambda > 0.0) w += lambda * gauss_term[i] / gauss_norm;
        if (lambda < 1.0) w += (1.0 - lambda) * mean_term[i] / mean_norm;
        wf.weight[i] = w;
    }
    return wf;
}

/// Uniform fallback: w = 1, nu = 1/N, so sum w nu = 1.
inline WeightField uniform_weights(Eigen::Index n) {
    WeightField wf;
    wf.weight = Eigen::VectorXd::Ones(n);
    wf.area = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    return wf;
}

/**
 * @brief Connectivity-free importance score for point clouds: PCA surface variation
 * over the k nearest neighbors (smallest covariance eigenvalue over the eigenvalue sum),
 * normalized against nu = 1/N so that sum w nu = 1.
 *
 * Variations below 1e-12 are treated as exactly flat; if every point is flat the
 * normalization is undefined and AllZeroCurvatureError is raised, matching the
 * flat-mesh behaviour of curvature_weight.
 */
inline WeightField pointcloud_importance(const PointCloud& cloud, Eigen::Index k) {
    const Eigen::Index n = cloud.size();
    const Eigen::Index dim = cloud.ambient_dim();
    if (k < 4) throw ValidationError("neighbor count must be at least 4, got " + std::to_string(k));
    if (k >= n)
        throw ValidationError("neighbor count " + std::to_string(k) +
                              " must be smaller than the cloud size " + std::to_string(n));

    Eigen::VectorXd variation(n);
    std::vector<std::pair<double, Eigen::Index>> dist(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j)
            dist[static_cast<std::size_t>(j)] = {
                (cloud.points.row(j) - cloud.points.row(i)).squaredNorm(), j};
        std::nth_element(dist.begin(), dist.begin() + k, dist.end());
        // neighborhood = the point itself plus its k nearest (self has distance 0)
        Eigen::MatrixXd nb(k + 1, dim);
        std::vector<std::pair<double, Eigen::Index>> nearest(dist.begin(), dist.begin() + k + 1);
        std::sort(nearest.begin(), nearest.end());
        for (Eigen::Index r = 0; r <= k; ++r)
            nb.row(r) = cloud.points.row(nearest[static_cast<std::size_t>(r)].second);

        const Eigen::RowVectorXd centroid = nb.colwise().mean();
        nb.rowwise() -= centroid;
        const Eigen::MatrixXd cov = nb.transpose() * nb / static_cast<double>(k + 1);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
        const double total = eig.eigenvalues().sum();
        if (!(total > 0.0))
            throw DegenerateNeighborhoodError("all neighbors of point " + std::to_string(i) +
                                              " coincide");
        double v = eig.eigenvalues().minCoeff() / total;
        if (v < 1e-12) v = 0.0;
        variation[i] = v;
    }

    const double nu = 1.0 / static_cast<double>(n);
    double norm = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) norm += variation[i] * nu;
    if (!(norm > 0.0))
        throw AllZeroCurvatureError("surface variation vanishes at every point "
                                    "(planar cloud); use uniform weights instead");

    WeightField wf;
    wf.area = Eigen::VectorXd::Constant(n, nu);
    wf.weight = variation / norm;
    return wf;
}

/// Debug dump: one CSV row per vertex with curvatures, Voronoi area, and weight.
inline void write_weight_csv(const std::string& path, const CurvatureField& curv,
                             const WeightField& wf) {
    std::string out = "vertex_index,kappa,eta,nu,w\n";
    char buf[160];
    for (Eigen::Index i = 0; i < wf.weight.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g,%.17g,%.17g\n",
                      static_cast<long long>(i), curv.gaussian[i], curv.mean[i], wf.area[i],
                      wf.weight[i]);
        out += buf;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot write file: " + path);
    file << out;
}

} // namespace gplandmark
