#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "gplandmark/mesh_io.hpp"
#include "gplandmark/rng.hpp"

namespace gplandmark {

// Deterministic generators for the meshes and point sets used in tests and demos.

/// Regular icosahedron with the given circumradius.
inline TriangleMesh icosahedron(double radius = 1.0) {
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    const double scale = radius / std::sqrt(1.0 + phi * phi);
    const double a = scale, b = phi * scale;

    TriangleMesh mesh;
    mesh.vertices.resize(12, 3);
    mesh.vertices << -a, b, 0, a, b, 0, -a, -b, 0, a, -b, 0,
                      0, -a, b, 0, a, b, 0, -a, -b, 0, a, -b,
                      b, 0, -a, b, 0, a, -b, 0, -a, -b, 0, a;
    mesh.faces.resize(20, 3);
    mesh.faces << 0, 11, 5, 0, 5, 1, 0, 1, 7, 0, 7, 10, 0, 10, 11,
                  1, 5, 9, 5, 11, 4, 11, 10, 2, 10, 7, 6, 7, 1, 8,
                  3, 9, 4, 3, 4, 2, 3, 2, 6, 3, 6, 8, 3, 8, 9,
                  4, 9, 5, 2, 4, 11, 6, 2, 10, 8, 6, 7, 9, 8, 1;
    return mesh;
}

/**
 * @brief Icosphere: icosahedron subdivided `subdivisions` times, vertices projected
 * to the sphere of the given radius. N = 10 * 4^s + 2.
 */
inline TriangleMesh icosphere(int subdivisions, double radius = 1.0) {
    TriangleMesh mesh = icosahedron(radius);
    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> midpoint;
        std::vector<Eigen::RowVector3d> vertices;
        vertices.reserve(static_cast<std::size_t>(mesh.num_vertices()));
        for (Eigen::Index i = 0; i < mesh.num_vertices(); ++i)
            vertices.push_back(mesh.vertices.row(i));

        auto midpoint_index = [&](int u, int v) {
            const auto key = std::minmax(u, v);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            Eigen::RowVector3d m = 0.5 * (vertices[static_cast<std::size_t>(u)] +
                                          vertices[static_cast<std::size_t>(v)]);
            m *= radius / m.norm();
            const int idx = static_cast<int>(vertices.size());
            vertices.push_back(m);
            midpoint.emplace(key, idx);
            return idx;
        };

        std::vector<std::array<int, 3>> faces;
        faces.reserve(static_cast<std::size_t>(4 * mesh.num_faces()));
        for (Eigen::Index f = 0; f < mesh.num_faces(); ++f) {
            const int a = mesh.faces(f, 0), b = mesh.faces(f, 1), c = mesh.faces(f, 2);
            const int ab = midpoint_index(a, b), bc = midpoint_index(b, c), ca = midpoint_index(c, a);
            faces.push_back({a, ab, ca});
            faces.push_back({b, bc, ab});
            faces.push_back({c, ca, bc});
            faces.push_back({ab, bc, ca});
        }

        mesh.vertices.resize(static_cast<Eigen::Index>(vertices.size()), 3);
        for (std::size_t i = 0; i < vertices.size(); ++i)
            mesh.vertices.row(static_cast<Eigen::Index>(i)) = vertices[i];
        mesh.faces.resize(static_cast<Eigen::Index>(faces.size()), 3);
        for (std::size_t i = 0; i < faces.size(); ++i)
            for (int k = 0; k < 3; ++k)
                mesh.faces(static_cast<Eigen::Index>(i), k) = faces[i][static_cast<std::size_t>(k)];
    }
    return mesh;
}

/// Closed genus-1 torus: nu x nv parametric grid, major radius R, minor radius r.
inline TriangleMesh torus_mesh(int nu, int nv, double major_radius = 1.0,
                               double minor_radius = 0.35) {
    TriangleMesh mesh;
    mesh.vertices.resize(static_cast<Eigen::Index>(nu) * nv, 3);
    for (int i = 0; i < nu; ++i) {
        const double u = 2.0 * std::numbers::pi * i / nu;
        for (int j = 0; j < nv; ++j) {
            const double v = 2.0 * std::numbers::pi * j / nv;
            const double w = major_radius + minor_radius * std::cos(v);
            mesh.vertices.row(static_cast<Eigen::Index>(i) * nv + j)
                << w * std::cos(u), w * std::sin(u), minor_radius * std::sin(v);
        }
    }
    mesh.faces.resize(static_cast<Eigen::Index>(2) * nu * nv, 3);
    Eigen::Index f = 0;
    for (int i = 0; i < nu; ++i) {
        const int i1 = (i + 1) % nu;
        for (int j = 0; j < nv; ++j) {
            const int j1 = (j + 1) % nv;
            const int a = i * nv + j, b = i1 * nv + j, c = i1 * nv + j1, d = i * nv + j1;
            mesh.faces.row(f++) << a, b, c;
            mesh.faces.row(f++) << a, c, d;
        }
    }
    return mesh;
}

/**
 * @brief Planar grid over [0,1]^2 with nx * ny cells; `height` lifts each (x, y) to z.
 * Defaults to the flat patch z = 0.
 */
template <typename HeightFn>
TriangleMesh grid_mesh(int nx, int ny, HeightFn&& height) {
    TriangleMesh mesh;
    const int vx = nx + 1, vy = ny + 1;
    mesh.vertices.resize(static_cast<Eigen::Index>(vx) * vy, 3);
    for (int i = 0; i < vx; ++i) {
        for (int j = 0; j < vy; ++j) {
            const double x = static_cast<double>(i) / nx;
            const double y = static_cast<double>(j) / ny;
            mesh.vertices.row(static_cast<Eigen::Index>(i) * vy + j) << x, y, height(x, y);
        }
    }
    mesh.faces.resize(static_cast<Eigen::Index>(2) * nx * ny, 3);
    Eigen::Index f = 0;
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            const int a = i * vy + j, b = (i + 1) * vy + j, c = (i + 1) * vy + j + 1,
                      d = i * vy + j + 1;
            mesh.faces.row(f++) << a, b, c;
            mesh.faces.row(f++) << a, c, d;
        }
    }
    return mesh;
}

inline TriangleMesh grid_mesh(int nx, int ny) {
    return grid_mesh(nx, ny, [](double, double) { return 0.0; });
}

/// Jitter every vertex by a uniform offset in [-magnitude, magnitude]^3 (seeded, deterministic).
inline TriangleMesh perturbed(TriangleMesh mesh, double magnitude, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    for (Eigen::Index i = 0; i < mesh.num_vertices(); ++i)
        for (int k = 0; k < 3; ++k)
            mesh.vertices(i, k) += uniform_in(gen, -magnitude, magnitude);
    return mesh;
}

/// Uniform random points in [0,1]^dim.
inline PointCloud random_cloud(Eigen::Index n, int dim, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    PointCloud cloud;
    cloud.points.resize(n, dim);
    for (Eigen::Index i = 0; i < n; ++i)
        for (int k = 0; k < dim; ++k) cloud.points(i, k) = uniform_unit(gen);
    return cloud;
}

/**
 * @brief Random samples on a smooth closed surface in R^3: a sphere whose radius is
 * modulated by low-order spherical harmonics, so curvature varies over the surface.
 */
inline PointCloud random_surface_cloud(Eigen::Index n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    PointCloud cloud;
    cloud.points.resize(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double theta = std::acos(1.0 - 2.0 * uniform_unit(gen));
        const double phi = 2.0 * std::numbers::pi * uniform_unit(gen);
        const double r = 1.0 + 0.25 * std::sin(3.0 * theta) * std::cos(2.0 * phi);
        cloud.points.row(i) << r * std::sin(theta) * std::cos(phi),
                               r * std::sin(theta) * std::sin(phi),
                               r * std::cos(theta);
    }
    return cloud;
}

} // namespace gplandmark
