#pragma once

// Test-only oracles, kept independent of the implementation paths they check.

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "gplandmark/kernel.hpp"
#include "gplandmark/rng.hpp"

namespace oracles {

/**
 * Posterior maintained through the explicit block matrix inversion formula:
 * the inverse covariance grows one bordered row/column at a time with
 * mu = 1 / (K(x_n, x_n) - P^T K_{n-1}^{-1} P). This is the classic rank-1 view of
 * the update and serves as an independent check of the Cholesky-based posterior.
 */
class BlockInverseGp {
public:
    void add(const gplandmark::KernelMatrix& K, Eigen::Index index) {
        const Eigen::Index n = static_cast<Eigen::Index>(selected_.size());
        if (n == 0) {
            inverse_.resize(1, 1);
            inverse_(0, 0) = 1.0 / K.entries(index, index);
        } else {
            Eigen::VectorXd p(n);
            for (Eigen::Index a = 0; a < n; ++a)
                p[a] = K.entries(selected_[static_cast<std::size_t>(a)], index);
            const Eigen::VectorXd ip = inverse_ * p;
            const double mu = 1.0 / (K.entries(index, index) - p.dot(ip));
            Eigen::MatrixXd grown(n + 1, n + 1);
            grown.topLeftCorner(n, n) = inverse_ + mu * ip * ip.transpose();
            grown.topRightCorner(n, 1) = -mu * ip;
            grown.bottomLeftCorner(1, n) = -mu * ip.transpose();
            grown(n, n) = mu;
            inverse_ = std::move(grown);
        }
        selected_.push_back(index);
    }

    Eigen::VectorXd mspe(const gplandmark::KernelMatrix& K) const {
        const Eigen::Index n = static_cast<Eigen::Index>(selected_.size());
        Eigen::VectorXd sigma(K.size());
        for (Eigen::Index i = 0; i < K.size(); ++i) {
            Eigen::VectorXd k(n);
            for (Eigen::Index a = 0; a < n; ++a)
                k[a] = K.entries(i, selected_[static_cast<std::size_t>(a)]);
            sigma[i] = K.entries(i, i) - k.dot(inverse_ * k);
        }
        return sigma;
    }

    const std::vector<Eigen::Index>& selected() const { return selected_; }

private:
    Eigen::MatrixXd inverse_;
    std::vector<Eigen::Index> selected_;
};

/// Random symmetric PSD matrix G G^T / n from a seeded normal matrix.
inline gplandmark::KernelMatrix random_psd(Eigen::Index n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    Eigen::MatrixXd g(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) g(i, j) = gplandmark::standard_normal(gen);
    Eigen::MatrixXd psd = g * g.transpose() / static_cast<double>(n);
    psd = ((psd + psd.transpose()) / 2.0).eval();
    return gplandmark::kernel_from_entries(std::move(psd));
}

/// Uniformly random rotation from a normalized random quaternion.
inline Eigen::Matrix3d random_rotation(std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    Eigen::Vector4d q;
    for (int i = 0; i < 4; ++i) q[i] = gplandmark::standard_normal(gen);
    q.normalize();
    const double w = q[0], x = q[1], y = q[2], z = q[3];
    Eigen::Matrix3d r;
    r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
         2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
         2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return r;
}

} // namespace oracles
