#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "gplandmark/errors.hpp"
#include "gplandmark/kernel.hpp"
#include "gplandmark/rng.hpp"

namespace gplandmark {

enum class StopReason { Budget, Tolerance };
enum class TieRule { LowestIndex, SeededRandom };

/// A pivot this far below max_diag (relatively) signals machine-precision rank exhaustion.
inline constexpr double kPivotFloorRel = 1e-12;

/**
 * @brief Result of a greedy landmarking run: the selected vertices in order and, for
 * each step, the maximum MSPE over the domain *before* that selection was made
 * (so sigma_history[0] is the maximum kernel diagonal).
 */
struct LandmarkTrace {
    std::vector<Eigen::Index> selected;
    std::vector<double> sigma_history;
    StopReason stop_reason = StopReason::Budget;
};

/**
 * @brief Incrementally maintained GP posterior for the greedy loop.
 *
 * `factor` grows one row per selection and is the Cholesky factor of the selected
 * submatrix; row i of `whitened` is the back-solved cross-covariance L^{-1} k_n(x_i),
 * so mspe[i] = K_ii - |whitened.row(i)|^2 at every step.
 */
struct PosteriorState {
    std::vector<Eigen::Index> selected;
    Eigen::MatrixXd factor;    // capacity x capacity, lower triangular in the top-left block
    Eigen::MatrixXd cross_cov; // N x capacity, K[:, selected] in the left block
    Eigen::MatrixXd whitened;  // N x capacity, back-solved cross-covariance
    Eigen::VectorXd mspe;      // current MSPE field (raw, maintained incrementally)

    Eigen::Index count() const { return static_cast<Eigen::Index>(selected.size()); }
};

/// Fresh posterior with no selections: the MSPE field is the kernel diagonal.
inline PosteriorState posterior_init(const KernelMatrix& K, Eigen::Index capacity) {
    PosteriorState state;
    state.factor.setZero(capacity, capacity);
    state.cross_cov.resize(K.size(), capacity);
    state.whitened.resize(K.size(), capacity);
    state.mspe = K.diag;
    state.selected.reserve(static_cast<std::size_t>(capacity));
    return state;
}

/**
 * @brief Fold one landmark into the posterior in O(N n) work.
 *
 * Appends the back-solved row of the new landmark plus the Schur pivot sqrt as a new
 * factor row, extends the whitened cross-covariance by one column, and downdates the
 * MSPE field by that column squared. Throws NumericalBreakdownError when the pivot
 * mspe[new_index] has fallen to (or below) the numerical-rank floor.
 */
inline void rank_one_update(PosteriorState& state, const KernelMatrix& K,
                            Eigen::Index new_index) {
    const Eigen::Index n = state.count();
    if (n >= state.factor.rows()) throw ValidationError("posterior capacity exhausted");
    for (const auto s : state.selected)
        if (s == new_index)
            throw ValidationError("vertex " + std::to_string(new_index) + " already selected");

    const double pivot = state.mspe[new_index];
    if (!(pivot > kPivotFloorRel * K.max_diag()))
        throw NumericalBreakdownError("pivot " + std::to_string(pivot) + " at vertex " +
                                      std::to_string(new_index) +
                                      " is at the numerical-rank floor");
    const double root = std::sqrt(pivot);

    state.cross_cov.col(n) = K.entries.col(new_index);
    if (n > 0) {
        const auto z_block = state.whitened.leftCols(n);
        state.whitened.col(n).noalias() =
            state.cross_cov.col(n) - z_block * z_block.row(new_index).transpose();
        state.whitened.col(n) /= root;
        state.factor.row(n).head(n) = z_block.row(new_index);
    } else {
        state.whitened.col(0) = state.cross_cov.col(0) / root;
    }
    state.factor(n, n) = root;
    state.mspe.array() -= state.whitened.col(n).array().square();
    state.selected.push_back(new_index);
}

/**
 * @brief MSPE field from scratch: Sigma(x_i) = K_ii - k_n^T K_nn^{-1} k_n via a fresh
 * Cholesky solve of the selected submatrix. Clamped to be nonnegative.
 */
inline Eigen::VectorXd mspe_field(const KernelMatrix& K,
                                  const std::vector<Eigen::Index>& selected) {
    if (selected.empty()) return K.diag;
    const Eigen::Index n = static_cast<Eigen::Index>(selected.size());

    Eigen::MatrixXd sub(n, n);
    Eigen::MatrixXd cross(K.size(), n);
    for (Eigen::Index a = 0; a < n; ++a) {
        cross.col(a) = K.entries.col(selected[static_cast<std::size_t>(a)]);
        for (Eigen::Index b = 0; b < n; ++b)
            sub(a, b) = K.entries(selected[static_cast<std::size_t>(a)],
                                  selected[static_cast<std::size_t>(b)]);
    }

    const Eigen::LLT<Eigen::MatrixXd> llt(sub);
    if (llt.info() != Eigen::Success)
        throw SingularSubmatrixError("selected submatrix of size " + std::to_string(n) +
                                     " is numerically singular");
    const Eigen::MatrixXd back =
        llt.matrixL().solve(cross.transpose()); // n x N, column i = L^{-1} k_n(x_i)
    Eigen::VectorXd sigma = K.diag - back.colwise().squaredNorm().transpose();
    return sigma.cwiseMax(0.0);
}

/// Argmax of the MSPE field; exact ties resolve to the lowest index.
inline Eigen::Index select_next(const Eigen::VectorXd& mspe) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < mspe.size(); ++i)
        if (mspe[i] > mspe[best]) best = i;
    return best;
}

/// Argmax with seeded-random resolution among exactly tied maxima.
inline Eigen::Index select_next(const Eigen::VectorXd& mspe, std::mt19937_64& gen) {
    const Eigen::Index first = select_next(mspe);
    std::vector<Eigen::Index> ties;
    for (Eigen::Index i = 0; i < mspe.size(); ++i)
        if (mspe[i] == mspe[first]) ties.push_back(i);
    if (ties.size() == 1) return ties.front();
    return ties[uniform_below(gen, ties.size())];
}

/**
 * @brief Greedy max-MSPE landmarking.
 *
 * Each step records sigma = max MSPE, selects the argmax (ties per `tie`), and folds
 * the landmark in with a rank-1 update. Stops after `budget` selections, when
 * max MSPE <= tolerance * max_diag, or when the pivot floor signals rank exhaustion
 * (reported as a tolerance stop).
 */
inline LandmarkTrace gp_landmark(const KernelMatrix& K, Eigen::Index budget,
                                 std::optional<double> tolerance = std::nullopt,
                                 TieRule tie = TieRule::LowestIndex, std::uint64_t seed = 0) {
    if (budget < 1) throw ValidationError("budget must be at least 1");
    if (budget > K.size())
        throw ValidationError("budget " + std::to_string(budget) + " exceeds the number of points " +
                              std::to_string(K.size()));
    if (tolerance && !(*tolerance >= 0.0)) throw ValidationError("tolerance must be nonnegative");

    const double max_diag = K.max_diag();
    std::mt19937_64 gen(seed);
    PosteriorState state = posterior_init(K, budget);
    LandmarkTrace trace;
    trace.stop_reason = StopReason::Budget;

    for (Eigen::Index step = 0; step < budget; ++step) {
        const Eigen::Index pick = tie == TieRule::LowestIndex ? select_next(state.mspe)
                                                              : select_next(state.mspe, gen);
        const double sigma = state.mspe[pick];
        if (tolerance && sigma <= *tolerance * max_diag) {
            trace.stop_reason = StopReason::Tolerance;
            break;
        }
        if (!(sigma > kPivotFloorRel * max_diag)) { // numerical rank exhausted
            trace.stop_reason = StopReason::Tolerance;
            break;
        }
        trace.sigma_history.push_back(sigma);
        rank_one_update(state, K, pick);
    }
    trace.selected = std::move(state.selected);
    return trace;
}

/** L steps of diagonally pivoted Cholesky: pivots plus the partial factor (N x steps). */
struct PivotedCholeskyResult {
    std::vector<Eigen::Index> pivots;
    Eigen::MatrixXd factor;
};

/**
 * @brief Right-looking pivoted Cholesky, pivoting on the largest Schur-complement
 * diagonal (ties to the lowest index). The Schur diagonal after n steps equals the
 * MSPE field given the first n pivots, which is what makes this the linear-algebra
 * twin of gp_landmark.
 */
inline PivotedCholeskyResult pivoted_cholesky(const KernelMatrix& K, Eigen::Index steps) {
    if (steps < 0 || steps > K.size())
        throw ValidationError("step count must lie in [0, N]");
    const double floor = kPivotFloorRel * K.max_diag();

    Eigen::MatrixXd schur = K.entries;
    std::vector<bool> used(static_cast<std::size_t>(K.size()), false);
    PivotedCholeskyResult result;
    result.factor.setZero(K.size(), steps);
    result.pivots.reserve(static_cast<std::size_t>(steps));

    for (Eigen::Index k = 0; k < steps; ++k) {
        Eigen::Index pivot = -1;
        for (Eigen::Index i = 0; i < K.size(); ++i) {
            if (used[static_cast<std::size_t>(i)]) continue;
            if (pivot < 0 || schur(i, i) > schur(pivot, pivot)) pivot = i;
        }
        if (pivot < 0 || !(schur(pivot, pivot) > floor))
            throw NumericalBreakdownError("nonpositive pivot at step " + std::to_string(k) +
                                          ": numerical rank exhausted");
        const double root = std::sqrt(schur(pivot, pivot));
        result.factor.col(k) = schur.col(pivot) / root;
        schur.noalias() -= result.factor.col(k) * result.factor.col(k).transpose();
        used[static_cast<std::size_t>(pivot)] = true;
        result.pivots.push_back(pivot);
    }
    return result;
}

/**
 * @brief Simple-kriging best linear predictor: Y*(x) = k_n(x)^T K_nn^{-1} Y_n
 * evaluated at each query index (zero prior mean, noiseless observations).
 */
inline Eigen::VectorXd blp_predict(const KernelMatrix& K,
                                   const std::vector<Eigen::Index>& selected,
                                   const Eigen::VectorXd& observations,
                                   const std::vector<Eigen::Index>& queries) {
    const Eigen::Index n = static_cast<Eigen::Index>(selected.size());
    if (observations.size() != n)
        throw DimensionMismatch("observations length " + std::to_string(observations.size()) +
                                " does not match design size " + std::to_string(n));
    if (n == 0) throw EmptyDesignError("cannot predict from an empty design");

    Eigen::MatrixXd sub(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b)
            sub(a, b) = K.entries(selected[static_cast<std::size_t>(a)],
                                  selected[static_cast<std::size_t>(b)]);
    const Eigen::LLT<Eigen::MatrixXd> llt(sub);
    if (llt.info() != Eigen::Success)
        throw SingularSubmatrixError("selected submatrix of size " + std::to_string(n) +
                                     " is numerically singular");
    const Eigen::VectorXd alpha = llt.solve(observations);

    Eigen::VectorXd out(static_cast<Eigen::Index>(queries.size()));
    for (std::size_t q = 0; q < queries.size(); ++q) {
        double acc = 0.0;
        for (Eigen::Index a = 0; a < n; ++a)
            acc += K.entries(queries[q], selected[static_cast<std::size_t>(a)]) * alpha[a];
        out[static_cast<Eigen::Index>(q)] = acc;
    }
    return out;
}

} // namespace gplandmark
