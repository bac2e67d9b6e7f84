#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "distq/core.hpp"

namespace distq {

/// Globally optimal weighted 1-D clustering into contiguous runs of the
/// sorted values.
struct Clustering1D {
    /// Split positions in sorted order: cluster c covers sorted positions
    /// [boundaries[c-1], boundaries[c]) with implicit 0 and n at the ends.
    std::vector<std::size_t> boundaries;
    /// Weighted mean of each run, increasing.
    std::vector<double> centers;
    /// Sum of w_j (v_j - center(a_j))^2, recomputed directly from the runs.
    double cost = 0.0;
    /// Cluster index of each input, in input order.
    std::vector<std::size_t> assignment;
    /// Permutation sorting the inputs (stable, by value).
    std::vector<std::size_t> order;
};

/// Exact weighted K-Means on the real line.
///
/// Clusters min(K, #distinct values) runs. Equal values never straddle a
/// boundary. Interval costs come from prefix sums of w, w*v and w*v^2, and
/// each DP layer is filled by divide and conquer over monotone split points,
/// so the run time is O(K n log n). Among equally good partitions the one
/// with the lexicographically smallest boundary sequence is returned.
///
/// Throws InvalidArgument for K < 1, empty input, mismatched lengths,
/// non-finite values or non-positive weights.
Clustering1D kmeans1d_weighted(std::span<const double> values, std::span<const double> weights,
                               std::size_t k);

/// Unit-weight convenience overload.
Clustering1D kmeans1d(std::span<const double> values, std::size_t k);

struct LloydOptions {
    std::uint64_t seed = 0;
    std::size_t restarts = 8;
    std::size_t max_iterations = 300;
};

struct LloydResult {
    /// Row k is center k.
    Matrix centers;
    std::vector<std::size_t> assignment;
    double cost = 0.0;
    /// K actually used; below the request when there were fewer distinct points.
    std::size_t k = 0;
    bool k_clamped = false;
    bool converged = false;
    std::size_t iterations = 0;
    /// Restart that produced this result.
    std::size_t restart = 0;
    /// Cost after each assignment step of the winning run.
    std::vector<double> cost_history;
};

/// Weighted Lloyd iteration from K-Means++ seeding, best of `restarts` runs.
///
/// Seeding for restart r draws from a 64-bit Mersenne Twister keyed by
/// (seed, r). Ties in assignment go to the lower center index. A cluster
/// that empties is reseeded at the point with the largest weighted squared
/// distance to its current center. The winner is the lowest cost run, then
/// the lowest restart index. K larger than the number of distinct points is
/// clamped to that number.
LloydResult weighted_lloyd(const Matrix& points, std::span<const double> weights, std::size_t k,
                           const LloydOptions& options = {});

/// A single Lloyd run from caller-provided initial centers.
LloydResult lloyd_from(const Matrix& points, std::span<const double> weights, Matrix initial_centers,
                       std::size_t max_iterations = 300);

/// Weighted K-Means++ seeding alone (exposed for tests and reproducibility).
Matrix kmeanspp_seed(const Matrix& points, std::span<const double> weights, std::size_t k,
                     std::uint64_t seed, std::size_t restart);

}  // namespace distq
