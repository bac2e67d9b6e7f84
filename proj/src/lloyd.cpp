#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "distq/clustering.hpp"
#include "distq/errors.hpp"
#include "distq/parallel.hpp"

namespace distq {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sq_dist(std::span<const double> a, std::span<const double> b) noexcept {
    double acc = 0.0;
    for (std::size_t r = 0; r < a.size(); ++r) {
        const double d = a[r] - b[r];
        acc += d * d;
    }
    return acc;
}

// Uniform double in [0, 1) from the top 53 bits; avoids the
// implementation-defined std::uniform_real_distribution.
double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t count_distinct_rows(const Matrix& points) {
    std::vector<std::size_t> idx(points.rows());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    auto less = [&](std::size_t a, std::size_t b) {
        const auto ra = points.row(a);
        const auto rb = points.row(b);
        return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
    };
    std::sort(idx.begin(), idx.end(), less);
    std::size_t distinct = idx.empty() ? 0 : 1;
    for (std::size_t p = 1; p < idx.size(); ++p) {
        if (less(idx[p - 1], idx[p])) ++distinct;
    }
    return distinct;
}

void validate(const Matrix& points, std::span<const double> weights) {
    if (points.rows() == 0 || points.cols() == 0) {
        throw InvalidArgument("cannot cluster an empty point set");
    }
    if (weights.size() != points.rows()) {
        throw InvalidArgument("got " + std::to_string(points.rows()) + " points but " +
                              std::to_string(weights.size()) + " weights");
    }
    for (double w : weights) {
        if (!(w > 0.0) || !std::isfinite(w)) {
            throw InvalidArgument("weights must be finite and strictly positive");
        }
    }
    for (double v : points.data()) {
        if (!std::isfinite(v)) throw InvalidArgument("points must be finite");
    }
}

// One Lloyd run with Hamerly's bounds: upper bound on the distance to the
// assigned center, lower bound on the distance to every other center.
// Points whose bounds prove the assignment cannot change are skipped.
class LloydRun {
public:
    LloydRun(const Matrix& points, std::span<const double> weights, Matrix centers)
        : x_(points),
          w_(weights),
          c_(std::move(centers)),
          n_(points.rows()),
          k_(c_.rows()),
          d_(points.cols()),
          assign_(n_, 0),
          upper_(n_, kInf),
          lower_(n_, 0.0),
          half_gap_(k_, kInf),
          move_(k_, 0.0) {}

    LloydResult run(std::size_t max_iterations) {
        LloydResult out;
        assign_all();
        out.cost_history.push_back(cost());

        for (std::size_t it = 1; it <= max_iterations; ++it) {
            update_centers();
            const bool repaired = repair_empty();
            const std::size_t changed = repaired ? assign_all() : assign_bounded();
            out.cost_history.push_back(cost());
            out.iterations = it;
            if (changed == 0 && !repaired) {
                out.converged = true;
                break;
            }
        }
        if (!out.converged) {
            update_centers();
            out.cost_history.push_back(cost());
        }
        out.centers = c_;
        out.assignment = assign_;
        out.cost = cost();
        out.k = k_;
        return out;
    }

private:
    // Returns true when the assignment changed.
    bool assign_full(std::size_t j) {
        const auto x = x_.row(j);
        double best = kInf;
        double second = kInf;
        std::size_t best_c = 0;
        for (std::size_t c = 0; c < k_; ++c) {
            const double dist = sq_dist(x, c_.row(c));
            if (dist < best) {
                second = best;
                best = dist;
                best_c = c;
            } else if (dist < second) {
                second = dist;
            }
        }
        const bool changed = best_c != assign_[j];
        assign_[j] = best_c;
        upper_[j] = std::sqrt(best);
        lower_[j] = std::sqrt(second);
        return changed;
    }

    std::size_t assign_all() {
        std::size_t changed = 0;
        for (std::size_t j = 0; j < n_; ++j) changed += assign_full(j) ? 1 : 0;
        return changed;
    }

    std::size_t assign_bounded() {
        for (std::size_t c = 0; c < k_; ++c) {
            double nearest = kInf;
            for (std::size_t o = 0; o < k_; ++o) {
                if (o != c) nearest = std::min(nearest, sq_dist(c_.row(c), c_.row(o)));
            }
            half_gap_[c] = 0.5 * std::sqrt(nearest);
        }
        std::size_t changed = 0;
        for (std::size_t j = 0; j < n_; ++j) {
            const std::size_t a = assign_[j];
            const double bound = std::max(half_gap_[a], lower_[j]);
            if (upper_[j] < bound) continue;
            upper_[j] = std::sqrt(sq_dist(x_.row(j), c_.row(a)));
            if (upper_[j] < bound) continue;
            changed += assign_full(j) ? 1 : 0;
        }
        return changed;
    }

    void update_centers() {
        Matrix sums(k_, d_, 0.0);
        std::vector<double> mass(k_, 0.0);
        for (std::size_t j = 0; j < n_; ++j) {
            const std::size_t a = assign_[j];
            auto s = sums.row(a);
            const auto x = x_.row(j);
            for (std::size_t r = 0; r < d_; ++r) s[r] += w_[j] * x[r];
            mass[a] += w_[j];
        }
        double max1 = 0.0;
        double max2 = 0.0;
        std::size_t arg1 = 0;
        for (std::size_t c = 0; c < k_; ++c) {
            move_[c] = 0.0;
            if (mass[c] == 0.0) continue;
            auto center = c_.row(c);
            auto s = sums.row(c);
            double moved = 0.0;
            for (std::size_t r = 0; r < d_; ++r) {
                const double next = s[r] / mass[c];
                moved += (next - center[r]) * (next - center[r]);
                center[r] = next;
            }
            move_[c] = std::sqrt(moved);
            if (move_[c] > max1) {
                max2 = max1;
                max1 = move_[c];
                arg1 = c;
            } else if (move_[c] > max2) {
                max2 = move_[c];
            }
        }
        for (std::size_t j = 0; j < n_; ++j) {
            const std::size_t a = assign_[j];
            upper_[j] += move_[a];
            lower_[j] -= (a == arg1) ? max2 : max1;
        }
        empty_.clear();
        for (std::size_t c = 0; c < k_; ++c) {
            if (mass[c] == 0.0) empty_.push_back(c);
        }
    }

    bool repair_empty() {
        if (empty_.empty()) return false;
        std::vector<double> score(n_);
        for (std::size_t j = 0; j < n_; ++j) {
            score[j] = w_[j] * sq_dist(x_.row(j), c_.row(assign_[j]));
        }
        for (std::size_t e : empty_) {
            const auto far = static_cast<std::size_t>(
                std::max_element(score.begin(), score.end()) - score.begin());
            const auto x = x_.row(far);
            std::copy(x.begin(), x.end(), c_.row(e).begin());
            score[far] = -1.0;
        }
        return true;
    }

    double cost() const {
        double acc = 0.0;
        for (std::size_t j = 0; j < n_; ++j) {
            acc += w_[j] * sq_dist(x_.row(j), c_.row(assign_[j]));
        }
        return acc;
    }

    const Matrix& x_;
    std::span<const double> w_;
    Matrix c_;
    std::size_t n_;
    std::size_t k_;
    std::size_t d_;
    std::vector<std::size_t> assign_;
    std::vector<double> upper_;
    std::vector<double> lower_;
    std::vector<double> half_gap_;
    std::vector<double> move_;
    std::vector<std::size_t> empty_;
};

}  // namespace

Matrix kmeanspp_seed(const Matrix& points, std::span<const double> weights, std::size_t k,
                     std::uint64_t seed, std::size_t restart) {
    validate(points, weights);
    if (k < 1) throw InvalidArgument("number of clusters must be at least 1");
    const std::size_t n = points.rows();
    const std::uint64_t r = restart;
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(r >> 32)};
    std::mt19937_64 rng(seq);

    auto draw = [&](std::span<const double> mass) -> std::size_t {
        double total = 0.0;
        for (double m : mass) total += m;
        if (!(total > 0.0)) return n;
        const double target = unit_uniform(rng) * total;
        double cum = 0.0;
        std::size_t last_positive = n;
        for (std::size_t j = 0; j < n; ++j) {
            if (mass[j] <= 0.0) continue;
            cum += mass[j];
            last_positive = j;
            if (cum > target) return j;
        }
        return last_positive;
    };

    Matrix centers(k, points.cols());
    const std::size_t first = draw(weights);
    std::copy(points.row(first).begin(), points.row(first).end(), centers.row(0).begin());

    std::vector<double> dist(n);
    std::vector<double> mass(n);
    for (std::size_t j = 0; j < n; ++j) dist[j] = sq_dist(points.row(j), centers.row(0));
    for (std::size_t c = 1; c < k; ++c) {
        for (std::size_t j = 0; j < n; ++j) mass[j] = weights[j] * dist[j];
        const std::size_t pick = draw(mass);
        if (pick == n) {
            throw InvalidArgument("K-Means++ ran out of distinct points after " + std::to_string(c) +
                                  " centers");
        }
        std::copy(points.row(pick).begin(), points.row(pick).end(), centers.row(c).begin());
        for (std::size_t j = 0; j < n; ++j) {
            dist[j] = std::min(dist[j], sq_dist(points.row(j), centers.row(c)));
        }
    }
    return centers;
}

LloydResult lloyd_from(const Matrix& points, std::span<const double> weights, Matrix initial_centers,
                       std::size_t max_iterations) {
    validate(points, weights);
    if (initial_centers.rows() == 0) throw InvalidArgument("need at least one initial center");
    if (initial_centers.cols() != points.cols()) {
        throw DimensionError("initial centers have dimension " + std::to_string(initial_centers.cols()) +
                             ", points have " + std::to_string(points.cols()));
    }
    LloydRun run(points, weights, std::move(initial_centers));
    return run.run(max_iterations);
}

LloydResult weighted_lloyd(const Matrix& points, std::span<const double> weights, std::size_t k,
                           const LloydOptions& options) {
    validate(points, weights);
    if (k < 1) throw InvalidArgument("number of clusters must be at least 1");
    if (options.restarts < 1) throw InvalidArgument("restarts must be at least 1");

    const std::size_t distinct = count_distinct_rows(points);
    const std::size_t k_used = std::min(k, distinct);

    std::vector<LloydResult> runs(options.restarts);
    parallel_for(options.restarts, [&](std::size_t r) {
        runs[r] = lloyd_from(points, weights, kmeanspp_seed(points, weights, k_used, options.seed, r),
                             options.max_iterations);
        runs[r].restart = r;
    });

    std::size_t best = 0;
    for (std::size_t r = 1; r < runs.size(); ++r) {
        if (runs[r].cost < runs[best].cost) best = r;
    }
    LloydResult out = std::move(runs[best]);
    out.k_clamped = k_used < k;
    return out;
}

}  // namespace distq
