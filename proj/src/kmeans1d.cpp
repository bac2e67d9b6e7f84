#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>

#include "distq/clustering.hpp"
#include "distq/errors.hpp"

namespace distq {
namespace {

// Prefix sums over distinct sorted values. Values are shifted by their
// weighted mean before accumulation to limit cancellation in the
// variance-style interval cost.
class IntervalCost {
public:
    IntervalCost(std::span<const double> values, std::span<const double> weights) {
        const std::size_t g = values.size();
        long double wsum = 0.0L;
        long double wvsum = 0.0L;
        for (std::size_t i = 0; i < g; ++i) {
            wsum += weights[i];
            wvsum += static_cast<long double>(weights[i]) * values[i];
        }
        const long double shift = wvsum / wsum;

        w_.assign(g + 1, 0.0L);
        s1_.assign(g + 1, 0.0L);
        s2_.assign(g + 1, 0.0L);
        for (std::size_t i = 0; i < g; ++i) {
            const long double v = static_cast<long double>(values[i]) - shift;
            const long double w = weights[i];
            w_[i + 1] = w_[i] + w;
            s1_[i + 1] = s1_[i] + w * v;
            s2_[i + 1] = s2_[i] + w * v * v;
        }
    }

    /// Weighted squared deviation of groups [a, b) from their mean; a < b.
    long double operator()(std::size_t a, std::size_t b) const noexcept {
        const long double w = w_[b] - w_[a];
        const long double s1 = s1_[b] - s1_[a];
        const long double c = (s2_[b] - s2_[a]) - s1 * s1 / w;
        return c > 0.0L ? c : 0.0L;
    }

private:
    std::vector<long double> w_;
    std::vector<long double> s1_;
    std::vector<long double> s2_;
};

struct LayerSolver {
    const IntervalCost& cost;
    const std::vector<long double>& prev;
    std::vector<long double>& cur;
    std::uint32_t* split;  // argmin row for this layer, indexed by end position

    // Fills cur[i] for i in [lo, hi], knowing the smallest optimal split for
    // those ends lies in [opt_lo, opt_hi].
    void solve(std::size_t lo, std::size_t hi, std::size_t opt_lo, std::size_t opt_hi) {
        if (lo > hi) return;
        const std::size_t mid = lo + (hi - lo) / 2;
        const std::size_t last = std::min(mid - 1, opt_hi);
        long double best = std::numeric_limits<long double>::infinity();
        std::size_t best_j = opt_lo;
        for (std::size_t j = opt_lo; j <= last; ++j) {
            const long double c = prev[j] + cost(j, mid);
            if (c < best) {
                best = c;
                best_j = j;
            }
        }
        cur[mid] = best;
        split[mid] = static_cast<std::uint32_t>(best_j);
        if (mid > lo) solve(lo, mid - 1, opt_lo, best_j);
        solve(mid + 1, hi, best_j, opt_hi);
    }
};

}  // namespace

Clustering1D kmeans1d_weighted(std::span<const double> values, std::span<const double> weights,
                               std::size_t k) {
    if (k < 1) throw InvalidArgument("number of clusters must be at least 1");
    if (values.empty()) throw InvalidArgument("cannot cluster an empty set of values");
    if (values.size() != weights.size()) {
        throw InvalidArgument("got " + std::to_string(values.size()) + " values but " +
                              std::to_string(weights.size()) + " weights");
    }
    if (values.size() > std::numeric_limits<std::uint32_t>::max()) {
        throw InvalidArgument("too many values for 1-D clustering");
    }
    for (std::size_t j = 0; j < values.size(); ++j) {
        if (!std::isfinite(values[j])) throw InvalidArgument("values must be finite");
        if (!(weights[j] > 0.0) || !std::isfinite(weights[j])) {
            throw InvalidArgument("weights must be finite and strictly positive");
        }
    }

    const std::size_t n = values.size();
    Clustering1D out;
    out.order.resize(n);
    std::iota(out.order.begin(), out.order.end(), std::size_t{0});
    std::stable_sort(out.order.begin(), out.order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    // Collapse equal values into groups.
    std::vector<double> gv;
    std::vector<double> gw;
    std::vector<std::size_t> gstart;
    for (std::size_t p = 0; p < n; ++p) {
        const double v = values[out.order[p]];
        const double w = weights[out.order[p]];
        if (gv.empty() || gv.back() != v) {
            gv.push_back(v);
            gw.push_back(w);
            gstart.push_back(p);
        } else {
            gw.back() += w;
        }
    }
    const std::size_t g = gv.size();
    const std::size_t kk = std::min(k, g);

    // Group-level split points: cluster c covers groups [gsplit[c], gsplit[c+1]).
    std::vector<std::size_t> gsplit{0};
    if (kk > 1) {
        const IntervalCost cost(gv, gw);
        // split[(layer - 2) * (g + 1) + end] for layers 2..kk.
        std::vector<std::uint32_t> split((kk - 1) * (g + 1), 0);
        std::vector<long double> prev(g + 1, std::numeric_limits<long double>::infinity());
        std::vector<long double> cur(g + 1, std::numeric_limits<long double>::infinity());
        // Layer 1: only ends that leave room for the remaining kk-1 clusters.
        for (std::size_t i = 1; i <= g - (kk - 1); ++i) prev[i] = cost(0, i);
        for (std::size_t layer = 2; layer <= kk; ++layer) {
            std::fill(cur.begin(), cur.end(), std::numeric_limits<long double>::infinity());
            const std::size_t lo = layer;
            const std::size_t hi = g - (kk - layer);
            LayerSolver solver{cost, prev, cur, split.data() + (layer - 2) * (g + 1)};
            solver.solve(lo, hi, layer - 1, hi - 1);
            std::swap(prev, cur);
        }

        std::vector<std::size_t> back;
        std::size_t end = g;
        for (std::size_t layer = kk; layer >= 2; --layer) {
            end = split[(layer - 2) * (g + 1) + end];
            back.push_back(end);
        }
        gsplit.insert(gsplit.end(), back.rbegin(), back.rend());
    }
    gsplit.push_back(g);

    out.boundaries.reserve(kk - 1);
    for (std::size_t c = 1; c < kk; ++c) out.boundaries.push_back(gstart[gsplit[c]]);

    // Centers, cost and assignment straight from the runs.
    out.centers.resize(kk);
    out.assignment.resize(n);
    out.cost = 0.0;
    for (std::size_t c = 0; c < kk; ++c) {
        const std::size_t first = gstart[gsplit[c]];
        const std::size_t last = gsplit[c + 1] < g ? gstart[gsplit[c + 1]] : n;
        long double wsum = 0.0L;
        long double wvsum = 0.0L;
        for (std::size_t p = first; p < last; ++p) {
            const std::size_t j = out.order[p];
            wsum += weights[j];
            wvsum += static_cast<long double>(weights[j]) * values[j];
            out.assignment[j] = c;
        }
        const double center = static_cast<double>(wvsum / wsum);
        out.centers[c] = center;
        long double run_cost = 0.0L;
        for (std::size_t p = first; p < last; ++p) {
            const std::size_t j = out.order[p];
            const long double dv = static_cast<long double>(values[j]) - center;
            run_cost += weights[j] * dv * dv;
        }
        out.cost += static_cast<double>(run_cost);
    }
    return out;
}

Clustering1D kmeans1d(std::span<const double> values, std::size_t k) {
    const std::vector<double> ones(values.size(), 1.0);
    return kmeans1d_weighted(values, ones, k);
}

}  // namespace distq
