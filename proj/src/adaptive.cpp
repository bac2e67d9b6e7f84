#include "distq/adaptive.hpp"

#include <algorithm>
#include <string>

#include "distq/clustering.hpp"
#include "distq/errors.hpp"

namespace distq {

RateSchedule::RateSchedule(std::vector<RateEvent> events) : events_(std::move(events)) {
    if (events_.empty()) throw InvalidArgument("rate schedule has no events");
    if (events_.front().time_step != 0) throw InvalidArgument("rate schedule must start at step 0");
    const std::size_t m = events_.front().bits_per_sensor.size();
    for (std::size_t e = 0; e < events_.size(); ++e) {
        const auto& ev = events_[e];
        if (e > 0 && ev.time_step <= events_[e - 1].time_step) {
            throw InvalidArgument("rate schedule steps must be strictly increasing");
        }
        if (ev.bits_per_sensor.empty() || ev.bits_per_sensor.size() != m) {
            throw InvalidArgument("every rate event must list bits for the same sensors");
        }
        for (int b : ev.bits_per_sensor) {
            if (b < 1) throw InvalidArgument("scheduled bits must be at least 1");
        }
    }
}

RateSchedule RateSchedule::constant(std::vector<int> bits) {
    return RateSchedule({RateEvent{0, std::move(bits)}});
}

SensorCodebook reduce_codebook(const SensorCodebook& cb, int new_bits,
                               std::span<const double> beta_slice) {
    if (new_bits < 1) throw InvalidArgument("new_bits must be at least 1");
    if (beta_slice.size() != cb.dim()) {
        throw DimensionError("coefficient slice has length " + std::to_string(beta_slice.size()) +
                             ", codewords have dimension " + std::to_string(cb.dim()));
    }
    const int capped = std::min(new_bits, SensorCodebook::kMaxBits);
    const std::size_t target = std::size_t{1} << capped;
    if (target >= cb.size()) return cb;

    std::vector<double> w(cb.size());
    for (std::size_t k = 0; k < cb.size(); ++k) w[k] = static_cast<double>(cb.weights()[k]);
    const auto groups = kmeans1d_weighted(cb.projected(), w, target);

    // Projected values are strictly increasing, so groups are consecutive
    // runs of codebook entries.
    const std::size_t groups_n = groups.centers.size();
    std::vector<std::vector<double>> codewords(groups_n, std::vector<double>(cb.dim(), 0.0));
    std::vector<double> projected(groups_n, 0.0);
    std::vector<std::uint64_t> weights(groups_n, 0);
    for (std::size_t k = 0; k < cb.size(); ++k) {
        const std::size_t g = groups.assignment[k];
        const double nk = w[k];
        const auto c = cb.codeword(k);
        for (std::size_t r = 0; r < c.size(); ++r) codewords[g][r] += nk * c[r];
        projected[g] += nk * cb.projected()[k];
        weights[g] += cb.weights()[k];
    }
    for (std::size_t g = 0; g < groups_n; ++g) {
        const double total = static_cast<double>(weights[g]);
        for (double& v : codewords[g]) v /= total;
        projected[g] /= total;
    }
    return SensorCodebook(cb.sensor_id(), capped, std::move(codewords), std::move(projected),
                          std::move(weights));
}

WeightedCodewords reduce_codewords(const Matrix& codewords, std::span<const std::uint64_t> weights,
                                   std::size_t new_k, std::uint64_t seed, std::size_t restarts) {
    if (new_k < 1) throw InvalidArgument("new codebook size must be at least 1");
    if (weights.size() != codewords.rows()) {
        throw InvalidArgument("codewords and weights differ in length");
    }
    if (new_k >= codewords.rows()) {
        return {codewords, std::vector<std::uint64_t>(weights.begin(), weights.end())};
    }
    std::vector<double> w(weights.begin(), weights.end());
    LloydOptions opts;
    opts.seed = seed;
    opts.restarts = restarts;
    const auto res = weighted_lloyd(codewords, w, new_k, opts);

    // Merged codewords from the final grouping (weighted means), dropping any
    // group left empty by an unconverged run.
    Matrix sums(res.k, codewords.cols(), 0.0);
    std::vector<std::uint64_t> mass(res.k, 0);
    for (std::size_t k = 0; k < codewords.rows(); ++k) {
        const std::size_t g = res.assignment[k];
        auto s = sums.row(g);
        const auto c = codewords.row(k);
        for (std::size_t r = 0; r < c.size(); ++r) s[r] += w[k] * c[r];
        mass[g] += weights[k];
    }
    std::vector<double> data;
    std::vector<std::uint64_t> out_w;
    for (std::size_t g = 0; g < res.k; ++g) {
        if (mass[g] == 0) continue;
        for (double v : sums.row(g)) data.push_back(v / static_cast<double>(mass[g]));
        out_w.push_back(mass[g]);
    }
    return {Matrix(out_w.size(), codewords.cols(), std::move(data)), std::move(out_w)};
}

AdaptResult adapt(const DistributedQuantizer& full_rate, std::span<const int> bits) {
    if (bits.size() != full_rate.sensor_count()) {
        throw InvalidArgument("got " + std::to_string(bits.size()) + " bit budgets for " +
                              std::to_string(full_rate.sensor_count()) + " sensors");
    }
    AdaptResult out{full_rate, {}};
    std::vector<SensorCodebook> books;
    books.reserve(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
        const auto& cb = full_rate.codebook(i);
        int b = bits[i];
        if (b < 1) throw InvalidArgument("bits must be at least 1");
        if (b > cb.bits()) {
            out.warnings.push_back("sensor " + std::to_string(i) + ": requested " + std::to_string(b) +
                                   " bits exceeds trained " + std::to_string(cb.bits()) +
                                   "; clamped");
            b = cb.bits();
        }
        books.push_back(reduce_codebook(cb, b, full_rate.beta_slice(i)));
    }
    out.quantizer = DistributedQuantizer(full_rate.model(), full_rate.partition(), std::move(books));
    return out;
}

}  // namespace distq
