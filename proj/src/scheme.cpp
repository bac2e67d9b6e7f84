#include "distq/scheme.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>

#include "distq/clustering.hpp"
#include "distq/errors.hpp"
#include "distq/parallel.hpp"

namespace distq {
namespace {

void check_inputs(const CalibrationSet& cal, const LinearModel& model,
                  const FeaturePartition& partition, const TrainConfig& cfg) {
    if (cal.dim() != model.dim()) {
        throw DimensionError("calibration data has " + std::to_string(cal.dim()) +
                             " columns, model has dim " + std::to_string(model.dim()));
    }
    if (partition.total_dim() != model.dim()) {
        throw DimensionError("partition total_dim " + std::to_string(partition.total_dim()) +
                             " does not match model dim " + std::to_string(model.dim()));
    }
    if (cfg.bits_per_sensor.size() != partition.sensor_count()) {
        throw InvalidArgument("got " + std::to_string(cfg.bits_per_sensor.size()) +
                              " bit budgets for " + std::to_string(partition.sensor_count()) +
                              " sensors");
    }
    for (int b : cfg.bits_per_sensor) {
        if (b < 1 || b > SensorCodebook::kMaxBits) {
            throw InvalidArgument("bits per sensor must lie in [1, " +
                                  std::to_string(SensorCodebook::kMaxBits) + "], got " +
                                  std::to_string(b));
        }
    }
    if (cfg.baseline_restarts < 1) throw InvalidArgument("baseline_restarts must be at least 1");
}

Matrix sensor_slices(const Matrix& x, std::span<const std::size_t> idx) {
    Matrix out(x.rows(), idx.size());
    for (std::size_t j = 0; j < x.rows(); ++j) {
        const auto row = x.row(j);
        auto dst = out.row(j);
        for (std::size_t r = 0; r < idx.size(); ++r) dst[r] = row[idx[r]];
    }
    return out;
}

SensorCodebook train_sensor(const Matrix& slices, std::span<const double> beta, std::size_t sensor,
                            int bits) {
    const std::size_t n = slices.rows();
    const std::size_t d = slices.cols();
    std::vector<double> proj(n);
    for (std::size_t j = 0; j < n; ++j) proj[j] = project(slices.row(j), beta);

    const auto clusters = kmeans1d(proj, std::size_t{1} << bits);
    const std::size_t k = clusters.centers.size();
    std::vector<std::vector<double>> codewords(k, std::vector<double>(d, 0.0));
    std::vector<std::uint64_t> counts(k, 0);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t a = clusters.assignment[j];
        const auto x = slices.row(j);
        for (std::size_t r = 0; r < d; ++r) codewords[a][r] += x[r];
        ++counts[a];
    }
    for (std::size_t c = 0; c < k; ++c) {
        for (double& v : codewords[c]) v /= static_cast<double>(counts[c]);
    }
    return assemble_codebook(sensor, bits, std::move(codewords), std::move(counts), beta);
}

}  // namespace

SensorCodebook assemble_codebook(std::size_t sensor_id, int bits,
                                 std::vector<std::vector<double>> codewords,
                                 std::vector<std::uint64_t> weights,
                                 std::span<const double> beta_slice) {
    if (codewords.size() != weights.size()) {
        throw InvalidArgument("codewords and weights differ in length");
    }
    const std::size_t k = codewords.size();
    std::vector<double> proj(k);
    for (std::size_t c = 0; c < k; ++c) proj[c] = project(codewords[c], beta_slice);
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return proj[a] < proj[b]; });

    std::vector<std::vector<double>> out_c;
    std::vector<double> out_h;
    std::vector<std::uint64_t> out_w;
    for (std::size_t c : order) {
        if (weights[c] == 0) continue;
        if (!out_h.empty() && proj[c] - out_h.back() <= kMergeTolerance) {
            auto& merged = out_c.back();
            const double wa = static_cast<double>(out_w.back());
            const double wb = static_cast<double>(weights[c]);
            for (std::size_t r = 0; r < merged.size(); ++r) {
                merged[r] = (wa * merged[r] + wb * codewords[c][r]) / (wa + wb);
            }
            out_w.back() += weights[c];
            out_h.back() = project(merged, beta_slice);
            continue;
        }
        out_c.push_back(std::move(codewords[c]));
        out_h.push_back(proj[c]);
        out_w.push_back(weights[c]);
    }
    return SensorCodebook(sensor_id, bits, std::move(out_c), std::move(out_h), std::move(out_w));
}

DistributedQuantizer train_distributed(const CalibrationSet& cal, const LinearModel& model,
                                       const FeaturePartition& partition, const TrainConfig& cfg) {
    check_inputs(cal, model, partition, cfg);
    const std::size_t m = partition.sensor_count();
    std::vector<std::optional<SensorCodebook>> books(m);
    parallel_for(m, [&](std::size_t i) {
        const auto beta = model.slice(partition, i);
        const auto slices = sensor_slices(cal.samples(), partition.indices(i));
        books[i].emplace(train_sensor(slices, beta, i, cfg.bits_per_sensor[i]));
    });
    std::vector<SensorCodebook> out;
    out.reserve(m);
    for (auto& b : books) out.push_back(std::move(*b));
    return DistributedQuantizer(model, partition, std::move(out));
}

DistributedQuantizer train_agnostic(const CalibrationSet& cal, const FeaturePartition& partition,
                                    const LinearModel& model, const TrainConfig& cfg) {
    check_inputs(cal, model, partition, cfg);
    const std::size_t m = partition.sensor_count();
    const std::vector<double> unit(cal.size(), 1.0);
    std::vector<std::optional<SensorCodebook>> books(m);
    parallel_for(m, [&](std::size_t i) {
        const auto beta = model.slice(partition, i);
        const auto slices = sensor_slices(cal.samples(), partition.indices(i));
        LloydOptions opts;
        opts.seed = cfg.baseline_seed + 0x9E3779B97F4A7C15ULL * i;
        opts.restarts = cfg.baseline_restarts;
        const int bits = cfg.bits_per_sensor[i];
        const auto res = weighted_lloyd(slices, unit, std::size_t{1} << bits, opts);

        std::vector<std::vector<double>> codewords(res.k);
        for (std::size_t c = 0; c < res.k; ++c) {
            codewords[c].assign(res.centers.row(c).begin(), res.centers.row(c).end());
        }
        std::vector<std::uint64_t> counts(res.k, 0);
        for (std::size_t a : res.assignment) ++counts[a];
        books[i].emplace(assemble_codebook(i, bits, std::move(codewords), std::move(counts), beta));
    });
    std::vector<SensorCodebook> out;
    out.reserve(m);
    for (auto& b : books) out.push_back(std::move(*b));
    return DistributedQuantizer(model, partition, std::move(out));
}

}  // namespace distq
