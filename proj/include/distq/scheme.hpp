#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "distq/core.hpp"

namespace distq {

struct TrainConfig {
    /// B_i per sensor; each sensor gets up to 2^B_i codewords.
    std::vector<int> bits_per_sensor;
    std::uint64_t baseline_seed = 0;
    std::size_t baseline_restarts = 8;
};

/// Projected values closer than this are merged into one codeword.
inline constexpr double kMergeTolerance = 1e-12;

/// Builds a codebook from raw codewords and their weights: computes
/// h_k = <c_k, beta>, sorts by h and merges codewords whose projections
/// coincide (weighted-mean codeword, summed weight).
SensorCodebook assemble_codebook(std::size_t sensor_id, int bits,
                                 std::vector<std::vector<double>> codewords,
                                 std::vector<std::uint64_t> weights,
                                 std::span<const double> beta_slice);

/// Model-aware training. For each sensor independently: project the
/// calibration slices onto beta^(i), cluster the projections exactly into
/// 2^B_i groups, and take the mean slice of each group as its codeword.
DistributedQuantizer train_distributed(const CalibrationSet& cal, const LinearModel& model,
                                       const FeaturePartition& partition, const TrainConfig& cfg);

/// Model-agnostic baseline: K-Means on the raw sensor slices. Projections are
/// attached afterwards so the result quantizes like any other codebook.
DistributedQuantizer train_agnostic(const CalibrationSet& cal, const FeaturePartition& partition,
                                    const LinearModel& model, const TrainConfig& cfg);

}  // namespace distq
