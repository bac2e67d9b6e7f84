#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "distq/core.hpp"

namespace distq {

struct RateEvent {
    std::uint32_t time_step;
    std::vector<int> bits_per_sensor;

    bool operator==(const RateEvent&) const = default;
};

/// Time-indexed bit budgets. Steps strictly increase and the first event is
/// at step 0.
class RateSchedule {
public:
    explicit RateSchedule(std::vector<RateEvent> events);

    static RateSchedule constant(std::vector<int> bits);

    const std::vector<RateEvent>& events() const noexcept { return events_; }

    bool operator==(const RateSchedule&) const = default;

private:
    std::vector<RateEvent> events_;
};

/// Shrinks a codebook to at most 2^new_bits codewords by exact weighted 1-D
/// clustering of its projected values. Merged codeword and projected value
/// are the weight-weighted means of the members; weights add. Returns the
/// input untouched when it already fits.
SensorCodebook reduce_codebook(const SensorCodebook& cb, int new_bits,
                               std::span<const double> beta_slice);

struct WeightedCodewords {
    Matrix codewords;
    std::vector<std::uint64_t> weights;
};

/// Codebook reduction for codewords that are not tied to a linear model:
/// weighted Lloyd over the codewords, merged codewords are weighted means.
WeightedCodewords reduce_codewords(const Matrix& codewords, std::span<const std::uint64_t> weights,
                                   std::size_t new_k, std::uint64_t seed, std::size_t restarts = 8);

struct AdaptResult {
    DistributedQuantizer quantizer;
    /// One message per sensor whose request exceeded the trained rate.
    std::vector<std::string> warnings;
};

/// Rate adaptation from the stored full-rate quantizer. Requests above the
/// trained rate are clamped to it.
AdaptResult adapt(const DistributedQuantizer& full_rate, std::span<const int> bits);

}  // namespace distq
