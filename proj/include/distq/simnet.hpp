#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "distq/adaptive.hpp"
#include "distq/core.hpp"

namespace distq {

/// Packs `index` into `bits` bits, most significant bit first, zero padded
/// to whole bytes.
std::vector<std::uint8_t> encode_index(std::uint32_t index, int bits);

/// Inverse of encode_index. Throws MalformedFrame on a wrong length or
/// non-zero pad bits.
std::uint32_t decode_index(std::span<const std::uint8_t> payload, int bits);

/// One sensor-to-fusion message.
struct MessageFrame {
    std::uint16_t sensor_id;
    std::uint32_t time_step;
    int payload_bits;
    std::uint32_t index;

    bool operator==(const MessageFrame&) const = default;
};

/// Wire layout: sensor_id (2 bytes BE), time_step (4 bytes BE), bit width
/// (1 byte), then the encoded index.
std::vector<std::uint8_t> encode_frame(const MessageFrame& frame);
MessageFrame decode_frame(std::span<const std::uint8_t> bytes);

struct StepRecord {
    std::uint32_t step;
    double y_hat;
    double y_tilde;
    double sq_err;
    std::vector<std::uint32_t> indices;
    std::vector<int> bits;
    std::uint64_t bits_total;
    std::uint64_t cumulative_bits;
};

struct AppliedEvent {
    std::uint32_t step;
    /// Bits actually in force after clamping.
    std::vector<int> bits;
    std::vector<std::string> warnings;
    /// Serialized sensor-side and fusion-side codebooks matched.
    bool synchronized;
};

struct SessionTranscript {
    std::vector<StepRecord> steps;
    std::vector<AppliedEvent> events;

    double mse() const;
    /// CSV with header step,sensor_bits_total,y_hat,y_tilde,sq_err.
    void write_csv(std::ostream& out) const;
};

/// Streams `stream` through simulated sensors and a fusion center over a
/// lossless channel. Both endpoints hold the full-rate quantizer and derive
/// reduced codebooks on their own at each rate event.
SessionTranscript run_session(const DistributedQuantizer& full_rate, const RateSchedule& schedule,
                              const Matrix& stream);

}  // namespace distq
