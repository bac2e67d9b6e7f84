#include "distq/simnet.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>

#include "distq/errors.hpp"
#include "distq/io.hpp"

namespace distq {
namespace {

std::size_t payload_bytes(int bits) { return static_cast<std::size_t>(bits + 7) / 8; }

void check_bits(int bits) {
    if (bits < 1 || bits > SensorCodebook::kMaxBits) {
        throw InvalidArgument("payload width must lie in [1, " +
                              std::to_string(SensorCodebook::kMaxBits) + "], got " +
                              std::to_string(bits));
    }
}

// The sensor side: full-rate codebook for one sensor plus whatever reduced
// codebook the current rate calls for.
class SensorNode {
public:
    SensorNode(const DistributedQuantizer& full, std::size_t id)
        : id_(id),
          indices_(full.partition().indices(id).begin(), full.partition().indices(id).end()),
          beta_(full.beta_slice(id).begin(), full.beta_slice(id).end()),
          full_(full.codebook(id)),
          active_(full_),
          bits_(full_.bits()) {}

    void set_rate(int bits) {
        bits_ = bits;
        active_ = reduce_codebook(full_, bits, beta_);
    }

    std::vector<std::uint8_t> observe(std::span<const double> x, std::uint32_t step) const {
        double proj = 0.0;
        for (std::size_t r = 0; r < indices_.size(); ++r) proj += x[indices_[r]] * beta_[r];
        const auto index = static_cast<std::uint32_t>(active_.nearest(proj));
        return encode_frame({static_cast<std::uint16_t>(id_), step, bits_, index});
    }

    const SensorCodebook& active() const noexcept { return active_; }

private:
    std::size_t id_;
    std::vector<std::size_t> indices_;
    std::vector<double> beta_;
    SensorCodebook full_;
    SensorCodebook active_;
    int bits_;
};

class FusionCenter {
public:
    explicit FusionCenter(const DistributedQuantizer& full) : full_(full), active_(full) {}

    void set_rates(std::span<const int> bits) { active_ = adapt(full_, bits).quantizer; }

    /// Decodes one frame and returns the sensor's contribution.
    double receive(std::span<const std::uint8_t> bytes, std::uint32_t step, std::uint32_t& index) const {
        const auto frame = decode_frame(bytes);
        if (frame.time_step != step) throw MalformedFrame("frame from the wrong time step");
        if (frame.sensor_id >= active_.sensor_count()) throw MalformedFrame("unknown sensor id");
        const auto& cb = active_.codebook(frame.sensor_id);
        if (frame.index >= cb.size()) throw MalformedFrame("codeword index out of range");
        index = frame.index;
        return cb.projected()[frame.index];
    }

    const DistributedQuantizer& active() const noexcept { return active_; }

private:
    DistributedQuantizer full_;
    DistributedQuantizer active_;
};

}  // namespace

std::vector<std::uint8_t> encode_index(std::uint32_t index, int bits) {
    check_bits(bits);
    if (index >= (std::uint32_t{1} << bits)) {
        throw InvalidArgument("index " + std::to_string(index) + " does not fit in " +
                              std::to_string(bits) + " bits");
    }
    const std::size_t nbytes = payload_bytes(bits);
    // Left-align the index in a 32-bit word, then emit its leading bytes.
    const std::uint32_t aligned = index << (32 - bits);
    std::vector<std::uint8_t> out(nbytes);
    for (std::size_t b = 0; b < nbytes; ++b) {
        out[b] = static_cast<std::uint8_t>(aligned >> (24 - 8 * b));
    }
    return out;
}

std::uint32_t decode_index(std::span<const std::uint8_t> payload, int bits) {
    check_bits(bits);
    if (payload.size() != payload_bytes(bits)) {
        throw MalformedFrame("payload has " + std::to_string(payload.size()) + " bytes, expected " +
                             std::to_string(payload_bytes(bits)));
    }
    std::uint32_t aligned = 0;
    for (std::size_t b = 0; b < payload.size(); ++b) {
        aligned |= static_cast<std::uint32_t>(payload[b]) << (24 - 8 * b);
    }
    const std::uint32_t pad_mask = (bits == 32) ? 0 : (~std::uint32_t{0} >> bits);
    if (aligned & pad_mask) throw MalformedFrame("non-zero pad bits");
    return aligned >> (32 - bits);
}

std::vector<std::uint8_t> encode_frame(const MessageFrame& frame) {
    auto payload = encode_index(frame.index, frame.payload_bits);
    std::vector<std::uint8_t> out;
    out.reserve(7 + payload.size());
    out.push_back(static_cast<std::uint8_t>(frame.sensor_id >> 8));
    out.push_back(static_cast<std::uint8_t>(frame.sensor_id));
    for (int shift = 24; shift >= 0; shift -= 8) {
        out.push_back(static_cast<std::uint8_t>(frame.time_step >> shift));
    }
    out.push_back(static_cast<std::uint8_t>(frame.payload_bits));
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

MessageFrame decode_frame(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8) throw MalformedFrame("frame shorter than its header");
    MessageFrame f{};
    f.sensor_id = static_cast<std::uint16_t>((bytes[0] << 8) | bytes[1]);
    f.time_step = 0;
    for (std::size_t b = 2; b < 6; ++b) f.time_step = (f.time_step << 8) | bytes[b];
    f.payload_bits = bytes[6];
    if (f.payload_bits < 1 || f.payload_bits > SensorCodebook::kMaxBits) {
        throw MalformedFrame("bit width field out of range");
    }
    f.index = decode_index(bytes.subspan(7), f.payload_bits);
    return f;
}

double SessionTranscript::mse() const {
    if (steps.empty()) return 0.0;
    double acc = 0.0;
    for (const auto& s : steps) acc += s.sq_err;
    return acc / static_cast<double>(steps.size());
}

void SessionTranscript::write_csv(std::ostream& out) const {
    out << "step,sensor_bits_total,y_hat,y_tilde,sq_err\n";
    char buf[160];
    for (const auto& s : steps) {
        std::snprintf(buf, sizeof buf, "%u,%llu,%.17g,%.17g,%.17g\n", s.step,
                      static_cast<unsigned long long>(s.bits_total), s.y_hat, s.y_tilde, s.sq_err);
        out << buf;
    }
}

SessionTranscript run_session(const DistributedQuantizer& full_rate, const RateSchedule& schedule,
                              const Matrix& stream) {
    const std::size_t m = full_rate.sensor_count();
    if (stream.cols() != full_rate.model().dim()) {
        throw DimensionError("stream has " + std::to_string(stream.cols()) + " columns, model expects " +
                             std::to_string(full_rate.model().dim()));
    }
    if (schedule.events().front().bits_per_sensor.size() != m) {
        throw InvalidArgument("schedule lists bits for " +
                              std::to_string(schedule.events().front().bits_per_sensor.size()) +
                              " sensors, quantizer has " + std::to_string(m));
    }
    if (m > 0xFFFF) throw InvalidArgument("sensor ids must fit in 16 bits");

    std::vector<SensorNode> sensors;
    sensors.reserve(m);
    for (std::size_t i = 0; i < m; ++i) sensors.emplace_back(full_rate, i);
    FusionCenter fusion(full_rate);

    SessionTranscript tr;
    std::vector<int> bits(m);
    for (std::size_t i = 0; i < m; ++i) bits[i] = full_rate.codebook(i).bits();

    std::size_t next_event = 0;
    std::uint64_t cumulative = 0;
    const auto& events = schedule.events();
    for (std::size_t j = 0; j < stream.rows(); ++j) {
        const auto step = static_cast<std::uint32_t>(j);
        if (next_event < events.size() && events[next_event].time_step == step) {
            AppliedEvent applied{step, events[next_event].bits_per_sensor, {}, true};
            for (std::size_t i = 0; i < m; ++i) {
                const int trained = full_rate.codebook(i).bits();
                if (applied.bits[i] > trained) {
                    applied.warnings.push_back("step " + std::to_string(step) + ", sensor " +
                                               std::to_string(i) + ": requested " +
                                               std::to_string(applied.bits[i]) +
                                               " bits exceeds trained " + std::to_string(trained) +
                                               "; clamped");
                    applied.bits[i] = trained;
                }
            }
            for (std::size_t i = 0; i < m; ++i) sensors[i].set_rate(applied.bits[i]);
            fusion.set_rates(applied.bits);
            for (std::size_t i = 0; i < m; ++i) {
                if (codebook_to_json(sensors[i].active()).dump() !=
                    codebook_to_json(fusion.active().codebook(i)).dump()) {
                    applied.synchronized = false;
                }
            }
            if (!applied.synchronized) {
                throw Error("sensor and fusion codebooks diverged at step " + std::to_string(step));
            }
            bits = applied.bits;
            tr.events.push_back(std::move(applied));
            ++next_event;
        }

        const auto x = stream.row(j);
        StepRecord rec{step, full_rate.model().predict(x), 0.0, 0.0, std::vector<std::uint32_t>(m), bits,
                       0, 0};
        for (std::size_t i = 0; i < m; ++i) {
            const auto frame = sensors[i].observe(x, step);
            rec.y_tilde += fusion.receive(frame, step, rec.indices[i]);
            rec.bits_total += static_cast<std::uint64_t>(bits[i]);
        }
        const double err = rec.y_tilde - rec.y_hat;
        rec.sq_err = err * err;
        cumulative += rec.bits_total;
        rec.cumulative_bits = cumulative;
        tr.steps.push_back(std::move(rec));
    }
    return tr;
}

}  // namespace distq
