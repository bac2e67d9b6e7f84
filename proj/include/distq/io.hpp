#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "distq/adaptive.hpp"
#include "distq/core.hpp"

namespace distq {

using Json = nlohmann::json;

/// CSV with one sample per row, no header. Throws ConfigError on content
/// problems and IoError when the file cannot be read.
Matrix parse_matrix_csv(std::istream& in, const std::string& source = "<stream>");
Matrix read_matrix_csv(const std::filesystem::path& path);
/// Writes with 17 significant digits so values reload bit-exactly.
void write_matrix_csv(std::ostream& out, const Matrix& m);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// {"dim": d, "beta": [...]}
Json model_to_json(const LinearModel& model);
LinearModel model_from_json(const Json& j);

// {"total_dim": d, "sensors": [[...], ...]}
Json partition_to_json(const FeaturePartition& partition);
FeaturePartition partition_from_json(const Json& j);

// {"sensor_id", "bits", "codewords", "projected", "weights"}
Json codebook_to_json(const SensorCodebook& cb);
SensorCodebook codebook_from_json(const Json& j);

/// A quantizer as stored on disk. Adapted quantizers also carry the
/// full-rate codebooks they were reduced from so later rate changes,
/// including restoring the full rate, start from the original.
struct QuantizerFile {
    DistributedQuantizer active;
    std::optional<std::vector<SensorCodebook>> full_rate_codebooks;

    /// The quantizer rate changes are derived from.
    DistributedQuantizer full_rate() const;
};

// {"model": ..., "partition": ..., "codebooks": [...], "full_rate_codebooks"?: [...]}
Json quantizer_to_json(const DistributedQuantizer& q,
                       const std::optional<std::vector<SensorCodebook>>& full_rate = std::nullopt);
QuantizerFile quantizer_from_json(const Json& j);

// {"events": [{"t": step, "bits": [...]}, ...]}
Json schedule_to_json(const RateSchedule& schedule);
RateSchedule schedule_from_json(const Json& j);

/// Serialized form with a trailing newline, as written to files.
std::string dump_json(const Json& j);

}  // namespace distq
