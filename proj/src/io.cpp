#include "distq/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include "distq/errors.hpp"

namespace distq {
namespace {

void require_object(const Json& j, const char* what, std::initializer_list<const char*> required,
                    std::initializer_list<const char*> optional = {}) {
    if (!j.is_object()) throw ConfigError(std::string(what) + " must be a JSON object");
    std::set<std::string> allowed;
    for (const char* k : required) {
        allowed.insert(k);
        if (!j.contains(k)) throw ConfigError(std::string(what) + " is missing \"" + k + "\"");
    }
    for (const char* k : optional) allowed.insert(k);
    for (const auto& [key, _] : j.items()) {
        if (!allowed.count(key)) throw ConfigError(std::string(what) + " has unknown key \"" + key + "\"");
    }
}

template <typename T>
T get_as(const Json& j, const char* what) {
    try {
        return j.get<T>();
    } catch (const Json::exception& e) {
        throw ConfigError(std::string(what) + ": " + e.what());
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

// Wraps construction errors from domain types as config errors.
template <typename F>
auto build(const char* what, F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string(what) + ": " + e.what());
    }
}

}  // namespace

Matrix parse_matrix_csv(std::istream& in, const std::string& source) {
    std::vector<double> data;
    std::size_t cols = 0;
    std::size_t rows = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = trim(line);
        if (text.empty()) continue;
        std::size_t count = 0;
        std::size_t pos = 0;
        while (true) {
            const std::size_t comma = text.find(',', pos);
            auto field = trim(text.substr(pos, comma == std::string_view::npos ? std::string_view::npos
                                                                               : comma - pos));
            if (!field.empty() && field.front() == '+') field.remove_prefix(1);
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
            if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
                throw ConfigError(source + ":" + std::to_string(line_no) + ": not a number: \"" +
                                  std::string(field) + "\"");
            }
            data.push_back(v);
            ++count;
            if (comma == std::string_view::npos) break;
            pos = comma + 1;
        }
        if (rows == 0) {
            cols = count;
        } else if (count != cols) {
            throw ConfigError(source + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(cols) + " columns, found " + std::to_string(count));
        }
        ++rows;
    }
    if (in.bad()) throw IoError("failed reading " + source);
    return Matrix(rows, cols, std::move(data));
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return parse_matrix_csv(in, path.string());
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
    char buf[32];
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const auto row = m.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", row[c]);
            if (c) out << ',';
            out << buf;
        }
        out << '\n';
    }
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    write_matrix_csv(out, m);
    if (!out) throw IoError("failed writing " + path.string());
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

Json model_to_json(const LinearModel& model) {
    return Json{{"dim", model.dim()},
                {"beta", std::vector<double>(model.beta().begin(), model.beta().end())}};
}

LinearModel model_from_json(const Json& j) {
    require_object(j, "model", {"dim", "beta"});
    const auto dim = get_as<std::size_t>(j.at("dim"), "model.dim");
    auto beta = get_as<std::vector<double>>(j.at("beta"), "model.beta");
    if (beta.size() != dim) {
        throw ConfigError("model.beta has " + std::to_string(beta.size()) + " entries, dim is " +
                          std::to_string(dim));
    }
    return build("model", [&] { return LinearModel(std::move(beta)); });
}

Json partition_to_json(const FeaturePartition& partition) {
    return Json{{"total_dim", partition.total_dim()}, {"sensors", partition.sets()}};
}

FeaturePartition partition_from_json(const Json& j) {
    require_object(j, "partition", {"total_dim", "sensors"});
    const auto d = get_as<std::size_t>(j.at("total_dim"), "partition.total_dim");
    auto sets = get_as<std::vector<std::vector<std::size_t>>>(j.at("sensors"), "partition.sensors");
    return build("partition", [&] { return FeaturePartition(d, std::move(sets)); });
}

Json codebook_to_json(const SensorCodebook& cb) {
    return Json{{"sensor_id", cb.sensor_id()},
                {"bits", cb.bits()},
                {"codewords", cb.codewords()},
                {"projected", cb.projected()},
                {"weights", cb.weights()}};
}

SensorCodebook codebook_from_json(const Json& j) {
    require_object(j, "codebook", {"sensor_id", "bits", "codewords", "projected", "weights"});
    const auto id = get_as<std::size_t>(j.at("sensor_id"), "codebook.sensor_id");
    const auto bits = get_as<int>(j.at("bits"), "codebook.bits");
    auto codewords = get_as<std::vector<std::vector<double>>>(j.at("codewords"), "codebook.codewords");
    auto projected = get_as<std::vector<double>>(j.at("projected"), "codebook.projected");
    auto weights = get_as<std::vector<std::uint64_t>>(j.at("weights"), "codebook.weights");
    return build("codebook", [&] {
        return SensorCodebook(id, bits, std::move(codewords), std::move(projected), std::move(weights));
    });
}

DistributedQuantizer QuantizerFile::full_rate() const {
    if (!full_rate_codebooks) return active;
    return DistributedQuantizer(active.model(), active.partition(), *full_rate_codebooks);
}

Json quantizer_to_json(const DistributedQuantizer& q,
                       const std::optional<std::vector<SensorCodebook>>& full_rate) {
    Json books = Json::array();
    for (const auto& cb : q.codebooks()) books.push_back(codebook_to_json(cb));
    Json j{{"model", model_to_json(q.model())},
           {"partition", partition_to_json(q.partition())},
           {"codebooks", std::move(books)}};
    if (full_rate) {
        Json full = Json::array();
        for (const auto& cb : *full_rate) full.push_back(codebook_to_json(cb));
        j["full_rate_codebooks"] = std::move(full);
    }
    return j;
}

QuantizerFile quantizer_from_json(const Json& j) {
    require_object(j, "quantizer", {"model", "partition", "codebooks"}, {"full_rate_codebooks"});
    auto model = model_from_json(j.at("model"));
    auto partition = partition_from_json(j.at("partition"));
    auto read_books = [](const Json& arr, const char* what) {
        if (!arr.is_array()) throw ConfigError(std::string(what) + " must be an array");
        std::vector<SensorCodebook> books;
        for (const auto& b : arr) books.push_back(codebook_from_json(b));
        return books;
    };
    auto books = read_books(j.at("codebooks"), "quantizer.codebooks");
    std::optional<std::vector<SensorCodebook>> full;
    if (j.contains("full_rate_codebooks")) {
        full = read_books(j.at("full_rate_codebooks"), "quantizer.full_rate_codebooks");
        // Validate the full-rate set against the same model and partition.
        build("quantizer.full_rate_codebooks", [&] { return DistributedQuantizer(model, partition, *full); });
    }
    auto active = build("quantizer",
                        [&] { return DistributedQuantizer(std::move(model), std::move(partition), std::move(books)); });
    return {std::move(active), std::move(full)};
}

Json schedule_to_json(const RateSchedule& schedule) {
    Json events = Json::array();
    for (const auto& e : schedule.events()) {
        events.push_back(Json{{"t", e.time_step}, {"bits", e.bits_per_sensor}});
    }
    return Json{{"events", std::move(events)}};
}

RateSchedule schedule_from_json(const Json& j) {
    require_object(j, "schedule", {"events"});
    const auto& arr = j.at("events");
    if (!arr.is_array()) throw ConfigError("schedule.events must be an array");
    std::vector<RateEvent> events;
    for (const auto& e : arr) {
        require_object(e, "schedule event", {"t", "bits"});
        events.push_back({get_as<std::uint32_t>(e.at("t"), "schedule event t"),
                          get_as<std::vector<int>>(e.at("bits"), "schedule event bits")});
    }
    return build("schedule", [&] { return RateSchedule(std::move(events)); });
}

}  // namespace distq
