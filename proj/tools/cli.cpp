#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "distq/adaptive.hpp"
#include "distq/errors.hpp"
#include "distq/experiments.hpp"
#include "distq/io.hpp"
#include "distq/parallel.hpp"
#include "distq/scheme.hpp"
#include "distq/simnet.hpp"

namespace distq::cli {
namespace {

namespace fs = std::filesystem;

struct Options {
    std::string spec;
    std::string model;
    std::string partition;
    std::string cal;
    std::string test;
    std::string codebook;
    std::string schedule;
    std::string stream;
    std::string bits;
    std::string strategy = "distributed";
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
    bool verbose = false;
};

struct Streams {
    std::ostream& out;
    std::ostream& err;
    bool verbose;

    void info(const std::string& msg) const {
        if (verbose) err << "distq: " << msg << '\n';
    }
    void warn(const std::string& msg) const { err << "distq: warning: " << msg << '\n'; }
};

void require_file(const std::string& path, const char* flag) {
    if (path.empty()) throw ConfigError(std::string("missing required option ") + flag);
    if (!fs::is_regular_file(path)) throw IoError(std::string(flag) + ": no such file: " + path);
}

void require_output_dir(const std::string& path) {
    if (path.empty()) return;
    const auto parent = fs::path(path).parent_path();
    if (!parent.empty() && !fs::is_directory(parent)) {
        throw IoError("--out: directory does not exist: " + parent.string());
    }
}

std::vector<int> parse_bits(const std::string& text, std::size_t sensors) {
    if (text.empty()) throw ConfigError("missing required option --bits");
    std::vector<int> bits;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const int b = std::stoi(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            bits.push_back(b);
        } catch (const std::exception&) {
            throw ConfigError("--bits: not an integer: \"" + item + "\"");
        }
    }
    if (bits.size() == 1) bits.assign(sensors, bits.front());
    if (bits.size() != sensors) {
        throw ConfigError("--bits lists " + std::to_string(bits.size()) + " values for " +
                          std::to_string(sensors) + " sensors");
    }
    for (int b : bits) {
        if (b < 1 || b > SensorCodebook::kMaxBits) {
            throw ConfigError("--bits values must lie in [1, " + std::to_string(SensorCodebook::kMaxBits) +
                              "]");
        }
    }
    return bits;
}

void emit(const Streams& io, const std::string& path, const std::string& text) {
    if (path.empty()) {
        io.out << text;
    } else {
        write_text_file(path, text);
        io.info("wrote " + path);
    }
}

Json mse_report(const MseEstimate& e, std::size_t n) {
    return Json{{"mse", e.mse}, {"stderr", e.std_error}, {"n", n}};
}

// ------------------------------------------------------------- commands

int cmd_gen_data(const Options& o, const Streams& io) {
    require_file(o.spec, "--spec");
    if (o.out.empty()) throw ConfigError("gen-data needs --out DIR");
    if (!fs::is_directory(o.out)) throw IoError("--out: not a directory: " + o.out);
    auto spec = spec_from_json(read_json_file(o.spec));
    if (o.seed) spec.seed = *o.seed;

    const auto data = gen_synthetic(spec);
    const fs::path dir(o.out);
    write_matrix_csv(dir / "calibration.csv", data.calibration.samples());
    write_matrix_csv(dir / "test.csv", data.test);
    write_text_file(dir / "model.json", dump_json(model_to_json(data.model)));
    write_text_file(dir / "partition.json", dump_json(partition_to_json(data.partition)));
    io.info("wrote calibration.csv, test.csv, model.json, partition.json to " + o.out);
    return kOk;
}

int cmd_train(const Options& o, const Streams& io) {
    require_file(o.model, "--model");
    require_file(o.partition, "--partition");
    require_file(o.cal, "--cal");
    require_output_dir(o.out);
    if (o.strategy != "distributed" && o.strategy != "agnostic") {
        throw ConfigError("--strategy must be 'distributed' or 'agnostic', got '" + o.strategy + "'");
    }

    const auto model = model_from_json(read_json_file(o.model));
    const auto partition = partition_from_json(read_json_file(o.partition));
    const CalibrationSet cal(read_matrix_csv(o.cal));

    TrainConfig cfg;
    cfg.bits_per_sensor = parse_bits(o.bits, partition.sensor_count());
    cfg.baseline_seed = o.seed.value_or(0);
    const auto q = o.strategy == "distributed" ? train_distributed(cal, model, partition, cfg)
                                               : train_agnostic(cal, partition, model, cfg);

    const auto report = evaluate_mse(q, cal.samples());
    io.err << "distq: calibration mse " << report.mse << " (stderr " << report.std_error << ")\n";
    if (o.out.empty()) {
        io.out << dump_json(quantizer_to_json(q));
    } else {
        emit(io, o.out, dump_json(quantizer_to_json(q)));
        Json r = mse_report(report, cal.size());
        r["strategy"] = o.strategy;
        io.out << Json{{"calibration", r}}.dump() << '\n';
    }
    return kOk;
}

int cmd_adapt(const Options& o, const Streams& io) {
    require_file(o.codebook, "--codebook");
    require_output_dir(o.out);
    const auto file = quantizer_from_json(read_json_file(o.codebook));
    const auto full = file.full_rate();
    const auto bits = parse_bits(o.bits, full.sensor_count());

    auto result = adapt(full, bits);
    for (const auto& w : result.warnings) io.warn(w);
    std::optional<std::vector<SensorCodebook>> keep;
    if (!(result.quantizer == full)) keep = full.codebooks();
    emit(io, o.out, dump_json(quantizer_to_json(result.quantizer, keep)));
    return kOk;
}

int cmd_eval(const Options& o, const Streams& io) {
    require_file(o.codebook, "--codebook");
    require_file(o.test, "--test");
    const auto file = quantizer_from_json(read_json_file(o.codebook));
    const auto test = read_matrix_csv(o.test);
    const auto est = evaluate_mse(file.active, test);
    Json r = mse_report(est, test.rows());
    r["mean_error_norm"] = mean_quantization_error(file.active, test);
    io.out << r.dump() << '\n';
    return kOk;
}

int cmd_simulate(const Options& o, const Streams& io) {
    const std::string& stream_path = o.stream.empty() ? o.test : o.stream;
    require_file(o.codebook, "--codebook");
    require_file(o.schedule, "--schedule");
    require_file(stream_path, "--stream");
    require_output_dir(o.out);
    const auto file = quantizer_from_json(read_json_file(o.codebook));
    const auto schedule = schedule_from_json(read_json_file(o.schedule));
    const auto stream = read_matrix_csv(stream_path);

    const auto transcript = run_session(file.full_rate(), schedule, stream);
    for (const auto& e : transcript.events) {
        for (const auto& w : e.warnings) io.warn(w);
    }
    std::ostringstream csv;
    transcript.write_csv(csv);
    emit(io, o.out, csv.str());
    io.info("session mse " + std::to_string(transcript.mse()));
    return kOk;
}

int cmd_reproduce_fig2(const Options& o, const Streams& io) {
    require_file(o.spec, "--spec");
    require_output_dir(o.out);
    auto spec = spec_from_json(read_json_file(o.spec));
    if (o.seed) spec.seed = *o.seed;
    const auto result = run_rate_sweep(spec);
    std::ostringstream csv;
    result.write_csv(csv);
    emit(io, o.out, csv.str());
    return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Distributed, rate-adaptive quantization for linear regression", "distq"};
    app.require_subcommand(1);
    app.fallthrough();
    Options o;

    app.add_option("--threads", o.threads, "Worker threads (0 = all cores); falls back to DISTQ_THREADS");
    app.add_flag("-v,--verbose", o.verbose, "Progress messages on standard error");

    auto* gen = app.add_subcommand("gen-data", "Generate a synthetic Gaussian instance");
    gen->add_option("--spec", o.spec, "Synthetic spec JSON")->required();
    gen->add_option("--out", o.out, "Output directory")->required();
    gen->add_option("--seed", o.seed, "Override the spec seed");

    auto* train = app.add_subcommand("train", "Train a distributed quantizer");
    train->add_option("--model", o.model, "Model JSON")->required();
    train->add_option("--partition", o.partition, "Partition JSON")->required();
    train->add_option("--cal", o.cal, "Calibration CSV")->required();
    train->add_option("--bits", o.bits, "Bits per sensor (one value or a comma list)")->required();
    train->add_option("--strategy", o.strategy, "distributed | agnostic");
    train->add_option("--seed", o.seed, "Seed of the agnostic baseline");
    train->add_option("--out", o.out, "Codebook JSON (default: standard output)");

    auto* adapt_cmd = app.add_subcommand("adapt", "Reduce or restore codebook rates");
    adapt_cmd->add_option("--codebook", o.codebook, "Codebook JSON")->required();
    adapt_cmd->add_option("--bits", o.bits, "New bits per sensor")->required();
    adapt_cmd->add_option("--out", o.out, "Codebook JSON (default: standard output)");

    auto* eval = app.add_subcommand("eval", "Monte-Carlo MSE of a codebook on test data");
    eval->add_option("--codebook", o.codebook, "Codebook JSON")->required();
    eval->add_option("--test", o.test, "Test CSV")->required();

    auto* sim = app.add_subcommand("simulate", "Run a sensor-to-fusion session");
    sim->add_option("--codebook", o.codebook, "Full-rate codebook JSON")->required();
    sim->add_option("--schedule", o.schedule, "Rate schedule JSON")->required();
    sim->add_option("--stream,--test", o.stream, "Input stream CSV")->required();
    sim->add_option("--out", o.out, "Transcript CSV (default: standard output)");

    auto* fig = app.add_subcommand("reproduce-fig2", "Sweep bits for all three strategies");
    fig->add_option("--spec", o.spec, "Synthetic spec JSON")->required();
    fig->add_option("--seed", o.seed, "Override the spec seed");
    fig->add_option("--out", o.out, "Results CSV (default: standard output)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "distq: " << e.what() << '\n';
        return kConfigError;
    }

    std::size_t threads = 1;
    if (o.threads) {
        threads = *o.threads;
    } else if (const char* env = std::getenv("DISTQ_THREADS")) {
        try {
            threads = static_cast<std::size_t>(std::stoul(env));
        } catch (const std::exception&) {
            err << "distq: ignoring invalid DISTQ_THREADS='" << env << "'\n";
        }
    }
    set_thread_count(threads);

    const Streams io{out, err, o.verbose};
    try {
        if (gen->parsed()) return cmd_gen_data(o, io);
        if (train->parsed()) return cmd_train(o, io);
        if (adapt_cmd->parsed()) return cmd_adapt(o, io);
        if (eval->parsed()) return cmd_eval(o, io);
        if (sim->parsed()) return cmd_simulate(o, io);
        if (fig->parsed()) return cmd_reproduce_fig2(o, io);
    } catch (const IoError& e) {
        err << "distq: " << e.what() << '\n';
        return kIoError;
    } catch (const ConfigError& e) {
        err << "distq: " << e.what() << '\n';
        return kConfigError;
    } catch (const InvalidArgument& e) {
        err << "distq: " << e.what() << '\n';
        return kConfigError;
    } catch (const DimensionError& e) {
        err << "distq: " << e.what() << '\n';
        return kConfigError;
    } catch (const InvalidInput& e) {
        err << "distq: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        err << "distq: " << e.what() << '\n';
        return kFailure;
    }
    return kFailure;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"distq"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace distq::cli
