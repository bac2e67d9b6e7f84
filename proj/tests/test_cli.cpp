#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cli.hpp"
#include "distq/io.hpp"

using namespace distq;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run_cli(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Workspace {
public:
    Workspace() : dir_(fs::temp_directory_path() / ("distq_cli_" + std::to_string(std::random_device{}()))) {
        fs::create_directories(dir_);
    }
    ~Workspace() { fs::remove_all(dir_); }
    Workspace(const Workspace&) = delete;
    Workspace& operator=(const Workspace&) = delete;

    std::string path(const std::string& name) const { return (dir_ / name).string(); }
    std::string write(const std::string& name, const std::string& text) const {
        std::ofstream(dir_ / name) << text;
        return path(name);
    }
    std::string dir() const { return dir_.string(); }

private:
    fs::path dir_;
};

const char* kSpec = R"({"seed": 5, "n_cal": 400, "n_test": 1000, "d": 6, "m": 2,
                        "features_per_sensor": 3, "bit_range": [1, 2, 3], "baseline_restarts": 2})";

// Generates data into the workspace and returns its directory.
std::string generate(const Workspace& ws) {
    const auto spec = ws.write("spec.json", kSpec);
    const auto r = run_cli({"gen-data", "--spec", spec, "--out", ws.dir()});
    REQUIRE(r.code == 0);
    return ws.dir();
}

}  // namespace

TEST_CASE("gen-data writes four files reproducibly") {
    Workspace ws;
    generate(ws);
    for (const char* f : {"calibration.csv", "test.csv", "model.json", "partition.json"}) {
        CHECK(fs::is_regular_file(ws.path(f)));
    }
    const auto first = slurp(ws.path("calibration.csv")) + slurp(ws.path("test.csv")) +
                       slurp(ws.path("model.json")) + slurp(ws.path("partition.json"));
    generate(ws);
    const auto second = slurp(ws.path("calibration.csv")) + slurp(ws.path("test.csv")) +
                        slurp(ws.path("model.json")) + slurp(ws.path("partition.json"));
    CHECK(first == second);
    CHECK(read_matrix_csv(ws.path("calibration.csv")).rows() == 400);
}

TEST_CASE("gen-data errors") {
    Workspace ws;
    const auto bad = ws.write("bad.json", R"({"d": 10, "m": 3, "features_per_sensor": 3})");
    auto r = run_cli({"gen-data", "--spec", bad, "--out", ws.dir()});
    CHECK(r.code == 2);
    CHECK(r.err.find("m x features_per_sensor must equal d") != std::string::npos);
    CHECK(r.out.empty());

    const auto unknown = ws.write("unknown.json", R"({"dims": 10})");
    CHECK(run_cli({"gen-data", "--spec", unknown, "--out", ws.dir()}).code == 2);
    CHECK(run_cli({"gen-data", "--spec", ws.path("missing.json"), "--out", ws.dir()}).code == 3);
    const auto spec = ws.write("spec.json", kSpec);
    CHECK(run_cli({"gen-data", "--spec", spec, "--out", ws.path("nodir")}).code == 3);
}

TEST_CASE("train: model-aware beats the baseline and reports on standard output") {
    Workspace ws;
    generate(ws);
    auto train = [&](const std::string& strategy, const std::string& out) {
        return run_cli({"train", "--model", ws.path("model.json"), "--partition", ws.path("partition.json"),
                        "--cal", ws.path("calibration.csv"), "--bits", "5", "--strategy", strategy, "--out",
                        ws.path(out)});
    };
    const auto d = train("distributed", "d.json");
    const auto a = train("agnostic", "a.json");
    REQUIRE(d.code == 0);
    REQUIRE(a.code == 0);
    const auto dj = Json::parse(d.out);
    const auto aj = Json::parse(a.out);
    CHECK(dj["calibration"]["strategy"] == "distributed");
    CHECK(dj["calibration"]["n"] == 400);
    CHECK(dj["calibration"]["mse"].get<double>() < aj["calibration"]["mse"].get<double>());
    CHECK(quantizer_from_json(read_json_file(ws.path("d.json"))).active.codebook(0).bits() == 5);

    // Without --out the codebook itself is the only thing on standard output.
    const auto inline_run = run_cli({"train", "--model", ws.path("model.json"), "--partition",
                                     ws.path("partition.json"), "--cal", ws.path("calibration.csv"), "--bits",
                                     "5,4"});
    REQUIRE(inline_run.code == 0);
    const auto q = quantizer_from_json(Json::parse(inline_run.out)).active;
    CHECK(q.codebook(1).bits() == 4);
    CHECK(inline_run.err.find("calibration mse") != std::string::npos);
}

TEST_CASE("train: lossless rate gives zero calibration error") {
    Workspace ws;
    generate(ws);
    const auto r = run_cli({"train", "--model", ws.path("model.json"), "--partition", ws.path("partition.json"),
                            "--cal", ws.path("calibration.csv"), "--bits", "9", "--out", ws.path("q.json")});
    REQUIRE(r.code == 0);
    CHECK(Json::parse(r.out)["calibration"]["mse"].get<double>() <= 1e-18);
}

TEST_CASE("train: input errors") {
    Workspace ws;
    generate(ws);
    const auto broken = ws.write("broken.json", "{\"dim\": 6, \"beta\": [1,2");
    auto r = run_cli({"train", "--model", broken, "--partition", ws.path("partition.json"), "--cal",
                      ws.path("calibration.csv"), "--bits", "2"});
    CHECK(r.code == 2);
    CHECK(r.out.empty());
    r = run_cli({"train", "--model", ws.path("model.json"), "--partition", ws.path("partition.json"), "--cal",
                 ws.path("calibration.csv"), "--bits", "2,2,2"});
    CHECK(r.code == 2);
    r = run_cli({"train", "--model", ws.path("model.json"), "--partition", ws.path("partition.json"), "--cal",
                 ws.path("calibration.csv"), "--bits", "31"});
    CHECK(r.code == 2);
    r = run_cli({"train", "--model", ws.path("model.json"), "--partition", ws.path("partition.json"), "--cal",
                 ws.path("calibration.csv"), "--bits", "2", "--strategy", "random"});
    CHECK(r.code == 2);
    r = run_cli({"train", "--model", ws.path("model.json"), "--partition", ws.path("partition.json"), "--cal",
                 ws.path("nope.csv"), "--bits", "2"});
    CHECK(r.code == 3);
}

TEST_CASE("adapt: identity, reduce and restore, clamp") {
    Workspace ws;
    generate(ws);
    REQUIRE(run_cli({"train", "--model", ws.path("model.json"), "--partition", ws.path("partition.json"), "--cal",
                     ws.path("calibration.csv"), "--bits", "6", "--out", ws.path("full.json")})
                .code == 0);
    const auto original = slurp(ws.path("full.json"));

    REQUIRE(run_cli({"adapt", "--codebook", ws.path("full.json"), "--bits", "6", "--out", ws.path("same.json")})
                .code == 0);
    CHECK(slurp(ws.path("same.json")) == original);

    REQUIRE(run_cli({"adapt", "--codebook", ws.path("full.json"), "--bits", "2,3", "--out", ws.path("low.json")})
                .code == 0);
    const auto low = quantizer_from_json(read_json_file(ws.path("low.json")));
    CHECK(low.active.codebook(0).size() <= 4);
    CHECK(low.active.codebook(1).size() <= 8);
    CHECK(low.full_rate_codebooks.has_value());

    REQUIRE(run_cli({"adapt", "--codebook", ws.path("low.json"), "--bits", "6", "--out", ws.path("back.json")})
                .code == 0);
    CHECK(slurp(ws.path("back.json")) == original);

    const auto clamped = run_cli({"adapt", "--codebook", ws.path("full.json"), "--bits", "9"});
    CHECK(clamped.code == 0);
    CHECK(clamped.err.find("warning") != std::string::npos);
    CHECK(clamped.out == original);
}

TEST_CASE("eval and simulate") {
    Workspace ws;
    generate(ws);
    REQUIRE(run_cli({"train", "--model", ws.path("model.json"), "--partition", ws.path("partition.json"), "--cal",
                     ws.path("calibration.csv"), "--bits", "3", "--out", ws.path("q.json")})
                .code == 0);
    const auto e = run_cli({"eval", "--codebook", ws.path("q.json"), "--test", ws.path("test.csv")});
    REQUIRE(e.code == 0);
    const auto report = Json::parse(e.out);
    CHECK(report["n"] == 1000);
    CHECK(report["mse"].get<double>() > 0.0);
    CHECK(report["stderr"].get<double>() > 0.0);
    CHECK(report["mean_error_norm"].size() == 2);

    const auto sched = ws.write("sched.json", R"({"events": [{"t": 0, "bits": [3, 3]}, {"t": 500, "bits": [1, 2]}]})");
    const auto s = run_cli({"simulate", "--codebook", ws.path("q.json"), "--schedule", sched, "--stream",
                            ws.path("test.csv")});
    REQUIRE(s.code == 0);
    CHECK(s.out.rfind("step,sensor_bits_total,y_hat,y_tilde,sq_err\n", 0) == 0);
    CHECK(std::count(s.out.begin(), s.out.end(), '\n') == 1001);
    CHECK(s.out.find("\n499,6,") != std::string::npos);
    CHECK(s.out.find("\n500,3,") != std::string::npos);

    const auto bad_sched = ws.write("bad_sched.json", R"({"events": [{"t": 1, "bits": [3, 3]}]})");
    CHECK(run_cli({"simulate", "--codebook", ws.path("q.json"), "--schedule", bad_sched, "--stream",
                   ws.path("test.csv")})
              .code == 2);
}

TEST_CASE("reproduce-fig2 is deterministic") {
    Workspace ws;
    const auto spec = ws.write("spec.json", kSpec);
    const auto a = run_cli({"reproduce-fig2", "--spec", spec});
    const auto b = run_cli({"reproduce-fig2", "--spec", spec, "--threads", "3"});
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(std::count(a.out.begin(), a.out.end(), '\n') == 4);
    CHECK(run_cli({"reproduce-fig2", "--spec", spec, "--out", ws.path("fig.csv")}).code == 0);
    CHECK(slurp(ws.path("fig.csv")) == a.out);
}

TEST_CASE("usage errors") {
    CHECK(run_cli({}).code == 2);
    CHECK(run_cli({"frobnicate"}).code == 2);
    CHECK(run_cli({"eval", "--codebook"}).code == 2);
    CHECK(run_cli({"eval", "--codebook", "x.json", "--test", "y.csv", "--bogus"}).code == 2);
    const auto help = run_cli({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("reproduce-fig2") != std::string::npos);
}
