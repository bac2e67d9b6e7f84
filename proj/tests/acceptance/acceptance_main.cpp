// Acceptance suite: one PASS/FAIL line per criterion on standard output,
// supporting detail on standard error. Exit status is non-zero when any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "distq/adaptive.hpp"
#include "distq/clustering.hpp"
#include "distq/experiments.hpp"
#include "distq/io.hpp"
#include "distq/parallel.hpp"
#include "distq/scheme.hpp"
#include "distq/simnet.hpp"
#include "oracles.hpp"

using namespace distq;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void fail(const std::string& why) {
        if (pass) detail = why;
        pass = false;
    }
};

Matrix gaussian_rows(std::mt19937_64& rng, std::size_t n, std::size_t d) {
    std::normal_distribution<double> g;
    Matrix x(n, d);
    for (std::size_t j = 0; j < n; ++j) {
        for (double& v : x.row(j)) v = g(rng);
    }
    return x;
}

std::vector<double> gaussian_vector(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> g;
    std::vector<double> v(n);
    for (double& x : v) x = g(rng);
    return v;
}

// Random partition of d features into m non-empty sensors.
FeaturePartition random_partition(std::mt19937_64& rng, std::size_t d, std::size_t m) {
    std::vector<std::size_t> perm(d);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::vector<std::size_t>> sets(m);
    for (std::size_t i = 0; i < m; ++i) sets[i].push_back(perm[i]);
    for (std::size_t r = m; r < d; ++r) sets[rng() % m].push_back(perm[r]);
    for (auto& s : sets) std::sort(s.begin(), s.end());
    return FeaturePartition(d, std::move(sets));
}

double weighted_reduction_distortion(const SensorCodebook& full, const SensorCodebook& reduced) {
    double acc = 0.0;
    for (std::size_t k = 0; k < full.size(); ++k) {
        const double h = full.projected()[k];
        const double q = reduced.projected()[reduced.nearest(h)];
        acc += static_cast<double>(full.weights()[k]) * (h - q) * (h - q);
    }
    return acc;
}

// ------------------------------------------------------------------ 1

Outcome sweep_shape() {
    Outcome o;
    for (std::uint64_t seed : {0u, 1u, 2u}) {
        SyntheticSpec spec;
        spec.seed = seed;
        const auto result = run_rate_sweep(spec);
        std::cerr << "seed " << seed << "\n  B  nonadaptive     adaptive        agnostic        ratio\n";
        double best_ratio = 0.0;
        for (std::size_t r = 0; r < result.rows.size(); ++r) {
            const auto& row = result.rows[r];
            const double ratio = row.agnostic.mse / row.nonadaptive.mse;
            char line[160];
            std::snprintf(line, sizeof line, "  %-2d %-15.6g %-15.6g %-15.6g %.3g\n", row.bits,
                          row.nonadaptive.mse, row.adaptive.mse, row.agnostic.mse, ratio);
            std::cerr << line;
            if (row.bits >= 4 && row.bits <= 7) best_ratio = std::max(best_ratio, ratio);
            if (!(row.adaptive.mse <= 1.25 * row.nonadaptive.mse)) {
                o.fail("seed " + std::to_string(seed) + ", B=" + std::to_string(row.bits) +
                       ": adaptive exceeds 1.25x non-adaptive");
            }
            if (r > 0) {
                const auto& prev = result.rows[r - 1].calibration_distortion;
                for (std::size_t i = 0; i < prev.size(); ++i) {
                    if (row.calibration_distortion[i] > prev[i]) {
                        o.fail("seed " + std::to_string(seed) + ", sensor " + std::to_string(i) +
                               ": calibration distortion rose at B=" + std::to_string(row.bits));
                    }
                }
            }
        }
        if (!(best_ratio >= 10.0)) {
            o.fail("seed " + std::to_string(seed) + ": best agnostic/non-adaptive ratio for B in 4..7 is " +
                   std::to_string(best_ratio));
        }
        if (o.detail.empty()) o.detail = "best ratios logged on stderr";
    }
    return o;
}

// ------------------------------------------------------------------ 2

Outcome kmeans1d_oracle() {
    Outcome o;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> wdist(0.1, 5.0);
    std::size_t set_checked = 0;
    for (int t = 0; t < 500; ++t) {
        const std::size_t n = 1 + rng() % 12;
        const std::size_t k = 1 + rng() % 4;
        const auto v = oracle::random_values(rng, n);
        std::vector<double> w(n);
        for (double& x : w) x = wdist(rng);
        const auto dp = kmeans1d_weighted(v, w, k);
        const auto brute = oracle::best_contiguous(v, w, k);
        if (!oracle::rel_close(dp.cost, brute.cost, 1e-9, 1e-12)) {
            o.fail("instance " + std::to_string(t) + ": DP cost " + std::to_string(dp.cost) + " vs " +
                   std::to_string(brute.cost));
        }
        if (n <= 8) {
            ++set_checked;
            const double all = oracle::best_set_partition(v, w, k);
            if (!oracle::rel_close(dp.cost, all, 1e-9, 1e-12)) {
                o.fail("instance " + std::to_string(t) + ": DP cost differs from set-partition optimum");
            }
        }
    }
    if (o.pass) o.detail = "500 instances, " + std::to_string(set_checked) + " also vs set partitions";
    return o;
}

// ------------------------------------------------------------------ 3

Outcome reduction_oracle() {
    Outcome o;
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<std::uint64_t> count(1, 50);
    for (int t = 0; t < 200; ++t) {
        const std::size_t dim = 1 + rng() % 3;
        const std::size_t k_eff = 1 + rng() % 8;
        const auto beta = gaussian_vector(rng, dim);
        std::vector<std::vector<double>> cw;
        std::vector<std::uint64_t> w;
        for (std::size_t k = 0; k < k_eff; ++k) {
            cw.push_back(gaussian_vector(rng, dim));
            w.push_back(count(rng));
        }
        const auto cb = assemble_codebook(0, 3, cw, w, beta);
        const std::vector<double> hw(cb.weights().begin(), cb.weights().end());
        const int bits = 1 + static_cast<int>(rng() % 2);
        const auto reduced = reduce_codebook(cb, bits, beta);
        const double got = weighted_reduction_distortion(cb, reduced);
        const double want = oracle::best_contiguous(cb.projected(), hw, std::size_t{1} << bits).cost;
        if (!oracle::rel_close(got, want, 1e-9, 1e-12)) {
            o.fail("instance " + std::to_string(t) + ": distortion " + std::to_string(got) + " vs " +
                   std::to_string(want));
        }
    }
    if (o.pass) o.detail = "200 codebooks";
    return o;
}

// ------------------------------------------------------------------ 4

Outcome contracts() {
    Outcome o;
    std::mt19937_64 rng(4);
    for (std::size_t k_eff : {2u, 4u, 8u}) {
        const auto beta = gaussian_vector(rng, 2);
        std::vector<std::vector<double>> cw;
        for (std::size_t k = 0; k < k_eff; ++k) cw.push_back(gaussian_vector(rng, 2));
        const auto cb = assemble_codebook(0, 3, cw, std::vector<std::uint64_t>(k_eff, 3), beta);
        const int bits = static_cast<int>(std::log2(static_cast<double>(cb.size())));
        if ((std::size_t{1} << bits) == cb.size() && !(reduce_codebook(cb, bits, beta) == cb)) {
            o.fail("reduction at K' = K_eff changed the codebook");
        }
    }

    const auto x = gaussian_rows(rng, 4000, 6);
    const auto full = train_distributed(CalibrationSet(x), LinearModel(gaussian_vector(rng, 6)),
                                        FeaturePartition::contiguous(3, 2), {{10, 10, 10}, 0, 8});
    const auto down = adapt(full, std::vector<int>{5, 5, 5}).quantizer;
    const auto up = adapt(full, std::vector<int>{10, 10, 10}).quantizer;
    if (!(up == full) || dump_json(quantizer_to_json(up)) != dump_json(quantizer_to_json(full))) {
        o.fail("10 -> 5 -> 10 bits did not restore the codebooks");
    }
    if (down == full) o.fail("reduction to 5 bits left the codebooks unchanged");
    const RateSchedule sched({{0, {10, 10, 10}}, {100, {5, 5, 5}}, {200, {10, 10, 10}}});
    const auto tr = run_session(full, sched, gaussian_rows(rng, 300, 6));
    for (const auto& e : tr.events) {
        if (!e.synchronized) o.fail("sensor and fusion codebooks diverged in a session");
    }

    for (int bits = 1; bits <= 10; ++bits) {
        for (std::uint32_t idx = 0; idx < (1u << bits); ++idx) {
            const auto frame = encode_frame({7, idx, bits, idx});
            const auto back = decode_frame(frame);
            if (decode_index(encode_index(idx, bits), bits) != idx || back.index != idx ||
                back.payload_bits != bits) {
                o.fail("codec round trip failed at bits=" + std::to_string(bits));
            }
        }
    }
    if (o.pass) o.detail = "identity, 10->5->10 restore, codec bits 1..10";
    return o;
}

// ------------------------------------------------------------------ 5

Outcome dominance() {
    Outcome o;
    std::mt19937_64 rng(55);
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = 10 + rng() % 191;
        const std::size_t d = 1 + rng() % 10;
        const std::size_t m = 1 + rng() % std::min<std::size_t>(3, d);
        const auto x = gaussian_rows(rng, n, d);
        const LinearModel model(gaussian_vector(rng, d));
        const auto part = random_partition(rng, d, m);
        std::vector<int> bits(m);
        for (int& b : bits) b = 1 + static_cast<int>(rng() % 4);
        const TrainConfig cfg{bits, static_cast<std::uint64_t>(t), 8};
        const auto ours = projected_distortion(train_distributed(CalibrationSet(x), model, part, cfg), x);
        const auto base = projected_distortion(train_agnostic(CalibrationSet(x), part, model, cfg), x);
        for (std::size_t i = 0; i < m; ++i) {
            if (ours[i] > base[i] + 1e-9 * std::max(1.0, base[i])) {
                o.fail("instance " + std::to_string(t) + ", sensor " + std::to_string(i) + ": " +
                       std::to_string(ours[i]) + " > " + std::to_string(base[i]));
            }
        }
    }
    if (o.pass) o.detail = "50 instances";
    return o;
}

// ------------------------------------------------------------------ 6

Outcome lossless() {
    Outcome o;
    std::mt19937_64 rng(66);
    double worst = 0.0;
    for (int t = 0; t < 30; ++t) {
        const std::size_t n = 5 + rng() % 300;
        const std::size_t d = 2 + rng() % 8;
        const std::size_t m = 1 + rng() % std::min<std::size_t>(3, d);
        auto x = gaussian_rows(rng, n, d);
        // Repeat some rows so duplicate projections occur.
        for (std::size_t j = 1; j < n; j += 3) {
            const auto src = x.row(rng() % j);
            std::copy(src.begin(), src.end(), x.row(j).begin());
        }
        const LinearModel model(gaussian_vector(rng, d));
        const auto part = random_partition(rng, d, m);
        const int bits = static_cast<int>(std::ceil(std::log2(static_cast<double>(n)))) + 1;
        const auto q = train_distributed(CalibrationSet(x), model, part, {std::vector<int>(m, bits), 0, 8});
        const double mse = evaluate_mse(q, x).mse;
        worst = std::max(worst, mse);
        if (!(mse <= 1e-18)) o.fail("instance " + std::to_string(t) + ": mse " + std::to_string(mse));
    }
    if (o.pass) {
        std::ostringstream ss;
        ss << "30 instances, worst mse " << worst;
        o.detail = ss.str();
    }
    return o;
}

// ------------------------------------------------------------------ 7

Outcome determinism() {
    Outcome o;
    const auto dir = std::filesystem::temp_directory_path() /
                     ("distq_accept_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(dir);
    const auto spec_path = (dir / "spec.json").string();
    SyntheticSpec spec;
    spec.seed = 9;
    spec.n_cal = 3000;
    spec.n_test = 20000;
    spec.d = 40;
    spec.m = 4;
    spec.features_per_sensor = 10;
    spec.bit_range = {1, 2, 3, 4, 5, 6, 7, 8};
    write_text_file(spec_path, dump_json(spec_to_json(spec)));

    std::ostringstream out1, out2, err;
    const int c1 = cli::run({"reproduce-fig2", "--spec", spec_path, "--threads", "1"}, out1, err);
    const int c2 = cli::run({"reproduce-fig2", "--spec", spec_path, "--threads", "0"}, out2, err);
    std::filesystem::remove_all(dir);
    if (c1 != 0 || c2 != 0) o.fail("reproduce-fig2 exited with " + std::to_string(c1) + "/" + std::to_string(c2));
    else if (out1.str() != out2.str()) o.fail("outputs differ");
    else if (out1.str().empty()) o.fail("empty output");
    else o.detail = std::to_string(out1.str().size()) + " identical bytes";
    return o;
}

}  // namespace

int main() {
    set_thread_count(0);
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"1 sweep shape (3 seeds, full size)", sweep_shape},
        {"2 1-D k-means vs brute force", kmeans1d_oracle},
        {"3 codebook reduction vs brute force", reduction_oracle},
        {"4 identity and round-trip contracts", contracts},
        {"5 dominance over the baseline", dominance},
        {"6 lossless limit", lossless},
        {"7 reproducible sweep output", determinism},
    };
    bool all = true;
    for (const auto& [name, check] : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        char timing[32];
        std::snprintf(timing, sizeof timing, "%.1fs", secs);
        std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << name << "  [" << timing << "]  " << o.detail
                  << std::endl;
        all = all && o.pass;
    }
    return all ? 0 : 1;
}
