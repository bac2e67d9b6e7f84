#include "distq/experiments.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <random>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "distq/adaptive.hpp"
#include "distq/errors.hpp"
#include "distq/scheme.hpp"

namespace distq {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum Stream : std::uint64_t { kMean = 0, kFactor = 1, kBeta = 2, kCalibration = 3, kTest = 4 };

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

std::vector<double> normals(std::size_t n, std::uint64_t seed, std::uint64_t stream) {
    auto rng = make_rng(seed, stream);
    std::normal_distribution<double> gauss;
    std::vector<double> out(n);
    for (double& v : out) v = gauss(rng);
    return out;
}

std::vector<int> sorted_bits(const std::vector<int>& bits) {
    std::vector<int> out = bits;
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace

void SyntheticSpec::validate() const {
    if (d == 0 || m == 0 || features_per_sensor == 0) {
        throw InvalidArgument("d, m and features_per_sensor must be positive");
    }
    if (m * features_per_sensor != d) {
        throw InvalidArgument("m x features_per_sensor must equal d (" + std::to_string(m) + " x " +
                              std::to_string(features_per_sensor) + " != " + std::to_string(d) + ")");
    }
    if (n_cal < 1 || n_test < 1) throw InvalidArgument("n_cal and n_test must be at least 1");
    if (bit_range.empty()) throw InvalidArgument("bit_range must not be empty");
    for (int b : bit_range) {
        if (b < 1 || b > SensorCodebook::kMaxBits) {
            throw InvalidArgument("bit_range entries must lie in [1, " +
                                  std::to_string(SensorCodebook::kMaxBits) + "]");
        }
    }
    if (baseline_restarts < 1) throw InvalidArgument("baseline_restarts must be at least 1");
}

Json spec_to_json(const SyntheticSpec& spec) {
    return Json{{"seed", spec.seed},
                {"n_cal", spec.n_cal},
                {"n_test", spec.n_test},
                {"d", spec.d},
                {"m", spec.m},
                {"features_per_sensor", spec.features_per_sensor},
                {"bit_range", spec.bit_range},
                {"baseline_restarts", spec.baseline_restarts}};
}

SyntheticSpec spec_from_json(const Json& j) {
    if (!j.is_object()) throw ConfigError("spec must be a JSON object");
    SyntheticSpec spec;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "seed") spec.seed = value.get<std::uint64_t>();
            else if (key == "n_cal") spec.n_cal = value.get<std::size_t>();
            else if (key == "n_test") spec.n_test = value.get<std::size_t>();
            else if (key == "d") spec.d = value.get<std::size_t>();
            else if (key == "m") spec.m = value.get<std::size_t>();
            else if (key == "features_per_sensor") spec.features_per_sensor = value.get<std::size_t>();
            else if (key == "bit_range") spec.bit_range = value.get<std::vector<int>>();
            else if (key == "baseline_restarts") spec.baseline_restarts = value.get<std::size_t>();
            else throw ConfigError("spec has unknown key \"" + key + "\"");
        }
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("spec: ") + e.what());
    }
    try {
        spec.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("spec: ") + e.what());
    }
    return spec;
}

Matrix sample_gaussian(const std::vector<double>& mean, const Matrix& covariance, std::size_t n,
                       std::uint64_t seed, std::uint64_t stream) {
    const std::size_t d = mean.size();
    if (covariance.rows() != d || covariance.cols() != d) {
        throw DimensionError("covariance must be " + std::to_string(d) + " x " + std::to_string(d));
    }
    const Eigen::Map<const RowMatrix> sigma(covariance.data().data(), static_cast<Eigen::Index>(d),
                                            static_cast<Eigen::Index>(d));
    const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) throw InvalidInput("covariance is not positive definite");
    const Eigen::MatrixXd lower_t = llt.matrixL().transpose();
    const Eigen::Map<const Eigen::RowVectorXd> mu(mean.data(), static_cast<Eigen::Index>(d));

    auto rng = make_rng(seed, stream);
    std::normal_distribution<double> gauss;
    Matrix out(n, d);
    constexpr std::size_t kBlock = 4096;
    RowMatrix z;
    for (std::size_t first = 0; first < n; first += kBlock) {
        const std::size_t rows = std::min(kBlock, n - first);
        z.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(d));
        for (Eigen::Index r = 0; r < z.rows(); ++r) {
            for (Eigen::Index c = 0; c < z.cols(); ++c) z(r, c) = gauss(rng);
        }
        Eigen::Map<RowMatrix> dst(out.row(first).data(), static_cast<Eigen::Index>(rows),
                                  static_cast<Eigen::Index>(d));
        dst.noalias() = z * lower_t;
        dst.rowwise() += mu;
    }
    return out;
}

SyntheticData gen_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    const std::size_t d = spec.d;

    auto mean = normals(d, spec.seed, kMean);
    const auto a_entries = normals(d * d, spec.seed, kFactor);
    const Eigen::Map<const RowMatrix> a(a_entries.data(), static_cast<Eigen::Index>(d),
                                        static_cast<Eigen::Index>(d));
    RowMatrix sigma = (a * a.transpose()) / static_cast<double>(d);
    sigma.diagonal().array() += 0.1;
    // Symmetrize exactly; the product can differ in the last bit across the diagonal.
    sigma = (0.5 * (sigma + sigma.transpose())).eval();
    Matrix covariance(d, d, std::vector<double>(sigma.data(), sigma.data() + d * d));

    auto cal = sample_gaussian(mean, covariance, spec.n_cal, spec.seed, kCalibration);
    auto test = sample_gaussian(mean, covariance, spec.n_test, spec.seed, kTest);
    auto beta = normals(d, spec.seed, kBeta);

    return SyntheticData{CalibrationSet(std::move(cal)), std::move(test), LinearModel(std::move(beta)),
                         FeaturePartition::contiguous(spec.m, spec.features_per_sensor),
                         std::move(mean), std::move(covariance)};
}

SweepResult run_rate_sweep(const SyntheticSpec& spec) {
    return run_rate_sweep(spec, gen_synthetic(spec));
}

SweepResult run_rate_sweep(const SyntheticSpec& spec, const SyntheticData& data) {
    spec.validate();
    const auto bits = sorted_bits(spec.bit_range);
    const std::size_t m = data.partition.sensor_count();

    auto config = [&](int b) {
        TrainConfig cfg;
        cfg.bits_per_sensor.assign(m, b);
        cfg.baseline_seed = spec.seed;
        cfg.baseline_restarts = spec.baseline_restarts;
        return cfg;
    };

    const auto full_rate = train_distributed(data.calibration, data.model, data.partition,
                                             config(bits.back()));

    SweepResult result;
    for (int b : bits) {
        const auto cfg = config(b);
        const auto nonadaptive = b == bits.back()
                                     ? full_rate
                                     : train_distributed(data.calibration, data.model, data.partition, cfg);
        const auto adaptive = adapt(full_rate, cfg.bits_per_sensor).quantizer;
        const auto agnostic = train_agnostic(data.calibration, data.partition, data.model, cfg);
        result.rows.push_back({b, evaluate_mse(nonadaptive, data.test), evaluate_mse(adaptive, data.test),
                               evaluate_mse(agnostic, data.test),
                               projected_distortion(nonadaptive, data.calibration.samples())});
    }
    return result;
}

void SweepResult::write_csv(std::ostream& out) const {
    out << "bits,mse_nonadaptive,mse_adaptive,mse_agnostic,stderr_nonadaptive,stderr_adaptive,"
           "stderr_agnostic\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.bits,
                      r.nonadaptive.mse, r.adaptive.mse, r.agnostic.mse, r.nonadaptive.std_error,
                      r.adaptive.std_error, r.agnostic.std_error);
        out << buf;
    }
}

}  // namespace distq
