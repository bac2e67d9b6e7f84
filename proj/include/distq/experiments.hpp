#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "distq/core.hpp"
#include "distq/io.hpp"

namespace distq {

/// Synthetic linear-regression instance and experiment sweep settings.
struct SyntheticSpec {
    std::uint64_t seed = 0;
    std::size_t n_cal = 10000;
    std::size_t n_test = 100000;
    std::size_t d = 100;
    std::size_t m = 10;
    std::size_t features_per_sensor = 10;
    std::vector<int> bit_range{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::size_t baseline_restarts = 8;

    /// Throws InvalidArgument naming the violated constraint.
    void validate() const;
};

Json spec_to_json(const SyntheticSpec& spec);
/// Unknown keys are rejected; missing keys keep their defaults.
SyntheticSpec spec_from_json(const Json& j);

struct SyntheticData {
    CalibrationSet calibration;
    Matrix test;
    LinearModel model;
    FeaturePartition partition;
    /// Generating distribution, kept for diagnostics.
    std::vector<double> mean;
    Matrix covariance;
};

/// Gaussian regressors with random mean (iid N(0,1)) and covariance
/// A A^T / d + 0.1 I (A iid N(0,1)), sampled through the Cholesky factor.
/// beta is iid N(0,1). Sensors observe consecutive feature blocks. Each
/// quantity draws from its own stream keyed by (seed, stream id).
SyntheticData gen_synthetic(const SyntheticSpec& spec);

/// Draws `n` samples from N(mean, covariance) with a dedicated stream.
Matrix sample_gaussian(const std::vector<double>& mean, const Matrix& covariance, std::size_t n,
                       std::uint64_t seed, std::uint64_t stream);

struct SweepRow {
    int bits;
    MseEstimate nonadaptive;
    MseEstimate adaptive;
    MseEstimate agnostic;
    /// Per-sensor projected distortion of the non-adaptive quantizer on the
    /// calibration set.
    std::vector<double> calibration_distortion;
};

struct SweepResult {
    std::vector<SweepRow> rows;

    /// bits,mse_nonadaptive,mse_adaptive,mse_agnostic,stderr_nonadaptive,
    /// stderr_adaptive,stderr_agnostic
    void write_csv(std::ostream& out) const;
};

/// Sweeps bit_range comparing model-aware training, adaptation from the
/// highest-rate quantizer, and the model-agnostic baseline on the test set.
SweepResult run_rate_sweep(const SyntheticSpec& spec);
SweepResult run_rate_sweep(const SyntheticSpec& spec, const SyntheticData& data);

}  // namespace distq
