#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace distq {

/// Dense row-major matrix of doubles. Row j is sample x_j.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
    static Matrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return rows_ == 0; }

    std::span<const double> row(std::size_t r) const noexcept {
        return {data_.data() + r * cols_, cols_};
    }
    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }

    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }

    std::span<const double> data() const noexcept { return data_; }

    /// Rows [first, first + count) as a new matrix.
    Matrix slice_rows(std::size_t first, std::size_t count) const;

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Which feature indices each sensor observes. Sets are non-empty, pairwise
/// disjoint and drawn from [0, total_dim). Index order inside a set is the
/// order of the sensor's local slice.
class FeaturePartition {
public:
    FeaturePartition(std::size_t total_dim, std::vector<std::vector<std::size_t>> sensor_sets);

    /// m consecutive blocks of `per_sensor` features.
    static FeaturePartition contiguous(std::size_t sensors, std::size_t per_sensor);

    std::size_t total_dim() const noexcept { return total_dim_; }
    std::size_t sensor_count() const noexcept { return sets_.size(); }
    std::span<const std::size_t> indices(std::size_t sensor) const { return sets_.at(sensor); }
    std::size_t sensor_dim(std::size_t sensor) const { return sets_.at(sensor).size(); }
    const std::vector<std::vector<std::size_t>>& sets() const noexcept { return sets_; }

    /// x^(i): the entries of a full-length vector observed by `sensor`.
    std::vector<double> slice(std::span<const double> x, std::size_t sensor) const;

    bool operator==(const FeaturePartition&) const = default;

private:
    std::size_t total_dim_;
    std::vector<std::vector<std::size_t>> sets_;
};

/// Pretrained linear regressor y = <x, beta>.
class LinearModel {
public:
    explicit LinearModel(std::vector<double> beta);

    std::size_t dim() const noexcept { return beta_.size(); }
    std::span<const double> beta() const noexcept { return beta_; }

    /// beta^(i) for one sensor of `partition`.
    std::vector<double> slice(const FeaturePartition& partition, std::size_t sensor) const;

    double predict(std::span<const double> x) const;

    bool operator==(const LinearModel&) const = default;

private:
    std::vector<double> beta_;
};

/// Unlabelled calibration samples, one per row. At least one row, all finite.
class CalibrationSet {
public:
    explicit CalibrationSet(Matrix samples);

    std::size_t size() const noexcept { return samples_.rows(); }
    std::size_t dim() const noexcept { return samples_.cols(); }
    const Matrix& samples() const noexcept { return samples_; }

private:
    Matrix samples_;
};

/// One sensor's quantizer. Decision regions are implicit: an observation maps
/// to the codeword whose projected value is nearest to the observation's
/// projection, i.e. intervals bounded by midpoints of consecutive projected
/// values.
class SensorCodebook {
public:
    static constexpr int kMaxBits = 30;

    SensorCodebook(std::size_t sensor_id, int bits, std::vector<std::vector<double>> codewords,
                   std::vector<double> projected, std::vector<std::uint64_t> weights);

    std::size_t sensor_id() const noexcept { return sensor_id_; }
    int bits() const noexcept { return bits_; }
    /// K_eff, possibly below 2^bits.
    std::size_t size() const noexcept { return projected_.size(); }
    std::size_t dim() const noexcept { return codewords_.front().size(); }

    const std::vector<std::vector<double>>& codewords() const noexcept { return codewords_; }
    std::span<const double> codeword(std::size_t k) const { return codewords_.at(k); }
    const std::vector<double>& projected() const noexcept { return projected_; }
    const std::vector<std::uint64_t>& weights() const noexcept { return weights_; }
    std::uint64_t total_weight() const noexcept;

    /// Index of the projected value nearest to `value`; exact midpoints go to
    /// the lower index.
    std::size_t nearest(double value) const noexcept;

    bool operator==(const SensorCodebook&) const = default;

private:
    std::size_t sensor_id_;
    int bits_;
    std::vector<std::vector<double>> codewords_;
    std::vector<double> projected_;
    std::vector<std::uint64_t> weights_;
    std::vector<double> midpoints_;
};

/// All sensor codebooks bound to one model and partition.
class DistributedQuantizer {
public:
    DistributedQuantizer(LinearModel model, FeaturePartition partition,
                         std::vector<SensorCodebook> codebooks);

    const LinearModel& model() const noexcept { return model_; }
    const FeaturePartition& partition() const noexcept { return partition_; }
    std::size_t sensor_count() const noexcept { return codebooks_.size(); }
    const std::vector<SensorCodebook>& codebooks() const noexcept { return codebooks_; }
    const SensorCodebook& codebook(std::size_t sensor) const { return codebooks_.at(sensor); }
    std::span<const double> beta_slice(std::size_t sensor) const { return beta_slices_.at(sensor); }

    /// y^(i) computed straight from a full-length input.
    double sensor_projection(std::span<const double> x, std::size_t sensor) const;

    bool operator==(const DistributedQuantizer& other) const {
        return model_ == other.model_ && partition_ == other.partition_ &&
               codebooks_ == other.codebooks_;
    }

private:
    LinearModel model_;
    FeaturePartition partition_;
    std::vector<SensorCodebook> codebooks_;
    std::vector<std::vector<double>> beta_slices_;
};

/// <x_slice, beta_slice>.
double project(std::span<const double> x_slice, std::span<const double> beta_slice);

struct QuantizedObservation {
    std::size_t index;
    std::span<const double> codeword;
};

QuantizedObservation quantize(const SensorCodebook& codebook, std::span<const double> beta_slice,
                              std::span<const double> x_slice);

struct Prediction {
    double y_tilde;
    std::vector<std::size_t> indices;
};

/// Fusion-center output: the sum over sensors of the selected projected values.
Prediction predict(const DistributedQuantizer& q, std::span<const double> x);

struct MseEstimate {
    double mse;
    /// Sample standard deviation of the squared errors over sqrt(N).
    double std_error;
};

/// Monte-Carlo MSE between quantized and unquantized model outputs.
MseEstimate evaluate_mse(const DistributedQuantizer& q, const Matrix& test);

/// Per-sensor norm of the mean quantization-error vector (x~^(i) - x^(i))
/// over the rows of `samples`. Values near zero mean other sensors' errors
/// look unbiased on this data, which is what decoupled training relies on.
std::vector<double> mean_quantization_error(const DistributedQuantizer& q, const Matrix& samples);

/// Sum over rows of (h_{q(x)} - <x^(i), beta^(i)>)^2 for each sensor.
std::vector<double> projected_distortion(const DistributedQuantizer& q, const Matrix& samples);

}  // namespace distq
