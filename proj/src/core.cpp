#include "distq/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "distq/errors.hpp"
#include "distq/parallel.hpp"

namespace distq {
namespace {

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Row blocks for parallel evaluation; fixed so results never depend on the
// worker count.
constexpr std::size_t kRowBlock = 4096;

}  // namespace

// ---------------------------------------------------------------- Matrix

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw DimensionError("matrix data holds " + std::to_string(data_.size()) +
                             " values, expected " + std::to_string(rows_ * cols_));
    }
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    std::vector<std::vector<double>> copy;
    copy.reserve(rows.size());
    for (const auto& r : rows) copy.emplace_back(r);
    return from_rows(copy);
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    const std::size_t cols = rows.front().size();
    std::vector<double> data;
    data.reserve(rows.size() * cols);
    for (const auto& r : rows) {
        if (r.size() != cols) throw DimensionError("ragged rows");
        data.insert(data.end(), r.begin(), r.end());
    }
    return Matrix(rows.size(), cols, std::move(data));
}

Matrix Matrix::slice_rows(std::size_t first, std::size_t count) const {
    if (first + count > rows_) throw DimensionError("row slice out of range");
    std::vector<double> data(data_.begin() + static_cast<std::ptrdiff_t>(first * cols_),
                             data_.begin() + static_cast<std::ptrdiff_t>((first + count) * cols_));
    return Matrix(count, cols_, std::move(data));
}

// ------------------------------------------------------ FeaturePartition

FeaturePartition::FeaturePartition(std::size_t total_dim,
                                   std::vector<std::vector<std::size_t>> sensor_sets)
    : total_dim_(total_dim), sets_(std::move(sensor_sets)) {
    if (total_dim_ == 0) throw InvalidArgument("partition total_dim must be positive");
    if (sets_.empty()) throw InvalidArgument("partition needs at least one sensor");
    std::vector<bool> seen(total_dim_, false);
    for (std::size_t i = 0; i < sets_.size(); ++i) {
        if (sets_[i].empty()) {
            throw InvalidArgument("sensor " + std::to_string(i) + " observes no features");
        }
        for (std::size_t r : sets_[i]) {
            if (r >= total_dim_) {
                throw InvalidArgument("feature index " + std::to_string(r) + " outside [0, " +
                                      std::to_string(total_dim_) + ")");
            }
            if (seen[r]) {
                throw InvalidArgument("feature " + std::to_string(r) +
                                      " observed more than once; sensor sets must be disjoint");
            }
            seen[r] = true;
        }
    }
}

FeaturePartition FeaturePartition::contiguous(std::size_t sensors, std::size_t per_sensor) {
    std::vector<std::vector<std::size_t>> sets(sensors);
    for (std::size_t i = 0; i < sensors; ++i) {
        sets[i].resize(per_sensor);
        std::iota(sets[i].begin(), sets[i].end(), i * per_sensor);
    }
    return FeaturePartition(sensors * per_sensor, std::move(sets));
}

std::vector<double> FeaturePartition::slice(std::span<const double> x, std::size_t sensor) const {
    if (x.size() != total_dim_) {
        throw DimensionError("input has " + std::to_string(x.size()) + " features, partition expects " +
                             std::to_string(total_dim_));
    }
    const auto& set = sets_.at(sensor);
    std::vector<double> out(set.size());
    for (std::size_t k = 0; k < set.size(); ++k) out[k] = x[set[k]];
    return out;
}

// ----------------------------------------------------------- LinearModel

LinearModel::LinearModel(std::vector<double> beta) : beta_(std::move(beta)) {
    if (beta_.empty()) throw InvalidArgument("model dimension must be positive");
    if (!all_finite(beta_)) throw InvalidInput("model coefficients must be finite");
}

std::vector<double> LinearModel::slice(const FeaturePartition& partition, std::size_t sensor) const {
    if (partition.total_dim() != dim()) {
        throw DimensionError("model has dim " + std::to_string(dim()) + ", partition has " +
                             std::to_string(partition.total_dim()));
    }
    return partition.slice(beta_, sensor);
}

double LinearModel::predict(std::span<const double> x) const { return project(x, beta_); }

// -------------------------------------------------------- CalibrationSet

CalibrationSet::CalibrationSet(Matrix samples) : samples_(std::move(samples)) {
    if (samples_.rows() == 0 || samples_.cols() == 0) {
        throw InvalidInput("calibration set must hold at least one non-empty row");
    }
    if (!all_finite(samples_.data())) throw InvalidInput("calibration data must be finite");
}

// -------------------------------------------------------- SensorCodebook

SensorCodebook::SensorCodebook(std::size_t sensor_id, int bits,
                               std::vector<std::vector<double>> codewords,
                               std::vector<double> projected, std::vector<std::uint64_t> weights)
    : sensor_id_(sensor_id),
      bits_(bits),
      codewords_(std::move(codewords)),
      projected_(std::move(projected)),
      weights_(std::move(weights)) {
    if (bits_ < 1 || bits_ > kMaxBits) {
        throw InvalidCodebook("codebook bits must lie in [1, " + std::to_string(kMaxBits) + "]");
    }
    if (codewords_.empty()) throw InvalidCodebook("codebook is empty");
    if (codewords_.size() != projected_.size() || codewords_.size() != weights_.size()) {
        throw InvalidCodebook("codewords, projected values and weights differ in length");
    }
    if (codewords_.size() > (std::size_t{1} << bits_)) {
        throw InvalidCodebook(std::to_string(codewords_.size()) + " codewords exceed 2^" +
                              std::to_string(bits_));
    }
    const std::size_t d = codewords_.front().size();
    if (d == 0) throw InvalidCodebook("codewords must have positive dimension");
    for (const auto& c : codewords_) {
        if (c.size() != d) throw InvalidCodebook("codewords differ in dimension");
        if (!all_finite(c)) throw InvalidCodebook("codeword entries must be finite");
    }
    if (!all_finite(projected_)) throw InvalidCodebook("projected values must be finite");
    for (std::size_t k = 1; k < projected_.size(); ++k) {
        if (!(projected_[k - 1] < projected_[k])) {
            throw InvalidCodebook("projected values must be strictly increasing");
        }
    }
    for (auto w : weights_) {
        if (w == 0) throw InvalidCodebook("codeword weights must be positive");
    }
    midpoints_.resize(projected_.size() - 1);
    for (std::size_t k = 0; k + 1 < projected_.size(); ++k) {
        midpoints_[k] = 0.5 * (projected_[k] + projected_[k + 1]);
    }
}

std::uint64_t SensorCodebook::total_weight() const noexcept {
    return std::accumulate(weights_.begin(), weights_.end(), std::uint64_t{0});
}

std::size_t SensorCodebook::nearest(double value) const noexcept {
    // Count midpoints strictly below value; a value sitting on a midpoint
    // stays with the lower codeword.
    return static_cast<std::size_t>(
        std::lower_bound(midpoints_.begin(), midpoints_.end(), value) - midpoints_.begin());
}

// -------------------------------------------------- DistributedQuantizer

DistributedQuantizer::DistributedQuantizer(LinearModel model, FeaturePartition partition,
                                           std::vector<SensorCodebook> codebooks)
    : model_(std::move(model)), partition_(std::move(partition)), codebooks_(std::move(codebooks)) {
    if (model_.dim() != partition_.total_dim()) {
        throw DimensionError("model dim " + std::to_string(model_.dim()) +
                             " does not match partition total_dim " +
                             std::to_string(partition_.total_dim()));
    }
    if (codebooks_.size() != partition_.sensor_count()) {
        throw InvalidCodebook("expected one codebook per sensor (" +
                              std::to_string(partition_.sensor_count()) + "), got " +
                              std::to_string(codebooks_.size()));
    }
    beta_slices_.reserve(codebooks_.size());
    for (std::size_t i = 0; i < codebooks_.size(); ++i) {
        const auto& cb = codebooks_[i];
        if (cb.sensor_id() != i) {
            throw InvalidCodebook("codebook at position " + std::to_string(i) + " carries sensor_id " +
                                  std::to_string(cb.sensor_id()));
        }
        if (cb.dim() != partition_.sensor_dim(i)) {
            throw InvalidCodebook("sensor " + std::to_string(i) + " codewords have dimension " +
                                  std::to_string(cb.dim()) + ", sensor observes " +
                                  std::to_string(partition_.sensor_dim(i)));
        }
        auto beta = model_.slice(partition_, i);
        for (std::size_t k = 0; k < cb.size(); ++k) {
            const auto c = cb.codeword(k);
            double ip = 0.0;
            double mag = 0.0;
            for (std::size_t r = 0; r < c.size(); ++r) {
                ip += c[r] * beta[r];
                mag += std::abs(c[r] * beta[r]);
            }
            const double scale = std::max(std::abs(cb.projected()[k]), mag);
            if (std::abs(ip - cb.projected()[k]) > 1e-9 * scale) {
                throw InvalidCodebook("sensor " + std::to_string(i) + " codeword " + std::to_string(k) +
                                      " projected value disagrees with <c, beta>");
            }
        }
        beta_slices_.push_back(std::move(beta));
    }
}

double DistributedQuantizer::sensor_projection(std::span<const double> x, std::size_t sensor) const {
    const auto idx = partition_.indices(sensor);
    const auto& beta = beta_slices_[sensor];
    double acc = 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) acc += x[idx[k]] * beta[k];
    return acc;
}

// ------------------------------------------------------------ operations

double project(std::span<const double> x_slice, std::span<const double> beta_slice) {
    if (x_slice.size() != beta_slice.size()) {
        throw DimensionError("projection of length " + std::to_string(x_slice.size()) +
                             " onto coefficients of length " + std::to_string(beta_slice.size()));
    }
    double acc = 0.0;
    for (std::size_t r = 0; r < x_slice.size(); ++r) acc += x_slice[r] * beta_slice[r];
    return acc;
}

QuantizedObservation quantize(const SensorCodebook& codebook, std::span<const double> beta_slice,
                              std::span<const double> x_slice) {
    if (x_slice.size() != codebook.dim()) {
        throw DimensionError("observation has dimension " + std::to_string(x_slice.size()) +
                             ", codewords have " + std::to_string(codebook.dim()));
    }
    const std::size_t k = codebook.nearest(project(x_slice, beta_slice));
    return {k, codebook.codeword(k)};
}

Prediction predict(const DistributedQuantizer& q, std::span<const double> x) {
    if (x.size() != q.model().dim()) {
        throw DimensionError("input has " + std::to_string(x.size()) + " features, model expects " +
                             std::to_string(q.model().dim()));
    }
    Prediction out{0.0, std::vector<std::size_t>(q.sensor_count())};
    for (std::size_t i = 0; i < q.sensor_count(); ++i) {
        const auto& cb = q.codebook(i);
        const std::size_t k = cb.nearest(q.sensor_projection(x, i));
        out.indices[i] = k;
        out.y_tilde += cb.projected()[k];
    }
    return out;
}

MseEstimate evaluate_mse(const DistributedQuantizer& q, const Matrix& test) {
    if (test.rows() == 0) throw InvalidInput("test set is empty");
    if (test.cols() != q.model().dim()) {
        throw DimensionError("test set has " + std::to_string(test.cols()) + " columns, model expects " +
                             std::to_string(q.model().dim()));
    }
    const std::size_t n = test.rows();
    std::vector<double> sq(n);
    const std::size_t blocks = (n + kRowBlock - 1) / kRowBlock;
    parallel_for(blocks, [&](std::size_t b) {
        const std::size_t end = std::min(n, (b + 1) * kRowBlock);
        for (std::size_t j = b * kRowBlock; j < end; ++j) {
            const auto x = test.row(j);
            double y_tilde = 0.0;
            for (std::size_t i = 0; i < q.sensor_count(); ++i) {
                const auto& cb = q.codebook(i);
                y_tilde += cb.projected()[cb.nearest(q.sensor_projection(x, i))];
            }
            const double err = y_tilde - q.model().predict(x);
            sq[j] = err * err;
        }
    });

    double sum = 0.0;
    for (double e : sq) sum += e;
    const double mean = sum / static_cast<double>(n);
    double var = 0.0;
    if (n > 1) {
        for (double e : sq) var += (e - mean) * (e - mean);
        var /= static_cast<double>(n - 1);
    }
    return {mean, std::sqrt(var / static_cast<double>(n))};
}

std::vector<double> mean_quantization_error(const DistributedQuantizer& q, const Matrix& samples) {
    if (samples.rows() == 0) throw InvalidInput("sample matrix is empty");
    if (samples.cols() != q.model().dim()) throw DimensionError("sample width does not match model");
    std::vector<double> norms(q.sensor_count());
    for (std::size_t i = 0; i < q.sensor_count(); ++i) {
        const auto idx = q.partition().indices(i);
        const auto& cb = q.codebook(i);
        std::vector<double> total(idx.size(), 0.0);
        for (std::size_t j = 0; j < samples.rows(); ++j) {
            const auto x = samples.row(j);
            const auto c = cb.codeword(cb.nearest(q.sensor_projection(x, i)));
            for (std::size_t r = 0; r < idx.size(); ++r) total[r] += c[r] - x[idx[r]];
        }
        double acc = 0.0;
        for (double t : total) {
            const double m = t / static_cast<double>(samples.rows());
            acc += m * m;
        }
        norms[i] = std::sqrt(acc);
    }
    return norms;
}

std::vector<double> projected_distortion(const DistributedQuantizer& q, const Matrix& samples) {
    if (samples.cols() != q.model().dim()) throw DimensionError("sample width does not match model");
    std::vector<double> out(q.sensor_count(), 0.0);
    for (std::size_t j = 0; j < samples.rows(); ++j) {
        const auto x = samples.row(j);
        for (std::size_t i = 0; i < q.sensor_count(); ++i) {
            const double proj = q.sensor_projection(x, i);
            const auto& cb = q.codebook(i);
            const double e = cb.projected()[cb.nearest(proj)] - proj;
            out[i] += e * e;
        }
    }
    return out;
}

}  // namespace distq
