#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace knncp {

/// Immutable table of attribute vectors with one real label per row.
class Dataset {
public:
    // attributes is row-major, rows*cols entries. Throws std::invalid_argument
    // on shape mismatch, empty data, or non-finite values.
    Dataset(std::vector<double> attributes, std::size_t cols,
            std::vector<double> labels,
            std::vector<std::string> names = {});

    std::size_t rows() const { return labels_.size(); }
    std::size_t cols() const { return cols_; }

    std::span<const double> row(std::size_t i) const {
        return {attributes_.data() + i * cols_, cols_};
    }
    double label(std::size_t i) const { return labels_[i]; }
    const std::vector<double>& labels() const { return labels_; }
    const std::vector<std::string>& names() const { return names_; }

    /// New dataset containing the given rows, in the given order.
    Dataset subset(std::span<const std::size_t> indices) const;

private:
    std::vector<double> attributes_;
    std::size_t cols_;
    std::vector<double> labels_;
    std::vector<std::string> names_;
};

/// Identifies the label column of a CSV file by position or header name.
using LabelColumn = std::variant<std::size_t, std::string>;

// CSV dialect: comma separator, '.' decimal point, UTF-8, optional single
// header row auto-detected by a non-numeric first row. Errors name the
// offending row and column (1-based, counting the header).
Dataset load_csv(const std::string& path, const LabelColumn& label);

/// Label-free variant for files of plain attribute rows (same dialect).
std::vector<std::vector<double>> load_csv_matrix(const std::string& path);

/// Per-column (min, max) captured by normalize_minmax so test points can be
/// transformed identically.
struct MinMaxStats {
    std::vector<double> min;
    std::vector<double> max;

    // In-place rescale of one attribute vector to [0,1] per column.
    void apply(std::span<double> row) const;
};

// Rescales every attribute column to [0,1] via (v-min)/(max-min); labels are
// untouched. A constant column maps to all zeros.
std::pair<Dataset, MinMaxStats> normalize_minmax(const Dataset& dataset);

struct SplitPlan {
    int folds = 10;
    int runs = 10;
    std::uint64_t seed = 0;
    std::size_t calibration_size = 0; // 0 = derive via default_calibration_size
};

struct FoldSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// Seeded permutation of 0..l-1 cut into `folds` near-equal contiguous blocks
// (sizes differ by at most 1, remainder assigned to the earliest folds).
// Deterministic given (plan.seed, run_index). Index lists come back sorted.
std::vector<FoldSplit> kfold_split(const Dataset& dataset, const SplitPlan& plan,
                                   int run_index);

// Seeded split of a training index list into (fit, validation) with
// validation size = floor(|train|/3).
std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
holdout_for_k_selection(std::span<const std::size_t> train_indices,
                        std::uint64_t seed);

// Calibration-size policy: q = 100n - 1 with n chosen so q is approximately
// one tenth of the training-set size, and at least 99.
std::size_t default_calibration_size(std::size_t train_size);

/// Built-in smooth functions for the synthetic generator. Both reduce the
/// attribute vector to t = sum(x_j) except `affine`, which uses mean(|x_j|).
///   mean: constant:c | linear:bias,slope (bias + slope*t) | sine:amp,freq
///   std:  constant:c | affine:base,slope | sine:base,amp,freq
struct SmoothFn {
    std::string name;
    std::vector<double> params;

    double operator()(std::span<const double> x) const;
};

SmoothFn parse_smooth_fn(const std::string& text); // "name:p1,p2,..."
std::string format_smooth_fn(const SmoothFn& fn);

struct SyntheticSpec {
    std::size_t n_examples = 0;
    std::size_t d = 0;
    SmoothFn mean_fn;
    SmoothFn std_fn;
    double input_low = 0.0;
    double input_high = 1.0;
    std::uint64_t seed = 0;
};

// x_i uniform over the input box, y_i = mean_fn(x_i) + std_fn(x_i) * g with
// g standard normal. Throws if std_fn evaluates <= 0 at any sampled point.
Dataset generate_synthetic(const SyntheticSpec& spec);

} // namespace knncp
