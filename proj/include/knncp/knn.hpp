#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "knncp/dataset.hpp"

namespace knncp {

enum class WeightRule {
    InverseDistance, // w_j proportional to 1/(dist_j + 1e-10), normalized
    Uniform,         // w_j = 1/k
};

/// The k nearest rows of a pool, distances ascending, weights summing to 1.
struct NeighbourSet {
    std::vector<std::size_t> indices;
    std::vector<double> distances;
    std::vector<double> weights;

    std::size_t k() const { return indices.size(); }
};

/// Per-example accuracy statistics: raw and median-normalized forms of the
/// neighbour-distance sum and the neighbour-label standard deviation.
struct AccuracyStats {
    double d_k = 0.0;      // sum of the k neighbour distances
    double lambda_k = 0.0; // d_k / median_d
    double s_k = 0.0;      // population SD of the k neighbour labels
    double xi_k = 0.0;     // s_k / median_s
};

// Zero medians are replaced by this floor so lambda/xi stay finite.
inline constexpr double kMedianFloor = 1e-10;
inline constexpr double kWeightEpsilon = 1e-10;

double euclidean_distance(std::span<const double> x1, std::span<const double> x2);

// The distance is an injectable parameter, but only the Euclidean default is
// shipped and exercised; the conformal predictors always use it.
using DistanceFn = double (*)(std::span<const double>, std::span<const double>);

// Brute-force exact search. Ties broken by smaller row index; rows listed in
// `exclude` are skipped. Throws if k exceeds the number of eligible rows.
NeighbourSet find_k_nearest(std::span<const double> query, const Dataset& pool,
                            std::size_t k, WeightRule rule = WeightRule::InverseDistance,
                            std::span<const std::size_t> exclude = {},
                            DistanceFn distance = euclidean_distance);

std::vector<double> make_weights(std::span<const double> distances, WeightRule rule);

/// Weighted average of the neighbour labels.
double knn_predict(const NeighbourSet& neighbours, std::span<const double> labels);

// Median with the even-size rule (mean of the two middle order statistics).
// Takes its argument by value because it sorts.
double median(std::vector<double> values);

AccuracyStats accuracy_stats(const NeighbourSet& neighbours,
                             std::span<const double> labels, double median_d,
                             double median_s);

/// Stats for an external query point against a training pool.
AccuracyStats accuracy_stats(std::span<const double> query, const Dataset& pool,
                             std::size_t k, WeightRule rule, double median_d,
                             double median_s);

// Leave-one-out d_j^k and s_j^k over every pool row; used both directly and
// as the denominator source for lambda/xi.
struct TrainingMedians {
    double median_d = 0.0;
    double median_s = 0.0;
};

TrainingMedians training_medians(const Dataset& pool, std::size_t k,
                                 WeightRule rule = WeightRule::InverseDistance,
                                 DistanceFn distance = euclidean_distance);

} // namespace knncp
