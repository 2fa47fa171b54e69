#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "knncp/dataset.hpp"
#include "knncp/knn.hpp"
#include "knncp/nonconformity.hpp"
#include "knncp/region.hpp"

namespace knncp {

/// Everything the inductive predictor needs after its one-time pass: the
/// proper training set, the calibration scores in descending order, and the
/// training medians feeding the lambda/xi statistics of new examples.
struct CalibrationModel {
    Dataset proper_train;
    std::vector<double> sorted_scores; // descending
    MeasureConfig config;
    double median_d = 0.0;
    double median_s = 0.0;

    std::size_t q() const { return sorted_scores.size(); }
};

/// Shared one-time work for calibrating several measures on the same split:
/// the seeded permutation, calibration predictions, residuals, and accuracy
/// statistics are measure-independent.
class IcpCalibration {
public:
    // Permutes 0..l-1 with the given seed and assigns the last q rows as the
    // calibration set. Requires 1 <= q < l and proper-train size m >= k+1.
    IcpCalibration(const Dataset& train, std::size_t q, std::size_t k,
                   WeightRule rule, std::uint64_t seed);

    CalibrationModel finalize(const MeasureConfig& config) const;

    const Dataset& proper_train() const { return proper_; }
    std::size_t q() const { return residuals_.size(); }

private:
    struct Split {
        std::vector<std::size_t> proper;
        std::vector<std::size_t> calibration;
    };
    static Split make_split(std::size_t l, std::size_t q, std::size_t k,
                            std::uint64_t seed);
    IcpCalibration(const Dataset& train, Split split, std::size_t k, WeightRule rule);

    Dataset proper_;
    std::size_t k_;
    WeightRule rule_;
    TrainingMedians medians_;
    std::vector<double> residuals_;
    std::vector<AccuracyStats> stats_;
};

CalibrationModel calibrate(const Dataset& train, std::size_t q,
                           const MeasureConfig& config, std::uint64_t seed);

/// s = floor(delta * (q + 1)); s = 0 signals an infinite region.
std::size_t quantile_index(double delta, std::size_t q);

/// Per-test-point state shared by every delta: the point prediction and the
/// accuracy statistics of the test example.
struct IcpProbe {
    double y_hat = 0.0;
    AccuracyStats stats;
};

IcpProbe icp_prepare(const CalibrationModel& model, std::span<const double> x_new);

// Closed interval [y_hat - hw, y_hat + hw] with hw = alpha_(m+s) times the
// measure's half-width multiplier; the entire line when s = 0.
PredictiveRegion icp_predict_interval(const CalibrationModel& model,
                                      const IcpProbe& probe, double delta);
PredictiveRegion icp_predict_interval(const CalibrationModel& model,
                                      std::span<const double> x_new, double delta);

double icp_p_value(const CalibrationModel& model, const IcpProbe& probe,
                   double y_candidate);
double icp_p_value(const CalibrationModel& model, std::span<const double> x_new,
                   double y_candidate);

} // namespace knncp
