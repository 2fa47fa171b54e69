#include "knncp/icp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "knncp/rng.hpp"

namespace knncp {

IcpCalibration::Split IcpCalibration::make_split(std::size_t l, std::size_t q,
                                                 std::size_t k, std::uint64_t seed) {
    if (q == 0 || q >= l)
        throw std::invalid_argument("IcpCalibration: need 1 <= q < training size");
    const std::size_t m = l - q;
    if (m < k + 1)
        throw std::invalid_argument(
            "IcpCalibration: proper training set smaller than k+1");

    std::vector<std::size_t> perm(l);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    auto rng = make_rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);

    Split split;
    split.proper.assign(perm.begin(), perm.begin() + m);
    split.calibration.assign(perm.begin() + m, perm.end());
    std::sort(split.proper.begin(), split.proper.end());
    std::sort(split.calibration.begin(), split.calibration.end());
    return split;
}

IcpCalibration::IcpCalibration(const Dataset& train, std::size_t q, std::size_t k,
                               WeightRule rule, std::uint64_t seed)
    : IcpCalibration(train, make_split(train.rows(), q, k, seed), k, rule) {}

IcpCalibration::IcpCalibration(const Dataset& train, Split split, std::size_t k,
                               WeightRule rule)
    : proper_(train.subset(split.proper)), k_(k), rule_(rule) {
    medians_ = training_medians(proper_, k_, rule_);

    residuals_.reserve(split.calibration.size());
    stats_.reserve(split.calibration.size());
    for (std::size_t idx : split.calibration) {
        const NeighbourSet nb = find_k_nearest(train.row(idx), proper_, k_, rule_);
        const double y_hat = knn_predict(nb, proper_.labels());
        residuals_.push_back(std::abs(train.label(idx) - y_hat));
        stats_.push_back(accuracy_stats(nb, proper_.labels(), medians_.median_d,
                                        medians_.median_s));
    }
}

CalibrationModel IcpCalibration::finalize(const MeasureConfig& config) const {
    validate_measure_config(config);
    if (config.k != k_)
        throw std::invalid_argument("IcpCalibration: measure k differs");
    if (config.weight_rule != rule_)
        throw std::invalid_argument("IcpCalibration: measure weight rule differs");

    CalibrationModel model{proper_, {}, config, medians_.median_d, medians_.median_s};
    model.sorted_scores.reserve(residuals_.size());
    for (std::size_t i = 0; i < residuals_.size(); ++i)
        model.sorted_scores.push_back(score(config, residuals_[i], stats_[i]));
    std::sort(model.sorted_scores.begin(), model.sorted_scores.end(),
              std::greater<double>());
    return model;
}

CalibrationModel calibrate(const Dataset& train, std::size_t q,
                           const MeasureConfig& config, std::uint64_t seed) {
    return IcpCalibration(train, q, config.k, config.weight_rule, seed)
        .finalize(config);
}

std::size_t quantile_index(double delta, std::size_t q) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("quantile_index: delta must be in (0,1)");
    // The 1e-9 nudge compensates for decimal deltas that are not exactly
    // representable (e.g. 0.3 * 10 = 2.999...96).
    return static_cast<std::size_t>(
        std::floor(delta * static_cast<double>(q + 1) + 1e-9));
}

IcpProbe icp_prepare(const CalibrationModel& model, std::span<const double> x_new) {
    const NeighbourSet nb =
        find_k_nearest(x_new, model.proper_train, model.config.k,
                       model.config.weight_rule);
    IcpProbe probe;
    probe.y_hat = knn_predict(nb, model.proper_train.labels());
    probe.stats = accuracy_stats(nb, model.proper_train.labels(), model.median_d,
                                 model.median_s);
    return probe;
}

PredictiveRegion icp_predict_interval(const CalibrationModel& model,
                                      const IcpProbe& probe, double delta) {
    const std::size_t s = quantile_index(delta, model.q());
    if (s == 0) return PredictiveRegion::entire_line();
    const double hw = model.sorted_scores[s - 1] *
                      half_width_multiplier(model.config, probe.stats);
    PredictiveRegion region;
    region.intervals.push_back({probe.y_hat - hw, probe.y_hat + hw});
    return region;
}

PredictiveRegion icp_predict_interval(const CalibrationModel& model,
                                      std::span<const double> x_new, double delta) {
    return icp_predict_interval(model, icp_prepare(model, x_new), delta);
}

double icp_p_value(const CalibrationModel& model, const IcpProbe& probe,
                   double y_candidate) {
    const double cand =
        score(model.config, std::abs(y_candidate - probe.y_hat), probe.stats);
    // sorted descending: count of calibration scores >= cand
    const auto first_below =
        std::upper_bound(model.sorted_scores.begin(), model.sorted_scores.end(), cand,
                         std::greater<double>());
    const std::size_t count =
        static_cast<std::size_t>(first_below - model.sorted_scores.begin());
    return static_cast<double>(count + 1) / static_cast<double>(model.q() + 1);
}

double icp_p_value(const CalibrationModel& model, std::span<const double> x_new,
                   double y_candidate) {
    return icp_p_value(model, icp_prepare(model, x_new), y_candidate);
}

} // namespace knncp
