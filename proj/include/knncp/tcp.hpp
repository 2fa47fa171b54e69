#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "knncp/dataset.hpp"
#include "knncp/knn.hpp"
#include "knncp/nonconformity.hpp"
#include "knncp/region.hpp"

namespace knncp {

/// One nonconformity score as a function of the candidate label:
/// alpha(y) = |a + b*y|, with b >= 0 after sign normalization.
struct LinearScore {
    double a = 0.0;
    double b = 0.0;

    double eval(double y) const { return std::abs(a + b * y); }

    static LinearScore normalized(double a, double b) {
        return b < 0.0 ? LinearScore{-a, -b} : LinearScore{a, b};
    }
};

enum class SetKind { Empty, Point, Interval, RayLeft, RayRight, TwoRays, Line };

/// Geometric type of one solution set {y : alpha_i(y) >= alpha_new(y)}.
/// All endpoint comparisons are closed. `p1 <= p2` where both are used.
struct SetDescriptor {
    SetKind kind = SetKind::Empty;
    double p1 = 0.0;
    double p2 = 0.0;
};

/// The closed set {y : |s_i.a + s_i.b*y| >= |s_new.a + s_new.b*y|}.
/// Both scores must be sign-normalized (b >= 0). Total function.
SetDescriptor solve_set(const LinearScore& s_i, const LinearScore& s_new);

struct TcpOptions {
    // Replace the literal per-example median in the lambda denominator with
    // one global median over the extended set (speed/behaviour comparisons).
    bool global_lambda_median = false;
};

/// Transductive conformal predictor over a fixed training set. Construction
/// precomputes the leave-one-out neighbour lists so that per-test-point work
/// is linear in the training size.
class TcpPredictor {
public:
    TcpPredictor(Dataset train, std::size_t k, WeightRule rule = WeightRule::InverseDistance,
                 TcpOptions options = {});

    /// Measure-independent per-test-point state: the raw (a_i, b_i) pairs and
    /// the per-example lambda statistics of the extended set. Index l is the
    /// test example itself.
    struct Probe {
        std::vector<double> base_a;
        std::vector<double> base_b;
        std::vector<double> lambda;
    };

    Probe prepare(std::span<const double> x_new) const;

    /// Sign-normalized scores for the given measure (Standard/DistAdd/DistExp
    /// only; the others have no linear form in the candidate label).
    std::vector<LinearScore> linear_scores(const Probe& probe,
                                           const MeasureConfig& config) const;

    /// Raw output of the region sweep: sorted critical points y_(1..u) with
    /// interval_count[j] = #sets covering (y_(j), y_(j+1)) for j = 0..u and
    /// point_count[j] = #sets containing y_(j) for j = 1..u (entry 0 unused).
    struct RegionDetail {
        std::vector<double> points;
        std::vector<int> interval_count;
        std::vector<int> point_count;
        int sample_count = 0; // l + 1
    };

    RegionDetail region_detail(const Probe& probe, const MeasureConfig& config) const;

    PredictiveRegion predict_region(const Probe& probe, const MeasureConfig& config,
                                    double delta) const;

    /// Fraction of examples whose score at y_candidate is at least the test
    /// example's; computed directly from the linear scores, so it serves as
    /// an independent check on predict_region.
    double p_value(const Probe& probe, const MeasureConfig& config,
                   double y_candidate) const;

    const Dataset& train() const { return train_; }
    std::size_t k() const { return k_; }

private:
    void check_config(const MeasureConfig& config) const;

    Dataset train_;
    std::size_t k_;
    WeightRule rule_;
    TcpOptions options_;
    // Per training row: its k nearest neighbours among the other rows
    // (ascending distance), their labels, the distance sum, and the
    // leave-one-out prediction.
    std::vector<double> knn_dist_;
    std::vector<double> knn_label_;
    std::vector<double> loo_dist_sum_;
    std::vector<double> loo_prediction_;
};

/// Thresholds a RegionDetail at significance delta and coalesces the emitted
/// open intervals and points into maximal closed intervals.
PredictiveRegion assemble_region(const TcpPredictor::RegionDetail& detail, double delta);

// One-shot conveniences over TcpPredictor.
std::vector<LinearScore> build_linear_scores(const Dataset& train,
                                             std::span<const double> x_new,
                                             const MeasureConfig& config,
                                             const TcpOptions& options = {});
PredictiveRegion tcp_predict_region(const Dataset& train, std::span<const double> x_new,
                                    const MeasureConfig& config, double delta,
                                    const TcpOptions& options = {});
double tcp_p_value(const Dataset& train, std::span<const double> x_new,
                   double y_candidate, const MeasureConfig& config,
                   const TcpOptions& options = {});

} // namespace knncp
