#pragma once

#include <string>

#include "knncp/knn.hpp"

namespace knncp {

/// The seven nonconformity measures: the plain residual and six variants
/// normalized by the expected-accuracy statistics lambda (neighbour-distance
/// based) and xi (neighbour-label-dispersion based).
enum class MeasureKind {
    Standard, // |y - yhat|
    DistAdd,  // |y - yhat| / (gamma + lambda)
    DistExp,  // |y - yhat| / exp(gamma * lambda)
    StdAdd,   // |y - yhat| / (gamma + xi)
    StdExp,   // |y - yhat| / exp(gamma * xi)
    ComboAdd, // |y - yhat| / (gamma + lambda + xi)
    ComboExp, // |y - yhat| / (exp(gamma * lambda) + exp(rho * xi))
};

struct MeasureConfig {
    MeasureKind kind = MeasureKind::Standard;
    double gamma = 0.5;
    double rho = 0.5; // used only by ComboExp
    std::size_t k = 1;
    WeightRule weight_rule = WeightRule::InverseDistance;

    bool operator==(const MeasureConfig&) const = default;
};

// Transduction re-derives every score as a function of the candidate label;
// only the measures whose denominator ignores neighbour labels support that.
bool tcp_compatible(MeasureKind kind);

const char* measure_name(MeasureKind kind);
MeasureKind parse_measure(const std::string& name);

// Throws std::invalid_argument on gamma/rho < 0 or k == 0.
void validate_measure_config(const MeasureConfig& config);

/// Nonconformity score for a residual |y - yhat| under the given measure.
/// Throws std::invalid_argument when an additive denominator is zero (only
/// reachable with gamma = 0 and a zero statistic).
double score(const MeasureConfig& config, double residual, const AccuracyStats& stats);

/// The factor by which a calibration score is scaled to obtain the region
/// half-width; score(c, r, s) * half_width_multiplier(c, s) == r for every r.
double half_width_multiplier(const MeasureConfig& config, const AccuracyStats& stats);

} // namespace knncp
