#include "knncp/nonconformity.hpp"

#include <cmath>
#include <stdexcept>

namespace knncp {

bool tcp_compatible(MeasureKind kind) {
    switch (kind) {
        case MeasureKind::Standard:
        case MeasureKind::DistAdd:
        case MeasureKind::DistExp:
            return true;
        default:
            return false;
    }
}

const char* measure_name(MeasureKind kind) {
    switch (kind) {
        case MeasureKind::Standard: return "standard";
        case MeasureKind::DistAdd: return "dist_add";
        case MeasureKind::DistExp: return "dist_exp";
        case MeasureKind::StdAdd: return "std_add";
        case MeasureKind::StdExp: return "std_exp";
        case MeasureKind::ComboAdd: return "combo_add";
        case MeasureKind::ComboExp: return "combo_exp";
    }
    return "?";
}

MeasureKind parse_measure(const std::string& name) {
    if (name == "standard") return MeasureKind::Standard;
    if (name == "dist_add") return MeasureKind::DistAdd;
    if (name == "dist_exp") return MeasureKind::DistExp;
    if (name == "std_add") return MeasureKind::StdAdd;
    if (name == "std_exp") return MeasureKind::StdExp;
    if (name == "combo_add") return MeasureKind::ComboAdd;
    if (name == "combo_exp") return MeasureKind::ComboExp;
    throw std::invalid_argument("unknown nonconformity measure '" + name + "'");
}

void validate_measure_config(const MeasureConfig& config) {
    if (config.gamma < 0.0)
        throw std::invalid_argument("measure config: gamma must be >= 0");
    if (config.rho < 0.0)
        throw std::invalid_argument("measure config: rho must be >= 0");
    if (config.k == 0)
        throw std::invalid_argument("measure config: k must be >= 1");
}

namespace {

double additive_denominator(double value) {
    if (value <= 0.0)
        throw std::invalid_argument(
            "nonconformity: zero denominator; use gamma > 0 with additive measures");
    return value;
}

} // namespace

double half_width_multiplier(const MeasureConfig& config, const AccuracyStats& stats) {
    const double g = config.gamma, r = config.rho;
    switch (config.kind) {
        case MeasureKind::Standard:
            return 1.0;
        case MeasureKind::DistAdd:
            return additive_denominator(g + stats.lambda_k);
        case MeasureKind::DistExp:
            return std::exp(g * stats.lambda_k);
        case MeasureKind::StdAdd:
            return additive_denominator(g + stats.xi_k);
        case MeasureKind::StdExp:
            return std::exp(g * stats.xi_k);
        case MeasureKind::ComboAdd:
            return additive_denominator(g + stats.lambda_k + stats.xi_k);
        case MeasureKind::ComboExp:
            return std::exp(g * stats.lambda_k) + std::exp(r * stats.xi_k);
    }
    throw std::logic_error("half_width_multiplier: unreachable");
}

double score(const MeasureConfig& config, double residual, const AccuracyStats& stats) {
    if (residual < 0.0)
        throw std::invalid_argument("score: residual must be nonnegative");
    return residual / half_width_multiplier(config, stats);
}

} // namespace knncp
