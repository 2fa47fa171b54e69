#include "knncp/tcp.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace knncp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

SetDescriptor solve_set(const LinearScore& s_i, const LinearScore& s_new) {
    const double a = s_i.a, b = s_i.b;
    const double an = s_new.a, bn = s_new.b;

    if (b != bn) {
        // alpha_i and alpha_new meet at two points (which may coincide).
        const double r1 = -(a - an) / (b - bn);
        const double r2 = -(a + an) / (b + bn);
        const double lo = std::min(r1, r2), hi = std::max(r1, r2);
        if (b < bn) {
            // alpha_new grows faster on both sides: S_i is bounded.
            if (lo == hi) return {SetKind::Point, lo, lo};
            return {SetKind::Interval, lo, hi};
        }
        if (lo == hi) return {SetKind::Line, 0.0, 0.0};
        return {SetKind::TwoRays, lo, hi};
    }
    if (b != 0.0) {
        if (a == an) return {SetKind::Line, 0.0, 0.0};
        const double r = -(a + an) / (2.0 * b);
        // sign of (a - an)(a + an + 2*b*y) decides membership
        if (a > an) return {SetKind::RayRight, r, r};
        return {SetKind::RayLeft, r, r};
    }
    // Both scores constant in y.
    if (std::abs(a) >= std::abs(an)) return {SetKind::Line, 0.0, 0.0};
    return {SetKind::Empty, 0.0, 0.0};
}

TcpPredictor::TcpPredictor(Dataset train, std::size_t k, WeightRule rule,
                           TcpOptions options)
    : train_(std::move(train)), k_(k), rule_(rule), options_(options) {
    const std::size_t l = train_.rows();
    if (k_ == 0) throw std::invalid_argument("TcpPredictor: k must be positive");
    if (l < k_ + 1)
        throw std::invalid_argument("TcpPredictor: need at least k+1 training rows");

    knn_dist_.resize(l * k_);
    knn_label_.resize(l * k_);
    loo_dist_sum_.resize(l);
    loo_prediction_.resize(l);

    std::vector<std::pair<double, std::size_t>> cand(l - 1);
    for (std::size_t i = 0; i < l; ++i) {
        cand.clear();
        for (std::size_t j = 0; j < l; ++j) {
            if (j == i) continue;
            cand.emplace_back(euclidean_distance(train_.row(i), train_.row(j)), j);
        }
        std::partial_sort(cand.begin(), cand.begin() + k_, cand.end());

        double sum = 0.0;
        std::vector<double> dists(k_);
        for (std::size_t t = 0; t < k_; ++t) {
            dists[t] = cand[t].first;
            knn_dist_[i * k_ + t] = cand[t].first;
            knn_label_[i * k_ + t] = train_.label(cand[t].second);
            sum += cand[t].first;
        }
        loo_dist_sum_[i] = sum;

        const std::vector<double> w = make_weights(dists, rule_);
        double pred = 0.0;
        for (std::size_t t = 0; t < k_; ++t) pred += w[t] * knn_label_[i * k_ + t];
        loo_prediction_[i] = pred;
    }
}

TcpPredictor::Probe TcpPredictor::prepare(std::span<const double> x_new) const {
    const std::size_t l = train_.rows();
    Probe probe;
    probe.base_a.resize(l + 1);
    probe.base_b.resize(l + 1);

    std::vector<double> dist_new(l);
    for (std::size_t i = 0; i < l; ++i)
        dist_new[i] = euclidean_distance(x_new, train_.row(i));

    // d_i^k over the extended set, per example (index l = the test example).
    std::vector<double> dk(l + 1);

    for (std::size_t i = 0; i < l; ++i) {
        const double t = dist_new[i];
        const double kth = knn_dist_[i * k_ + (k_ - 1)];
        if (t < kth) {
            // the test example displaces row i's k-th neighbour
            dk[i] = loo_dist_sum_[i] - kth + t;
            double w_new, a = train_.label(i);
            if (rule_ == WeightRule::Uniform) {
                w_new = 1.0 / static_cast<double>(k_);
                for (std::size_t j = 0; j + 1 < k_; ++j)
                    a -= w_new * knn_label_[i * k_ + j];
            } else {
                double denom = 1.0 / (t + kWeightEpsilon);
                for (std::size_t j = 0; j + 1 < k_; ++j)
                    denom += 1.0 / (knn_dist_[i * k_ + j] + kWeightEpsilon);
                w_new = 1.0 / ((t + kWeightEpsilon) * denom);
                for (std::size_t j = 0; j + 1 < k_; ++j)
                    a -= knn_label_[i * k_ + j] /
                         ((knn_dist_[i * k_ + j] + kWeightEpsilon) * denom);
            }
            probe.base_a[i] = a;
            probe.base_b[i] = -w_new;
        } else {
            dk[i] = loo_dist_sum_[i];
            probe.base_a[i] = train_.label(i) - loo_prediction_[i];
            probe.base_b[i] = 0.0;
        }
    }

    // k nearest training rows of the test example (ties to the smaller index).
    std::vector<std::pair<double, std::size_t>> cand(l);
    for (std::size_t i = 0; i < l; ++i) cand[i] = {dist_new[i], i};
    std::partial_sort(cand.begin(), cand.begin() + k_, cand.end());

    std::vector<double> nb_dists(k_);
    double dsum = 0.0;
    for (std::size_t t = 0; t < k_; ++t) {
        nb_dists[t] = cand[t].first;
        dsum += cand[t].first;
    }
    dk[l] = dsum;
    const std::vector<double> w = make_weights(nb_dists, rule_);
    double avg = 0.0;
    for (std::size_t t = 0; t < k_; ++t) avg += w[t] * train_.label(cand[t].second);
    probe.base_a[l] = -avg;
    probe.base_b[l] = 1.0;

    // lambda_i = d_i^k / median of the other examples' d^k. Sorting once lets
    // every leave-one-out median come from two order statistics.
    probe.lambda.resize(l + 1);
    if (options_.global_lambda_median) {
        double med = median(dk);
        if (med <= 0.0) med = kMedianFloor;
        for (std::size_t i = 0; i <= l; ++i) probe.lambda[i] = dk[i] / med;
        return probe;
    }

    const std::size_t n = l + 1;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return dk[x] < dk[y]; });
    std::vector<double> sorted(n);
    std::vector<std::size_t> pos(n);
    for (std::size_t r = 0; r < n; ++r) {
        sorted[r] = dk[order[r]];
        pos[order[r]] = r;
    }
    const std::size_t m = n - 1; // size with one example removed
    auto reduced = [&](std::size_t rank, std::size_t removed) {
        return sorted[rank < removed ? rank : rank + 1];
    };
    for (std::size_t i = 0; i <= l; ++i) {
        const std::size_t p = pos[i];
        double med;
        if (m % 2 == 1)
            med = reduced(m / 2, p);
        else
            med = 0.5 * (reduced(m / 2 - 1, p) + reduced(m / 2, p));
        if (med <= 0.0) med = kMedianFloor;
        probe.lambda[i] = dk[i] / med;
    }
    return probe;
}

void TcpPredictor::check_config(const MeasureConfig& config) const {
    validate_measure_config(config);
    if (!tcp_compatible(config.kind))
        throw std::invalid_argument(
            std::string("TCP cannot use measure '") + measure_name(config.kind) +
            "': its denominator depends on neighbour labels");
    if (config.k != k_)
        throw std::invalid_argument("TcpPredictor: measure k differs from predictor k");
    if (config.weight_rule != rule_)
        throw std::invalid_argument("TcpPredictor: measure weight rule differs");
}

std::vector<LinearScore> TcpPredictor::linear_scores(const Probe& probe,
                                                     const MeasureConfig& config) const {
    check_config(config);
    const std::size_t n = probe.base_a.size();
    std::vector<LinearScore> scores(n);
    for (std::size_t i = 0; i < n; ++i) {
        double factor = 1.0;
        if (config.kind == MeasureKind::DistAdd) {
            factor = config.gamma + probe.lambda[i];
            if (factor <= 0.0)
                throw std::invalid_argument(
                    "dist_add: zero denominator; use gamma > 0");
        } else if (config.kind == MeasureKind::DistExp) {
            factor = std::exp(config.gamma * probe.lambda[i]);
        }
        scores[i] = LinearScore::normalized(probe.base_a[i] / factor,
                                            probe.base_b[i] / factor);
    }
    return scores;
}

TcpPredictor::RegionDetail TcpPredictor::region_detail(const Probe& probe,
                                                       const MeasureConfig& config) const {
    const std::vector<LinearScore> scores = linear_scores(probe, config);
    const std::size_t n = scores.size();
    const LinearScore& s_new = scores.back();

    std::vector<SetDescriptor> sets(n);
    RegionDetail detail;
    detail.sample_count = static_cast<int>(n);
    detail.points.reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        sets[i] = solve_set(scores[i], s_new);
        switch (sets[i].kind) {
            case SetKind::Point:
            case SetKind::RayLeft:
            case SetKind::RayRight:
                detail.points.push_back(sets[i].p1);
                break;
            case SetKind::Interval:
            case SetKind::TwoRays:
                detail.points.push_back(sets[i].p1);
                detail.points.push_back(sets[i].p2);
                break;
            default:
                break;
        }
    }
    std::sort(detail.points.begin(), detail.points.end());
    detail.points.erase(std::unique(detail.points.begin(), detail.points.end()),
                        detail.points.end());

    const std::size_t u = detail.points.size();
    // Difference arrays over j = 0..u (intervals) and j = 1..u (points);
    // equivalent to the per-index increments of the classic sweep.
    std::vector<int> dN(u + 2, 0), dM(u + 2, 0);
    auto add_n = [&](std::size_t lo, std::size_t hi) { // inclusive, may be empty
        if (lo > hi || hi > u) return;
        dN[lo] += 1;
        dN[hi + 1] -= 1;
    };
    auto add_m = [&](std::size_t lo, std::size_t hi) {
        if (lo > hi || lo == 0 || hi > u) return;
        dM[lo] += 1;
        dM[hi + 1] -= 1;
    };
    auto index_of = [&](double p) -> std::size_t {
        // 1-based position; p is always present by construction
        return static_cast<std::size_t>(
                   std::lower_bound(detail.points.begin(), detail.points.end(), p) -
                   detail.points.begin()) +
               1;
    };

    for (const SetDescriptor& s : sets) {
        switch (s.kind) {
            case SetKind::Empty:
                break;
            case SetKind::Point: {
                const std::size_t j = index_of(s.p1);
                add_m(j, j);
                break;
            }
            case SetKind::Interval: {
                const std::size_t j1 = index_of(s.p1), j2 = index_of(s.p2);
                add_m(j1, j2);
                add_n(j1, j2 - 1);
                break;
            }
            case SetKind::RayLeft: {
                const std::size_t j = index_of(s.p1);
                add_m(1, j);
                add_n(0, j - 1);
                break;
            }
            case SetKind::RayRight: {
                const std::size_t j = index_of(s.p1);
                add_m(j, u);
                add_n(j, u);
                break;
            }
            case SetKind::TwoRays: {
                const std::size_t j1 = index_of(s.p1), j2 = index_of(s.p2);
                add_m(1, j1);
                add_n(0, j1 - 1);
                add_m(j2, u);
                add_n(j2, u);
                break;
            }
            case SetKind::Line:
                add_m(1, u);
                add_n(0, u);
                break;
        }
    }

    detail.interval_count.resize(u + 1);
    detail.point_count.resize(u + 1);
    int accN = 0, accM = 0;
    for (std::size_t j = 0; j <= u; ++j) {
        accN += dN[j];
        detail.interval_count[j] = accN;
        accM += dM[j];
        detail.point_count[j] = accM; // entry 0 stays meaningless
    }
    return detail;
}

PredictiveRegion assemble_region(const TcpPredictor::RegionDetail& detail,
                                 double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("assemble_region: delta must be in (0,1)");

    const std::size_t u = detail.points.size();
    const double n = static_cast<double>(detail.sample_count);
    auto interval_emitted = [&](std::size_t j) {
        return static_cast<double>(detail.interval_count[j]) / n > delta;
    };
    auto point_emitted = [&](std::size_t j) {
        return static_cast<double>(detail.point_count[j]) / n > delta;
    };

    PredictiveRegion region;
    std::size_t j = 0;
    while (j <= u) {
        if (!interval_emitted(j)) {
            ++j;
            continue;
        }
        // An emitted open interval always has emitted finite endpoints
        // (every sweep case counts a covered interval's endpoints), so runs
        // of emitted intervals close up into closed intervals.
        const double lo = (j == 0) ? -kInf : detail.points[j - 1];
        while (j + 1 <= u && interval_emitted(j + 1)) ++j;
        const double hi = (j == u) ? kInf : detail.points[j];
        region.intervals.push_back({lo, hi});
        ++j;
    }
    for (std::size_t jp = 1; jp <= u; ++jp)
        if (point_emitted(jp) && !interval_emitted(jp - 1) && !interval_emitted(jp))
            region.isolated_points.push_back(detail.points[jp - 1]);
    return region;
}

PredictiveRegion TcpPredictor::predict_region(const Probe& probe,
                                              const MeasureConfig& config,
                                              double delta) const {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("predict_region: delta must be in (0,1)");
    return assemble_region(region_detail(probe, config), delta);
}

double TcpPredictor::p_value(const Probe& probe, const MeasureConfig& config,
                             double y_candidate) const {
    const std::vector<LinearScore> scores = linear_scores(probe, config);
    const double alpha_new = scores.back().eval(y_candidate);
    int count = 0;
    for (const LinearScore& s : scores)
        if (s.eval(y_candidate) >= alpha_new) ++count;
    return static_cast<double>(count) / static_cast<double>(scores.size());
}

std::vector<LinearScore> build_linear_scores(const Dataset& train,
                                             std::span<const double> x_new,
                                             const MeasureConfig& config,
                                             const TcpOptions& options) {
    TcpPredictor predictor(train, config.k, config.weight_rule, options);
    return predictor.linear_scores(predictor.prepare(x_new), config);
}

PredictiveRegion tcp_predict_region(const Dataset& train, std::span<const double> x_new,
                                    const MeasureConfig& config, double delta,
                                    const TcpOptions& options) {
    TcpPredictor predictor(train, config.k, config.weight_rule, options);
    return predictor.predict_region(predictor.prepare(x_new), config, delta);
}

double tcp_p_value(const Dataset& train, std::span<const double> x_new,
                   double y_candidate, const MeasureConfig& config,
                   const TcpOptions& options) {
    TcpPredictor predictor(train, config.k, config.weight_rule, options);
    return predictor.p_value(predictor.prepare(x_new), config, y_candidate);
}

} // namespace knncp
