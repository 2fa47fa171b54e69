#include "knncp/knn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace knncp {

double euclidean_distance(std::span<const double> x1, std::span<const double> x2) {
    if (x1.size() != x2.size())
        throw std::invalid_argument("euclidean_distance: dimension mismatch");
    double sum = 0.0;
    for (std::size_t j = 0; j < x1.size(); ++j) {
        const double diff = x1[j] - x2[j];
        sum += diff * diff;
    }
    return std::sqrt(sum);
}

std::vector<double> make_weights(std::span<const double> distances, WeightRule rule) {
    const std::size_t k = distances.size();
    std::vector<double> w(k);
    if (rule == WeightRule::Uniform) {
        std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(k));
        return w;
    }
    double total = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        w[j] = 1.0 / (distances[j] + kWeightEpsilon);
        total += w[j];
    }
    for (double& v : w) v /= total;
    return w;
}

NeighbourSet find_k_nearest(std::span<const double> query, const Dataset& pool,
                            std::size_t k, WeightRule rule,
                            std::span<const std::size_t> exclude,
                            DistanceFn distance) {
    if (k == 0) throw std::invalid_argument("find_k_nearest: k must be positive");

    std::vector<std::pair<double, std::size_t>> candidates;
    candidates.reserve(pool.rows());
    for (std::size_t i = 0; i < pool.rows(); ++i) {
        if (std::find(exclude.begin(), exclude.end(), i) != exclude.end()) continue;
        candidates.emplace_back(distance(query, pool.row(i)), i);
    }
    if (candidates.size() < k)
        throw std::invalid_argument("find_k_nearest: k exceeds eligible pool size");

    // (distance, index) order implements the smaller-index tie rule.
    std::partial_sort(candidates.begin(), candidates.begin() + k, candidates.end());

    NeighbourSet out;
    out.indices.resize(k);
    out.distances.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        out.distances[j] = candidates[j].first;
        out.indices[j] = candidates[j].second;
    }
    out.weights = make_weights(out.distances, rule);
    return out;
}

double knn_predict(const NeighbourSet& neighbours, std::span<const double> labels) {
    double pred = 0.0;
    for (std::size_t j = 0; j < neighbours.k(); ++j)
        pred += neighbours.weights[j] * labels[neighbours.indices[j]];
    return pred;
}

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median: empty input");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

double population_sd(std::span<const double> values) {
    const double k = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= k;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / k);
}

} // namespace

AccuracyStats accuracy_stats(const NeighbourSet& neighbours,
                             std::span<const double> labels, double median_d,
                             double median_s) {
    AccuracyStats stats;
    for (double d : neighbours.distances) stats.d_k += d;

    std::vector<double> nb_labels(neighbours.k());
    for (std::size_t j = 0; j < neighbours.k(); ++j)
        nb_labels[j] = labels[neighbours.indices[j]];
    stats.s_k = population_sd(nb_labels);

    const double md = median_d > 0.0 ? median_d : kMedianFloor;
    const double ms = median_s > 0.0 ? median_s : kMedianFloor;
    stats.lambda_k = stats.d_k / md;
    stats.xi_k = stats.s_k / ms;
    return stats;
}

AccuracyStats accuracy_stats(std::span<const double> query, const Dataset& pool,
                             std::size_t k, WeightRule rule, double median_d,
                             double median_s) {
    NeighbourSet nb = find_k_nearest(query, pool, k, rule);
    return accuracy_stats(nb, pool.labels(), median_d, median_s);
}

TrainingMedians training_medians(const Dataset& pool, std::size_t k, WeightRule rule,
                                 DistanceFn distance) {
    const std::size_t l = pool.rows();
    if (l < k + 1)
        throw std::invalid_argument("training_medians: pool smaller than k+1");

    std::vector<double> all_d(l), all_s(l);
    for (std::size_t j = 0; j < l; ++j) {
        const std::size_t self[] = {j};
        NeighbourSet nb = find_k_nearest(pool.row(j), pool, k, rule, self, distance);
        double d = 0.0;
        for (double v : nb.distances) d += v;
        all_d[j] = d;
        std::vector<double> nb_labels(k);
        for (std::size_t t = 0; t < k; ++t) nb_labels[t] = pool.label(nb.indices[t]);
        all_s[j] = population_sd(nb_labels);
    }
    return {median(std::move(all_d)), median(std::move(all_s))};
}

} // namespace knncp
