#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "knncp/dataset.hpp"
#include "knncp/evaluation.hpp"
#include "knncp/nonconformity.hpp"

namespace knncp {

/// Invalid configuration; the CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct MeasureOverride {
    std::optional<double> gamma;
    std::optional<double> rho;
    std::optional<std::size_t> k;

    bool operator==(const MeasureOverride&) const = default;
};

/// One experiment, as read from a flat key = value config file ('#' starts a
/// comment). `dataset = synthetic` switches to the generator spec'd by the
/// synth_* keys. k = 0 / q = 0 mean "auto": k via holdout selection, q via
/// the 100n-1 policy.
struct RunConfig {
    std::string dataset;
    std::string label;
    std::vector<Method> methods = {Method::Tcp, Method::Icp};
    std::vector<MeasureKind> measures = {MeasureKind::Standard};
    std::size_t k = 0;
    std::vector<std::size_t> k_candidates =
        {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15,
         16, 17, 18, 19, 20, 21, 22, 23, 24, 25, 26, 27, 28, 29, 30};
    double gamma = 0.5;
    double rho = 0.5;
    std::map<std::string, MeasureOverride> overrides; // keyed by measure name
    int folds = 10;
    int runs = 10;
    std::size_t q = 0;
    std::vector<double> deltas = {0.1, 0.05, 0.01};
    std::uint64_t seed = 1;
    std::string out = "out";
    bool normalize = true;
    WeightRule weights = WeightRule::InverseDistance;
    int threads = 1;
    bool tcp_global_median = false;

    std::size_t synth_n = 0;
    std::size_t synth_d = 0;
    std::string synth_mean = "constant:0";
    std::string synth_std = "constant:1";
    double synth_low = 0.0;
    double synth_high = 1.0;

    bool operator==(const RunConfig&) const = default;
};

RunConfig parse_config(std::istream& is);
RunConfig parse_config_file(const std::string& path);

/// Applies one key = value assignment; throws ConfigError naming the key.
void apply_config_key(RunConfig& config, const std::string& key,
                      const std::string& value);

// Emits every key explicitly so parse(serialize(c)) == c.
std::string serialize_config(const RunConfig& config);

// Structural checks (measure names, delta range, TCP measure compatibility,
// required keys); throws ConfigError.
void validate_config(const RunConfig& config);

/// Measures resolved against the globals/overrides; `resolved_k` substitutes
/// for k = auto.
std::vector<MeasureConfig> resolve_measures(const RunConfig& config,
                                            std::size_t resolved_k);

LabelColumn parse_label_column(const std::string& text);

} // namespace knncp
