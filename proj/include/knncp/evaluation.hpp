#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "knncp/dataset.hpp"
#include "knncp/icp.hpp"
#include "knncp/nonconformity.hpp"
#include "knncp/region.hpp"
#include "knncp/tcp.hpp"

namespace knncp {

enum class Method { Tcp, Icp };

const char* method_name(Method method);

/// One evaluated test example.
struct RegionRecord {
    PredictiveRegion region;
    double true_label = 0.0;
    double width = 0.0; // +inf for unbounded regions
    bool covered = false;
};

RegionRecord make_record(PredictiveRegion region, double true_label);

/// One (method, measure, delta) summary line. Width statistics are computed
/// over finite widths; unbounded regions are counted in n_infinite (and the
/// statistics are +inf only when no finite width remains).
struct ReportRow {
    std::string method;
    std::string measure;
    double delta = 0.0;
    double median_width = 0.0;
    double interdecile_mean_width = 0.0;
    double error_pct = 0.0;
    double p10 = 0.0, p25 = 0.0, p50 = 0.0, p75 = 0.0, p90 = 0.0;
    std::size_t n_infinite = 0;
    double wall_time_s = 0.0;
};

/// Auxiliary single-run summary kept next to the pooled rows for inspection.
struct PerRunRow {
    int run = 0;
    ReportRow row;
};

struct ExperimentReport {
    std::vector<ReportRow> rows; // pooled over all runs and folds
    std::vector<PerRunRow> per_run;
};

// Holdout-based selection: validation = a seeded third of the rows, fit the
// rest; returns the candidate with the smallest mean absolute error of the
// k-NN prediction (ties to the smallest k).
std::size_t select_k(const Dataset& train, std::span<const std::size_t> candidates,
                     WeightRule rule, std::uint64_t seed);

// Median with the even-size rule, trimmed interdecile mean (drop the lowest
// and highest floor(n/10) widths), coverage error, and nearest-rank boxplot
// quantiles. method/measure/wall_time_s are left for the caller.
ReportRow summarize(std::span<const RegionRecord> records, double delta);

// Runs the full cross-validation protocol: `plan.runs` seeded repetitions of
// `plan.folds`-fold cross-validation, evaluating every test example at every
// delta and measure, pooling records across runs and folds per (measure,
// delta) before summarizing. ICP carves a calibration set of plan.
// calibration_size (or the default policy when 0) out of each training fold.
// Results are independent of `threads`.
ExperimentReport run_experiment(const Dataset& dataset, Method method,
                                std::span<const MeasureConfig> measures,
                                const SplitPlan& plan, std::span<const double> deltas,
                                int threads = 1, const TcpOptions& tcp_options = {});

void write_report_csv(const ExperimentReport& report, std::ostream& os);
ExperimentReport read_report_csv(std::istream& is);

/// Same columns as the report CSV with a leading `run` column.
void write_per_run_csv(const ExperimentReport& report, std::ostream& os);

/// Plain-text table: median width, interdecile mean width, and error
/// percentage blocks with one column per confidence level.
void write_report_table(const ExperimentReport& report, std::ostream& os);

} // namespace knncp
