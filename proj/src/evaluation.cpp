#include "knncp/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "knncp/rng.hpp"

namespace knncp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}
} // namespace

const char* method_name(Method method) {
    return method == Method::Tcp ? "tcp" : "icp";
}

RegionRecord make_record(PredictiveRegion region, double true_label) {
    RegionRecord rec;
    rec.true_label = true_label;
    rec.width = region.total_width();
    rec.covered = region.contains(true_label);
    rec.region = std::move(region);
    return rec;
}

std::size_t select_k(const Dataset& train, std::span<const std::size_t> candidates,
                     WeightRule rule, std::uint64_t seed) {
    if (candidates.empty())
        throw std::invalid_argument("select_k: no candidate values");

    std::vector<std::size_t> all(train.rows());
    std::iota(all.begin(), all.end(), std::size_t{0});
    auto [fit_idx, val_idx] = holdout_for_k_selection(all, seed);
    const Dataset fit = train.subset(fit_idx);

    for (std::size_t k : candidates)
        if (k == 0 || k > fit.rows() - 1)
            throw std::invalid_argument("select_k: candidate k=" + std::to_string(k) +
                                        " exceeds fit-set size minus one");

    std::size_t best_k = 0;
    double best_mae = kInf;
    std::vector<std::size_t> sorted(candidates.begin(), candidates.end());
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t k : sorted) {
        double abs_err = 0.0;
        for (std::size_t idx : val_idx) {
            const NeighbourSet nb = find_k_nearest(train.row(idx), fit, k, rule);
            abs_err += std::abs(train.label(idx) - knn_predict(nb, fit.labels()));
        }
        const double mae = abs_err / static_cast<double>(val_idx.size());
        if (mae < best_mae) {
            best_mae = mae;
            best_k = k;
        }
    }
    return best_k;
}

namespace {

double nearest_rank(const std::vector<double>& sorted, double pct) {
    const std::size_t n = sorted.size();
    std::size_t rank = static_cast<std::size_t>(
        std::ceil(pct * static_cast<double>(n) - 1e-9));
    if (rank == 0) rank = 1;
    if (rank > n) rank = n;
    return sorted[rank - 1];
}

} // namespace

ReportRow summarize(std::span<const RegionRecord> records, double delta) {
    if (records.empty()) throw std::invalid_argument("summarize: no records");

    ReportRow row;
    row.delta = delta;

    std::size_t uncovered = 0;
    std::vector<double> widths;
    widths.reserve(records.size());
    for (const RegionRecord& rec : records) {
        if (!rec.covered) ++uncovered;
        if (std::isinf(rec.width))
            ++row.n_infinite;
        else
            widths.push_back(rec.width);
    }
    row.error_pct =
        100.0 * static_cast<double>(uncovered) / static_cast<double>(records.size());

    if (widths.empty()) {
        row.median_width = row.interdecile_mean_width = kInf;
        row.p10 = row.p25 = row.p50 = row.p75 = row.p90 = kInf;
        return row;
    }
    std::sort(widths.begin(), widths.end());
    const std::size_t n = widths.size();
    row.median_width = n % 2 == 1 ? widths[n / 2]
                                  : 0.5 * (widths[n / 2 - 1] + widths[n / 2]);

    const std::size_t trim = n / 10;
    double sum = 0.0;
    for (std::size_t i = trim; i < n - trim; ++i) sum += widths[i];
    row.interdecile_mean_width = sum / static_cast<double>(n - 2 * trim);

    row.p10 = nearest_rank(widths, 0.10);
    row.p25 = nearest_rank(widths, 0.25);
    row.p50 = nearest_rank(widths, 0.50);
    row.p75 = nearest_rank(widths, 0.75);
    row.p90 = nearest_rank(widths, 0.90);
    return row;
}

namespace {

// Measures sharing (k, weight_rule) can share the per-fold precomputation.
struct MeasureGroup {
    std::size_t k;
    WeightRule rule;
    std::vector<std::size_t> measure_indices;
};

std::vector<MeasureGroup> group_measures(std::span<const MeasureConfig> measures) {
    std::vector<MeasureGroup> groups;
    for (std::size_t mi = 0; mi < measures.size(); ++mi) {
        auto it = std::find_if(groups.begin(), groups.end(), [&](const MeasureGroup& g) {
            return g.k == measures[mi].k && g.rule == measures[mi].weight_rule;
        });
        if (it == groups.end()) {
            groups.push_back({measures[mi].k, measures[mi].weight_rule, {mi}});
        } else {
            it->measure_indices.push_back(mi);
        }
    }
    return groups;
}

// Records and timings produced by one (run, fold) unit, indexed
// [measure][delta] so merging across units stays deterministic.
struct UnitResult {
    std::vector<std::vector<std::vector<RegionRecord>>> records;
    std::vector<double> measure_seconds;
};

UnitResult evaluate_unit(const Dataset& dataset, Method method,
                         std::span<const MeasureConfig> measures,
                         const SplitPlan& plan, std::span<const double> deltas,
                         const TcpOptions& tcp_options, int run, std::size_t fold) {
    UnitResult result;
    result.records.assign(measures.size(),
                          std::vector<std::vector<RegionRecord>>(deltas.size()));
    result.measure_seconds.assign(measures.size(), 0.0);

    const std::vector<FoldSplit> folds = kfold_split(dataset, plan, run);
    const FoldSplit& split = folds[fold];
    const Dataset train = dataset.subset(split.train);

    for (const MeasureGroup& group : group_measures(measures)) {
        const auto shared_start = Clock::now();
        double shared_s = 0.0;

        if (method == Method::Tcp) {
            const TcpPredictor predictor(train, group.k, group.rule, tcp_options);
            shared_s = seconds_since(shared_start);
            std::vector<double> probe_s(group.measure_indices.size(), 0.0);
            for (std::size_t test_idx : split.test) {
                const auto probe_start = Clock::now();
                const TcpPredictor::Probe probe = predictor.prepare(dataset.row(test_idx));
                shared_s += seconds_since(probe_start);
                for (std::size_t gi = 0; gi < group.measure_indices.size(); ++gi) {
                    const std::size_t mi = group.measure_indices[gi];
                    const auto t0 = Clock::now();
                    const auto detail = predictor.region_detail(probe, measures[mi]);
                    for (std::size_t di = 0; di < deltas.size(); ++di)
                        result.records[mi][di].push_back(make_record(
                            assemble_region(detail, deltas[di]), dataset.label(test_idx)));
                    probe_s[gi] += seconds_since(t0);
                }
            }
            for (std::size_t gi = 0; gi < group.measure_indices.size(); ++gi)
                result.measure_seconds[group.measure_indices[gi]] +=
                    probe_s[gi] +
                    shared_s / static_cast<double>(group.measure_indices.size());
        } else {
            const std::size_t q = plan.calibration_size != 0
                                      ? plan.calibration_size
                                      : default_calibration_size(train.rows());
            const IcpCalibration calibration(
                train, q, group.k, group.rule,
                derive_seed(plan.seed, static_cast<std::uint64_t>(run), fold,
                            SeedRole::Calibration));
            shared_s = seconds_since(shared_start);
            for (std::size_t gi = 0; gi < group.measure_indices.size(); ++gi) {
                const std::size_t mi = group.measure_indices[gi];
                const auto t0 = Clock::now();
                const CalibrationModel model = calibration.finalize(measures[mi]);
                for (std::size_t test_idx : split.test) {
                    const IcpProbe probe = icp_prepare(model, dataset.row(test_idx));
                    for (std::size_t di = 0; di < deltas.size(); ++di)
                        result.records[mi][di].push_back(
                            make_record(icp_predict_interval(model, probe, deltas[di]),
                                        dataset.label(test_idx)));
                }
                result.measure_seconds[mi] +=
                    seconds_since(t0) +
                    shared_s / static_cast<double>(group.measure_indices.size());
            }
        }
    }
    return result;
}

} // namespace

ExperimentReport run_experiment(const Dataset& dataset, Method method,
                                std::span<const MeasureConfig> measures,
                                const SplitPlan& plan, std::span<const double> deltas,
                                int threads, const TcpOptions& tcp_options) {
    if (measures.empty()) throw std::invalid_argument("run_experiment: no measures");
    if (deltas.empty()) throw std::invalid_argument("run_experiment: no deltas");
    if (plan.runs < 1) throw std::invalid_argument("run_experiment: runs must be >= 1");
    for (double d : deltas)
        if (!(d > 0.0 && d < 1.0))
            throw std::invalid_argument("run_experiment: deltas must lie in (0,1)");
    for (const MeasureConfig& cfg : measures) {
        validate_measure_config(cfg);
        if (method == Method::Tcp && !tcp_compatible(cfg.kind))
            throw std::invalid_argument(std::string("run_experiment: TCP cannot use '") +
                                        measure_name(cfg.kind) + "'");
    }

    const std::size_t n_folds = static_cast<std::size_t>(plan.folds);
    const std::size_t n_units = static_cast<std::size_t>(plan.runs) * n_folds;
    std::vector<UnitResult> units(n_units);

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        while (!failed.load()) {
            const std::size_t u = next.fetch_add(1);
            if (u >= n_units) break;
            try {
                units[u] = evaluate_unit(dataset, method, measures, plan, deltas,
                                         tcp_options, static_cast<int>(u / n_folds),
                                         u % n_folds);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                failure = e.what();
                failed.store(true);
            }
        }
    };

    const int n_workers = std::max(1, std::min<int>(threads, static_cast<int>(n_units)));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    if (failed.load()) throw std::runtime_error("run_experiment: " + failure);

    // Deterministic merge in unit order: per-run summaries first, then one
    // pooled summary per (measure, delta).
    ExperimentReport report;
    for (std::size_t mi = 0; mi < measures.size(); ++mi) {
        double wall = 0.0;
        for (const UnitResult& unit : units) wall += unit.measure_seconds[mi];
        for (std::size_t di = 0; di < deltas.size(); ++di) {
            std::vector<RegionRecord> pooled;
            for (int run = 0; run < plan.runs; ++run) {
                std::vector<RegionRecord> run_records;
                double run_wall = 0.0;
                for (std::size_t fold = 0; fold < n_folds; ++fold) {
                    UnitResult& unit = units[static_cast<std::size_t>(run) * n_folds + fold];
                    run_wall += unit.measure_seconds[mi];
                    for (RegionRecord& rec : unit.records[mi][di])
                        run_records.push_back(std::move(rec));
                }
                ReportRow run_row = summarize(run_records, deltas[di]);
                run_row.method = method_name(method);
                run_row.measure = measure_name(measures[mi].kind);
                run_row.wall_time_s = run_wall;
                report.per_run.push_back({run, std::move(run_row)});
                for (RegionRecord& rec : run_records) pooled.push_back(std::move(rec));
            }
            ReportRow row = summarize(pooled, deltas[di]);
            row.method = method_name(method);
            row.measure = measure_name(measures[mi].kind);
            row.wall_time_s = wall;
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

namespace {

std::string format_double(double v) {
    if (v == kInf) return "inf";
    if (v == -kInf) return "-inf";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

double parse_double_or_inf(const std::string& s) {
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    return std::stod(s);
}

} // namespace

void write_report_csv(const ExperimentReport& report, std::ostream& os) {
    os << "method,measure,delta,median_width,interdecile_mean_width,error_pct,"
          "p10,p25,p50,p75,p90,n_infinite,wall_time_s\n";
    for (const ReportRow& r : report.rows) {
        os << r.method << ',' << r.measure << ',' << format_double(r.delta) << ','
           << format_double(r.median_width) << ','
           << format_double(r.interdecile_mean_width) << ','
           << format_double(r.error_pct) << ',' << format_double(r.p10) << ','
           << format_double(r.p25) << ',' << format_double(r.p50) << ','
           << format_double(r.p75) << ',' << format_double(r.p90) << ','
           << r.n_infinite << ',' << format_double(r.wall_time_s) << '\n';
    }
}

ExperimentReport read_report_csv(std::istream& is) {
    ExperimentReport report;
    std::string line;
    if (!std::getline(is, line))
        throw std::runtime_error("read_report_csv: empty input");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 13)
            throw std::runtime_error("read_report_csv: malformed row '" + line + "'");
        ReportRow r;
        r.method = cells[0];
        r.measure = cells[1];
        r.delta = parse_double_or_inf(cells[2]);
        r.median_width = parse_double_or_inf(cells[3]);
        r.interdecile_mean_width = parse_double_or_inf(cells[4]);
        r.error_pct = parse_double_or_inf(cells[5]);
        r.p10 = parse_double_or_inf(cells[6]);
        r.p25 = parse_double_or_inf(cells[7]);
        r.p50 = parse_double_or_inf(cells[8]);
        r.p75 = parse_double_or_inf(cells[9]);
        r.p90 = parse_double_or_inf(cells[10]);
        r.n_infinite = static_cast<std::size_t>(std::stoull(cells[11]));
        r.wall_time_s = parse_double_or_inf(cells[12]);
        report.rows.push_back(std::move(r));
    }
    return report;
}

void write_per_run_csv(const ExperimentReport& report, std::ostream& os) {
    os << "run,method,measure,delta,median_width,interdecile_mean_width,error_pct,"
          "p10,p25,p50,p75,p90,n_infinite,wall_time_s\n";
    for (const PerRunRow& pr : report.per_run) {
        const ReportRow& r = pr.row;
        os << pr.run << ',' << r.method << ',' << r.measure << ','
           << format_double(r.delta) << ',' << format_double(r.median_width) << ','
           << format_double(r.interdecile_mean_width) << ','
           << format_double(r.error_pct) << ',' << format_double(r.p10) << ','
           << format_double(r.p25) << ',' << format_double(r.p50) << ','
           << format_double(r.p75) << ',' << format_double(r.p90) << ','
           << r.n_infinite << ',' << format_double(r.wall_time_s) << '\n';
    }
}

void write_report_table(const ExperimentReport& report, std::ostream& os) {
    // Column per delta, in descending order (ascending confidence).
    std::vector<double> deltas;
    for (const ReportRow& r : report.rows)
        if (std::find(deltas.begin(), deltas.end(), r.delta) == deltas.end())
            deltas.push_back(r.delta);
    std::sort(deltas.begin(), deltas.end(), std::greater<double>());

    std::vector<std::pair<std::string, std::string>> keys; // (method, measure)
    for (const ReportRow& r : report.rows) {
        std::pair<std::string, std::string> key{r.method, r.measure};
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            keys.push_back(key);
    }
    auto find_row = [&](const auto& key, double delta) -> const ReportRow* {
        for (const ReportRow& r : report.rows)
            if (r.method == key.first && r.measure == key.second && r.delta == delta)
                return &r;
        return nullptr;
    };

    auto fmt = [](double v) {
        if (v == kInf) return std::string("inf");
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3f", v);
        return std::string(buf);
    };

    os << std::left << std::setw(8) << "Method" << std::setw(12) << "Measure";
    const char* blocks[] = {"Median width", "Interdecile mean", "Error %"};
    for (const char* b : blocks) {
        os << "| ";
        for (double d : deltas) {
            char head[32];
            std::snprintf(head, sizeof(head), "%s %.6g%%", b, 100.0 * (1.0 - d));
            os << std::setw(std::max<int>(10, static_cast<int>(std::strlen(head)) + 1))
               << head;
        }
    }
    os << '\n';
    for (const auto& key : keys) {
        os << std::left << std::setw(8) << key.first << std::setw(12) << key.second;
        for (int block = 0; block < 3; ++block) {
            os << "| ";
            for (double d : deltas) {
                const ReportRow* r = find_row(key, d);
                std::string cell = "-";
                if (r) {
                    if (block == 0) cell = fmt(r->median_width);
                    if (block == 1) cell = fmt(r->interdecile_mean_width);
                    if (block == 2) cell = fmt(r->error_pct);
                }
                char head[32];
                std::snprintf(head, sizeof(head), "%s %.6g%%", blocks[block],
                              100.0 * (1.0 - d));
                os << std::setw(std::max<int>(10, static_cast<int>(std::strlen(head)) + 1))
                   << cell;
            }
        }
        os << '\n';
    }
}

} // namespace knncp
