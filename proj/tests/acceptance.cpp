// Acceptance suite: end-to-end checks of the conformal predictors against
// independent oracles, empirical validity on synthetic data, the Boston
// Housing benchmark, and the algebraic region identities. Prints one
// PASS/FAIL line per criterion; exits nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "knncp/dataset.hpp"
#include "knncp/evaluation.hpp"
#include "knncp/icp.hpp"
#include "knncp/nonconformity.hpp"
#include "knncp/rng.hpp"
#include "knncp/tcp.hpp"

using namespace knncp;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool pass = true;
    std::string detail;
};

Dataset random_dataset(std::size_t l, std::size_t d, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> attr(0.0, 1.0);
    std::uniform_real_distribution<double> lab(0.0, 10.0);
    std::vector<double> attrs(l * d), labels(l);
    for (double& v : attrs) v = attr(rng);
    for (double& v : labels) v = lab(rng);
    return Dataset(std::move(attrs), d, std::move(labels));
}

MeasureConfig make_measure(MeasureKind kind, std::size_t k, double gamma = 0.5,
                           double rho = 0.5) {
    MeasureConfig cfg;
    cfg.kind = kind;
    cfg.k = k;
    cfg.gamma = gamma;
    cfg.rho = rho;
    return cfg;
}

std::string fmt(double v, const char* spec = "%.3f") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

// --- criterion 1: TCP region vs p-value grid oracle -------------------------

Outcome criterion_tcp_grid_oracle() {
    const auto start = Clock::now();
    auto rng = make_rng(0xACCE01);
    const double deltas[] = {0.05, 0.1, 0.2};
    const MeasureKind kinds[] = {MeasureKind::Standard, MeasureKind::DistAdd,
                                 MeasureKind::DistExp};
    long long disagreements = 0, probes_checked = 0;

    for (int instance = 0; instance < 100; ++instance) {
        const Dataset train = random_dataset(30, 2, rng);
        std::uniform_real_distribution<double> attr(0.0, 1.0);
        const std::vector<double> x_new{attr(rng), attr(rng)};
        const TcpPredictor predictor(train, 3);
        const TcpPredictor::Probe probe = predictor.prepare(x_new);

        for (MeasureKind kind : kinds) {
            const MeasureConfig cfg = make_measure(kind, 3);
            const auto detail = predictor.region_detail(probe, cfg);
            for (double delta : deltas) {
                const PredictiveRegion region = assemble_region(detail, delta);
                // labels live in [0,10]; probe the range extended by 50%
                for (int g = 0; g <= 4000; ++g) {
                    double y = -5.0 + 20.0 * static_cast<double>(g) / 4000.0;
                    bool moved = true;
                    while (moved) { // keep probes > 1e-8 from critical points
                        moved = false;
                        for (double p : detail.points)
                            if (std::abs(y - p) <= 1e-8) {
                                y += 3.7e-8;
                                moved = true;
                            }
                    }
                    const bool in_region = region.contains(y);
                    const bool oracle = predictor.p_value(probe, cfg, y) > delta;
                    if (in_region != oracle) ++disagreements;
                    ++probes_checked;
                }
            }
        }
    }
    const double elapsed = seconds_since(start);
    Outcome out;
    out.pass = disagreements == 0 && elapsed < 60.0;
    out.detail = std::to_string(disagreements) + " disagreements over " +
                 std::to_string(probes_checked) + " probes, " + fmt(elapsed, "%.1f") +
                 "s (limit 60s)";
    return out;
}

// --- criterion 2: ICP interval endpoints vs p-value --------------------------

Outcome criterion_icp_boundaries() {
    auto rng = make_rng(0xACCE02);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const MeasureKind kinds[] = {MeasureKind::Standard, MeasureKind::DistAdd,
                                 MeasureKind::DistExp,  MeasureKind::StdAdd,
                                 MeasureKind::StdExp,   MeasureKind::ComboAdd,
                                 MeasureKind::ComboExp};
    long long disagreements = 0, checks = 0;
    int instances_with_ties = 0;

    for (int instance = 0; instance < 100; ++instance) {
        // every other instance is an integer-labelled grid: many tied scores
        const bool grid = instance % 2 == 0;
        const std::size_t k = grid ? 1 : 3;
        const Dataset train = [&] {
            if (!grid) return random_dataset(80, 2, rng);
            std::vector<double> xs(80), ys(80);
            for (std::size_t i = 0; i < 80; ++i) {
                xs[i] = static_cast<double>(i);
                ys[i] = std::floor(10.0 * unif(rng));
            }
            return Dataset(xs, 1, ys);
        }();
        const std::vector<double> x_new =
            grid ? std::vector<double>{80.0 * unif(rng)}
                 : std::vector<double>{unif(rng), unif(rng)};
        const double scale = 10.0; // label range of both constructions

        const IcpCalibration calibration(train, 19, k, WeightRule::InverseDistance,
                                         derive_seed(0xACCE02, instance, 0,
                                                     SeedRole::Test));
        bool tied = false;
        for (MeasureKind kind : kinds) {
            const CalibrationModel model = calibration.finalize(make_measure(kind, k));
            {
                std::set<double> distinct(model.sorted_scores.begin(),
                                          model.sorted_scores.end());
                if (distinct.size() < model.q()) tied = true;
            }
            const IcpProbe probe = icp_prepare(model, x_new);
            for (double delta : {0.1, 0.25}) { // s = 2 and 5 with q = 19
                const PredictiveRegion region =
                    icp_predict_interval(model, probe, delta);
                const Interval iv = region.intervals.at(0);
                const double eps = 1e-6 * scale;
                const bool ok =
                    icp_p_value(model, probe, iv.lo + eps) > delta &&
                    icp_p_value(model, probe, iv.hi - eps) > delta &&
                    icp_p_value(model, probe, iv.lo - eps) <= delta &&
                    icp_p_value(model, probe, iv.hi + eps) <= delta;
                if (!ok) ++disagreements;
                ++checks;
            }
        }
        if (tied) ++instances_with_ties;
    }
    Outcome out;
    out.pass = disagreements == 0 && instances_with_ties >= 40;
    out.detail = std::to_string(disagreements) + " disagreements over " +
                 std::to_string(checks) + " interval boundary checks (" +
                 std::to_string(instances_with_ties) + " instances with tied scores)";
    return out;
}

// --- criterion 3: empirical validity on heteroscedastic normal data ---------

Outcome criterion_empirical_validity() {
    const auto start = Clock::now();
    const std::size_t k = 5, q = 99;
    const double deltas[] = {0.1, 0.05, 0.01};
    const MeasureKind tcp_kinds[] = {MeasureKind::Standard, MeasureKind::DistAdd,
                                     MeasureKind::DistExp};
    const MeasureKind icp_kinds[] = {MeasureKind::Standard, MeasureKind::DistAdd,
                                     MeasureKind::DistExp,  MeasureKind::StdAdd,
                                     MeasureKind::StdExp,   MeasureKind::ComboAdd,
                                     MeasureKind::ComboExp};
    // errors[method 0=tcp 1=icp][measure][delta]
    long long errors[2][7][3] = {};
    const long long total = 20 * 1000;

    for (int rep = 0; rep < 20; ++rep) {
        SyntheticSpec spec;
        spec.n_examples = 2000;
        spec.d = 5;
        spec.mean_fn = parse_smooth_fn("sine:10,0.3");
        spec.std_fn = parse_smooth_fn("affine:0.5,0.5"); // sigma in [0.5, 3]
        spec.input_low = -5.0;
        spec.input_high = 5.0;
        spec.seed = derive_seed(0xACCE03, rep, 0, SeedRole::Test);
        const Dataset all = generate_synthetic(spec);

        std::vector<std::size_t> train_idx(1000), test_idx(1000);
        for (std::size_t i = 0; i < 1000; ++i) {
            train_idx[i] = i;
            test_idx[i] = 1000 + i;
        }
        const Dataset train = all.subset(train_idx);

        const TcpPredictor tcp(train, k);
        const IcpCalibration calibration(train, q, k, WeightRule::InverseDistance,
                                         derive_seed(0xACCE03, rep, 1, SeedRole::Test));
        std::vector<CalibrationModel> models;
        for (MeasureKind kind : icp_kinds)
            models.push_back(calibration.finalize(make_measure(kind, k)));

        for (std::size_t t : test_idx) {
            const auto x = all.row(t);
            const double y = all.label(t);

            const TcpPredictor::Probe probe = tcp.prepare(x);
            for (std::size_t mi = 0; mi < 3; ++mi) {
                const auto detail =
                    tcp.region_detail(probe, make_measure(tcp_kinds[mi], k));
                for (std::size_t di = 0; di < 3; ++di)
                    if (!assemble_region(detail, deltas[di]).contains(y))
                        ++errors[0][mi][di];
            }
            // the probe statistics are measure-independent: share them
            const IcpProbe icp_probe = icp_prepare(models[0], x);
            for (std::size_t mi = 0; mi < 7; ++mi)
                for (std::size_t di = 0; di < 3; ++di)
                    if (!icp_predict_interval(models[mi], icp_probe, deltas[di])
                             .contains(y))
                        ++errors[1][mi][di];
        }
    }

    const double lo_bounds[] = {7.0, 3.0, 0.3};
    const double hi_bounds[] = {13.0, 7.0, 2.0};
    Outcome out;
    std::string worst;
    for (int method = 0; method < 2; ++method) {
        const int n_measures = method == 0 ? 3 : 7;
        for (int mi = 0; mi < n_measures; ++mi)
            for (int di = 0; di < 3; ++di) {
                const double pct = 100.0 * static_cast<double>(errors[method][mi][di]) /
                                   static_cast<double>(total);
                if (pct < lo_bounds[di] || pct > hi_bounds[di]) {
                    out.pass = false;
                    worst += std::string(" ") + (method == 0 ? "tcp/" : "icp/") +
                             measure_name((method == 0 ? tcp_kinds : icp_kinds)[mi]) +
                             "@" + fmt(deltas[di], "%.2f") + "=" + fmt(pct, "%.2f") + "%";
                }
            }
    }
    const double elapsed = seconds_since(start);
    out.pass = out.pass && elapsed < 600.0;
    std::string sample = "tcp/standard=" +
                         fmt(100.0 * errors[0][0][0] / static_cast<double>(total), "%.2f") +
                         "% icp/standard=" +
                         fmt(100.0 * errors[1][0][0] / static_cast<double>(total), "%.2f") +
                         "% at delta 0.10";
    out.detail = "30 pooled error rates within brackets (" + sample + "), " +
                 fmt(elapsed, "%.1f") + "s (limit 600s)";
    if (!worst.empty()) out.detail += "; out of bracket:" + worst;
    return out;
}

// --- criteria 4, 5, 7: Boston Housing reproduction ---------------------------

struct BostonResults {
    ExperimentReport tcp;
    ExperimentReport icp;
    double tcp_seconds = 0.0;
    double icp_seconds = 0.0;
};

BostonResults run_boston() {
    const Dataset raw =
        load_csv("data/boston_housing.csv", LabelColumn{std::string("MEDV")});
    const Dataset dataset = normalize_minmax(raw).first;

    SplitPlan plan;
    plan.folds = 10;
    plan.runs = 10;
    plan.seed = 271828;
    plan.calibration_size = 99;

    const std::size_t k = 4;
    const std::vector<double> deltas = {0.1, 0.05, 0.01};
    const std::vector<MeasureConfig> tcp_measures = {
        make_measure(MeasureKind::Standard, k), make_measure(MeasureKind::DistAdd, k),
        make_measure(MeasureKind::DistExp, k)};
    const std::vector<MeasureConfig> icp_measures = {
        make_measure(MeasureKind::Standard, k), make_measure(MeasureKind::DistAdd, k),
        make_measure(MeasureKind::DistExp, k),  make_measure(MeasureKind::StdAdd, k),
        make_measure(MeasureKind::StdExp, k),   make_measure(MeasureKind::ComboAdd, k),
        make_measure(MeasureKind::ComboExp, k)};

    BostonResults results;
    auto t0 = Clock::now();
    results.tcp = run_experiment(dataset, Method::Tcp, tcp_measures, plan, deltas, 1);
    results.tcp_seconds = seconds_since(t0);
    t0 = Clock::now();
    results.icp = run_experiment(dataset, Method::Icp, icp_measures, plan, deltas, 1);
    results.icp_seconds = seconds_since(t0);
    return results;
}

const ReportRow& find_row(const ExperimentReport& report, const std::string& measure,
                          double delta) {
    for (const ReportRow& row : report.rows)
        if (row.measure == measure && row.delta == delta) return row;
    throw std::runtime_error("missing report row " + measure);
}

Outcome criterion_boston_reproduction(const BostonResults& results) {
    Outcome out;
    std::string detail;

    const double tcp_ref = 12.143, icp_ref = 13.710;
    const double tcp_median = find_row(results.tcp, "standard", 0.1).median_width;
    const double icp_median = find_row(results.icp, "standard", 0.1).median_width;
    if (tcp_median < 0.85 * tcp_ref || tcp_median > 1.15 * tcp_ref) out.pass = false;
    if (icp_median < 0.85 * icp_ref || icp_median > 1.15 * icp_ref) out.pass = false;
    detail += "tcp median@90% " + fmt(tcp_median) + " (ref 12.143 +-15%), icp " +
              fmt(icp_median) + " (ref 13.710 +-15%)";

    const double deltas[] = {0.1, 0.05, 0.01};
    const double nominal[] = {10.0, 5.0, 1.0};
    std::string errors = "; errors";
    for (int di = 0; di < 3; ++di) {
        for (const ExperimentReport* report : {&results.tcp, &results.icp}) {
            const double pct = find_row(*report, "standard", deltas[di]).error_pct;
            if (std::abs(pct - nominal[di]) > 2.5) out.pass = false;
            errors += " " + fmt(pct, "%.2f") + "%";
        }
    }
    out.detail = detail + errors + " (nominal 10/5/1 +-2.5)";
    return out;
}

Outcome criterion_normalized_improvement(const BostonResults& results) {
    Outcome out;
    std::string detail = "icp combo_exp vs standard median width:";
    for (double delta : {0.1, 0.05, 0.01}) {
        const double combo = find_row(results.icp, "combo_exp", delta).median_width;
        const double standard = find_row(results.icp, "standard", delta).median_width;
        if (!(combo < standard)) out.pass = false;
        detail += " " + fmt(combo) + "<" + fmt(standard);
    }
    out.detail = detail;
    return out;
}

Outcome criterion_performance(const BostonResults& results) {
    Outcome out;
    out.pass = results.tcp_seconds < 60.0 && results.icp_seconds < 5.0;
    out.detail = "tcp 10x10-fold " + fmt(results.tcp_seconds, "%.1f") +
                 "s (limit 60s), icp all measures " + fmt(results.icp_seconds, "%.2f") +
                 "s (limit 5s), single-threaded";
    return out;
}

// --- criterion 6: nesting in delta -------------------------------------------

Outcome criterion_nesting() {
    auto rng = make_rng(0xACCE06);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_real_distribution<double> d_lo(0.03, 0.45);
    std::uniform_real_distribution<double> d_gap(0.02, 0.3);
    long long violations = 0;

    for (int t = 0; t < 500; ++t) { // transductive pairs
        const Dataset train = random_dataset(25, 2, rng);
        const std::vector<double> x_new{unif(rng), unif(rng)};
        const TcpPredictor predictor(train, 3);
        const auto probe = predictor.prepare(x_new);
        const MeasureConfig cfg =
            make_measure(t % 2 ? MeasureKind::DistAdd : MeasureKind::Standard, 3);
        const double delta1 = d_lo(rng);
        const double delta2 = std::min(0.9, delta1 + d_gap(rng));
        if (!region_subset(predictor.predict_region(probe, cfg, delta2),
                           predictor.predict_region(probe, cfg, delta1)))
            ++violations;
    }
    for (int t = 0; t < 500; ++t) { // inductive pairs
        const Dataset train = random_dataset(60, 2, rng);
        const MeasureConfig cfg = make_measure(static_cast<MeasureKind>(t % 7), 3);
        const CalibrationModel model =
            calibrate(train, 19, cfg, derive_seed(0xACCE06, t, 0, SeedRole::Test));
        const std::vector<double> x_new{unif(rng), unif(rng)};
        const IcpProbe probe = icp_prepare(model, x_new);
        const double delta1 = d_lo(rng);
        const double delta2 = std::min(0.9, delta1 + d_gap(rng));
        if (!region_subset(icp_predict_interval(model, probe, delta2),
                           icp_predict_interval(model, probe, delta1)))
            ++violations;
    }
    Outcome out;
    out.pass = violations == 0;
    out.detail = std::to_string(violations) + " violations over 1000 delta pairs";
    return out;
}

// --- criterion 8: score x multiplier == residual ------------------------------

Outcome criterion_algebraic_identity() {
    auto rng = make_rng(0xACCE08);
    std::uniform_int_distribution<int> kind_dist(0, 6);
    std::uniform_real_distribution<double> stat_dist(0.0, 5.0);
    std::uniform_real_distribution<double> gamma_dist(0.05, 3.0);
    std::uniform_real_distribution<double> res_dist(0.0, 100.0);
    long long failures = 0;
    double worst = 0.0;

    for (int t = 0; t < 100000; ++t) {
        const MeasureKind kind = static_cast<MeasureKind>(kind_dist(rng));
        // exponential denominators are fine at gamma = 0 as well
        const bool exp_kind = kind == MeasureKind::DistExp ||
                              kind == MeasureKind::StdExp ||
                              kind == MeasureKind::ComboExp;
        const double gamma = (exp_kind && t % 10 == 0) ? 0.0 : gamma_dist(rng);
        const MeasureConfig cfg = make_measure(kind, 3, gamma, gamma_dist(rng));
        AccuracyStats stats;
        stats.lambda_k = stat_dist(rng);
        stats.xi_k = stat_dist(rng);
        const double residual = res_dist(rng);

        const double round_trip =
            score(cfg, residual, stats) * half_width_multiplier(cfg, stats);
        const double rel = residual == 0.0
                               ? (round_trip == 0.0 ? 0.0 : 1.0)
                               : std::abs(round_trip - residual) / residual;
        worst = std::max(worst, rel);
        if (rel > 1e-12) ++failures;
    }
    Outcome out;
    out.pass = failures == 0;
    std::ostringstream ss;
    ss.precision(3);
    ss << failures << " failures over 100000 triples, worst relative error " << worst;
    out.detail = ss.str();
    return out;
}

} // namespace

int main() {
    int failed = 0;
    const auto report = [&](int id, const std::string& name, const Outcome& outcome) {
        std::cout << (outcome.pass ? "[PASS] " : "[FAIL] ") << id << ". " << name
                  << ": " << outcome.detail << "\n"
                  << std::flush;
        if (!outcome.pass) ++failed;
    };

    report(1, "tcp region matches p-value grid oracle", criterion_tcp_grid_oracle());
    report(2, "icp interval boundaries match p-values", criterion_icp_boundaries());
    report(3, "empirical validity on synthetic normal data",
           criterion_empirical_validity());

    const BostonResults boston = run_boston();
    report(4, "boston housing reproduction", criterion_boston_reproduction(boston));
    report(5, "normalized measure tightens boston regions",
           criterion_normalized_improvement(boston));
    report(6, "regions nest in delta", criterion_nesting());
    report(7, "boston runtime ceilings", criterion_performance(boston));
    report(8, "score times multiplier recovers the residual",
           criterion_algebraic_identity());

    if (failed) {
        std::cout << failed << " criteria failed\n";
        return 1;
    }
    std::cout << "all criteria passed\n";
    return 0;
}
