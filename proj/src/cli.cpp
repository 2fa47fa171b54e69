#include "knncp/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "knncp/config.hpp"
#include "knncp/evaluation.hpp"
#include "knncp/rng.hpp"
#include "knncp/version.hpp"

namespace knncp {

namespace {

Dataset load_run_dataset(const RunConfig& config) {
    if (config.dataset == "synthetic") {
        SyntheticSpec spec;
        spec.n_examples = config.synth_n;
        spec.d = config.synth_d;
        spec.mean_fn = parse_smooth_fn(config.synth_mean);
        spec.std_fn = parse_smooth_fn(config.synth_std);
        spec.input_low = config.synth_low;
        spec.input_high = config.synth_high;
        spec.seed = config.seed;
        return generate_synthetic(spec);
    }
    try {
        return load_csv(config.dataset, parse_label_column(config.label));
    } catch (const std::exception& e) {
        // dataset/label problems are configuration problems (exit code 2)
        throw ConfigError(e.what());
    }
}

std::string distinct_q_values(const Dataset& dataset, const RunConfig& config) {
    std::set<std::size_t> values;
    const std::size_t l = dataset.rows();
    const std::size_t folds = static_cast<std::size_t>(config.folds);
    const std::size_t base = l / folds, rem = l % folds;
    values.insert(config.q != 0 ? config.q
                                : default_calibration_size(l - base - (rem ? 1 : 0)));
    values.insert(config.q != 0 ? config.q : default_calibration_size(l - base));
    std::string out;
    for (std::size_t q : values) {
        if (!out.empty()) out += ",";
        out += std::to_string(q);
    }
    return out;
}

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    validate_config(config);
    Dataset raw = load_run_dataset(config);
    Dataset dataset = config.normalize ? normalize_minmax(raw).first : std::move(raw);

    SplitPlan plan;
    plan.folds = config.folds;
    plan.runs = config.runs;
    plan.seed = config.seed;
    plan.calibration_size = config.q;

    // k = auto follows the holdout protocol on the training set of the first
    // fold of the first run.
    std::size_t resolved_k = config.k;
    if (resolved_k == 0) {
        const std::vector<FoldSplit> folds0 = kfold_split(dataset, plan, 0);
        const Dataset train0 = dataset.subset(folds0[0].train);
        resolved_k = select_k(train0, config.k_candidates, config.weights,
                              derive_seed(config.seed, 0, 0, SeedRole::Holdout));
        out << "selected k = " << resolved_k << " (holdout on first fold)\n";
    }
    const std::vector<MeasureConfig> measures = resolve_measures(config, resolved_k);

    TcpOptions tcp_options;
    tcp_options.global_lambda_median = config.tcp_global_median;

    ExperimentReport report;
    for (Method method : config.methods) {
        std::vector<MeasureConfig> method_measures = measures;
        if (method == Method::Tcp) {
            std::erase_if(method_measures, [](const MeasureConfig& cfg) {
                return !tcp_compatible(cfg.kind);
            });
            if (method_measures.size() != measures.size())
                err << "note: tcp runs only the label-independent measures ("
                    << method_measures.size() << " of " << measures.size() << ")\n";
            if (method_measures.empty()) continue;
        }
        ExperimentReport part =
            run_experiment(dataset, method, method_measures, plan, config.deltas,
                           config.threads, tcp_options);
        for (ReportRow& row : part.rows) report.rows.push_back(std::move(row));
    }

    namespace fs = std::filesystem;
    fs::create_directories(config.out);
    const fs::path csv_path = fs::path(config.out) / "report.csv";
    const fs::path table_path = fs::path(config.out) / "report.txt";
    const fs::path manifest_path = fs::path(config.out) / "manifest.txt";

    {
        std::ofstream csv(csv_path);
        if (!csv) throw std::runtime_error("cannot write " + csv_path.string());
        write_report_csv(report, csv);
    }
    {
        std::ofstream table(table_path);
        write_report_table(report, table);
    }
    {
        std::ofstream per_run(fs::path(config.out) / "per_run.csv");
        write_per_run_csv(report, per_run);
    }
    {
        // The manifest doubles as a config file: rerunning it reproduces the
        // report (wall_time_s excepted).
        std::ofstream manifest(manifest_path);
        manifest << "# knncp " << kVersion << " experiment manifest\n";
        manifest << "# rng: " << kRngAlgorithm << "\n";
        manifest << "# dataset: " << config.dataset << " (" << dataset.rows()
                 << " rows, " << dataset.cols() << " attributes)\n";
        manifest << "# resolved k: " << resolved_k << "\n";
        const bool has_icp = std::find(config.methods.begin(), config.methods.end(),
                                       Method::Icp) != config.methods.end();
        if (has_icp)
            manifest << "# calibration sizes in use: "
                     << distinct_q_values(dataset, config) << "\n";
        manifest << serialize_config(config);
    }

    for (const ReportRow& row : report.rows)
        if (row.n_infinite > 0)
            err << "warning: " << row.method << "/" << row.measure << " at delta "
                << row.delta << " produced " << row.n_infinite
                << " infinite regions (calibration set too small for this delta)\n";

    write_report_table(report, out);
    out << "report: " << csv_path.string() << "\n";
    out << "table: " << table_path.string() << "\n";
    out << "per-run summaries: " << (fs::path(config.out) / "per_run.csv").string()
        << "\n";
    out << "manifest: " << manifest_path.string() << "\n";
    return 0;
}

struct PredictArgs {
    std::string train_path;
    std::string label;
    std::string test_path;
    std::string method = "icp";
    std::string measure = "standard";
    std::size_t k = 0;
    double gamma = 0.5;
    double rho = 0.5;
    double delta = 0.05;
    std::size_t q = 0; // 0 = policy
    std::uint64_t seed = 1;
    std::string weights = "inverse";
    bool normalize = true;
    bool tcp_global_median = false;
};

int cmd_predict(const PredictArgs& args, std::ostream& out, std::ostream& err) {
    Dataset train = [&] {
        try {
            return load_csv(args.train_path, parse_label_column(args.label));
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
    }();

    MeasureConfig cfg;
    try {
        cfg.kind = parse_measure(args.measure);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    cfg.gamma = args.gamma;
    cfg.rho = args.rho;
    cfg.k = args.k;
    if (args.weights == "inverse")
        cfg.weight_rule = WeightRule::InverseDistance;
    else if (args.weights == "uniform")
        cfg.weight_rule = WeightRule::Uniform;
    else
        throw ConfigError("--weights: expected inverse|uniform");
    if (cfg.k == 0) throw ConfigError("--k is required and must be >= 1");
    if (!(args.delta > 0.0 && args.delta < 1.0))
        throw ConfigError("--delta must lie in (0,1)");

    MinMaxStats stats;
    if (args.normalize) {
        auto [normalized, s] = normalize_minmax(train);
        train = std::move(normalized);
        stats = std::move(s);
    }

    std::vector<std::vector<double>> queries = [&] {
        try {
            return load_csv_matrix(args.test_path);
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
    }();
    for (auto& row : queries) {
        if (row.size() != train.cols())
            throw ConfigError("test row has " + std::to_string(row.size()) +
                              " columns, training data has " +
                              std::to_string(train.cols()) + " attributes");
        if (args.normalize) stats.apply(row);
    }

    if (args.method == "tcp") {
        if (!tcp_compatible(cfg.kind))
            throw ConfigError(std::string("measure '") + measure_name(cfg.kind) +
                              "' cannot be used with TCP");
        TcpOptions options;
        options.global_lambda_median = args.tcp_global_median;
        const TcpPredictor predictor(train, cfg.k, cfg.weight_rule, options);
        for (const auto& row : queries) {
            const PredictiveRegion region =
                predictor.predict_region(predictor.prepare(row), cfg, args.delta);
            out << format_region(region) << "\n";
        }
        return 0;
    }
    if (args.method != "icp") throw ConfigError("--method: expected tcp|icp");

    const std::size_t q =
        args.q != 0 ? args.q : default_calibration_size(train.rows());
    const CalibrationModel model =
        calibrate(train, q, cfg, derive_seed(args.seed, 0, 0, SeedRole::Calibration));
    if (quantile_index(args.delta, q) == 0)
        err << "warning: floor(delta*(q+1)) = 0 with q = " << q
            << "; regions are infinite at delta = " << args.delta << "\n";
    for (const auto& row : queries)
        out << format_region(icp_predict_interval(model, row, args.delta)) << "\n";
    return 0;
}

int cmd_synthetic(const SyntheticSpec& spec, const std::string& out_path,
                  std::ostream& out) {
    const Dataset ds = generate_synthetic(spec);
    std::ofstream file(out_path);
    if (!file) throw std::runtime_error("cannot write " + out_path);
    for (std::size_t j = 0; j < ds.cols(); ++j) file << 'x' << j << ',';
    file << "y\n";
    char buf[64];
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        const auto row = ds.row(i);
        for (double v : row) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            file << buf << ',';
        }
        std::snprintf(buf, sizeof(buf), "%.17g", ds.label(i));
        file << buf << '\n';
    }
    out << "wrote " << ds.rows() << " x " << (ds.cols() + 1) << " CSV to " << out_path
        << "\n";
    return 0;
}

int cmd_report(const std::string& in_path, std::ostream& out) {
    std::ifstream in(in_path);
    if (!in) throw ConfigError("cannot open report '" + in_path + "'");
    write_report_table(read_report_csv(in), out);
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
    CLI::App app{"Conformal prediction for k-nearest-neighbours regression"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    // --- run ---
    auto* run = app.add_subcommand("run", "Run a cross-validation experiment");
    std::string config_path;
    run->add_option("--config", config_path, "Experiment config file")->required();
    // every config key can be overridden on the command line
    std::vector<std::pair<std::string, std::string>> run_overrides;
    static const char* kOverrideKeys[] = {
        "dataset", "label", "method", "measures", "k", "k_candidates", "gamma",
        "rho", "folds", "runs", "q", "deltas", "seed", "out", "normalize",
        "weights", "threads", "tcp_lambda_median"};
    for (const char* key : kOverrideKeys) {
        run->add_option_function<std::string>(
            std::string("--") + key,
            [&run_overrides, key](const std::string& value) {
                run_overrides.emplace_back(key, value);
            },
            std::string("Override config key '") + key + "'");
    }

    // --- predict ---
    auto* predict = app.add_subcommand("predict", "Predict regions for test rows");
    PredictArgs pargs;
    predict->add_option("--train", pargs.train_path, "Training CSV")->required();
    predict->add_option("--label", pargs.label, "Label column (name or index)")
        ->required();
    predict->add_option("--test", pargs.test_path, "CSV of attribute rows to predict")
        ->required();
    predict->add_option("--method", pargs.method, "tcp or icp");
    predict->add_option("--measure", pargs.measure, "Nonconformity measure name");
    predict->add_option("--k", pargs.k, "Number of neighbours")->required();
    predict->add_option("--gamma", pargs.gamma, "Measure sensitivity");
    predict->add_option("--rho", pargs.rho, "combo_exp second sensitivity");
    predict->add_option("--delta", pargs.delta, "Significance level")->required();
    predict->add_option("--q", pargs.q, "Calibration size (icp; 0 = policy)");
    predict->add_option("--seed", pargs.seed, "Seed for the calibration split");
    predict->add_option("--weights", pargs.weights, "inverse or uniform");
    predict->add_option("--normalize", pargs.normalize,
                        "Min-max normalize attributes (default true)");
    predict->add_flag("--tcp-global-median", pargs.tcp_global_median,
                      "Use the global lambda median shortcut");

    // --- synthetic ---
    auto* synthetic = app.add_subcommand("synthetic", "Generate a synthetic CSV");
    SyntheticSpec spec;
    std::string mean_text = "constant:0", std_text = "constant:1", synth_out;
    synthetic->add_option("--n", spec.n_examples, "Number of examples")->required();
    synthetic->add_option("--d", spec.d, "Number of attributes")->required();
    synthetic->add_option("--mean", mean_text, "Mean function, e.g. sine:10,0.5");
    synthetic->add_option("--std", std_text, "Std function, e.g. affine:0.5,1");
    synthetic->add_option("--low", spec.input_low, "Input box lower bound");
    synthetic->add_option("--high", spec.input_high, "Input box upper bound");
    synthetic->add_option("--seed", spec.seed, "Generator seed");
    synthetic->add_option("--out-file", synth_out, "Output CSV path")->required();

    // --- report ---
    auto* report = app.add_subcommand("report", "Re-render a report CSV as a table");
    std::string report_in;
    report->add_option("--in", report_in, "report.csv path")->required();

    std::vector<std::string> argv_store;
    argv_store.push_back("knncp");
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const std::string& a : argv_store) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (run->parsed()) {
            RunConfig config = parse_config_file(config_path);
            for (const auto& [key, value] : run_overrides)
                apply_config_key(config, key, value);
            return cmd_run(config, out, err);
        }
        if (predict->parsed()) return cmd_predict(pargs, out, err);
        if (synthetic->parsed()) {
            spec.mean_fn = parse_smooth_fn(mean_text);
            spec.std_fn = parse_smooth_fn(std_text);
            return cmd_synthetic(spec, synth_out, out);
        }
        if (report->parsed()) return cmd_report(report_in, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

} // namespace knncp
