#include "knncp/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace knncp {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) out.push_back(tok);
    }
    return out;
}

double to_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ConfigError("config key '" + key + "': expected a number, got '" +
                          value + "'");
    }
}

long long to_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        long long v = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ConfigError("config key '" + key + "': expected an integer, got '" +
                          value + "'");
    }
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("config key '" + key + "': expected a boolean, got '" + value +
                      "'");
}

// "1..30" or a comma list
std::vector<std::size_t> parse_k_candidates(const std::string& value) {
    auto dots = value.find("..");
    std::vector<std::size_t> out;
    if (dots != std::string::npos) {
        const long long lo = to_int("k_candidates", trim(value.substr(0, dots)));
        const long long hi = to_int("k_candidates", trim(value.substr(dots + 2)));
        if (lo < 1 || hi < lo)
            throw ConfigError("config key 'k_candidates': bad range '" + value + "'");
        for (long long k = lo; k <= hi; ++k) out.push_back(static_cast<std::size_t>(k));
        return out;
    }
    for (const std::string& tok : split_list(value)) {
        const long long k = to_int("k_candidates", tok);
        if (k < 1) throw ConfigError("config key 'k_candidates': k must be >= 1");
        out.push_back(static_cast<std::size_t>(k));
    }
    return out;
}

} // namespace

void apply_config_key(RunConfig& c, const std::string& key, const std::string& value) {
    if (key == "dataset") {
        c.dataset = value;
    } else if (key == "label") {
        c.label = value;
    } else if (key == "method") {
        c.methods.clear();
        for (const std::string& tok : split_list(value)) {
            if (tok == "tcp")
                c.methods.push_back(Method::Tcp);
            else if (tok == "icp")
                c.methods.push_back(Method::Icp);
            else
                throw ConfigError("config key 'method': unknown method '" + tok + "'");
        }
        if (c.methods.empty()) throw ConfigError("config key 'method': empty list");
    } else if (key == "measures") {
        c.measures.clear();
        for (const std::string& tok : split_list(value)) {
            try {
                c.measures.push_back(parse_measure(tok));
            } catch (const std::exception&) {
                throw ConfigError("config key 'measures': unknown measure '" + tok +
                                  "'");
            }
        }
        if (c.measures.empty()) throw ConfigError("config key 'measures': empty list");
    } else if (key == "k") {
        if (value == "auto") {
            c.k = 0;
        } else {
            const long long k = to_int(key, value);
            if (k < 1) throw ConfigError("config key 'k': must be >= 1 or 'auto'");
            c.k = static_cast<std::size_t>(k);
        }
    } else if (key == "k_candidates") {
        c.k_candidates = parse_k_candidates(value);
        if (c.k_candidates.empty())
            throw ConfigError("config key 'k_candidates': empty list");
    } else if (key == "gamma") {
        c.gamma = to_double(key, value);
    } else if (key == "rho") {
        c.rho = to_double(key, value);
    } else if (key.rfind("gamma.", 0) == 0 || key.rfind("rho.", 0) == 0 ||
               key.rfind("k.", 0) == 0) {
        const auto dot = key.find('.');
        const std::string field = key.substr(0, dot);
        const std::string measure = key.substr(dot + 1);
        try {
            parse_measure(measure);
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': unknown measure '" + measure +
                              "'");
        }
        MeasureOverride& ov = c.overrides[measure];
        if (field == "gamma")
            ov.gamma = to_double(key, value);
        else if (field == "rho")
            ov.rho = to_double(key, value);
        else
            ov.k = static_cast<std::size_t>(to_int(key, value));
    } else if (key == "folds") {
        c.folds = static_cast<int>(to_int(key, value));
    } else if (key == "runs") {
        c.runs = static_cast<int>(to_int(key, value));
    } else if (key == "q") {
        if (value == "auto") {
            c.q = 0;
        } else {
            const long long q = to_int(key, value);
            if (q < 1) throw ConfigError("config key 'q': must be >= 1 or 'auto'");
            c.q = static_cast<std::size_t>(q);
        }
    } else if (key == "deltas") {
        c.deltas.clear();
        for (const std::string& tok : split_list(value))
            c.deltas.push_back(to_double(key, tok));
        if (c.deltas.empty()) throw ConfigError("config key 'deltas': empty list");
    } else if (key == "seed") {
        try {
            c.seed = std::stoull(value);
        } catch (...) {
            throw ConfigError("config key 'seed': expected an integer, got '" + value +
                              "'");
        }
    } else if (key == "out") {
        c.out = value;
    } else if (key == "normalize") {
        c.normalize = to_bool(key, value);
    } else if (key == "weights") {
        if (value == "inverse")
            c.weights = WeightRule::InverseDistance;
        else if (value == "uniform")
            c.weights = WeightRule::Uniform;
        else
            throw ConfigError("config key 'weights': expected inverse|uniform");
    } else if (key == "threads") {
        c.threads = static_cast<int>(to_int(key, value));
    } else if (key == "tcp_lambda_median") {
        if (value == "per_example")
            c.tcp_global_median = false;
        else if (value == "global")
            c.tcp_global_median = true;
        else
            throw ConfigError("config key 'tcp_lambda_median': expected per_example|global");
    } else if (key == "synth_n") {
        c.synth_n = static_cast<std::size_t>(to_int(key, value));
    } else if (key == "synth_d") {
        c.synth_d = static_cast<std::size_t>(to_int(key, value));
    } else if (key == "synth_mean") {
        c.synth_mean = value;
    } else if (key == "synth_std") {
        c.synth_std = value;
    } else if (key == "synth_low") {
        c.synth_low = to_double(key, value);
    } else if (key == "synth_high") {
        c.synth_high = to_double(key, value);
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

RunConfig parse_config(std::istream& is) {
    RunConfig config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected key = value");
        apply_config_key(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return config;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

namespace {

std::string num(double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}

} // namespace

std::string serialize_config(const RunConfig& c) {
    std::ostringstream os;
    os << "dataset = " << c.dataset << '\n';
    os << "label = " << c.label << '\n';
    os << "method = ";
    for (std::size_t i = 0; i < c.methods.size(); ++i)
        os << (i ? "," : "") << method_name(c.methods[i]);
    os << '\n';
    os << "measures = ";
    for (std::size_t i = 0; i < c.measures.size(); ++i)
        os << (i ? "," : "") << measure_name(c.measures[i]);
    os << '\n';
    if (c.k == 0)
        os << "k = auto\n";
    else
        os << "k = " << c.k << '\n';
    os << "k_candidates = ";
    for (std::size_t i = 0; i < c.k_candidates.size(); ++i)
        os << (i ? "," : "") << c.k_candidates[i];
    os << '\n';
    os << "gamma = " << num(c.gamma) << '\n';
    os << "rho = " << num(c.rho) << '\n';
    for (const auto& [measure, ov] : c.overrides) {
        if (ov.gamma) os << "gamma." << measure << " = " << num(*ov.gamma) << '\n';
        if (ov.rho) os << "rho." << measure << " = " << num(*ov.rho) << '\n';
        if (ov.k) os << "k." << measure << " = " << *ov.k << '\n';
    }
    os << "folds = " << c.folds << '\n';
    os << "runs = " << c.runs << '\n';
    if (c.q == 0)
        os << "q = auto\n";
    else
        os << "q = " << c.q << '\n';
    os << "deltas = ";
    for (std::size_t i = 0; i < c.deltas.size(); ++i)
        os << (i ? "," : "") << num(c.deltas[i]);
    os << '\n';
    os << "seed = " << c.seed << '\n';
    os << "out = " << c.out << '\n';
    os << "normalize = " << (c.normalize ? "true" : "false") << '\n';
    os << "weights = "
       << (c.weights == WeightRule::InverseDistance ? "inverse" : "uniform") << '\n';
    os << "threads = " << c.threads << '\n';
    os << "tcp_lambda_median = " << (c.tcp_global_median ? "global" : "per_example")
       << '\n';
    os << "synth_n = " << c.synth_n << '\n';
    os << "synth_d = " << c.synth_d << '\n';
    os << "synth_mean = " << c.synth_mean << '\n';
    os << "synth_std = " << c.synth_std << '\n';
    os << "synth_low = " << num(c.synth_low) << '\n';
    os << "synth_high = " << num(c.synth_high) << '\n';
    return os.str();
}

void validate_config(const RunConfig& c) {
    if (c.dataset.empty())
        throw ConfigError("config key 'dataset' is required (path or 'synthetic')");
    if (c.dataset == "synthetic") {
        if (c.synth_n == 0 || c.synth_d == 0)
            throw ConfigError("config keys 'synth_n'/'synth_d' are required for "
                              "synthetic datasets");
        try {
            parse_smooth_fn(c.synth_mean);
            parse_smooth_fn(c.synth_std);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("config key 'synth_mean'/'synth_std': ") +
                              e.what());
        }
    } else if (c.label.empty()) {
        throw ConfigError("config key 'label' is required for CSV datasets");
    }
    if (c.methods.empty()) throw ConfigError("config key 'method': empty");
    if (c.measures.empty()) throw ConfigError("config key 'measures': empty");
    for (double d : c.deltas)
        if (!(d > 0.0 && d < 1.0))
            throw ConfigError("config key 'deltas': values must lie in (0,1)");
    if (c.folds < 2) throw ConfigError("config key 'folds': must be >= 2");
    if (c.runs < 1) throw ConfigError("config key 'runs': must be >= 1");
    if (c.threads < 1) throw ConfigError("config key 'threads': must be >= 1");
    if (c.gamma < 0.0) throw ConfigError("config key 'gamma': must be >= 0");
    if (c.rho < 0.0) throw ConfigError("config key 'rho': must be >= 0");
    if (c.k == 0 && c.k_candidates.empty())
        throw ConfigError("config key 'k_candidates': required when k = auto");

    // With method = tcp,icp the transductive side silently runs only the
    // compatible measures; requesting tcp alone with an incompatible measure
    // is an error before any computation.
    const bool has_tcp =
        std::find(c.methods.begin(), c.methods.end(), Method::Tcp) != c.methods.end();
    const bool has_icp =
        std::find(c.methods.begin(), c.methods.end(), Method::Icp) != c.methods.end();
    if (has_tcp && !has_icp)
        for (MeasureKind kind : c.measures)
            if (!tcp_compatible(kind))
                throw ConfigError(std::string("config key 'measures': '") +
                                  measure_name(kind) +
                                  "' cannot be used with TCP (method = tcp); its "
                                  "denominator depends on neighbour labels");
}

std::vector<MeasureConfig> resolve_measures(const RunConfig& c, std::size_t resolved_k) {
    std::vector<MeasureConfig> out;
    out.reserve(c.measures.size());
    for (MeasureKind kind : c.measures) {
        MeasureConfig cfg;
        cfg.kind = kind;
        cfg.gamma = c.gamma;
        cfg.rho = c.rho;
        cfg.k = c.k != 0 ? c.k : resolved_k;
        cfg.weight_rule = c.weights;
        auto it = c.overrides.find(measure_name(kind));
        if (it != c.overrides.end()) {
            if (it->second.gamma) cfg.gamma = *it->second.gamma;
            if (it->second.rho) cfg.rho = *it->second.rho;
            if (it->second.k) cfg.k = *it->second.k;
        }
        validate_measure_config(cfg);
        out.push_back(cfg);
    }
    return out;
}

LabelColumn parse_label_column(const std::string& text) {
    if (!text.empty() &&
        std::all_of(text.begin(), text.end(),
                    [](unsigned char ch) { return std::isdigit(ch); }))
        return LabelColumn{static_cast<std::size_t>(std::stoull(text))};
    return LabelColumn{text};
}

} // namespace knncp
