#include "knncp/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "knncp/rng.hpp"

namespace knncp {

Dataset::Dataset(std::vector<double> attributes, std::size_t cols,
                 std::vector<double> labels, std::vector<std::string> names)
    : attributes_(std::move(attributes)),
      cols_(cols),
      labels_(std::move(labels)),
      names_(std::move(names)) {
    if (labels_.empty())
        throw std::invalid_argument("Dataset: need at least one row");
    if (cols_ == 0)
        throw std::invalid_argument("Dataset: need at least one attribute column");
    if (attributes_.size() != labels_.size() * cols_)
        throw std::invalid_argument("Dataset: attribute/label shape mismatch");
    if (!names_.empty() && names_.size() != cols_)
        throw std::invalid_argument("Dataset: attribute name count mismatch");
    for (double v : attributes_)
        if (!std::isfinite(v))
            throw std::invalid_argument("Dataset: non-finite attribute value");
    for (double v : labels_)
        if (!std::isfinite(v))
            throw std::invalid_argument("Dataset: non-finite label value");
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    if (indices.empty())
        throw std::invalid_argument("Dataset::subset: empty index list");
    std::vector<double> attrs;
    attrs.reserve(indices.size() * cols_);
    std::vector<double> labs;
    labs.reserve(indices.size());
    for (std::size_t i : indices) {
        if (i >= rows())
            throw std::out_of_range("Dataset::subset: index out of range");
        auto r = row(i);
        attrs.insert(attrs.end(), r.begin(), r.end());
        labs.push_back(labels_[i]);
    }
    return Dataset(std::move(attrs), cols_, std::move(labs), names_);
}

namespace {

bool parse_double(const std::string& cell, double& out) {
    const char* first = cell.data();
    const char* last = first + cell.size();
    while (first != last && (*first == ' ' || *first == '\t')) ++first;
    while (last != first && (*(last - 1) == ' ' || *(last - 1) == '\t')) --last;
    if (first == last) return false;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    cells.push_back(cur);
    return cells;
}

} // namespace

Dataset load_csv(const std::string& path, const LabelColumn& label) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("load_csv: cannot open '" + path + "'");

    std::vector<std::vector<std::string>> raw;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        raw.push_back(split_line(line));
    }
    if (raw.empty())
        throw std::runtime_error("load_csv: '" + path + "' is empty");

    const std::size_t width = raw.front().size();
    for (std::size_t r = 0; r < raw.size(); ++r)
        if (raw[r].size() != width)
            throw std::runtime_error("load_csv: row " + std::to_string(r + 1) +
                                     " has " + std::to_string(raw[r].size()) +
                                     " columns, expected " + std::to_string(width));
    if (width < 2)
        throw std::runtime_error("load_csv: need at least two columns");

    // Header detection: any non-numeric cell in the first row means header.
    bool has_header = false;
    for (const auto& cell : raw.front()) {
        double tmp;
        if (!parse_double(cell, tmp)) {
            has_header = true;
            break;
        }
    }
    std::vector<std::string> header;
    if (has_header) header = raw.front();

    std::size_t label_idx;
    if (std::holds_alternative<std::size_t>(label)) {
        label_idx = std::get<std::size_t>(label);
        if (label_idx >= width)
            throw std::runtime_error("load_csv: label column index " +
                                     std::to_string(label_idx) + " out of range");
    } else {
        const std::string& name = std::get<std::string>(label);
        if (!has_header)
            throw std::runtime_error("load_csv: label column '" + name +
                                     "' requested but file has no header");
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw std::runtime_error("load_csv: no column named '" + name + "'");
        label_idx = static_cast<std::size_t>(it - header.begin());
    }

    const std::size_t first_data = has_header ? 1 : 0;
    if (raw.size() == first_data)
        throw std::runtime_error("load_csv: '" + path + "' has no data rows");

    const std::size_t d = width - 1;
    std::vector<double> attrs;
    attrs.reserve((raw.size() - first_data) * d);
    std::vector<double> labels;
    labels.reserve(raw.size() - first_data);

    for (std::size_t r = first_data; r < raw.size(); ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            double v;
            if (!parse_double(raw[r][c], v))
                throw std::runtime_error("load_csv: non-numeric cell at row " +
                                         std::to_string(r + 1) + ", column " +
                                         std::to_string(c + 1) + " ('" + raw[r][c] +
                                         "')");
            if (c == label_idx)
                labels.push_back(v);
            else
                attrs.push_back(v);
        }
    }

    std::vector<std::string> names;
    if (has_header) {
        for (std::size_t c = 0; c < width; ++c)
            if (c != label_idx) names.push_back(header[c]);
    }
    return Dataset(std::move(attrs), d, std::move(labels), std::move(names));
}

std::vector<std::vector<double>> load_csv_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("load_csv_matrix: cannot open '" + path + "'");

    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> cells = split_line(line);
        std::vector<double> row(cells.size());
        bool numeric = true;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (!parse_double(cells[c], row[c])) {
                numeric = false;
                if (!rows.empty() || line_no > 1)
                    throw std::runtime_error(
                        "load_csv_matrix: non-numeric cell at row " +
                        std::to_string(line_no) + ", column " + std::to_string(c + 1));
                break; // header row
            }
        }
        if (!numeric) continue;
        if (width == 0) width = row.size();
        if (row.size() != width)
            throw std::runtime_error("load_csv_matrix: row " + std::to_string(line_no) +
                                     " has " + std::to_string(row.size()) +
                                     " columns, expected " + std::to_string(width));
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw std::runtime_error("load_csv_matrix: '" + path + "' has no data rows");
    return rows;
}

void MinMaxStats::apply(std::span<double> row) const {
    for (std::size_t j = 0; j < row.size(); ++j) {
        double range = max[j] - min[j];
        if (range <= 0.0) range = 1.0;
        row[j] = (row[j] - min[j]) / range;
    }
}

std::pair<Dataset, MinMaxStats> normalize_minmax(const Dataset& dataset) {
    const std::size_t l = dataset.rows(), d = dataset.cols();
    MinMaxStats stats;
    stats.min.assign(d, std::numeric_limits<double>::infinity());
    stats.max.assign(d, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < l; ++i) {
        auto r = dataset.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            stats.min[j] = std::min(stats.min[j], r[j]);
            stats.max[j] = std::max(stats.max[j], r[j]);
        }
    }
    std::vector<double> attrs(l * d);
    for (std::size_t i = 0; i < l; ++i) {
        auto r = dataset.row(i);
        std::copy(r.begin(), r.end(), attrs.begin() + i * d);
        stats.apply({attrs.data() + i * d, d});
    }
    return {Dataset(std::move(attrs), d, dataset.labels(), dataset.names()),
            std::move(stats)};
}

std::vector<FoldSplit> kfold_split(const Dataset& dataset, const SplitPlan& plan,
                                   int run_index) {
    const std::size_t l = dataset.rows();
    if (plan.folds < 2)
        throw std::invalid_argument("kfold_split: need at least 2 folds");
    if (static_cast<std::size_t>(plan.folds) > l)
        throw std::invalid_argument("kfold_split: more folds than rows");

    std::vector<std::size_t> perm(l);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    auto rng = make_rng(derive_seed(plan.seed, static_cast<std::uint64_t>(run_index),
                                    0, SeedRole::KFold));
    std::shuffle(perm.begin(), perm.end(), rng);

    const std::size_t folds = static_cast<std::size_t>(plan.folds);
    const std::size_t base = l / folds, rem = l % folds;

    std::vector<FoldSplit> out(folds);
    std::size_t start = 0;
    for (std::size_t f = 0; f < folds; ++f) {
        const std::size_t size = base + (f < rem ? 1 : 0);
        out[f].test.assign(perm.begin() + start, perm.begin() + start + size);
        out[f].train.reserve(l - size);
        out[f].train.insert(out[f].train.end(), perm.begin(), perm.begin() + start);
        out[f].train.insert(out[f].train.end(), perm.begin() + start + size,
                            perm.end());
        std::sort(out[f].test.begin(), out[f].test.end());
        std::sort(out[f].train.begin(), out[f].train.end());
        start += size;
    }
    return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
holdout_for_k_selection(std::span<const std::size_t> train_indices,
                        std::uint64_t seed) {
    if (train_indices.size() < 3)
        throw std::invalid_argument("holdout_for_k_selection: need at least 3 rows");
    std::vector<std::size_t> shuffled(train_indices.begin(), train_indices.end());
    auto rng = make_rng(seed);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);

    const std::size_t n_val = train_indices.size() / 3;
    std::vector<std::size_t> validation(shuffled.begin(), shuffled.begin() + n_val);
    std::vector<std::size_t> fit(shuffled.begin() + n_val, shuffled.end());
    std::sort(validation.begin(), validation.end());
    std::sort(fit.begin(), fit.end());
    return {std::move(fit), std::move(validation)};
}

std::size_t default_calibration_size(std::size_t train_size) {
    std::size_t n = (train_size + 500) / 1000; // round(train_size / 1000)
    if (n == 0) n = 1;
    return 100 * n - 1;
}

double SmoothFn::operator()(std::span<const double> x) const {
    double t = 0.0;
    if (name == "affine") {
        for (double v : x) t += std::abs(v);
        t /= static_cast<double>(x.size());
        return params.at(0) + params.at(1) * t;
    }
    for (double v : x) t += v;
    if (name == "constant") return params.at(0);
    if (name == "linear") return params.at(0) + params.at(1) * t;
    if (name == "sine") return params.at(0) * std::sin(params.at(1) * t);
    if (name == "sine_offset")
        return params.at(0) + params.at(1) * std::sin(params.at(2) * t);
    throw std::invalid_argument("SmoothFn: unknown function '" + name + "'");
}

SmoothFn parse_smooth_fn(const std::string& text) {
    SmoothFn fn;
    auto colon = text.find(':');
    fn.name = text.substr(0, colon);
    if (colon != std::string::npos) {
        std::stringstream ss(text.substr(colon + 1));
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            double v;
            if (!parse_double(tok, v))
                throw std::invalid_argument("parse_smooth_fn: bad parameter '" + tok +
                                            "' in '" + text + "'");
            fn.params.push_back(v);
        }
    }
    static const std::vector<std::pair<std::string, std::size_t>> known = {
        {"constant", 1}, {"linear", 2}, {"sine", 2}, {"sine_offset", 3}, {"affine", 2}};
    for (const auto& [name, arity] : known) {
        if (fn.name == name) {
            if (fn.params.size() != arity)
                throw std::invalid_argument("parse_smooth_fn: '" + name + "' takes " +
                                            std::to_string(arity) + " parameters");
            return fn;
        }
    }
    throw std::invalid_argument("parse_smooth_fn: unknown function '" + fn.name + "'");
}

std::string format_smooth_fn(const SmoothFn& fn) {
    std::string out = fn.name;
    for (std::size_t i = 0; i < fn.params.size(); ++i) {
        out += (i == 0 ? ':' : ',');
        std::ostringstream ss;
        ss.precision(17);
        ss << fn.params[i];
        out += ss.str();
    }
    return out;
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
    if (spec.n_examples == 0 || spec.d == 0)
        throw std::invalid_argument("generate_synthetic: n_examples and d must be positive");
    if (!(spec.input_low < spec.input_high))
        throw std::invalid_argument("generate_synthetic: input_low must be < input_high");

    auto rng = make_rng(derive_seed(spec.seed, 0, 0, SeedRole::Synthetic));
    std::uniform_real_distribution<double> unif(spec.input_low, spec.input_high);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<double> attrs(spec.n_examples * spec.d);
    std::vector<double> labels(spec.n_examples);
    for (std::size_t i = 0; i < spec.n_examples; ++i) {
        std::span<double> x(attrs.data() + i * spec.d, spec.d);
        for (double& v : x) v = unif(rng);
        const double sigma = spec.std_fn(x);
        if (sigma <= 0.0)
            throw std::runtime_error("generate_synthetic: std_fn <= 0 at a sampled point");
        labels[i] = spec.mean_fn(x) + sigma * gauss(rng);
    }
    return Dataset(std::move(attrs), spec.d, std::move(labels));
}

} // namespace knncp
