#include "knncp/region.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace knncp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double Interval::width() const {
    if (std::isinf(lo) || std::isinf(hi)) return kInf;
    return hi - lo;
}

bool PredictiveRegion::contains(double y) const {
    for (const Interval& iv : intervals)
        if (iv.contains(y)) return true;
    for (double p : isolated_points)
        if (p == y) return true;
    return false;
}

double PredictiveRegion::total_width() const {
    double total = 0.0;
    for (const Interval& iv : intervals) total += iv.width();
    return total;
}

bool PredictiveRegion::is_entire_line() const {
    return intervals.size() == 1 && intervals[0].lo == -kInf && intervals[0].hi == kInf;
}

PredictiveRegion PredictiveRegion::entire_line() {
    PredictiveRegion r;
    r.intervals.push_back({-kInf, kInf});
    return r;
}

bool region_subset(const PredictiveRegion& inner, const PredictiveRegion& outer) {
    for (const Interval& iv : inner.intervals) {
        bool covered = false;
        for (const Interval& ov : outer.intervals)
            if (ov.lo <= iv.lo && iv.hi <= ov.hi) {
                covered = true;
                break;
            }
        if (!covered) return false;
    }
    for (double p : inner.isolated_points)
        if (!outer.contains(p)) return false;
    return true;
}

namespace {

std::string format_endpoint(double v) {
    if (v == kInf) return "inf";
    if (v == -kInf) return "-inf";
    std::ostringstream ss;
    ss.precision(12);
    ss << v;
    return ss.str();
}

} // namespace

std::string format_region(const PredictiveRegion& region) {
    if (region.empty()) return "empty";

    // Merge intervals and point segments into one sorted list.
    std::vector<Interval> segments = region.intervals;
    for (double p : region.isolated_points) segments.push_back({p, p});
    std::sort(segments.begin(), segments.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo; });

    std::string out;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (i) out += ';';
        out += format_endpoint(segments[i].lo);
        out += ',';
        out += format_endpoint(segments[i].hi);
    }
    return out;
}

std::ostream& operator<<(std::ostream& os, const PredictiveRegion& region) {
    return os << format_region(region);
}

} // namespace knncp
