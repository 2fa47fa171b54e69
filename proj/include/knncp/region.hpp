#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace knncp {

/// One closed interval; endpoints may be -inf/+inf.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double y) const { return y >= lo && y <= hi; }
    double width() const;

    bool operator==(const Interval&) const = default;
};

/// A finite union of disjoint closed intervals plus isolated points; the
/// output of both predictors. Intervals are sorted, points lie outside all
/// intervals.
struct PredictiveRegion {
    std::vector<Interval> intervals;
    std::vector<double> isolated_points;

    bool contains(double y) const;
    bool empty() const { return intervals.empty() && isolated_points.empty(); }

    /// Total length; +inf when any interval is unbounded. Points add 0.
    double total_width() const;

    bool is_entire_line() const;
    static PredictiveRegion entire_line();
};

/// True when every point of `inner` lies in `outer`.
bool region_subset(const PredictiveRegion& inner, const PredictiveRegion& outer);

// "lo,hi;lo2,hi2" with isolated points as "p,p" segments and "-inf"/"inf"
// literals for unbounded ends; "empty" for the empty region.
std::string format_region(const PredictiveRegion& region);

std::ostream& operator<<(std::ostream& os, const PredictiveRegion& region);

} // namespace knncp
