#include <doctest.h>

#include <limits>

#include "knncp/region.hpp"

using namespace knncp;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("interval and region membership") {
    PredictiveRegion r;
    r.intervals = {{-2.0, -1.0}, {1.0, 4.0}};
    r.isolated_points = {0.0};
    CHECK(r.contains(-1.5));
    CHECK(r.contains(1.0)); // closed endpoints
    CHECK(r.contains(4.0));
    CHECK(r.contains(0.0));
    CHECK_FALSE(r.contains(0.5));
    CHECK_FALSE(r.contains(5.0));
}

TEST_CASE("total_width sums interval lengths, points add nothing") {
    PredictiveRegion r;
    r.intervals = {{0.0, 1.5}, {2.0, 2.0}};
    r.isolated_points = {10.0};
    CHECK(r.total_width() == doctest::Approx(1.5));

    r.intervals.push_back({3.0, kInf});
    CHECK(r.total_width() == kInf);

    CHECK(PredictiveRegion{}.total_width() == 0.0);
    CHECK(PredictiveRegion::entire_line().is_entire_line());
    CHECK(PredictiveRegion::entire_line().total_width() == kInf);
}

TEST_CASE("region_subset covers intervals and points") {
    PredictiveRegion inner, outer;
    inner.intervals = {{1.0, 2.0}};
    inner.isolated_points = {5.0};
    outer.intervals = {{0.0, 3.0}, {4.5, 6.0}};
    CHECK(region_subset(inner, outer));
    CHECK_FALSE(region_subset(outer, inner));

    PredictiveRegion straddling;
    straddling.intervals = {{2.5, 5.0}}; // spans the gap in outer
    CHECK_FALSE(region_subset(straddling, outer));

    CHECK(region_subset(PredictiveRegion{}, PredictiveRegion{}));
    CHECK(region_subset(outer, PredictiveRegion::entire_line()));
}

TEST_CASE("format_region prints closed segments with inf literals") {
    CHECK(format_region(PredictiveRegion{}) == "empty");
    CHECK(format_region(PredictiveRegion::entire_line()) == "-inf,inf");

    PredictiveRegion r;
    r.intervals = {{1.5, 2.5}, {-kInf, -3.0}};
    r.isolated_points = {0.25};
    CHECK(format_region(r) == "-inf,-3;0.25,0.25;1.5,2.5");
}
