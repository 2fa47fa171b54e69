#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "knncp/nonconformity.hpp"
#include "knncp/rng.hpp"

using namespace knncp;

namespace {

MeasureConfig make(MeasureKind kind, double gamma = 0.5, double rho = 0.5) {
    MeasureConfig cfg;
    cfg.kind = kind;
    cfg.gamma = gamma;
    cfg.rho = rho;
    cfg.k = 3;
    return cfg;
}

AccuracyStats stats(double lambda, double xi) {
    AccuracyStats s;
    s.lambda_k = lambda;
    s.xi_k = xi;
    return s;
}

} // namespace

TEST_CASE("score evaluates each measure") {
    CHECK(score(make(MeasureKind::Standard), 2.0, stats(9, 9)) == 2.0);
    CHECK(score(make(MeasureKind::DistAdd, 0.5), 3.0, stats(1.0, 0.0)) ==
          doctest::Approx(2.0));
    CHECK(score(make(MeasureKind::DistExp, 0.5), std::exp(1.0), stats(2.0, 0.0)) ==
          doctest::Approx(1.0));
    CHECK(score(make(MeasureKind::ComboExp, 0.0, 0.0), 5.0, stats(3.0, 4.0)) ==
          doctest::Approx(2.5));
    CHECK(score(make(MeasureKind::StdAdd, 0.5), 3.0, stats(0.0, 1.0)) ==
          doctest::Approx(2.0));
    CHECK(score(make(MeasureKind::StdExp, 1.0), 2.0, stats(0.0, 0.0)) ==
          doctest::Approx(2.0));
    CHECK(score(make(MeasureKind::ComboAdd, 1.0), 6.0, stats(1.0, 1.0)) ==
          doctest::Approx(2.0));
}

TEST_CASE("half_width_multiplier matches the region scalings") {
    CHECK(half_width_multiplier(make(MeasureKind::Standard), stats(7, 7)) == 1.0);
    CHECK(half_width_multiplier(make(MeasureKind::ComboAdd, 0.5), stats(1.0, 0.5)) ==
          doctest::Approx(2.0));
    CHECK(half_width_multiplier(make(MeasureKind::DistExp, 2.0), stats(0.5, 0.0)) ==
          doctest::Approx(std::exp(1.0)));
}

TEST_CASE("score times multiplier recovers the residual") {
    auto rng = make_rng(17);
    std::uniform_real_distribution<double> stat_dist(0.0, 5.0);
    std::uniform_real_distribution<double> gamma_dist(0.05, 3.0);
    std::uniform_real_distribution<double> res_dist(0.0, 100.0);
    std::uniform_int_distribution<int> kind_dist(0, 6);
    for (int t = 0; t < 20000; ++t) {
        const MeasureConfig cfg = make(static_cast<MeasureKind>(kind_dist(rng)),
                                       gamma_dist(rng), gamma_dist(rng));
        const AccuracyStats st = stats(stat_dist(rng), stat_dist(rng));
        const double residual = res_dist(rng);
        const double round_trip = score(cfg, residual, st) * half_width_multiplier(cfg, st);
        CHECK(std::abs(round_trip - residual) <= 1e-12 * std::max(residual, 1.0));
    }
}

TEST_CASE("score is monotone in residual and zero at zero") {
    auto rng = make_rng(18);
    std::uniform_real_distribution<double> unif(0.0, 4.0);
    for (int t = 0; t < 200; ++t) {
        const MeasureConfig cfg = make(static_cast<MeasureKind>(t % 7), 0.5, 0.5);
        const AccuracyStats st = stats(unif(rng), unif(rng));
        CHECK(score(cfg, 0.0, st) == 0.0);
        const double r1 = unif(rng), r2 = r1 + unif(rng);
        CHECK(score(cfg, r1, st) <= score(cfg, r2, st));
    }
}

TEST_CASE("larger difficulty statistics make examples less strange") {
    const double r = 3.0;
    CHECK(score(make(MeasureKind::DistAdd), r, stats(2.0, 0)) <=
          score(make(MeasureKind::DistAdd), r, stats(1.0, 0)));
    CHECK(score(make(MeasureKind::DistExp), r, stats(2.0, 0)) <=
          score(make(MeasureKind::DistExp), r, stats(1.0, 0)));
    CHECK(score(make(MeasureKind::StdAdd), r, stats(0, 2.0)) <=
          score(make(MeasureKind::StdAdd), r, stats(0, 1.0)));
    CHECK(score(make(MeasureKind::StdExp), r, stats(0, 2.0)) <=
          score(make(MeasureKind::StdExp), r, stats(0, 1.0)));
    CHECK(score(make(MeasureKind::ComboAdd), r, stats(2.0, 1.5)) <=
          score(make(MeasureKind::ComboAdd), r, stats(1.0, 1.5)));
    CHECK(score(make(MeasureKind::ComboExp), r, stats(1.0, 2.0)) <=
          score(make(MeasureKind::ComboExp), r, stats(1.0, 1.0)));
}

TEST_CASE("additive measures reject a zero denominator") {
    CHECK_THROWS_WITH_AS(score(make(MeasureKind::DistAdd, 0.0), 1.0, stats(0.0, 0.0)),
                         doctest::Contains("gamma > 0"), std::invalid_argument);
    CHECK_THROWS_AS(score(make(MeasureKind::StdAdd, 0.0), 1.0, stats(0.0, 0.0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(score(make(MeasureKind::ComboAdd, 0.0), 1.0, stats(0.0, 0.0)),
                    std::invalid_argument);
    // exponential measures are fine at gamma = 0
    CHECK(score(make(MeasureKind::DistExp, 0.0), 1.0, stats(0.0, 0.0)) == 1.0);
}

TEST_CASE("only the distance-based measures are TCP-compatible") {
    CHECK(tcp_compatible(MeasureKind::Standard));
    CHECK(tcp_compatible(MeasureKind::DistAdd));
    CHECK(tcp_compatible(MeasureKind::DistExp));
    CHECK_FALSE(tcp_compatible(MeasureKind::StdAdd));
    CHECK_FALSE(tcp_compatible(MeasureKind::StdExp));
    CHECK_FALSE(tcp_compatible(MeasureKind::ComboAdd));
    CHECK_FALSE(tcp_compatible(MeasureKind::ComboExp));
}

TEST_CASE("measure names round-trip") {
    const MeasureKind kinds[] = {MeasureKind::Standard, MeasureKind::DistAdd,
                                 MeasureKind::DistExp,  MeasureKind::StdAdd,
                                 MeasureKind::StdExp,   MeasureKind::ComboAdd,
                                 MeasureKind::ComboExp};
    for (MeasureKind k : kinds) CHECK(parse_measure(measure_name(k)) == k);
    CHECK_THROWS_AS(parse_measure("absolute"), std::invalid_argument);
}

TEST_CASE("validate_measure_config rejects bad parameters") {
    MeasureConfig cfg = make(MeasureKind::Standard);
    cfg.gamma = -0.1;
    CHECK_THROWS_AS(validate_measure_config(cfg), std::invalid_argument);
    cfg = make(MeasureKind::ComboExp);
    cfg.rho = -1.0;
    CHECK_THROWS_AS(validate_measure_config(cfg), std::invalid_argument);
    cfg = make(MeasureKind::Standard);
    cfg.k = 0;
    CHECK_THROWS_AS(validate_measure_config(cfg), std::invalid_argument);
}
