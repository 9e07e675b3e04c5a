#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "doctest.h"
#include "support/metrics_oracle.hpp"

#include "canopy/metrics/calibration.hpp"
#include "canopy/numerics/error.hpp"
#include "canopy/metrics/errors.hpp"
#include "canopy/metrics/filtering.hpp"
#include "canopy/metrics/tables.hpp"

using namespace canopy;
using namespace canopy::metrics;

namespace {

std::vector<EvalPair> pairs_of(std::vector<double> pred, std::vector<double> ref, double u = 1.0) {
    std::vector<EvalPair> out;
    for (std::size_t i = 0; i < pred.size(); ++i) out.push_back({pred[i], ref[i], u});
    return out;
}

/// y = yhat + eps, eps ~ N(0, u), with u varying across pairs.
std::vector<EvalPair> calibrated(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> h(0.0, 40.0), lu(std::log(1.0), std::log(100.0));
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<EvalPair> out(n);
    for (auto& p : out) {
        p.uncertainty = std::exp(lu(rng));
        p.prediction = h(rng);
        p.reference = std::max(0.0, p.prediction + std::sqrt(p.uncertainty) * z(rng));
    }
    return out;
}

std::vector<EvalPair> random_pairs(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> h(0.0, 50.0), e(-8.0, 6.0), u(0.1, 60.0);
    std::vector<EvalPair> out(n);
    for (auto& p : out) {
        p.reference = h(rng);
        p.prediction = p.reference + e(rng);
        p.uncertainty = u(rng);
    }
    return out;
}

}  // namespace

TEST_CASE("perfect predictions have zero error") {
    const auto m = error_metrics(pairs_of({1, 5, 20}, {1, 5, 20}));
    CHECK(m.rmse == 0.0);
    CHECK(m.me == 0.0);
    CHECK(m.mae == 0.0);
}

TEST_CASE("hand-worked error examples") {
    auto p = pairs_of({2, 4}, {1, 2});
    CHECK(me(p) == 1.5);
    CHECK(mae(p) == 1.5);
    CHECK(rmse(p) == std::sqrt(5.0 / 2.0));
    p = pairs_of({0, 2}, {1, 1});
    CHECK(me(p) == 0.0);
    CHECK(mae(p) == 1.0);
    CHECK(rmse(p) == 1.0);
    CHECK_THROWS_AS(error_metrics({}), Error);
}

TEST_CASE("metrics match two-pass oracles on 1e5 random pairs") {
    const auto p = random_pairs(100000, 1);
    const auto m = error_metrics(p);
    const auto o = testing::oracle_errors(p);
    CHECK(testing::rel_diff(m.rmse, o.rmse) < 1e-9);
    CHECK(testing::rel_diff(m.me, o.me) < 1e-9);
    CHECK(testing::rel_diff(m.mae, o.mae) < 1e-9);
    CHECK(testing::rel_diff(m.rmv, o.rmv) < 1e-9);
    const auto b = balanced_metrics(p);
    const auto ob = testing::oracle_balanced(p);
    CHECK(testing::rel_diff(b.armse, ob.armse) < 1e-9);
    CHECK(testing::rel_diff(b.ame, ob.ame) < 1e-9);
    CHECK(testing::rel_diff(b.amae, ob.amae) < 1e-9);
    const auto c = calibration(p, 20);
    const auto oc = testing::oracle_calibration(p, 20);
    CHECK(testing::rel_diff(c.uce, oc.uce) < 1e-9);
    CHECK(testing::rel_diff(c.auce, oc.auce) < 1e-9);
}

TEST_CASE("error inequalities hold") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto m = error_metrics(random_pairs(1 + s * 7, s));
        CHECK(m.rmse >= std::fabs(m.me));
        CHECK(m.mae >= std::fabs(m.me));
        CHECK(m.rmse >= m.mae * (1 - 1e-12));
    }
}

TEST_CASE("balanced metrics average bins with equal weight") {
    // bin [0,5): errors +-2 -> rmse 2; bin [10,15): errors +-4, many pairs -> rmse 4
    std::vector<EvalPair> p = {{3, 1, 1}, {0, 2, 1}};
    for (int i = 0; i < 50; ++i) {
        p.push_back({16, 12, 1});
        p.push_back({8, 12, 1});
    }
    const auto b = balanced_metrics(p);
    CHECK(b.armse == 3.0);
    CHECK(b.ame == 0.0);
    REQUIRE(b.bins.size() == 2);
    CHECK(b.bins[0].lower == 0.0);
    CHECK(b.bins[0].upper == 5.0);
    CHECK(b.bins[1].lower == 10.0);
    CHECK(std::isinf(b.bins[1].upper));
    CHECK(b.bins[0].metrics.count + b.bins[1].metrics.count == p.size());
}

TEST_CASE("balanced equals plain metrics within one bin and ignores duplication") {
    const auto p = pairs_of({1, 2.5, 4.9, 3}, {0.5, 4.0, 1.0, 2.0});
    const auto b = balanced_metrics(p);
    const auto m = error_metrics(p);
    CHECK(b.armse == m.rmse);
    CHECK(b.ame == m.me);
    CHECK(b.amae == m.mae);

    auto q = random_pairs(500, 3);
    const auto before = balanced_metrics(q);
    const std::size_t n = q.size();
    for (std::size_t i = 0; i < n; ++i) q.push_back(q[i]);
    const auto after = balanced_metrics(q);
    CHECK(after.armse == doctest::Approx(before.armse).epsilon(1e-12));
    CHECK(after.ame == doctest::Approx(before.ame).epsilon(1e-12));
    CHECK(after.amae == doctest::Approx(before.amae).epsilon(1e-12));
}

TEST_CASE("balanced bins are half-open at 5 m edges") {
    const auto b = balanced_metrics(pairs_of({5, 4.999}, {5, 4.999}));
    REQUIRE(b.bins.size() == 2);
    CHECK(b.bins[0].lower == 0.0);
    CHECK(b.bins[1].lower == 5.0);
    CHECK_THROWS_AS(balanced_metrics(pairs_of({1}, {-1})), Error);
}

TEST_CASE("calibrated data has small calibration error") {
    const auto p = calibrated(100000, 4);
    const auto c = calibration(p, 20);
    CHECK(c.uce < 0.3);
    std::size_t total = 0;
    for (const auto& b : c.bins) total += b.count;
    CHECK(total == p.size());
    CHECK(c.bins.size() == 20);
    for (std::size_t k = 1; k < c.bins.size(); ++k) CHECK(c.bins[k].lower == doctest::Approx(c.bins[k - 1].upper));
}

TEST_CASE("doubling every predicted variance is detected") {
    auto p = calibrated(20000, 5);
    const double before = calibration(p, 20).uce;
    for (auto& x : p) x.uncertainty *= 2.0;
    CHECK(calibration(p, 20).uce > before + 0.5);
}

TEST_CASE("zero uncertainty and zero error gives zero calibration error") {
    const auto c = calibration(pairs_of({1, 2, 3}, {1, 2, 3}, 0.0), 20);
    CHECK(c.uce == 0.0);
    CHECK(c.auce == 0.0);
    CHECK(c.bins[0].count == 3);
}

TEST_CASE("one bin gives the overall RMSE-RMV gap") {
    const auto p = random_pairs(1000, 6);
    const auto m = error_metrics(p);
    const auto c = calibration(p, 1);
    CHECK(c.uce == doctest::Approx(std::fabs(m.rmse - m.rmv)).epsilon(1e-12));
    CHECK(c.auce == doctest::Approx(c.uce).epsilon(1e-12));
}

TEST_CASE("empty calibration bins are excluded from the unweighted average") {
    // u in {1, 100}: with 3 bins the middle one is empty
    std::vector<EvalPair> p = {{0, 2, 1}, {0, 0, 1}, {0, 10, 100}, {0, -10, 100}};
    const auto c = calibration(p, 3);
    CHECK(c.bins[1].count == 0);
    // bin 0: rmse sqrt(2), rmv 1; bin 2: rmse 10, rmv 10
    CHECK(c.auce == doctest::Approx((std::sqrt(2.0) - 1.0) / 2.0));
    CHECK(c.uce == doctest::Approx((std::sqrt(2.0) - 1.0) / 2.0));
}

TEST_CASE("equal-population bins hold near-equal counts") {
    const auto p = random_pairs(1003, 7);
    const auto c = calibration(p, 10, BinMode::equal_population);
    for (const auto& b : c.bins) {
        CHECK(b.count >= 100);
        CHECK(b.count <= 101);
    }
    for (std::size_t k = 1; k < c.bins.size(); ++k) CHECK(c.bins[k].lower >= c.bins[k - 1].upper);
}

TEST_CASE("calibration argument checks") {
    CHECK_THROWS_AS(calibration({}, 20), Error);
    CHECK_THROWS_AS(calibration(pairs_of({1}, {1}), 0), Error);
    CHECK_THROWS_AS(calibration(pairs_of({1}, {1}, -1.0), 5), Error);
}

TEST_CASE("filtering curve: zero fraction reproduces the unfiltered metrics") {
    const auto p = random_pairs(300, 8);
    const std::vector<double> f = {0.0};
    const auto c = filtering_curve(p, f);
    const auto m = error_metrics(p);
    CHECK(c[0].removed == 0);
    CHECK(c[0].metrics.rmse == m.rmse);
    CHECK(c[0].metrics.me == m.me);
}

TEST_CASE("filtering drops the most uncertain pairs with ties broken by input order") {
    std::vector<EvalPair> p = {{1, 0, 5}, {2, 0, 9}, {3, 0, 9}, {4, 0, 1}};
    const std::vector<double> f = {0.25, 0.5};
    const auto c = filtering_curve(p, f);
    // 0.25: drops the later of the two 9s, (3) -> remaining errors 1,2,4
    CHECK(c[0].removed == 1);
    CHECK(c[0].metrics.me == doctest::Approx(7.0 / 3.0));
    // 0.5: drops both 9s
    CHECK(c[1].metrics.me == doctest::Approx(2.5));
    CHECK_THROWS_AS(filtering_curve(p, std::vector<double>{1.0}), Error);
    CHECK_THROWS_AS(filtering_curve(p, std::vector<double>{-0.1}), Error);
}

TEST_CASE("filtering calibrated data lowers RMSE") {
    const auto p = calibrated(5000, 9);
    const auto c = filtering_curve(p, default_filter_fractions());
    REQUIRE(c.size() == 20);
    int rises = 0;
    for (std::size_t i = 1; i < c.size(); ++i)
        if (c[i].metrics.rmse > c[i - 1].metrics.rmse) ++rises;
    CHECK(rises <= 1);
    CHECK(c[4].fraction == doctest::Approx(0.2));
    CHECK(c[4].metrics.rmse < c[0].metrics.rmse);
}

TEST_CASE("report tables have the documented columns") {
    const auto r = evaluate_pairs(random_pairs(400, 10));
    const std::string text = report_to_text(r);
    CHECK(text.find("# summary\nn\trmse\tme\tmae\trmv\tarmse\tame\tamae\tuce\tauce\n") == 0);
    CHECK(text.find("\n# height_bins\nlower\tupper\tn\trmse\tme\tmae\trmv\n") != std::string::npos);
    CHECK(text.find("\n# calibration\nlower\tupper\tn\trmse\tme\tmae\trmv\n") != std::string::npos);
    CHECK(text.find("\n# filtering\nfraction\tretained_pct\tn\trmse\tme\tmae\n") != std::string::npos);
    CHECK(text.find("inf") != std::string::npos);
    // one row per calibration bin
    const auto cal = text.find("# calibration");
    const auto fil = text.find("# filtering");
    const auto block = text.substr(cal, fil - cal);
    CHECK(std::count(block.begin(), block.end(), '\n') == 2 + 20 + 1);
}

TEST_CASE("perfect predictions report zero RMSE") {
    const auto r = evaluate_pairs(pairs_of({1, 2, 3, 30}, {1, 2, 3, 30}, 0.5));
    CHECK(r.overall.rmse == 0.0);
    CHECK(report_to_text(r).find("\n4\t0\t0\t0\t") != std::string::npos);
}
