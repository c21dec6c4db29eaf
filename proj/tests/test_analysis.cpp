#include "iris/analysis.hpp"
#include "iris/errors.hpp"
#include "iris/rng.hpp"

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

using iris::Errc;
using iris::Error;
using iris::Orientation;
using iris::PairRecord;
using iris::PairStatus;
using iris::PairType;
using iris::ScoreDistribution;

namespace {

ScoreDistribution dist(std::vector<double> scores,
                       Orientation o = Orientation::Distance,
                       PairType t = PairType::ImpostorRR, int bins = 100) {
    return iris::summarize(scores, t, o, bins);
}

// Rank-based AUC with half credit for ties: P(genuine accepted before
// impostor). For distances, smaller genuine scores win.
double mann_whitney_auc(const std::vector<double>& genuine, const std::vector<double>& impostor,
                        Orientation o) {
    double wins = 0;
    for (double g : genuine)
        for (double i : impostor) {
            const bool g_better = o == Orientation::Distance ? g < i : g > i;
            if (g_better)
                wins += 1;
            else if (g == i)
                wins += 0.5;
        }
    return wins / (static_cast<double>(genuine.size()) * impostor.size());
}

std::vector<double> uniform_grid(int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = (i + 0.5) / n;
    return v;
}

PairRecord record(const std::string& a, const std::string& b, double value,
                  Orientation o = Orientation::Distance) {
    PairRecord r;
    r.id_a = a;
    r.id_b = b;
    r.type = PairType::ImpostorRF;
    r.status = PairStatus::Ok;
    r.score.value = value;
    r.score.orientation = o;
    return r;
}

} // namespace

TEST_CASE("summarize computes population moments and interpolated quantiles") {
    const ScoreDistribution d = dist({0.4, 0.1, 0.3, 0.2});
    CHECK(d.mean == doctest::Approx(0.25));
    CHECK(d.stddev == doctest::Approx(std::sqrt(0.0125)));
    REQUIRE(d.scores.size() == 4);
    CHECK(std::is_sorted(d.scores.begin(), d.scores.end()));
    // h = q * (n - 1) order-statistic interpolation
    CHECK(d.quantile(0.0) == doctest::Approx(0.1));
    CHECK(d.quantile(1.0) == doctest::Approx(0.4));
    CHECK(d.quantile(0.5) == doctest::Approx(0.25));
    CHECK(d.quantile(1.0 / 3.0) == doctest::Approx(0.2));
    CHECK(d.quantile(0.25) == doctest::Approx(0.175));
}

TEST_CASE("summarize is permutation invariant") {
    std::vector<double> scores;
    iris::Rng rng(1);
    for (int i = 0; i < 500; ++i) scores.push_back(rng.next_double());
    const ScoreDistribution a = dist(scores);
    std::reverse(scores.begin(), scores.end());
    std::swap(scores[3], scores[97]);
    const ScoreDistribution b = dist(scores);
    CHECK(a.mean == b.mean);
    CHECK(a.stddev == b.stddev);
    CHECK(a.scores == b.scores);
    CHECK(a.counts == b.counts);
    CHECK(a.quantiles == b.quantiles);
}

TEST_CASE("summarize histogram covers the range with equal-width bins") {
    const ScoreDistribution d = dist({0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 1.0},
                                     Orientation::Distance, PairType::ImpostorRR, 5);
    REQUIRE(d.bin_edges.size() == 6);
    REQUIRE(d.counts.size() == 5);
    CHECK(d.bin_edges.front() == doctest::Approx(0.0));
    CHECK(d.bin_edges.back() == doctest::Approx(1.0));
    CHECK(std::accumulate(d.counts.begin(), d.counts.end(), std::int64_t{0}) == 10);
}

TEST_CASE("summarize handles a degenerate single-value distribution") {
    const ScoreDistribution d = dist({0.5, 0.5, 0.5});
    CHECK(d.stddev == 0.0);
    CHECK(std::accumulate(d.counts.begin(), d.counts.end(), std::int64_t{0}) == 3);
}

TEST_CASE("summarize rejects tiny inputs and bad bin counts") {
    CHECK_THROWS_AS(dist({0.5}), Error);
    try {
        dist({0.5});
    } catch (const Error& e) {
        CHECK(e.code() == Errc::InsufficientData);
    }
    CHECK_THROWS_AS(dist({0.1, 0.2}, Orientation::Distance, PairType::Genuine, 0), Error);
}

TEST_CASE("roc reproduces the worked four-score example") {
    const ScoreDistribution genuine = dist({0.1, 0.2}, Orientation::Distance, PairType::Genuine);
    const ScoreDistribution impostor = dist({0.15, 0.3});
    const iris::RocCurve curve = iris::roc(genuine, impostor);
    CHECK(curve.auc == doctest::Approx(0.75).epsilon(1e-12));
    REQUIRE(curve.points.size() >= 2);
    CHECK(curve.points.front().first == doctest::Approx(0.0));
    CHECK(curve.points.back().first == doctest::Approx(1.0));
    for (size_t i = 1; i < curve.points.size(); ++i) {
        CHECK(curve.points[i].first >= curve.points[i - 1].first);
        CHECK(curve.points[i].second >= curve.points[i - 1].second);
    }
}

TEST_CASE("roc AUC equals the rank statistic within 1e-9") {
    iris::Rng rng(7);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> g, m;
        for (int i = 0; i < 200; ++i) g.push_back(0.2 + 0.1 * rng.next_gaussian());
        for (int i = 0; i < 300; ++i) m.push_back(0.45 + 0.03 * rng.next_gaussian());
        // plant exact ties across the classes
        for (int i = 0; i < 10; ++i) m.push_back(g[i]);
        const double auc = iris::roc(dist(g, Orientation::Distance, PairType::Genuine),
                                     dist(m)).auc;
        CHECK(auc == doctest::Approx(mann_whitney_auc(g, m, Orientation::Distance)).epsilon(1e-9));
    }
}

TEST_CASE("roc hits 1.0 on separated data and 0.5 on identical data") {
    const auto g = uniform_grid(50);
    std::vector<double> far_away;
    for (double v : g) far_away.push_back(v + 2.0);
    CHECK(iris::roc(dist(g, Orientation::Distance, PairType::Genuine), dist(far_away)).auc ==
          doctest::Approx(1.0));
    CHECK(iris::roc(dist(g, Orientation::Distance, PairType::Genuine), dist(g)).auc ==
          doctest::Approx(0.5));
}

TEST_CASE("roc in similarity orientation mirrors the distance result") {
    std::vector<double> g{0.9, 0.8}, m{0.85, 0.7};
    const double auc = iris::roc(dist(g, Orientation::Similarity, PairType::Genuine),
                                 dist(m, Orientation::Similarity)).auc;
    CHECK(auc == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("roc rejects mixed orientations") {
    CHECK_THROWS_AS(iris::roc(dist({0.1, 0.2}, Orientation::Distance, PairType::Genuine),
                              dist({0.3, 0.4}, Orientation::Similarity)),
                    Error);
    try {
        iris::roc(dist({0.1, 0.2}, Orientation::Distance, PairType::Genuine),
                  dist({0.3, 0.4}, Orientation::Similarity));
    } catch (const Error& e) {
        CHECK(e.code() == Errc::OrientationError);
    }
}

TEST_CASE("far_thresholds matches the empirical quantile and flags unattainable levels") {
    const ScoreDistribution d = dist(uniform_grid(1000));
    const double levels[] = {1e-2, 1e-3, 1e-4};
    const auto out = iris::far_thresholds(d, levels);
    REQUIRE(out.size() == 3);

    CHECK(out[0].attainable);
    CHECK(out[0].threshold == doctest::Approx(d.quantile(0.01)));
    CHECK(out[0].threshold == doctest::Approx(0.01).epsilon(0.15));

    CHECK(out[1].attainable); // 1e-3 == 1/1000 exactly
    CHECK(out[1].threshold == doctest::Approx(d.quantile(0.001)));

    CHECK_FALSE(out[2].attainable); // below 1/n resolution
    CHECK(out[0].threshold >= out[1].threshold);
}

TEST_CASE("far_thresholds uses the upper tail for similarity scores") {
    const ScoreDistribution d = dist(uniform_grid(1000), Orientation::Similarity);
    const double levels[] = {1e-2};
    const auto out = iris::far_thresholds(d, levels);
    CHECK(out[0].threshold == doctest::Approx(d.quantile(0.99)));
}

TEST_CASE("leakage_heatmap counts scores on or beyond each threshold") {
    std::vector<iris::FarThreshold> thresholds(2);
    thresholds[0] = {1e-2, 0.40, true};
    thresholds[1] = {1e-3, 0.30, true};

    std::map<int, std::vector<double>> rf;
    rf[1] = {0.10, 0.30, 0.40, 0.45}; // 3 at or under 0.40, 2 at or under 0.30
    rf[2] = {0.50, 0.60};             // nothing beyond either threshold
    rf[3] = {};                       // empty snapshot

    const auto hm = iris::leakage_heatmap(rf, thresholds, Orientation::Distance);
    REQUIRE(hm.levels.size() == 2);
    REQUIRE(hm.snapshots == std::vector<int>{1, 2, 3});
    CHECK(hm.cell(0, 0) == doctest::Approx(75.0));
    CHECK(hm.cell(1, 0) == doctest::Approx(50.0));
    CHECK(hm.cell(0, 1) == doctest::Approx(0.0));
    CHECK(hm.empty_cell[0 * 3 + 2] == 1);
    CHECK(hm.empty_cell[0 * 3 + 0] == 0);
    CHECK(hm.cell(0, 2) == doctest::Approx(0.0));

    // a stricter FAR level can never flag more
    for (size_t col = 0; col < 3; ++col) CHECK(hm.cell(0, col) >= hm.cell(1, col));
}

TEST_CASE("leakage_heatmap skips unattainable rows") {
    std::vector<iris::FarThreshold> thresholds(2);
    thresholds[0] = {1e-2, 0.40, true};
    thresholds[1] = {1e-6, 0.0, false};
    std::map<int, std::vector<double>> rf;
    rf[1] = {0.1};
    const auto hm = iris::leakage_heatmap(rf, thresholds, Orientation::Distance);
    REQUIRE(hm.levels.size() == 1);
    CHECK(hm.levels[0] == doctest::Approx(1e-2));
}

TEST_CASE("flag_leaks is inclusive at the threshold and sorts by severity") {
    std::vector<PairRecord> records;
    records.push_back(record("r1", "f1", 0.30));
    records.push_back(record("r2", "f2", 0.10));
    records.push_back(record("r3", "f3", 0.20));
    records.push_back(record("r4", "f4", 0.31));
    PairRecord broken = record("r5", "f5", 0.0);
    broken.status = PairStatus::InsufficientOverlap;
    records.push_back(broken);

    const auto flags = iris::flag_leaks(records, 0.30, Orientation::Distance);
    REQUIRE(flags.size() == 3);
    CHECK(flags[0].id_a == "r2");
    CHECK(flags[0].margin == doctest::Approx(0.20));
    CHECK(flags[1].id_a == "r3");
    CHECK(flags[2].id_a == "r1");
    CHECK(flags[2].margin == doctest::Approx(0.0));
}

TEST_CASE("flag_leaks respects similarity orientation") {
    std::vector<PairRecord> records;
    records.push_back(record("a", "b", 0.90, Orientation::Similarity));
    records.push_back(record("c", "d", 0.50, Orientation::Similarity));
    const auto flags = iris::flag_leaks(records, 0.80, Orientation::Similarity);
    REQUIRE(flags.size() == 1);
    CHECK(flags[0].id_a == "a");
    CHECK(flags[0].margin == doctest::Approx(0.10));
}

TEST_CASE("diff_image reports absolute differences") {
    iris::GrayImage a(2, 2), b(2, 2);
    a << 10, 20, 30, 40;
    b << 15, 20, 10, 240;
    iris::DiffSummary summary;
    const iris::GrayImage d = iris::diff_image(a, b, &summary);
    CHECK(d(0, 0) == 5);
    CHECK(d(0, 1) == 0);
    CHECK(d(1, 0) == 20);
    CHECK(d(1, 1) == 200);
    CHECK(summary.max_abs == doctest::Approx(200));
    CHECK(summary.mean_abs == doctest::Approx((5 + 0 + 20 + 200) / 4.0));

    iris::GrayImage c(3, 2);
    CHECK_THROWS_AS(iris::diff_image(a, c), Error);
}

TEST_CASE("estimate_dof reproduces the binomial identity") {
    // analytic case: p = 0.5, sigma = 0.0353 -> ~200.6 effective bits
    std::vector<double> two{0.5 - 0.0353, 0.5 + 0.0353};
    const auto est = iris::estimate_dof(dist(two));
    CHECK(est.p == doctest::Approx(0.5));
    CHECK(est.sigma == doctest::Approx(0.0353));
    CHECK(est.n_dof == doctest::Approx(200.627).epsilon(1e-3));
}

TEST_CASE("estimate_dof recovers n on simulated binomial scores") {
    iris::Rng rng(42);
    const int n = 200, draws = 10000;
    std::vector<double> scores;
    scores.reserve(draws);
    for (int d = 0; d < draws; ++d) {
        int ones = 0;
        for (int i = 0; i < n; ++i) ones += rng.next_u64() & 1;
        scores.push_back(static_cast<double>(ones) / n);
    }
    const auto est = iris::estimate_dof(dist(scores));
    CHECK(est.n_dof > 185.0);
    CHECK(est.n_dof < 215.0);

    // quadrupling the variance halves the effective bit count twice over
    std::vector<double> wide;
    for (double s : scores) wide.push_back(0.5 + 2.0 * (s - 0.5));
    const auto est2 = iris::estimate_dof(dist(wide));
    CHECK(est2.n_dof == doctest::Approx(est.n_dof / 4.0).epsilon(1e-4));
}

TEST_CASE("estimate_dof rejects degenerate and misoriented input") {
    CHECK_THROWS_AS(iris::estimate_dof(dist({0.5, 0.5, 0.5})), Error);
    try {
        iris::estimate_dof(dist({0.5, 0.5}));
    } catch (const Error& e) {
        CHECK(e.code() == Errc::DegenerateDistribution);
    }
    CHECK_THROWS_AS(iris::estimate_dof(dist({0.4, 0.6}, Orientation::Similarity)), Error);
}

TEST_CASE("distribution_shift detects planted tail mass") {
    iris::Rng rng(9);
    std::vector<double> rr, rf;
    for (int i = 0; i < 2000; ++i) rr.push_back(0.45 + 0.02 * rng.next_gaussian());
    for (int i = 0; i < 1900; ++i) rf.push_back(0.45 + 0.02 * rng.next_gaussian());
    for (int i = 0; i < 100; ++i) rf.push_back(0.05 + 0.01 * rng.next_double());

    const auto shift = iris::distribution_shift(dist(rr), dist(rf));
    CHECK(shift.ks_statistic > 0.01);
    CHECK(shift.extreme_quantile_delta > 0.3);

    const auto null_shift = iris::distribution_shift(dist(rr), dist(rr));
    CHECK(null_shift.ks_statistic == doctest::Approx(0.0));
    CHECK(std::abs(null_shift.extreme_quantile_delta) < 1e-12);
}

TEST_CASE("distribution_shift on disjoint supports saturates at one") {
    std::vector<double> lo = uniform_grid(200);
    std::vector<double> hi;
    for (double v : lo) hi.push_back(v + 5);
    const auto s = iris::distribution_shift(dist(hi), dist(lo));
    CHECK(s.ks_statistic == doctest::Approx(1.0));
}

TEST_CASE("distribution_shift needs 100 scores per side") {
    const auto good = uniform_grid(100);
    const auto bad = uniform_grid(99);
    CHECK_NOTHROW(iris::distribution_shift(dist(good), dist(good)));
    CHECK_THROWS_AS(iris::distribution_shift(dist(good), dist(bad)), Error);
    try {
        iris::distribution_shift(dist(good), dist(bad));
    } catch (const Error& e) {
        CHECK(e.code() == Errc::InsufficientData);
    }
}
