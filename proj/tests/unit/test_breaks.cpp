#include "wikimig/breaks.hpp"

#include "../oracles.hpp"
#include "support.hpp"

using namespace testing;
using namespace wikimig;

namespace {

std::vector<double> ar1(std::mt19937_64& rng, std::size_t n, double phi, double sd = 1.0) {
    std::normal_distribution<double> e(0.0, sd);
    std::vector<double> y(n);
    double prev = 0.0;
    for (auto& v : y) {
        v = phi * prev + e(rng);
        prev = v;
    }
    return y;
}

/// Total RSS of a partition, summed left to right like the DP.
double partition_rss(const std::vector<double>& y, const std::vector<std::size_t>& breaks) {
    double total = 0.0;
    std::size_t start = 1;
    for (std::size_t k = 0; k <= breaks.size(); ++k) {
        const std::size_t end = k < breaks.size() ? breaks[k] - 1 : y.size() - 1;
        total += breaks::segment_rss(y, start, end).rss;
        start = end + 1;
    }
    return total;
}

}  // namespace

TEST_CASE("segment_rss: exact AR(1) fit, constant fallback, normal-equation oracle") {
    std::vector<double> y{1.0};
    for (int t = 1; t < 30; ++t) y.push_back(0.5 * y.back() + 2.0);
    auto fit = breaks::segment_rss(y, 1, 29);
    CHECK(fit.rss == 0.0);
    CHECK(fit.ar1 == doctest::Approx(0.5));
    CHECK(fit.intercept == doctest::Approx(2.0));

    const std::vector<double> flat(20, 3.0);
    fit = breaks::segment_rss(flat, 1, 19);
    CHECK(fit.rss == 0.0);
    CHECK(fit.intercept_only);

    std::mt19937_64 rng(23);
    for (int rep = 0; rep < 100; ++rep) {
        const auto z = normals(rng, 21);
        const auto got = breaks::segment_rss(z, 1, 20).rss;
        const auto want = static_cast<double>(oracle::ar1_segment_rss(z, 1, 20));
        CHECK(got == doctest::Approx(want).epsilon(1e-10));
    }
    CHECK(code_of([&] { breaks::segment_rss(y, 0, 10); }) == ErrorCode::Precondition);
    CHECK(code_of([&] { breaks::segment_rss(y, 5, 7); }) == ErrorCode::Precondition);
}

TEST_CASE("dynamic programme equals exhaustive enumeration for one and two breaks") {
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 40; ++rep) {
        const std::size_t n = 30 + static_cast<std::size_t>(rep % 31);
        auto y = ar1(rng, n, 0.4);
        if (rep % 2) {
            for (std::size_t t = n / 2; t < n; ++t) y[t] += 3.0;
        }
        breaks::BreakModel model;
        model.max_breaks = 2;
        const auto parts = breaks::optimal_partition(y, model);
        const std::size_t T = n - 1;
        const std::size_t h = breaks::min_segment_length(T, model.min_segment_frac);
        for (std::size_t m = 1; m <= 2; ++m) {
            double best = std::numeric_limits<double>::infinity();
            std::vector<std::size_t> arg;
            for (const auto& set : oracle::all_break_sets(T, h, m)) {
                const double v = partition_rss(y, set);
                if (v < best) {
                    best = v;
                    arg = set;
                }
            }
            CHECK(parts[m].rss == best);
            CHECK(parts[m].breaks == arg);
        }
    }
}

TEST_CASE("partition RSS is non-increasing wherever a split is admissible, and respects trimming") {
    std::mt19937_64 rng(37);
    for (int rep = 0; rep < 10; ++rep) {
        const auto y = ar1(rng, 200, 0.3);
        breaks::BreakModel model;
        const auto parts = breaks::optimal_partition(y, model);
        const std::size_t h = breaks::min_segment_length(199, model.min_segment_frac);
        for (std::size_t m = 1; m < parts.size(); ++m) {
            // splitting any segment of length >= 2h of the (m-1)-break optimum is feasible
            bool refinable = false;
            std::size_t s0 = 1;
            for (std::size_t k = 0; k <= parts[m - 1].breaks.size(); ++k) {
                const std::size_t e = k < parts[m - 1].breaks.size() ? parts[m - 1].breaks[k] : 200;
                refinable = refinable || e - s0 >= 2 * h;
                s0 = e;
            }
            if (refinable) CHECK(parts[m].rss <= parts[m - 1].rss);
            std::size_t start = 1;
            for (auto b : parts[m].breaks) {
                CHECK(b - start >= h);
                start = b;
            }
            CHECK(199 + 1 - start >= h);
        }
        CHECK(parts[1].rss <= parts[0].rss);
    }
}

TEST_CASE("a noiseless intercept jump is located exactly") {
    std::vector<double> y(200, 1.0);
    for (std::size_t t = 100; t < y.size(); ++t) y[t] = 5.0;
    breaks::BreakModel model;
    model.max_breaks = 2;
    const auto parts = breaks::optimal_partition(y, model);
    REQUIRE(parts[1].breaks.size() == 1);
    CHECK(parts[1].breaks[0] == 100);
    CHECK(parts[1].rss == 0.0);
}

TEST_CASE("BIC conventions") {
    CHECK(breaks::bic(0.0, 100, 1) == -std::numeric_limits<double>::infinity());
    CHECK(breaks::bic(50.0, 100, 0) == doctest::Approx(100 * std::log(0.5) + 2 * std::log(100.0)));
    std::vector<breaks::Partition> parts{{0, {}, 10.0}, {1, {50}, 0.0}, {2, {30, 60}, 0.0}};
    CHECK(breaks::select_n_breaks(parts, 100) == 1);
}

TEST_CASE("infeasible trimming") {
    const std::vector<double> y(30, 1.0);
    breaks::BreakModel model;
    model.max_breaks = 8;
    CHECK(code_of([&] { breaks::optimal_partition(y, model); }) == ErrorCode::InfeasibleConfiguration);
    model.max_breaks = 1;
    model.min_segment_frac = 0.7;
    CHECK(code_of([&] { breaks::optimal_partition(y, model); }) == ErrorCode::InfeasibleConfiguration);
}

TEST_CASE("white noise mostly selects no break") {
    std::mt19937_64 rng(41);
    int zero = 0;
    for (int rep = 0; rep < 30; ++rep) {
        const auto y = normals(rng, 400);
        if (breaks::detect_breaks(y, {}).n_breaks_selected == 0) ++zero;
    }
    CHECK(zero >= 27);
}

TEST_CASE("constant series gives zero breaks") {
    const std::vector<double> y(100, 0.25);
    CHECK(breaks::detect_breaks(y, {}).n_breaks_selected == 0);
}

TEST_CASE("two separated shifts are found") {
    std::mt19937_64 rng(43);
    int two = 0;
    for (int rep = 0; rep < 10; ++rep) {
        auto y = ar1(rng, 450, 0.3);
        for (std::size_t t = 150; t < 300; ++t) y[t] += 6.0;
        for (std::size_t t = 300; t < 450; ++t) y[t] -= 6.0;
        if (breaks::detect_breaks(y, {}).n_breaks_selected == 2) ++two;
    }
    CHECK(two >= 6);
}

TEST_CASE("confidence interval: collapses on a perfect break, contains the estimate, NA at the boundary") {
    std::mt19937_64 rng(47);
    std::vector<double> y = ar1(rng, 300, 0.5, 0.01);
    for (std::size_t t = 150; t < 300; ++t) y[t] += 10.0;
    const auto report = breaks::detect_breaks(y, {});
    REQUIRE(report.n_breaks_selected >= 1);
    REQUIRE(report.breaks.front().ci.has_value());
    CHECK(report.breaks.front().ci->lower == report.breaks.front().index);
    CHECK(report.breaks.front().ci->upper == report.breaks.front().index);

    for (int rep = 0; rep < 20; ++rep) {
        auto z = ar1(rng, 300, 0.5);
        for (std::size_t t = 150; t < 300; ++t) z[t] += 2.0;
        for (const auto& b : breaks::detect_breaks(z, {}).breaks) {
            if (!b.ci) continue;
            CHECK(b.ci->lower <= b.index);
            CHECK(b.index <= b.ci->upper);
        }
    }

    // a flat profile spreads to the admissible boundary
    std::vector<double> exact{1.0};
    for (int t = 1; t < 200; ++t) exact.push_back(0.5 * exact.back() + 2.0);
    const std::vector<std::size_t> mid{100};
    CHECK_FALSE(breaks::break_confidence_interval(exact, mid, 0, {}));

    // a profile that is minimal on the first admissible date
    const std::size_t h = breaks::min_segment_length(199, 0.15);
    std::vector<double> edge = ar1(rng, 200, 0.5, 0.01);
    for (std::size_t t = 1 + h; t < 200; ++t) edge[t] += 10.0;
    const std::vector<std::size_t> at_edge{1 + h};
    CHECK_FALSE(breaks::break_confidence_interval(edge, at_edge, 0, {}));
}

TEST_CASE("break placement is invariant under positive affine maps") {
    std::mt19937_64 rng(53);
    for (int rep = 0; rep < 10; ++rep) {
        auto y = ar1(rng, 240, 0.4);
        for (std::size_t t = 120; t < 240; ++t) y[t] += 2.5;
        std::vector<double> z(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) z[i] = 7.0 * y[i] + 100.0;
        breaks::BreakModel model;
        model.max_breaks = 3;
        const auto a = breaks::optimal_partition(y, model);
        const auto b = breaks::optimal_partition(z, model);
        for (std::size_t m = 0; m < a.size(); ++m) CHECK(a[m].breaks == b[m].breaks);
    }
}

TEST_CASE("detect_breaks on a share series reports calendar dates") {
    std::mt19937_64 rng(59);
    std::normal_distribution<double> e(0.0, 1e-5);
    metrics::ProportionSeries s;
    s.granularity = ts::Granularity::daily();
    s.key = {"uk.wikipedia.org", "Test"};
    const auto d0 = ts::make_day(2022, 1, 1);
    for (int i = 0; i < 120; ++i) {
        const double level = i < 54 ? 1e-4 : 5e-4;
        metrics::SharePoint p{d0 + std::chrono::days{i}, std::max(0.0, level + e(rng)), false};
        if (i == 10) p.share.reset();  // a gap is skipped, not zero-filled
        s.points.push_back(p);
    }
    const auto report = breaks::detect_breaks(s, {});
    REQUIRE(report.n_breaks_selected >= 1);
    bool near = false;
    for (const auto& b : report.breaks) {
        REQUIRE(b.date.has_value());
        if (std::abs(ts::days_between(d0 + std::chrono::days{54}, *b.date)) <= 5) near = true;
        if (b.ci_lower) CHECK(*b.ci_lower <= *b.date);
        if (b.ci_upper) CHECK(*b.date <= *b.ci_upper);
    }
    CHECK(near);
    CHECK(report.series_key == "uk.wikipedia.org/Test");
}
