#include <numeric>

#include "../oracles.hpp"
#include "support.hpp"

using namespace testing;
using ts::make_day;

TEST_CASE("dates parse and print in both layouts") {
    const auto d = ts::parse_iso_day("2022-02-24");
    CHECK(d == make_day(2022, 2, 24));
    CHECK(ts::to_iso(d) == "2022-02-24");
    CHECK(ts::to_compact(d) == "20220224");
    CHECK(ts::parse_compact_day("2022022400") == d);
    CHECK(ts::parse_compact_day("20220224") == d);
    CHECK(ts::year_of(d) == 2022);
    CHECK(ts::days_between(make_day(2022, 1, 1), make_day(2023, 1, 1)) == 365);
    CHECK(code_of([] { ts::parse_iso_day("2022-02-30"); }) == ErrorCode::Format);
    CHECK(code_of([] { ts::parse_iso_day("22-2-4"); }) == ErrorCode::Format);
}

TEST_CASE("DailySeries enforces its invariants") {
    const auto d = make_day(2022, 1, 1);
    CHECK(code_of([&] { ts::DailySeries("x", {{d, 1.0}, {d, 2.0}}); }) == ErrorCode::Validation);
    CHECK(code_of([&] { ts::DailySeries("x", {{d + std::chrono::days{1}, 1.0}, {d, 2.0}}); }) == ErrorCode::Validation);
    CHECK(code_of([&] { ts::DailySeries("x", {{d, -1.0}}); }) == ErrorCode::Validation);
    CHECK(code_of([&] { ts::DailySeries("x", {{d, std::nan("")}}); }) == ErrorCode::Validation);

    // gaps are allowed and stay distinct from zeros
    ts::DailySeries s("x", {{d, 0.0}, {d + std::chrono::days{2}, 3.0}});
    CHECK(s.value_at(d) == 0.0);
    CHECK_FALSE(s.value_at(d + std::chrono::days{1}).has_value());
    CHECK(s.total() == 3.0);
    CHECK(s.slice(d + std::chrono::days{1}, d + std::chrono::days{5}).size() == 1);
}

TEST_CASE("weekly sum of 14 ones gives two sevens") {
    const auto s = daily("x", make_day(2022, 3, 1), std::vector<double>(14, 1.0));
    const auto w = ts::aggregate(s, ts::Granularity::weekly());
    REQUIRE(w.size() == 2);
    CHECK(w.points()[0].value == 7.0);
    CHECK(w.points()[1].value == 7.0);
    CHECK(w.points()[0].date == make_day(2022, 3, 1));
    CHECK(w.points()[1].date == make_day(2022, 3, 8));
}

TEST_CASE("daily granularity is the identity") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0, 100);
    std::vector<double> v(40);
    for (auto& x : v) x = u(rng);
    const auto s = daily("x", make_day(2021, 12, 20), v);
    CHECK(ts::aggregate(s, ts::Granularity::daily()) == s);
}

TEST_CASE("monthly sums match a (year, month) grouping oracle") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0, 1000);
    std::vector<double> v(60);
    for (auto& x : v) x = std::round(u(rng) * 100) / 100;
    const auto s = daily("x", make_day(2022, 1, 17), v);
    std::vector<std::pair<std::string, double>> rows;
    for (const auto& p : s.points()) rows.push_back({ts::to_iso(p.date), p.value});
    const auto expect = oracle::group_by_month(rows);

    const auto m = ts::aggregate(s, ts::Granularity::monthly());
    REQUIRE(m.size() == expect.size());
    std::size_t i = 0;
    for (const auto& [ym, total] : expect) {
        const auto& p = m.points()[i++];
        CHECK(p.date == make_day(ym.first, static_cast<unsigned>(ym.second), 1));
        CHECK(p.value == doctest::Approx(total).epsilon(1e-12));
    }
}

TEST_CASE("sum aggregation conserves mass for every granularity") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 50);
    std::bernoulli_distribution keep(0.85);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<ts::Point> pts;
        auto d = make_day(2020, 11, 3) + std::chrono::days{rep * 5};
        for (int i = 0; i < 500; ++i, d += std::chrono::days{1}) {
            if (keep(rng)) pts.push_back({d, std::round(u(rng))});
        }
        const ts::DailySeries s("x", pts);
        for (auto g : {ts::Granularity::daily(), ts::Granularity::weekly(), ts::Granularity::monthly(),
                       ts::Granularity::yearly()}) {
            CHECK(ts::aggregate(s, g).total() == doctest::Approx(s.total()).epsilon(1e-12));
        }
    }
}

TEST_CASE("partial buckets are flagged and mean averages present days") {
    const auto d = make_day(2022, 1, 3);
    ts::DailySeries s("x", {{d, 2.0}, {d + std::chrono::days{1}, 4.0}, {d + std::chrono::days{7}, 1.0}});
    const auto buckets = ts::aggregate_buckets(s, ts::Granularity::weekly(d), ts::AggregatePolicy::Mean);
    REQUIRE(buckets.size() == 2);
    CHECK(buckets[0].value == 3.0);
    CHECK(buckets[0].present_days == 2);
    CHECK(buckets[0].partial());
    CHECK(buckets[1].span_days == 7);
}

TEST_CASE("weekly anchor after the first date is a configuration error") {
    const auto s = daily("x", make_day(2022, 1, 1), std::vector<double>(10, 1.0));
    CHECK(code_of([&] { ts::aggregate(s, ts::Granularity::weekly(make_day(2022, 1, 5))); }) ==
          ErrorCode::Configuration);
    CHECK(ts::aggregate(ts::DailySeries{}, ts::Granularity::weekly()).empty());
}

TEST_CASE("align keeps the date intersection") {
    const auto a = daily("a", make_day(2022, 1, 1), std::vector<double>(31, 1.0));
    const auto b = daily("b", make_day(2022, 1, 15), std::vector<double>(32, 2.0));
    const auto p = ts::align(a, b);
    CHECK(p.size() == 17);
    CHECK(p.dates.front() == make_day(2022, 1, 15));
    CHECK(p.dates.back() == make_day(2022, 1, 31));
    CHECK(ts::align(b, a).dates == p.dates);
    CHECK(ts::align(a, a).size() == 31);

    const auto c = daily("c", make_day(2023, 1, 1), {1.0});
    CHECK(code_of([&] { ts::align(a, c); }) == ErrorCode::AlignmentEmpty);
}

TEST_CASE("lag_shift") {
    const std::vector<double> x{1, 2, 3, 4};
    auto [lagged, now] = ts::lag_shift(x, 1);
    CHECK(lagged == std::vector<double>{1, 2, 3});
    CHECK(now == std::vector<double>{2, 3, 4});
    auto [l0, n0] = ts::lag_shift(x, 0);
    CHECK(l0 == x);
    CHECK(n0 == x);
    for (std::size_t k = 0; k < x.size(); ++k) CHECK(ts::lag_shift(x, k).first.size() == x.size() - k);
    const std::vector<double> five{1, 2, 3, 4, 5};
    CHECK(code_of([&] { ts::lag_shift(five, 5); }) == ErrorCode::InsufficientData);
}
