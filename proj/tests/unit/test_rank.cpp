#include "wikimig/rank.hpp"

#include "../oracles.hpp"
#include "support.hpp"
#include "wikimig/ground_truth.hpp"

using namespace testing;
using namespace wikimig;

TEST_CASE("average ranks") {
    const std::vector<double> x{10, 20, 20, 5};
    CHECK(rank::average_ranks(x) == std::vector<double>{2, 3.5, 3.5, 1});
}

TEST_CASE("spearman: identity, reversal and the worked example") {
    const std::vector<double> a{1, 2, 3, 4, 5};
    CHECK(rank::spearman(a, a).coefficient == 1.0);
    CHECK(rank::spearman(a, a).p_value == 0.0);
    const std::vector<double> rev{5, 4, 3, 2, 1};
    CHECK(rank::spearman(a, rev).coefficient == -1.0);

    const std::vector<double> b{3, 1, 2, 5, 4};
    const auto r = rank::spearman(a, b);
    CHECK(r.coefficient == doctest::Approx(static_cast<double>(oracle::spearman(a, b))).epsilon(1e-12));
    CHECK(r.coefficient == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(r.p_value > 0.0);
    CHECK(r.p_value < 1.0);
}

TEST_CASE("spearman agrees with the definitional oracle on tied integer data") {
    std::mt19937_64 rng(101);
    for (int rep = 0; rep < 300; ++rep) {
        const std::size_t n = 3 + rep % 10;
        std::uniform_int_distribution<int> u(0, static_cast<int>(n) / 2 + 1);
        std::vector<double> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = u(rng);
            b[i] = u(rng);
        }
        const auto ra = rank::average_ranks(a);
        const auto rb = rank::average_ranks(b);
        auto constant = [](const std::vector<double>& r) {
            return std::all_of(r.begin(), r.end(), [&](double v) { return v == r.front(); });
        };
        if (constant(ra) || constant(rb)) {
            CHECK(code_of([&] { rank::spearman(a, b); }) == ErrorCode::Degenerate);
            continue;
        }
        CHECK(std::fabs(rank::spearman(a, b).coefficient - static_cast<double>(oracle::spearman(a, b))) <= 1e-12);
    }
}

TEST_CASE("spearman properties: symmetry, monotone invariance, p monotone in |rho|") {
    std::mt19937_64 rng(17);
    for (int rep = 0; rep < 50; ++rep) {
        auto a = normals(rng, 12);
        auto b = normals(rng, 12);
        const auto ab = rank::spearman(a, b);
        CHECK(ab.coefficient == rank::spearman(b, a).coefficient);
        std::vector<double> ta(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) ta[i] = std::exp(a[i]) * 3 + 1;
        CHECK(rank::spearman(ta, b).coefficient == doctest::Approx(ab.coefficient).epsilon(1e-14));
    }
    // p-values for n = 10 and increasing correlation
    const std::vector<double> base{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::vector<double> other = base;
    double last_p = -1;
    for (int swaps = 9; swaps >= 0; --swaps) {
        other = base;
        for (int s = 0; s < swaps; ++s) std::swap(other[s], other[9 - s]);
        const auto r = rank::spearman(base, other);
        if (r.coefficient > 0 && last_p >= 0) CHECK(r.p_value <= last_p);
        if (r.coefficient > 0) last_p = r.p_value;
    }
}

TEST_CASE("spearman input checks") {
    const std::vector<double> two{1, 2};
    CHECK(code_of([&] { rank::spearman(two, two); }) == ErrorCode::InsufficientData);
    const std::vector<double> a{1, 2, 3}, b{1, 2};
    CHECK(code_of([&] { rank::spearman(a, b); }) == ErrorCode::Precondition);
    const std::vector<double> c{1, 1, 1};
    CHECK(code_of([&] { rank::spearman(a, c); }) == ErrorCode::Degenerate);
    const std::vector<double> bad{1, std::nan(""), 3};
    CHECK(code_of([&] { rank::spearman(a, bad); }) == ErrorCode::Precondition);
}

TEST_CASE("permutation p-value is seeded and sensible") {
    const std::vector<double> a{1, 2, 3, 4, 5, 6};
    const std::vector<double> b{1, 3, 2, 4, 6, 5};
    const double p1 = rank::spearman_permutation_p(a, b, 42);
    CHECK(p1 == rank::spearman_permutation_p(a, b, 42));
    // exact two-sided p for rho = 0.8857 with n = 6 is 0.0333; Monte Carlo with 10k draws
    CHECK(p1 == doctest::Approx(0.0333).epsilon(0.3));
    const std::vector<double> noise{3, 6, 1, 5, 2, 4};
    CHECK(rank::spearman_permutation_p(a, noise, 42) > 0.2);
}

TEST_CASE("rank comparison over a location mapping") {
    const auto stocks = ingest::parse_ground_truth(
        "region,year,count\nWarszawa,2022,500\nKrakow,2022,300\nGdansk,2022,200\nLodz,2022,100\nPoznan,2022,50\n"
        "Warszawa,2021,5\n",
        ingest::GroundTruthKind::StocksYearly);
    std::map<std::string, double> shares{
        {"Warszawa", 0.05}, {"Krakow", 0.04}, {"Gdansk", 0.03}, {"Lodz", 0.02}, {"Poznan", 0.01}, {"Elsewhere", 0.5}};
    auto cmp = rank::build_rank_comparison(stocks, shares, 2022, "uk");
    CHECK(cmp.entries.size() == 5);
    CHECK(cmp.rho == 1.0);
    CHECK(cmp.entries.front().location == "Warszawa");
    REQUIRE(cmp.permutation_p.has_value());
    CHECK(*cmp.permutation_p < 0.05);

    // a known permutation of the shares
    std::map<std::string, double> shuffled{
        {"Warszawa", 0.02}, {"Krakow", 0.05}, {"Gdansk", 0.01}, {"Lodz", 0.04}, {"Poznan", 0.03}};
    cmp = rank::build_rank_comparison(stocks, shuffled, 2022, "uk");
    const std::vector<double> sv{500, 300, 200, 100, 50}, sh{0.02, 0.05, 0.01, 0.04, 0.03};
    CHECK(cmp.rho == doctest::Approx(static_cast<double>(oracle::spearman(sv, sh))).epsilon(1e-12));

    std::map<std::string, double> few{{"Warszawa", 0.1}, {"Krakow", 0.2}};
    CHECK(code_of([&] { rank::build_rank_comparison(stocks, few, 2022, "uk"); }) == ErrorCode::InsufficientData);
}

TEST_CASE("location mapping file") {
    const auto m = rank::parse_location_mapping(
        "stock_region,article_title,project\nWarszawa,Варшава,uk.wikipedia.org\n\"Kraków, city\",Краків,uk.wikipedia.org\n");
    REQUIRE(m.size() == 2);
    CHECK(m[1].stock_region == "Kraków, city");
    CHECK(m[0].project == "uk.wikipedia.org");
    CHECK(code_of([] { rank::parse_location_mapping("region,title\nx,y\n"); }) == ErrorCode::Format);
}
