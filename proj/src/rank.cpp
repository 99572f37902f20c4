#include "wikimig/rank.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "wikimig/csv.hpp"
#include "wikimig/error.hpp"
#include "wikimig/stats.hpp"

namespace wikimig::rank {

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });

    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        // positions i..j (0-based) share ranks i+1..j+1
        const double avg = (static_cast<double>(i + j) + 2.0) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

namespace {

double rank_correlation(std::span<const double> ra, std::span<const double> rb) {
    return stats::pearson(ra, rb);
}

double t_p_value(double rho, std::size_t n) {
    const double df = static_cast<double>(n) - 2.0;
    if (std::fabs(rho) >= 1.0) return 0.0;
    const double t = rho * std::sqrt(df / (1.0 - rho * rho));
    return stats::student_t_two_sided_p(t, df);
}

}  // namespace

Correlation spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) raise(ErrorCode::Precondition, "spearman inputs differ in length");
    if (a.size() < 3) raise(ErrorCode::InsufficientData, "spearman needs at least 3 pairs");
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!std::isfinite(a[i]) || !std::isfinite(b[i])) {
            raise(ErrorCode::Precondition, "spearman inputs must be finite");
        }
    }
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    const double rho = rank_correlation(ra, rb);
    if (std::isnan(rho)) raise(ErrorCode::Degenerate, "rank vector has zero variance");
    return {rho, t_p_value(rho, a.size())};
}

double spearman_permutation_p(std::span<const double> a, std::span<const double> b, std::uint64_t seed,
                              int shuffles) {
    const double observed = std::fabs(spearman(a, b).coefficient);
    const auto ra = average_ranks(a);
    auto rb = average_ranks(b);
    std::mt19937_64 rng(seed);
    int extreme = 0;
    for (int s = 0; s < shuffles; ++s) {
        std::shuffle(rb.begin(), rb.end(), rng);
        // small tolerance so ties with the observed statistic count as extreme
        if (std::fabs(rank_correlation(ra, rb)) >= observed - 1e-12) ++extreme;
    }
    return (1.0 + extreme) / (1.0 + shuffles);
}

std::vector<LocationMapping> parse_location_mapping(const std::string& text) {
    const auto rows = csv::parse(text);
    if (rows.empty() || rows.front().fields != std::vector<std::string>{"stock_region", "article_title", "project"}) {
        raise(ErrorCode::Format, "line 1: header must be 'stock_region,article_title,project'");
    }
    std::vector<LocationMapping> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& f = rows[r].fields;
        if (f.size() != 3 || f[0].empty() || f[1].empty() || f[2].empty()) {
            raise(ErrorCode::Format, "line " + std::to_string(rows[r].line) + ": expected 3 non-empty fields");
        }
        out.push_back({f[0], f[1], f[2]});
    }
    return out;
}

std::vector<LocationMapping> load_location_mapping(const std::filesystem::path& path) {
    return parse_location_mapping(csv::read_text(path));
}

RankComparison build_rank_comparison(const ingest::GroundTruthTable& stocks,
                                     const std::map<std::string, double>& shares_by_region, int year,
                                     const std::string& language, std::uint64_t seed) {
    if (stocks.kind != ingest::GroundTruthKind::StocksYearly) {
        raise(ErrorCode::Precondition, "rank comparison needs a yearly stocks table");
    }
    RankComparison out;
    out.year = year;
    out.language = language;
    for (const auto& row : stocks.stocks_for_year(year)) {
        auto it = shares_by_region.find(row.region);
        if (it == shares_by_region.end()) continue;
        out.entries.push_back({row.region, row.count, it->second, 0.0, 0.0});
    }
    if (out.entries.size() < 3) {
        raise(ErrorCode::InsufficientData, "only " + std::to_string(out.entries.size()) +
                                               " locations have both stocks and shares for " +
                                               std::to_string(year));
    }
    std::sort(out.entries.begin(), out.entries.end(), [](const RankEntry& x, const RankEntry& y) {
        if (x.stock != y.stock) return x.stock > y.stock;
        return x.location < y.location;
    });

    std::vector<double> a, b;
    for (const auto& e : out.entries) {
        a.push_back(static_cast<double>(e.stock));
        b.push_back(e.share);
    }
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    for (std::size_t i = 0; i < out.entries.size(); ++i) {
        out.entries[i].stock_rank = ra[i];
        out.entries[i].share_rank = rb[i];
    }
    const auto corr = spearman(a, b);
    out.rho = corr.coefficient;
    out.p_value = corr.p_value;
    if (out.entries.size() < 10) out.permutation_p = spearman_permutation_p(a, b, seed);
    return out;
}

}  // namespace wikimig::rank
