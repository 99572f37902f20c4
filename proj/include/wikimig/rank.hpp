#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wikimig/ground_truth.hpp"

namespace wikimig::rank {

struct Correlation {
    double coefficient = 0.0;
    double p_value = 1.0;
};

/// 1-based ranks; tied values share the average of the ranks they span.
std::vector<double> average_ranks(std::span<const double> values);

/// Spearman's rho as the Pearson correlation of average-rank vectors, with a
/// two-sided p-value from t = rho * sqrt((n-2)/(1-rho^2)) on n-2 degrees of freedom.
/// Throws Error(InsufficientData) for n < 3 and Error(Degenerate) when a rank vector is constant.
Correlation spearman(std::span<const double> a, std::span<const double> b);

/// Two-sided permutation p-value: (1 + #{|rho_perm| >= |rho_obs|}) / (1 + shuffles).
double spearman_permutation_p(std::span<const double> a, std::span<const double> b, std::uint64_t seed,
                              int shuffles = 10000);

struct LocationMapping {
    std::string stock_region;
    std::string article_title;
    std::string project;
};

/// CSV with header "stock_region,article_title,project".
std::vector<LocationMapping> load_location_mapping(const std::filesystem::path& path);
std::vector<LocationMapping> parse_location_mapping(const std::string& text);

struct RankEntry {
    std::string location;
    std::int64_t stock = 0;
    double share = 0.0;
    double stock_rank = 0.0;
    double share_rank = 0.0;
};

struct RankComparison {
    int year = 0;
    std::string language;
    std::vector<RankEntry> entries;  // sorted by descending stock, then location
    double rho = 0.0;
    double p_value = 1.0;
    /// Filled only for fewer than 10 entries, where the t-approximation is weak.
    std::optional<double> permutation_p;
};

/// Pairs yearly stocks with yearly shares keyed by stock region, restricted to the
/// locations present in both. Throws Error(InsufficientData) for fewer than 3.
RankComparison build_rank_comparison(const ingest::GroundTruthTable& stocks,
                                     const std::map<std::string, double>& shares_by_region, int year,
                                     const std::string& language, std::uint64_t seed = 42);

}  // namespace wikimig::rank
