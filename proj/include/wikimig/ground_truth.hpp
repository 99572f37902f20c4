#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wikimig/timeseries.hpp"

namespace wikimig::ingest {

enum class GroundTruthKind {
    BorderCrossingsDaily,  // header "date,count"
    StocksYearly,          // header "region,year,count"
};

GroundTruthKind parse_ground_truth_kind(const std::string& text);
std::string to_string(GroundTruthKind kind);

struct GroundTruthRow {
    std::string region;  // empty for border crossings
    ts::Day date{};      // border crossings only
    int year = 0;        // stocks only
    std::int64_t count = 0;
};

struct GroundTruthTable {
    GroundTruthKind kind = GroundTruthKind::BorderCrossingsDaily;
    std::vector<GroundTruthRow> rows;

    /// Border crossings as a daily series, sorted by date.
    ts::DailySeries crossings_series(const std::string& label = "crossings") const;
    std::vector<GroundTruthRow> stocks_for_year(int year) const;
};

/// Throws Error(Format) naming the offending line on schema problems and
/// Error(Validation) on negative counts or duplicate keys.
GroundTruthTable load_ground_truth(const std::filesystem::path& path, GroundTruthKind kind);
GroundTruthTable parse_ground_truth(const std::string& text, GroundTruthKind kind);

}  // namespace wikimig::ingest
