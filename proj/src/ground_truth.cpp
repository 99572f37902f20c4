#include "wikimig/ground_truth.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "wikimig/csv.hpp"
#include "wikimig/error.hpp"

namespace wikimig::ingest {

namespace {

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void format_error(std::size_t line, const std::string& what) {
    raise(ErrorCode::Format, "line " + std::to_string(line) + ": " + what);
}

std::int64_t parse_count(const std::string& text, std::size_t line) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        format_error(line, "count '" + text + "' is not an integer");
    }
    if (value < 0) {
        raise(ErrorCode::Validation, "line " + std::to_string(line) + ": negative count " + text);
    }
    return value;
}

}  // namespace

GroundTruthKind parse_ground_truth_kind(const std::string& text) {
    if (text == "border_crossings_daily") return GroundTruthKind::BorderCrossingsDaily;
    if (text == "stocks_yearly") return GroundTruthKind::StocksYearly;
    raise(ErrorCode::Configuration, "unknown ground-truth kind '" + text + "'");
}

std::string to_string(GroundTruthKind kind) {
    return kind == GroundTruthKind::BorderCrossingsDaily ? "border_crossings_daily" : "stocks_yearly";
}

GroundTruthTable parse_ground_truth(const std::string& text, GroundTruthKind kind) {
    const auto rows = csv::parse(text);
    const std::vector<std::string> expected = kind == GroundTruthKind::BorderCrossingsDaily
                                                  ? std::vector<std::string>{"date", "count"}
                                                  : std::vector<std::string>{"region", "year", "count"};
    if (rows.empty()) format_error(1, "missing header row");

    std::vector<std::string> header;
    for (const auto& f : rows.front().fields) header.push_back(trim(f));
    if (header != expected) {
        std::string want;
        for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
        format_error(rows.front().line, "header must be '" + want + "'");
    }

    GroundTruthTable table;
    table.kind = kind;
    std::set<std::pair<std::string, long>> seen;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.fields.size() != expected.size()) {
            format_error(row.line, "expected " + std::to_string(expected.size()) + " fields, got " +
                                       std::to_string(row.fields.size()));
        }
        GroundTruthRow out;
        long key = 0;
        if (kind == GroundTruthKind::BorderCrossingsDaily) {
            try {
                out.date = ts::parse_iso_day(trim(row.fields[0]));
            } catch (const Error&) {
                format_error(row.line, "invalid date '" + row.fields[0] + "'");
            }
            out.count = parse_count(trim(row.fields[1]), row.line);
            key = out.date.time_since_epoch().count();
        } else {
            out.region = trim(row.fields[0]);
            if (out.region.empty()) format_error(row.line, "empty region");
            const std::string year = trim(row.fields[1]);
            auto [ptr, ec] = std::from_chars(year.data(), year.data() + year.size(), out.year);
            if (ec != std::errc{} || ptr != year.data() + year.size() || year.empty()) {
                format_error(row.line, "year '" + row.fields[1] + "' is not an integer");
            }
            out.count = parse_count(trim(row.fields[2]), row.line);
            key = out.year;
        }
        if (!seen.emplace(out.region, key).second) {
            raise(ErrorCode::Validation, "line " + std::to_string(row.line) + ": duplicate entry");
        }
        table.rows.push_back(std::move(out));
    }
    return table;
}

GroundTruthTable load_ground_truth(const std::filesystem::path& path, GroundTruthKind kind) {
    return parse_ground_truth(csv::read_text(path), kind);
}

ts::DailySeries GroundTruthTable::crossings_series(const std::string& label) const {
    if (kind != GroundTruthKind::BorderCrossingsDaily) {
        raise(ErrorCode::Precondition, "crossings_series needs a border-crossings table");
    }
    std::vector<ts::Point> points;
    for (const auto& r : rows) points.push_back({r.date, static_cast<double>(r.count)});
    std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) { return a.date < b.date; });
    return ts::DailySeries(label, std::move(points));
}

std::vector<GroundTruthRow> GroundTruthTable::stocks_for_year(int year) const {
    std::vector<GroundTruthRow> out;
    for (const auto& r : rows) {
        if (r.year == year) out.push_back(r);
    }
    return out;
}

}  // namespace wikimig::ingest
