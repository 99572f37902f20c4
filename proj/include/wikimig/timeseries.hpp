#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wikimig::ts {

/// A proleptic-Gregorian calendar day, no time zone.
using Day = std::chrono::sys_days;

Day make_day(int year, unsigned month, unsigned day);

/// Parses "YYYY-MM-DD". Throws Error(Format) on anything else.
Day parse_iso_day(std::string_view text);
std::string to_iso(Day day);
/// "YYYYMMDD", the form used in pageview API paths.
std::string to_compact(Day day);
/// Accepts "YYYYMMDD" or "YYYYMMDDHH" (hour ignored).
Day parse_compact_day(std::string_view text);

int year_of(Day day);
long days_between(Day from, Day to);

struct Point {
    Day date;
    double value = 0.0;

    bool operator==(const Point&) const = default;
};

/// Date-indexed non-negative counts. Dates strictly increase; gaps are
/// allowed and are distinct from zeros.
class DailySeries {
public:
    DailySeries() = default;
    /// Validates the invariants and throws Error(Validation) on violation.
    DailySeries(std::string label, std::vector<Point> points);

    const std::string& label() const noexcept { return label_; }
    const std::vector<Point>& points() const noexcept { return points_; }
    std::size_t size() const noexcept { return points_.size(); }
    bool empty() const noexcept { return points_.empty(); }

    Day first_date() const;
    Day last_date() const;
    std::optional<double> value_at(Day date) const;
    std::vector<double> values() const;
    std::vector<Day> dates() const;
    double total() const;

    /// Points with date in [from, to].
    DailySeries slice(Day from, Day to) const;

    bool operator==(const DailySeries&) const = default;

private:
    std::string label_;
    std::vector<Point> points_;
};

enum class Period { Daily, Weekly, Monthly, Yearly };

struct Granularity {
    Period period = Period::Daily;
    /// Weekly only. Unset means "first date of the series".
    std::optional<Day> anchor;

    static Granularity daily() { return {Period::Daily, std::nullopt}; }
    static Granularity weekly(std::optional<Day> anchor = std::nullopt) { return {Period::Weekly, anchor}; }
    static Granularity monthly() { return {Period::Monthly, std::nullopt}; }
    static Granularity yearly() { return {Period::Yearly, std::nullopt}; }
};

enum class AggregatePolicy { Sum, Mean };

/// One aggregation bucket. `span_days` is the calendar length of the bucket,
/// `present_days` how many input points fell into it.
struct Bucket {
    Day start;
    double value = 0.0;
    int present_days = 0;
    int span_days = 0;

    bool partial() const noexcept { return present_days < span_days; }
};

/// First calendar day of the bucket containing `date`. Weekly requires an anchor.
Day bucket_start(Day date, Period period, std::optional<Day> anchor);
int bucket_span_days(Day start, Period period);

/// Buckets with at least one present point, labelled by their first day.
std::vector<Bucket> aggregate_buckets(const DailySeries& series, const Granularity& granularity,
                                      AggregatePolicy policy = AggregatePolicy::Sum);

DailySeries aggregate(const DailySeries& series, const Granularity& granularity,
                      AggregatePolicy policy = AggregatePolicy::Sum);

struct AlignedPair {
    std::vector<Day> dates;
    std::vector<double> a;
    std::vector<double> b;

    std::size_t size() const noexcept { return dates.size(); }
};

/// Restricts both series to their shared dates. Throws Error(AlignmentEmpty).
AlignedPair align(const DailySeries& a, const DailySeries& b);

/// Returns (series[0..n-k), series[k..n)). Throws Error(InsufficientData) when k >= n.
std::pair<std::vector<double>, std::vector<double>> lag_shift(std::span<const double> series, std::size_t k);

}  // namespace wikimig::ts
