#include "wikimig/timeseries.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "wikimig/error.hpp"

namespace wikimig::ts {

using namespace std::chrono;

namespace {

int parse_digits(std::string_view text, std::size_t pos, std::size_t len, std::string_view whole) {
    int value = 0;
    auto first = text.data() + pos;
    auto [ptr, ec] = std::from_chars(first, first + len, value);
    if (ec != std::errc{} || ptr != first + len) {
        raise(ErrorCode::Format, "invalid date '" + std::string(whole) + "'");
    }
    return value;
}

Day checked_day(int y, int m, int d, std::string_view whole) {
    year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) {
        raise(ErrorCode::Format, "invalid calendar date '" + std::string(whole) + "'");
    }
    return sys_days{ymd};
}

}  // namespace

Day make_day(int y, unsigned m, unsigned d) {
    year_month_day ymd{year{y}, month{m}, day{d}};
    if (!ymd.ok()) {
        raise(ErrorCode::Format, "invalid calendar date");
    }
    return sys_days{ymd};
}

Day parse_iso_day(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        raise(ErrorCode::Format, "expected YYYY-MM-DD, got '" + std::string(text) + "'");
    }
    return checked_day(parse_digits(text, 0, 4, text), parse_digits(text, 5, 2, text),
                       parse_digits(text, 8, 2, text), text);
}

Day parse_compact_day(std::string_view text) {
    if (text.size() != 8 && text.size() != 10) {
        raise(ErrorCode::Format, "expected YYYYMMDD[HH], got '" + std::string(text) + "'");
    }
    if (text.size() == 10) {
        parse_digits(text, 8, 2, text);
    }
    return checked_day(parse_digits(text, 0, 4, text), parse_digits(text, 4, 2, text),
                       parse_digits(text, 6, 2, text), text);
}

std::string to_iso(Day d) {
    year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

std::string to_compact(Day d) {
    year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d%02u%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

int year_of(Day d) { return static_cast<int>(year_month_day{d}.year()); }

long days_between(Day from, Day to) { return static_cast<long>((to - from).count()); }

DailySeries::DailySeries(std::string label, std::vector<Point> points)
    : label_(std::move(label)), points_(std::move(points)) {
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const auto& p = points_[i];
        if (!std::isfinite(p.value) || p.value < 0.0) {
            raise(ErrorCode::Validation,
                  "series '" + label_ + "' has invalid value on " + to_iso(p.date));
        }
        if (i > 0 && !(points_[i - 1].date < p.date)) {
            raise(ErrorCode::Validation,
                  "series '" + label_ + "' dates not strictly increasing at " + to_iso(p.date));
        }
    }
}

Day DailySeries::first_date() const {
    if (points_.empty()) raise(ErrorCode::NoData, "empty series '" + label_ + "'");
    return points_.front().date;
}

Day DailySeries::last_date() const {
    if (points_.empty()) raise(ErrorCode::NoData, "empty series '" + label_ + "'");
    return points_.back().date;
}

std::optional<double> DailySeries::value_at(Day date) const {
    auto it = std::lower_bound(points_.begin(), points_.end(), date,
                               [](const Point& p, Day d) { return p.date < d; });
    if (it == points_.end() || it->date != date) return std::nullopt;
    return it->value;
}

std::vector<double> DailySeries::values() const {
    std::vector<double> out;
    out.reserve(points_.size());
    for (const auto& p : points_) out.push_back(p.value);
    return out;
}

std::vector<Day> DailySeries::dates() const {
    std::vector<Day> out;
    out.reserve(points_.size());
    for (const auto& p : points_) out.push_back(p.date);
    return out;
}

double DailySeries::total() const {
    return std::accumulate(points_.begin(), points_.end(), 0.0,
                           [](double acc, const Point& p) { return acc + p.value; });
}

DailySeries DailySeries::slice(Day from, Day to) const {
    std::vector<Point> out;
    for (const auto& p : points_) {
        if (p.date >= from && p.date <= to) out.push_back(p);
    }
    DailySeries s;
    s.label_ = label_;
    s.points_ = std::move(out);
    return s;
}

Day bucket_start(Day date, Period period, std::optional<Day> anchor) {
    switch (period) {
        case Period::Daily:
            return date;
        case Period::Weekly: {
            if (!anchor) raise(ErrorCode::Configuration, "weekly bucketing requires an anchor");
            const long offset = days_between(*anchor, date);
            // floor division so dates before the anchor still land on the grid
            const long week = offset >= 0 ? offset / 7 : -((-offset + 6) / 7);
            return *anchor + days{week * 7};
        }
        case Period::Monthly: {
            year_month_day ymd{date};
            return sys_days{ymd.year() / ymd.month() / 1};
        }
        case Period::Yearly: {
            year_month_day ymd{date};
            return sys_days{ymd.year() / January / 1};
        }
    }
    return date;
}

int bucket_span_days(Day start, Period period) {
    switch (period) {
        case Period::Daily: return 1;
        case Period::Weekly: return 7;
        case Period::Monthly: {
            year_month_day ymd{start};
            year_month_day_last last{ymd.year() / ymd.month() / std::chrono::last};
            return static_cast<int>(static_cast<unsigned>(last.day()));
        }
        case Period::Yearly: {
            year_month_day ymd{start};
            return ymd.year().is_leap() ? 366 : 365;
        }
    }
    return 1;
}

std::vector<Bucket> aggregate_buckets(const DailySeries& series, const Granularity& granularity,
                                      AggregatePolicy policy) {
    std::vector<Bucket> out;
    if (series.empty()) return out;

    std::optional<Day> anchor = granularity.anchor;
    if (granularity.period == Period::Weekly) {
        if (!anchor) {
            anchor = series.first_date();
        } else if (*anchor > series.first_date()) {
            raise(ErrorCode::Configuration, "weekly anchor " + to_iso(*anchor) +
                                                " is after the first series date " +
                                                to_iso(series.first_date()));
        }
    }

    for (const auto& p : series.points()) {
        const Day start = bucket_start(p.date, granularity.period, anchor);
        if (out.empty() || out.back().start != start) {
            out.push_back(Bucket{start, 0.0, 0, bucket_span_days(start, granularity.period)});
        }
        out.back().value += p.value;
        out.back().present_days += 1;
    }
    if (policy == AggregatePolicy::Mean) {
        for (auto& b : out) b.value /= b.present_days;
    }
    return out;
}

DailySeries aggregate(const DailySeries& series, const Granularity& granularity, AggregatePolicy policy) {
    if (granularity.period == Period::Daily) {
        return series;
    }
    std::vector<Point> points;
    for (const auto& b : aggregate_buckets(series, granularity, policy)) {
        points.push_back({b.start, b.value});
    }
    return DailySeries(series.label(), std::move(points));
}

AlignedPair align(const DailySeries& a, const DailySeries& b) {
    AlignedPair out;
    const auto& pa = a.points();
    const auto& pb = b.points();
    std::size_t i = 0, j = 0;
    while (i < pa.size() && j < pb.size()) {
        if (pa[i].date < pb[j].date) {
            ++i;
        } else if (pb[j].date < pa[i].date) {
            ++j;
        } else {
            out.dates.push_back(pa[i].date);
            out.a.push_back(pa[i].value);
            out.b.push_back(pb[j].value);
            ++i;
            ++j;
        }
    }
    if (out.dates.empty()) {
        raise(ErrorCode::AlignmentEmpty, "'" + a.label() + "' and '" + b.label() + "' share no dates");
    }
    return out;
}

std::pair<std::vector<double>, std::vector<double>> lag_shift(std::span<const double> series, std::size_t k) {
    const std::size_t n = series.size();
    if (k >= n) {
        raise(ErrorCode::InsufficientData,
              "lag " + std::to_string(k) + " needs more than " + std::to_string(n) + " points");
    }
    std::vector<double> lagged(series.begin(), series.end() - static_cast<std::ptrdiff_t>(k));
    std::vector<double> contemporaneous(series.begin() + static_cast<std::ptrdiff_t>(k), series.end());
    return {std::move(lagged), std::move(contemporaneous)};
}

}  // namespace wikimig::ts
