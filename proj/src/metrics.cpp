#include "wikimig/metrics.hpp"

#include <algorithm>
#include <limits>
#include <map>

#include "wikimig/error.hpp"

namespace wikimig::metrics {

using namespace std::chrono;

namespace {

constexpr int kWeeksPerYear = 52;

}  // namespace

std::optional<double> ProportionSeries::share_at(Day period_start) const {
    auto it = std::lower_bound(points.begin(), points.end(), period_start,
                               [](const SharePoint& p, Day d) { return p.period_start < d; });
    if (it == points.end() || it->period_start != period_start) return std::nullopt;
    return it->share;
}

ts::DailySeries ProportionSeries::present() const {
    std::vector<ts::Point> out;
    for (const auto& p : points) {
        if (p.share) out.push_back({p.period_start, *p.share});
    }
    return ts::DailySeries(key.label(), std::move(out));
}

ProportionSeries proportion_of_views(const ts::DailySeries& article, const ts::DailySeries& total,
                                     const ts::Granularity& granularity, ArticleKey key) {
    ProportionSeries out;
    out.key = std::move(key);
    out.granularity = granularity;
    if (article.empty()) return out;

    ts::Granularity resolved = granularity;
    ts::DailySeries denominator = total;
    if (granularity.period == ts::Period::Weekly) {
        if (!resolved.anchor) resolved.anchor = article.first_date();
        // total days before the anchor never pair with article data
        if (!total.empty()) denominator = total.slice(*resolved.anchor, total.last_date());
    }
    out.granularity = resolved;

    const auto numerators = ts::aggregate_buckets(article, resolved);
    std::map<Day, ts::Bucket> totals;
    for (const auto& b : ts::aggregate_buckets(denominator, resolved)) totals.emplace(b.start, b);

    for (const auto& num : numerators) {
        SharePoint point{num.start, std::nullopt, num.partial()};
        auto it = totals.find(num.start);
        if (it != totals.end()) {
            const auto& den = it->second;
            point.partial = point.partial || den.partial();
            if (den.value <= 0.0) {
                out.diagnostics.push_back({num.start, "DivisionByZero: total views are zero"});
            } else if (num.value > den.value) {
                out.diagnostics.push_back({num.start, "article views exceed project total"});
            } else {
                point.share = num.value / den.value;
            }
        }
        out.points.push_back(point);
    }
    return out;
}

RelativeChangeSeries relative_change(const ProportionSeries& weekly) {
    if (weekly.granularity.period != ts::Period::Weekly) {
        raise(ErrorCode::Precondition, "relative change needs a weekly proportion series");
    }
    RelativeChangeSeries out;
    out.key = weekly.key;
    const long span_weeks =
        weekly.points.empty()
            ? 0
            : ts::days_between(weekly.points.front().period_start, weekly.points.back().period_start) / 7 + 1;
    if (span_weeks < kWeeksPerYear + 1) {
        raise(ErrorCode::InsufficientHistory,
              "series spans " + std::to_string(span_weeks) + " weeks, need at least 53");
    }

    for (const auto& p : weekly.points) {
        ChangePoint cp{p.period_start, std::nullopt};
        const auto prior = weekly.share_at(p.period_start - days{7 * kWeeksPerYear});
        if (p.share && prior && *prior > 0.0) {
            cp.percent = (*p.share - *prior) / *prior * 100.0;
        }
        out.points.push_back(cp);
    }
    return out;
}

PeakChange max_relative_change(const RelativeChangeSeries& changes, Day window_start, int window_days) {
    const Day window_end = window_start + days{window_days};
    std::optional<PeakChange> best;
    for (const auto& p : changes.points) {
        if (p.week_start < window_start || p.week_start >= window_end || !p.percent) continue;
        if (!best || *p.percent > best->percent) best = PeakChange{*p.percent, p.week_start};
    }
    if (!best) {
        raise(ErrorCode::NoData, "no relative change present in window starting " + ts::to_iso(window_start));
    }
    return *best;
}

std::vector<std::optional<double>> rescale_0_100(std::span<const std::optional<double>> values) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (const auto& v : values) {
        if (!v) continue;
        any = true;
        lo = std::min(lo, *v);
        hi = std::max(hi, *v);
    }
    if (!any) raise(ErrorCode::NoData, "rescale needs at least one present value");

    std::vector<std::optional<double>> out(values.size());
    const double scale = hi > lo ? 100.0 / (hi - lo) : 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!values[i]) continue;
        const double v = *values[i];
        if (scale == 0.0 || v == lo) {
            out[i] = 0.0;
        } else if (v == hi) {
            out[i] = 100.0;
        } else {
            out[i] = (v - lo) * scale;
        }
    }
    return out;
}

std::vector<double> rescale_0_100(std::span<const double> values) {
    std::vector<std::optional<double>> wrapped(values.begin(), values.end());
    std::vector<double> out;
    out.reserve(values.size());
    for (const auto& v : rescale_0_100(std::span<const std::optional<double>>(wrapped))) out.push_back(*v);
    return out;
}

}  // namespace wikimig::metrics
