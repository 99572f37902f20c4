#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wikimig/article_key.hpp"
#include "wikimig/timeseries.hpp"

namespace wikimig::metrics {

using ts::Day;

struct SharePoint {
    Day period_start;
    std::optional<double> share;
    /// Either the article or the total had fewer present days than the period length.
    bool partial = false;
};

struct PeriodDiagnostic {
    Day period_start;
    std::string message;
};

/// Article views divided by project-total views per period.
struct ProportionSeries {
    ArticleKey key;
    ts::Granularity granularity;
    std::vector<SharePoint> points;
    std::vector<PeriodDiagnostic> diagnostics;

    std::optional<double> share_at(Day period_start) const;
    /// Present shares only, as a series labelled with the article key.
    ts::DailySeries present() const;
};

/// Shares per period of `granularity`. Periods where the article has data but the
/// total is missing, zero, or smaller than the article get a missing share; zero
/// and inconsistent totals also leave a diagnostic.
ProportionSeries proportion_of_views(const ts::DailySeries& article, const ts::DailySeries& total,
                                     const ts::Granularity& granularity, ArticleKey key = {});

struct ChangePoint {
    Day week_start;
    std::optional<double> percent;
};

struct RelativeChangeSeries {
    ArticleKey key;
    std::vector<ChangePoint> points;
};

/// Year-over-year percent change of weekly shares against the week 364 days
/// earlier on the same grid. Needs at least 53 weeks of span.
RelativeChangeSeries relative_change(const ProportionSeries& weekly);

struct PeakChange {
    double percent = 0.0;
    Day week_start;
};

/// Largest present change among weeks starting in [window_start, window_start + window_days).
/// Ties go to the earliest week.
PeakChange max_relative_change(const RelativeChangeSeries& changes, Day window_start, int window_days);

/// Affine map of present values onto [0, 100]; a constant input maps to all zeros.
std::vector<std::optional<double>> rescale_0_100(std::span<const std::optional<double>> values);
std::vector<double> rescale_0_100(std::span<const double> values);

}  // namespace wikimig::metrics
