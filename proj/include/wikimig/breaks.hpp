#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wikimig/metrics.hpp"
#include "wikimig/timeseries.hpp"

namespace wikimig::breaks {

/// AR(1) regression y_t = c + phi * y_{t-1} + e_t, estimated per regime with both
/// coefficients allowed to change at each break.
struct BreakModel {
    std::string series_key;
    /// Minimum segment length as a fraction of the regression sample.
    double min_segment_frac = 0.15;
    int max_breaks = 5;
    double ci_level = 0.95;
};

/// OLS fit of one regime over regression observations t in [first, last] (indices into y).
struct SegmentFit {
    std::size_t first = 0;
    std::size_t last = 0;
    double intercept = 0.0;
    double ar1 = 0.0;
    double rss = 0.0;
    double residual_variance = 0.0;
    /// The lagged regressor had no variance; the fit is intercept-only.
    bool intercept_only = false;
};

/// Requires 1 <= first and last - first >= 3. Throws Error(Precondition) otherwise.
SegmentFit segment_rss(std::span<const double> y, std::size_t first, std::size_t last);

/// Best m-break segmentation. `breaks` holds the y-index of the first observation
/// of every regime after the first.
struct Partition {
    int n_breaks = 0;
    std::vector<std::size_t> breaks;
    double rss = 0.0;
};

/// Minimum admissible regime length for a regression sample of `effective_n` observations.
std::size_t min_segment_length(std::size_t effective_n, double min_segment_frac);

/// Globally optimal partitions for m = 0..max_breaks (index m of the result).
/// Throws Error(InfeasibleConfiguration) when the trimming cannot fit max_breaks.
std::vector<Partition> optimal_partition(std::span<const double> y, const BreakModel& model);

double bic(double rss, std::size_t effective_n, int n_breaks);

/// m minimizing BIC = T ln(RSS/T) + (2(m+1) + m) ln T. A zero RSS counts as
/// minus infinity and the smallest such m wins.
int select_n_breaks(std::span<const Partition> partitions, std::size_t effective_n);

struct IndexInterval {
    std::size_t lower = 0;
    std::size_t upper = 0;
};

/// Shift-profile interval for breaks[which]: every date the break can move to (others
/// fixed) whose total RSS stays within chi2_1(level) * sigma^2 of the minimum,
/// taken as the contiguous run around the estimate. std::nullopt when the run
/// reaches the admissible boundary.
std::optional<IndexInterval> break_confidence_interval(std::span<const double> y,
                                                       std::span<const std::size_t> breaks, std::size_t which,
                                                       const BreakModel& model);

struct BreakEstimate {
    std::size_t index = 0;
    std::optional<IndexInterval> ci;
    std::optional<ts::Day> date;
    std::optional<ts::Day> ci_lower;
    std::optional<ts::Day> ci_upper;
};

struct BreakReport {
    std::string series_key;
    std::vector<BreakEstimate> breaks;
    std::vector<SegmentFit> segment_fits;
    int n_breaks_selected = 0;
    /// Total RSS of the selected segmentation.
    double objective = 0.0;
    std::vector<double> rss_by_breaks;
    std::vector<double> bic_by_breaks;
};

BreakReport detect_breaks(std::span<const double> y, const BreakModel& model);
/// Uses present daily shares in order (missing days are skipped) and reports
/// dates on the original calendar.
BreakReport detect_breaks(const metrics::ProportionSeries& series, const BreakModel& model);

}  // namespace wikimig::breaks
