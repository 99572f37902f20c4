#include "wikimig/breaks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wikimig/error.hpp"
#include "wikimig/stats.hpp"

namespace wikimig::breaks {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// RSS below this fraction of the centred response variation is an exact fit
constexpr double kExactFitTolerance = 1e-12;

/// Running centred co-moments of (y_{t-1}, y_t) pairs.
class ArAccumulator {
public:
    void add(double lagged, double current) {
        ++count_;
        const double n = static_cast<double>(count_);
        const double dx = lagged - mean_x_;
        const double dz = current - mean_z_;
        mean_x_ += dx / n;
        mean_z_ += dz / n;
        sxx_ += dx * (lagged - mean_x_);
        sxz_ += dx * (current - mean_z_);
        szz_ += dz * (current - mean_z_);
    }

    std::size_t count() const noexcept { return count_; }

    bool lag_degenerate() const noexcept {
        return sxx_ <= 0.0 || sxx_ <= 1e-14 * static_cast<double>(count_) * mean_x_ * mean_x_;
    }

    double rss() const noexcept {
        double r = lag_degenerate() ? szz_ : szz_ - sxz_ * sxz_ / sxx_;
        if (r <= kExactFitTolerance * szz_) r = 0.0;
        return std::max(r, 0.0);
    }

    SegmentFit fit(std::size_t first, std::size_t last) const {
        SegmentFit f;
        f.first = first;
        f.last = last;
        f.intercept_only = lag_degenerate();
        f.ar1 = f.intercept_only ? 0.0 : sxz_ / sxx_;
        f.intercept = mean_z_ - f.ar1 * mean_x_;
        f.rss = rss();
        const double dof = static_cast<double>(count_) - (f.intercept_only ? 1.0 : 2.0);
        f.residual_variance = dof > 0 ? f.rss / dof : 0.0;
        return f;
    }

private:
    std::size_t count_ = 0;
    double mean_x_ = 0.0;
    double mean_z_ = 0.0;
    double sxx_ = 0.0;
    double sxz_ = 0.0;
    double szz_ = 0.0;
};

ArAccumulator accumulate(std::span<const double> y, std::size_t first, std::size_t last) {
    ArAccumulator acc;
    for (std::size_t t = first; t <= last; ++t) acc.add(y[t - 1], y[t]);
    return acc;
}

/// RSS for every admissible regime [s, e] of regression observations 1..n-1.
class RssTable {
public:
    RssTable(std::span<const double> y, std::size_t min_len) : n_(y.size()), min_len_(min_len) {
        const std::size_t t = n_ - 1;
        values_.assign(t * t, kInf);
        for (std::size_t s = 1; s < n_; ++s) {
            ArAccumulator acc;
            for (std::size_t e = s; e < n_; ++e) {
                acc.add(y[e - 1], y[e]);
                if (acc.count() >= min_len_) values_[(s - 1) * t + (e - 1)] = acc.rss();
            }
        }
    }

    double operator()(std::size_t s, std::size_t e) const { return values_[(s - 1) * (n_ - 1) + (e - 1)]; }

private:
    std::size_t n_;
    std::size_t min_len_;
    std::vector<double> values_;
};

void check_series(std::span<const double> y) {
    for (double v : y) {
        if (!std::isfinite(v)) raise(ErrorCode::Precondition, "break detection needs finite values");
    }
}

}  // namespace

SegmentFit segment_rss(std::span<const double> y, std::size_t first, std::size_t last) {
    if (first < 1 || last >= y.size() || last < first || last - first < 3) {
        raise(ErrorCode::Precondition, "segment [" + std::to_string(first) + ", " + std::to_string(last) +
                                           "] is too short or out of range");
    }
    return accumulate(y, first, last).fit(first, last);
}

std::size_t min_segment_length(std::size_t effective_n, double min_segment_frac) {
    const auto h = static_cast<std::size_t>(std::ceil(min_segment_frac * static_cast<double>(effective_n) - 1e-9));
    return std::max<std::size_t>(h, 4);
}

std::vector<Partition> optimal_partition(std::span<const double> y, const BreakModel& model) {
    check_series(y);
    if (!(model.min_segment_frac > 0.0 && model.min_segment_frac <= 0.5) || model.max_breaks < 0) {
        raise(ErrorCode::InfeasibleConfiguration, "trimming must lie in (0, 0.5] and max_breaks >= 0");
    }
    if (y.size() < 5) raise(ErrorCode::InfeasibleConfiguration, "series too short for an AR(1) regime");
    const std::size_t T = y.size() - 1;
    const std::size_t h = min_segment_length(T, model.min_segment_frac);
    const auto M = static_cast<std::size_t>(model.max_breaks);
    if (T < (M + 1) * h) {
        raise(ErrorCode::InfeasibleConfiguration,
              std::to_string(T) + " observations cannot hold " + std::to_string(M + 1) + " regimes of length " +
                  std::to_string(h));
    }

    const RssTable rss(y, h);
    const std::size_t last = T;  // y index of the final regression observation

    // cost[m][e]: best RSS covering observations 1..e with m breaks; from[m][e]: start of the last regime
    std::vector<std::vector<double>> cost(M + 1, std::vector<double>(last + 1, kInf));
    std::vector<std::vector<std::size_t>> from(M + 1, std::vector<std::size_t>(last + 1, 0));
    for (std::size_t e = h; e <= last; ++e) cost[0][e] = rss(1, e);
    for (std::size_t m = 1; m <= M; ++m) {
        for (std::size_t e = (m + 1) * h; e <= last; ++e) {
            double best = kInf;
            std::size_t arg = 0;
            // the last regime starts at b, previous regimes cover 1..b-1
            for (std::size_t b = m * h + 1; b + h - 1 <= e; ++b) {
                const double c = cost[m - 1][b - 1] + rss(b, e);
                if (c < best) {
                    best = c;
                    arg = b;
                }
            }
            cost[m][e] = best;
            from[m][e] = arg;
        }
    }

    std::vector<Partition> out;
    for (std::size_t m = 0; m <= M; ++m) {
        Partition p;
        p.n_breaks = static_cast<int>(m);
        p.rss = cost[m][last];
        std::size_t e = last;
        for (std::size_t k = m; k >= 1; --k) {
            const std::size_t b = from[k][e];
            p.breaks.push_back(b);
            e = b - 1;
        }
        std::reverse(p.breaks.begin(), p.breaks.end());
        out.push_back(std::move(p));
    }
    return out;
}

double bic(double rss, std::size_t effective_n, int n_breaks) {
    const double T = static_cast<double>(effective_n);
    if (rss <= 0.0) return -kInf;
    const double k = 2.0 * (n_breaks + 1) + n_breaks;
    return T * std::log(rss / T) + k * std::log(T);
}

int select_n_breaks(std::span<const Partition> partitions, std::size_t effective_n) {
    if (partitions.empty()) raise(ErrorCode::Precondition, "no partitions to choose from");
    int best = partitions.front().n_breaks;
    double best_bic = kInf;
    for (const auto& p : partitions) {
        const double value = bic(p.rss, effective_n, p.n_breaks);
        if (value == -kInf) return p.n_breaks;
        if (value < best_bic) {
            best_bic = value;
            best = p.n_breaks;
        }
    }
    return best;
}

std::optional<IndexInterval> break_confidence_interval(std::span<const double> y,
                                                       std::span<const std::size_t> breaks, std::size_t which,
                                                       const BreakModel& model) {
    if (which >= breaks.size()) raise(ErrorCode::Precondition, "no break at the requested position");
    const std::size_t T = y.size() - 1;
    const std::size_t h = min_segment_length(T, model.min_segment_frac);

    // regime boundaries: starts[k] is the first observation of regime k
    std::vector<std::size_t> starts{1};
    starts.insert(starts.end(), breaks.begin(), breaks.end());
    starts.push_back(T + 1);

    double fixed_rss = 0.0;
    for (std::size_t k = 0; k + 1 < starts.size(); ++k) {
        if (k == which || k == which + 1) continue;
        fixed_rss += segment_rss(y, starts[k], starts[k + 1] - 1).rss;
    }
    const std::size_t left_start = starts[which];
    const std::size_t right_end = starts[which + 2] - 1;
    const std::size_t lo = left_start + h;
    const std::size_t hi = right_end + 1 - h;
    const std::size_t estimate = breaks[which];

    std::vector<double> profile(hi - lo + 1);
    for (std::size_t b = lo; b <= hi; ++b) {
        profile[b - lo] = segment_rss(y, left_start, b - 1).rss + segment_rss(y, b, right_end).rss;
    }
    const double at_estimate = profile[estimate - lo];
    const double min_rss = std::min(at_estimate, *std::min_element(profile.begin(), profile.end()));

    const double total_rss = fixed_rss + at_estimate;
    const double params = 2.0 * static_cast<double>(breaks.size() + 1);
    const double sigma2 = total_rss / std::max(1.0, static_cast<double>(T) - params);
    const double threshold = stats::chi_square_quantile(model.ci_level, 1.0) * sigma2;

    auto inside = [&](std::size_t b) { return profile[b - lo] - min_rss <= threshold; };
    std::size_t lower = estimate;
    std::size_t upper = estimate;
    while (lower > lo && inside(lower - 1)) --lower;
    while (upper < hi && inside(upper + 1)) ++upper;
    if (lower == lo || upper == hi) return std::nullopt;
    return IndexInterval{lower, upper};
}

BreakReport detect_breaks(std::span<const double> y, const BreakModel& model) {
    const auto partitions = optimal_partition(y, model);
    const std::size_t T = y.size() - 1;

    BreakReport report;
    report.series_key = model.series_key;
    for (const auto& p : partitions) {
        report.rss_by_breaks.push_back(p.rss);
        report.bic_by_breaks.push_back(bic(p.rss, T, p.n_breaks));
    }
    report.n_breaks_selected = select_n_breaks(partitions, T);
    const auto& chosen = partitions[static_cast<std::size_t>(report.n_breaks_selected)];
    report.objective = chosen.rss;

    for (std::size_t k = 0; k < chosen.breaks.size(); ++k) {
        BreakEstimate est;
        est.index = chosen.breaks[k];
        est.ci = break_confidence_interval(y, chosen.breaks, k, model);
        report.breaks.push_back(est);
    }
    std::size_t start = 1;
    for (std::size_t k = 0; k <= chosen.breaks.size(); ++k) {
        const std::size_t end = k < chosen.breaks.size() ? chosen.breaks[k] - 1 : T;
        report.segment_fits.push_back(segment_rss(y, start, end));
        start = end + 1;
    }
    return report;
}

BreakReport detect_breaks(const metrics::ProportionSeries& series, const BreakModel& model) {
    std::vector<double> y;
    std::vector<ts::Day> dates;
    for (const auto& p : series.points) {
        if (!p.share) continue;
        y.push_back(*p.share);
        dates.push_back(p.period_start);
    }
    BreakModel named = model;
    if (named.series_key.empty()) named.series_key = series.key.label();
    auto report = detect_breaks(y, named);
    for (auto& b : report.breaks) {
        b.date = dates[b.index];
        if (b.ci) {
            b.ci_lower = dates[b.ci->lower];
            b.ci_upper = dates[b.ci->upper];
        }
    }
    return report;
}

}  // namespace wikimig::breaks
