#include "wikimig/econometrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>

#include "wikimig/error.hpp"
#include "wikimig/ols.hpp"
#include "wikimig/stats.hpp"

namespace wikimig::econ {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double centered_ss(std::span<const double> x) {
    const double m = stats::mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s;
}

bool is_constant(std::span<const double> x) {
    return std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
}

}  // namespace

rank::Correlation correlate(const ts::AlignedPair& pair, CorrelationMethod method) {
    if (pair.size() < 3) raise(ErrorCode::InsufficientData, "correlation needs at least 3 pairs");
    if (method == CorrelationMethod::Spearman) return rank::spearman(pair.a, pair.b);

    const double r = stats::pearson(pair.a, pair.b);
    if (std::isnan(r)) raise(ErrorCode::Degenerate, "zero variance in correlation input");
    const double df = static_cast<double>(pair.size()) - 2.0;
    const double p = std::fabs(r) >= 1.0 ? 0.0 : stats::student_t_two_sided_p(r * std::sqrt(df / (1.0 - r * r)), df);
    return {r, p};
}

// ---------------------------------------------------------------------------
// ADF
// ---------------------------------------------------------------------------

double adf_critical_value(std::size_t n_obs, double level) {
    // MacKinnon (2010), "Critical Values for Cointegration Tests", Table 2, N = 1, constant.
    struct Surface {
        double level, b0, b1, b2, b3;
    };
    static constexpr std::array<Surface, 3> kSurfaces{{
        {0.01, -3.43035, -6.5393, -16.786, -79.433},
        {0.05, -2.86154, -2.8903, -4.234, -40.040},
        {0.10, -2.56677, -1.5384, -2.809, 0.0},
    }};
    const auto it = std::find_if(kSurfaces.begin(), kSurfaces.end(),
                                 [&](const Surface& s) { return std::fabs(s.level - level) < 1e-12; });
    if (it == kSurfaces.end()) raise(ErrorCode::Precondition, "ADF critical values exist for 1%, 5% and 10% only");
    const double T = static_cast<double>(n_obs);
    return it->b0 + it->b1 / T + it->b2 / (T * T) + it->b3 / (T * T * T);
}

double adf_p_value(double statistic) {
    // MacKinnon (1994) asymptotic p-value surface, constant-only case, one variable.
    constexpr double kTauMax = 2.74;
    constexpr double kTauMin = -18.83;
    constexpr double kTauStar = -1.61;
    constexpr std::array<double, 3> kSmall{2.1659, 1.4412, 0.038269};
    constexpr std::array<double, 4> kLarge{1.7339, 0.93202, -0.12745, -0.010368};
    if (statistic > kTauMax) return 1.0;
    if (statistic < kTauMin) return 0.0;
    double z = 0.0;
    double power = 1.0;
    if (statistic <= kTauStar) {
        for (double c : kSmall) {
            z += c * power;
            power *= statistic;
        }
    } else {
        for (double c : kLarge) {
            z += c * power;
            power *= statistic;
        }
    }
    return boost::math::cdf(boost::math::normal(), z);
}

int schwert_max_lag(std::size_t n) {
    return static_cast<int>(std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
}

namespace {

struct AdfDesign {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
};

/// Rows t = start..n-1 of dy_t on [1, y_{t-1}, dy_{t-1}, ..., dy_{t-k}].
AdfDesign adf_design(std::span<const double> y, int k, std::size_t start) {
    const std::size_t n = y.size();
    const std::size_t rows = n - start;
    AdfDesign d{Eigen::MatrixXd(rows, k + 2), Eigen::VectorXd(rows)};
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t t = start + r;
        d.y(r) = y[t] - y[t - 1];
        d.x(r, 0) = 1.0;
        d.x(r, 1) = y[t - 1];
        for (int i = 1; i <= k; ++i) d.x(r, i + 1) = y[t - i] - y[t - i - 1];
    }
    return d;
}

}  // namespace

AdfResult adf_test(std::span<const double> y, int max_lag) {
    if (max_lag < 0) raise(ErrorCode::Precondition, "ADF max_lag must be non-negative");
    if (y.size() < static_cast<std::size_t>(max_lag) + 10) {
        raise(ErrorCode::InsufficientData, "ADF needs at least max_lag + 10 observations");
    }
    if (is_constant(y)) raise(ErrorCode::Degenerate, "ADF on a constant series");

    const std::size_t common_start = static_cast<std::size_t>(max_lag) + 1;
    int best_k = -1;
    double best_aic = kInf;
    for (int k = 0; k <= max_lag; ++k) {
        const auto d = adf_design(y, k, common_start);
        try {
            const auto f = ols::fit(d.x, d.y);
            const double nobs = static_cast<double>(d.y.size());
            const double aic = f.rss > 0.0 ? nobs * std::log(f.rss / nobs) + 2.0 * (k + 2) : -kInf;
            if (aic < best_aic) {
                best_aic = aic;
                best_k = k;
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::SingularDesign) throw;
        }
    }
    if (best_k < 0) raise(ErrorCode::Degenerate, "every ADF regression is singular");

    const auto d = adf_design(y, best_k, static_cast<std::size_t>(best_k) + 1);
    ols::Fit f;
    try {
        f = ols::fit(d.x, d.y, true);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::SingularDesign) raise(ErrorCode::Degenerate, e.what());
        throw;
    }
    const double nobs = static_cast<double>(d.y.size());
    const double dof = nobs - static_cast<double>(best_k + 2);
    if (f.rss <= 1e-13 * centered_ss(std::span<const double>(d.y.data(), d.y.size()))) {
        raise(ErrorCode::Degenerate, "ADF regression fits exactly");
    }
    const double sigma2 = f.rss / dof;
    const double se = std::sqrt(sigma2 * f.xtx_inverse(1, 1));

    AdfResult out;
    out.statistic = f.coefficients(1) / se;
    out.lag_used = best_k;
    out.n_obs = d.y.size();
    out.critical_value_5pct = adf_critical_value(out.n_obs, 0.05);
    out.p_value = adf_p_value(out.statistic);
    out.reject_at_5pct = out.statistic < out.critical_value_5pct;
    return out;
}

// ---------------------------------------------------------------------------
// VAR
// ---------------------------------------------------------------------------

Eigen::Matrix2d VarFit::lag_matrix(int lag) const {
    Eigen::Matrix2d a;
    for (int i = 0; i < 2; ++i) {
        a(i, 0) = coefficients(i, 1 + 2 * (lag - 1));
        a(i, 1) = coefficients(i, 2 + 2 * (lag - 1));
    }
    return a;
}

namespace {

Eigen::MatrixXd var_design(const ts::AlignedPair& pair, int p, std::size_t start) {
    const std::size_t rows = pair.size() - start;
    Eigen::MatrixXd x(rows, 1 + 2 * p);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t t = start + r;
        x(r, 0) = 1.0;
        for (int l = 1; l <= p; ++l) {
            x(r, 1 + 2 * (l - 1)) = pair.a[t - l];
            x(r, 2 + 2 * (l - 1)) = pair.b[t - l];
        }
    }
    return x;
}

}  // namespace

VarFit fit_var(const ts::AlignedPair& pair, int p, std::optional<std::size_t> sample_start) {
    if (p < 1) raise(ErrorCode::Precondition, "VAR order must be at least 1");
    const std::size_t start = sample_start.value_or(static_cast<std::size_t>(p));
    if (start < static_cast<std::size_t>(p)) raise(ErrorCode::Precondition, "VAR sample starts before p lags");
    const std::size_t n = pair.size();
    if (n <= start || n - start <= static_cast<std::size_t>(2 * p + 1)) {
        raise(ErrorCode::InsufficientData, "VAR(" + std::to_string(p) + ") needs more than " +
                                               std::to_string(2 * p + 1) + " effective observations");
    }
    const std::size_t rows = n - start;

    VarFit out;
    out.p = p;
    out.n_effective = rows;
    out.design = var_design(pair, p, start);
    Eigen::MatrixXd y(rows, 2);
    for (std::size_t r = 0; r < rows; ++r) {
        y(r, 0) = pair.a[start + r];
        y(r, 1) = pair.b[start + r];
    }
    const auto f = ols::fit(out.design, y);
    out.coefficients = f.coefficients.transpose();
    out.residuals = f.residuals;
    out.rss = {f.residuals.col(0).squaredNorm(), f.residuals.col(1).squaredNorm()};

    const Eigen::Matrix2d sigma = (f.residuals.transpose() * f.residuals) / static_cast<double>(rows);
    const double det = sigma.determinant();
    const double params = 2.0 * (1.0 + 2.0 * p);
    out.aic = det > 0.0 ? std::log(det) + 2.0 * params / static_cast<double>(rows) : -kInf;
    return out;
}

std::vector<double> aic_by_lag(const ts::AlignedPair& pair, int p_max) {
    if (p_max < 1) raise(ErrorCode::Precondition, "p_max must be at least 1");
    std::vector<double> out;
    for (int p = 1; p <= p_max; ++p) {
        out.push_back(fit_var(pair, p, static_cast<std::size_t>(p_max)).aic);
    }
    return out;
}

int select_lag(const ts::AlignedPair& pair, int p_max) {
    const auto aics = aic_by_lag(pair, p_max);
    int best = 1;
    for (int p = 2; p <= p_max; ++p) {
        if (aics[static_cast<std::size_t>(p - 1)] < aics[static_cast<std::size_t>(best - 1)]) best = p;
    }
    return best;
}

LmResult lm_autocorrelation_test(const VarFit& fit, int h) {
    if (h < 1) raise(ErrorCode::Precondition, "LM test order must be at least 1");
    const Eigen::Index rows = fit.residuals.rows();
    const Eigen::Index base = fit.design.cols();
    if (rows <= base + 2 * h) {
        raise(ErrorCode::InsufficientData, "too few residuals for LM test of order " + std::to_string(h));
    }
    Eigen::MatrixXd x(rows, base + 2 * h);
    x.leftCols(base) = fit.design;
    for (Eigen::Index t = 0; t < rows; ++t) {
        for (int i = 1; i <= h; ++i) {
            for (int j = 0; j < 2; ++j) {
                x(t, base + 2 * (i - 1) + j) = t - i >= 0 ? fit.residuals(t - i, j) : 0.0;
            }
        }
    }
    const auto aux = ols::fit(x, fit.residuals);
    const double T = static_cast<double>(rows);
    const Eigen::Matrix2d sigma_u = (fit.residuals.transpose() * fit.residuals) / T;
    const Eigen::Matrix2d sigma_e = (aux.residuals.transpose() * aux.residuals) / T;
    if (!(sigma_u.determinant() > 0.0)) raise(ErrorCode::DegenerateFit, "VAR residual covariance is singular");

    LmResult out;
    out.statistic = T * (2.0 - (sigma_u.inverse() * sigma_e).trace());
    out.df = 4 * h;
    out.p_value = stats::chi_square_upper_tail(out.statistic, out.df);
    return out;
}

Eigen::MatrixXd companion_matrix(const VarFit& fit) {
    const int k = 2 * fit.p;
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(k, k);
    for (int l = 1; l <= fit.p; ++l) c.block(0, 2 * (l - 1), 2, 2) = fit.lag_matrix(l);
    if (fit.p > 1) c.bottomLeftCorner(k - 2, k - 2).setIdentity();
    return c;
}

Stability stability_check(const VarFit& fit) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion_matrix(fit), false);
    Stability out;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) out.moduli.push_back(std::abs(solver.eigenvalues()(i)));
    std::sort(out.moduli.begin(), out.moduli.end(), std::greater<>());
    out.max_modulus = out.moduli.empty() ? 0.0 : out.moduli.front();
    out.stable = out.max_modulus < 1.0;
    return out;
}

// ---------------------------------------------------------------------------
// Granger
// ---------------------------------------------------------------------------

GrangerResult granger_test(const ts::AlignedPair& pair, Direction direction, int lag, const std::string& label_a,
                           const std::string& label_b) {
    if (lag < 1) raise(ErrorCode::Precondition, "Granger lag must be at least 1");
    const std::size_t n = pair.size();
    if (n <= static_cast<std::size_t>(lag) || n - lag <= static_cast<std::size_t>(2 * lag + 1)) {
        raise(ErrorCode::InsufficientData, "Granger test at lag " + std::to_string(lag) + " needs more data");
    }
    const auto& cause = direction == Direction::AToB ? pair.a : pair.b;
    const auto& effect = direction == Direction::AToB ? pair.b : pair.a;
    const std::size_t rows = n - lag;

    Eigen::MatrixXd xu(rows, 1 + 2 * lag);
    Eigen::VectorXd y(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t t = lag + r;
        y(r) = effect[t];
        xu(r, 0) = 1.0;
        for (int l = 1; l <= lag; ++l) {
            xu(r, l) = effect[t - l];
            xu(r, lag + l) = cause[t - l];
        }
    }
    const Eigen::MatrixXd xr = xu.leftCols(1 + lag);
    const auto unrestricted = ols::fit(xu, y);
    const auto restricted = ols::fit(xr, y);

    GrangerResult out;
    out.cause = direction == Direction::AToB ? label_a : label_b;
    out.effect = direction == Direction::AToB ? label_b : label_a;
    out.lag = lag;
    out.df_num = lag;
    out.df_den = static_cast<int>(rows) - 2 * lag - 1;
    out.rss_unrestricted = unrestricted.rss;
    out.rss_restricted = std::max(restricted.rss, unrestricted.rss);
    if (unrestricted.rss <= 1e-13 * centered_ss(std::span<const double>(y.data(), y.size()))) {
        raise(ErrorCode::DegenerateFit, "unrestricted Granger regression fits exactly");
    }
    out.f_stat = ((out.rss_restricted - out.rss_unrestricted) / lag) / (out.rss_unrestricted / out.df_den);
    out.p_value = stats::f_upper_tail(out.f_stat, out.df_num, out.df_den);
    return out;
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

Rq2Record run_rq2_pipeline(const ts::AlignedPair& full_pair, const std::string& views_label,
                           const std::string& crossings_label, const Rq2Options& options) {
    Rq2Record rec;
    rec.views_label = views_label;
    rec.crossings_label = crossings_label;

    ts::AlignedPair pair;
    for (std::size_t i = 0; i < full_pair.size(); ++i) {
        const auto d = full_pair.dates[i];
        if (options.window_start && d < *options.window_start) continue;
        if (options.window_end && d > *options.window_end) continue;
        pair.dates.push_back(d);
        pair.a.push_back(full_pair.a[i]);
        pair.b.push_back(full_pair.b[i]);
    }
    rec.n_aligned = pair.size();
    if (pair.size() == 0) raise(ErrorCode::AlignmentEmpty, "no aligned observations inside the analysis window");

    const int adf_lag = options.adf_max_lag.value_or(schwert_max_lag(pair.size()));
    bool valid = true;
    auto run_adf = [&](const std::vector<double>& y, const std::string& label) -> std::optional<AdfResult> {
        try {
            auto r = adf_test(y, adf_lag);
            if (!r.reject_at_5pct) {
                valid = false;
                rec.diagnostics.push_back("ADF does not reject a unit root for " + label);
            }
            return r;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Degenerate) throw;
            rec.halted = true;
            rec.diagnostics.push_back("ADF on " + label + ": " + e.what());
            return std::nullopt;
        }
    };
    rec.adf_views = run_adf(pair.a, views_label);
    rec.adf_crossings = run_adf(pair.b, crossings_label);
    if (rec.halted) return rec;

    try {
        rec.pearson = correlate(pair, CorrelationMethod::Pearson).coefficient;
    } catch (const Error&) {
    }

    // largest order with n - p > 2p + 1
    const int feasible = static_cast<int>((static_cast<long>(pair.size()) - 2) / 3);
    int p_max = options.p_max;
    if (p_max > feasible) {
        p_max = std::max(1, feasible);
        rec.diagnostics.push_back("lag search capped at " + std::to_string(p_max) + " by sample size");
    }
    rec.selected_lag = select_lag(pair, p_max);
    const auto fit = fit_var(pair, rec.selected_lag);

    try {
        rec.lm = lm_autocorrelation_test(fit, options.lm_order);
        if (rec.lm->p_value < options.significance) {
            valid = false;
            rec.diagnostics.push_back("LM test rejects no residual autocorrelation");
        }
    } catch (const Error& e) {
        if (e.code() != ErrorCode::InsufficientData && e.code() != ErrorCode::DegenerateFit) throw;
        valid = false;
        rec.diagnostics.push_back(std::string("LM test unavailable: ") + e.what());
    }

    rec.stability = stability_check(fit);
    if (!rec.stability->stable) {
        valid = false;
        rec.diagnostics.push_back("VAR is not stable (max modulus " + std::to_string(rec.stability->max_modulus) + ")");
    }

    rec.crossings_to_views = granger_test(pair, Direction::BToA, rec.selected_lag, views_label, crossings_label);
    rec.views_to_crossings = granger_test(pair, Direction::AToB, rec.selected_lag, views_label, crossings_label);
    rec.valid = valid;
    return rec;
}

Rq2Record run_rq2_pipeline(const metrics::ProportionSeries& views, const ts::DailySeries& crossings,
                           const Rq2Options& options) {
    const auto pair = ts::align(views.present(), crossings);
    return run_rq2_pipeline(pair, views.key.label(), crossings.label(), options);
}

}  // namespace wikimig::econ
