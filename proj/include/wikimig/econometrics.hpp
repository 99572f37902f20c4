#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wikimig/metrics.hpp"
#include "wikimig/rank.hpp"
#include "wikimig/timeseries.hpp"

namespace wikimig::econ {

enum class CorrelationMethod { Pearson, Spearman };

/// Pearson p-values use the same t-approximation as Spearman.
rank::Correlation correlate(const ts::AlignedPair& pair, CorrelationMethod method);

// ---------------------------------------------------------------------------
// Augmented Dickey-Fuller, constant only:
//   dy_t = alpha + gamma * y_{t-1} + sum_{i=1..k} beta_i * dy_{t-i} + e_t
// ---------------------------------------------------------------------------

struct AdfResult {
    double statistic = 0.0;
    int lag_used = 0;
    std::size_t n_obs = 0;
    double critical_value_5pct = 0.0;
    /// Asymptotic MacKinnon (1994) approximation.
    double p_value = 1.0;
    bool reject_at_5pct = false;
};

/// MacKinnon (2010) response surface for the constant-only tau statistic:
/// cv(T) = b0 + b1/T + b2/T^2 + b3/T^3. `level` is one of 0.01, 0.05, 0.10.
double adf_critical_value(std::size_t n_obs, double level);
double adf_p_value(double statistic);

/// The lag k is chosen by AIC over 0..max_lag on a common sample, then the test
/// regression is re-run with k on all usable observations.
/// Throws Error(InsufficientData) when y.size() < max_lag + 10, Error(Degenerate)
/// for a constant series.
AdfResult adf_test(std::span<const double> y, int max_lag);

/// Default ADF lag cap: floor(12 * (n/100)^(1/4)).
int schwert_max_lag(std::size_t n);

// ---------------------------------------------------------------------------
// Bivariate VAR(p) with intercept
// ---------------------------------------------------------------------------

struct VarFit {
    int p = 0;
    /// Row per equation (0 = pair.a, 1 = pair.b); columns are
    /// [intercept, a_{t-1}, b_{t-1}, ..., a_{t-p}, b_{t-p}].
    Eigen::MatrixXd coefficients;
    /// n_effective x 2.
    Eigen::MatrixXd residuals;
    /// Regressor matrix used for the fit (n_effective x (1 + 2p)).
    Eigen::MatrixXd design;
    std::array<double, 2> rss{};
    double aic = 0.0;
    std::size_t n_effective = 0;

    /// 2x2 block A_lag with A(i, j) = effect of variable j at that lag on equation i.
    Eigen::Matrix2d lag_matrix(int lag) const;
};

/// Uses observations t = sample_start..n-1 (sample_start >= p; default p) so
/// different orders can be compared on one sample.
/// Throws Error(InsufficientData) when n_effective <= 2p + 1, Error(SingularDesign).
VarFit fit_var(const ts::AlignedPair& pair, int p, std::optional<std::size_t> sample_start = std::nullopt);

/// argmin of AIC over p = 1..p_max, every order fitted on the sample that starts
/// at p_max. Ties go to the smaller p.
int select_lag(const ts::AlignedPair& pair, int p_max);
std::vector<double> aic_by_lag(const ts::AlignedPair& pair, int p_max);

struct LmResult {
    double statistic = 0.0;
    int df = 0;
    double p_value = 1.0;
};

/// Breusch-Godfrey type LM test: regress the VAR residuals on the original
/// regressors plus h lagged residual vectors (zeros before the sample);
/// LM = T (K - tr(Sigma_u^{-1} Sigma_e)), chi-square with 4h degrees of freedom.
LmResult lm_autocorrelation_test(const VarFit& fit, int h);

struct Stability {
    double max_modulus = 0.0;
    bool stable = false;
    std::vector<double> moduli;  // sorted descending
};

/// Eigenvalues of the 2p x 2p companion matrix; stable iff all moduli < 1.
Stability stability_check(const VarFit& fit);
Eigen::MatrixXd companion_matrix(const VarFit& fit);

enum class Direction { AToB, BToA };

struct GrangerResult {
    std::string cause;
    std::string effect;
    int lag = 0;
    double f_stat = 0.0;
    double p_value = 1.0;
    int df_num = 0;
    int df_den = 0;
    double rss_restricted = 0.0;
    double rss_unrestricted = 0.0;
};

/// F = ((RSS_r - RSS_u)/lag) / (RSS_u/(n_eff - 2 lag - 1)); the restricted
/// regression drops the cause's lags. Throws Error(DegenerateFit) when RSS_u = 0.
GrangerResult granger_test(const ts::AlignedPair& pair, Direction direction, int lag,
                           const std::string& label_a = "a", const std::string& label_b = "b");

// ---------------------------------------------------------------------------
// Full per-pair workflow
// ---------------------------------------------------------------------------

struct Rq2Options {
    int p_max = 30;
    /// Unset: Schwert rule on the aligned length.
    std::optional<int> adf_max_lag;
    int lm_order = 10;
    double significance = 0.05;
    std::optional<ts::Day> window_start;
    std::optional<ts::Day> window_end;
};

struct Rq2Record {
    std::string views_label;
    std::string crossings_label;
    std::size_t n_aligned = 0;
    std::optional<AdfResult> adf_views;
    std::optional<AdfResult> adf_crossings;
    int selected_lag = 0;
    std::optional<LmResult> lm;
    std::optional<Stability> stability;
    std::optional<GrangerResult> crossings_to_views;
    std::optional<GrangerResult> views_to_crossings;
    std::optional<double> pearson;
    /// All diagnostics passed: both series stationary, no residual autocorrelation, stable VAR.
    bool valid = false;
    /// The workflow stopped early; `diagnostics` says why.
    bool halted = false;
    std::vector<std::string> diagnostics;
};

/// ADF on both series, AIC lag selection, LM and stability diagnostics, then
/// Granger tests in both directions at the selected lag. Granger results are
/// still reported when a diagnostic fails, with `valid` cleared.
Rq2Record run_rq2_pipeline(const metrics::ProportionSeries& views, const ts::DailySeries& crossings,
                           const Rq2Options& options = {});
Rq2Record run_rq2_pipeline(const ts::AlignedPair& pair, const std::string& views_label,
                           const std::string& crossings_label, const Rq2Options& options = {});

}  // namespace wikimig::econ
