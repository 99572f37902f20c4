#pragma once

#include <Eigen/Dense>

namespace wikimig::ols {

struct Fit {
    Eigen::VectorXd coefficients;
    Eigen::VectorXd residuals;
    double rss = 0.0;
    /// (X'X)^{-1}; only filled when requested.
    Eigen::MatrixXd xtx_inverse;
};

/// One regressor matrix shared by several responses (one column each).
struct MultiFit {
    Eigen::MatrixXd coefficients;  // regressors x responses
    Eigen::MatrixXd residuals;     // rows x responses
};

/// Least squares via column-pivoted QR. Throws Error(SingularDesign) when X is
/// rank deficient and Error(InsufficientData) when rows do not exceed columns.
Fit fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, bool with_inverse = false);
MultiFit fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

}  // namespace wikimig::ols
