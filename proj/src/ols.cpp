#include "wikimig/ols.hpp"

#include <cmath>
#include <string>

#include "wikimig/error.hpp"

namespace wikimig::ols {

namespace {

/// QR of X with every column scaled to unit norm, so the rank decision does not
/// depend on the units of the regressors.
struct ScaledQr {
    Eigen::VectorXd inv_norms;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
};

ScaledQr decompose(const Eigen::MatrixXd& x) {
    if (x.rows() <= x.cols()) {
        raise(ErrorCode::InsufficientData, std::to_string(x.rows()) + " observations for " +
                                               std::to_string(x.cols()) + " regressors");
    }
    ScaledQr out;
    out.inv_norms.resize(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double norm = x.col(j).norm();
        if (!(norm > 0.0) || !std::isfinite(norm)) {
            raise(ErrorCode::SingularDesign, "regressor column " + std::to_string(j) + " is zero or non-finite");
        }
        out.inv_norms(j) = 1.0 / norm;
    }
    out.qr.setThreshold(1e-10);
    out.qr.compute(x * out.inv_norms.asDiagonal());
    if (out.qr.rank() < x.cols()) {
        raise(ErrorCode::SingularDesign, "design matrix has rank " + std::to_string(out.qr.rank()) + " < " +
                                             std::to_string(x.cols()));
    }
    return out;
}

}  // namespace

Fit fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, bool with_inverse) {
    const auto d = decompose(x);
    Fit out;
    out.coefficients = d.inv_norms.asDiagonal() * d.qr.solve(y);
    out.residuals = y - x * out.coefficients;
    out.rss = out.residuals.squaredNorm();
    if (with_inverse) {
        // (X'X)^{-1} = D P R^{-1} R^{-T} P' D for the scaled problem
        const auto k = x.cols();
        Eigen::MatrixXd r = d.qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
        Eigen::MatrixXd r_inv = r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
        Eigen::MatrixXd inner = d.qr.colsPermutation() * (r_inv * r_inv.transpose()) *
                                d.qr.colsPermutation().transpose();
        out.xtx_inverse = d.inv_norms.asDiagonal() * inner * d.inv_norms.asDiagonal();
    }
    return out;
}

MultiFit fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    const auto d = decompose(x);
    MultiFit out;
    out.coefficients = d.inv_norms.asDiagonal() * d.qr.solve(y);
    out.residuals = y - x * out.coefficients;
    return out;
}

}  // namespace wikimig::ols
