#pragma once

#include "fxrp/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>

namespace fxrp::detail {

struct LeastSquaresFit {
    Eigen::VectorXd coef;
    Eigen::VectorXd se;
    Eigen::VectorXd resid;
    double ssr = 0.0;
    double sigma2 = 0.0;  // ssr / (n - k)
    double r_squared = 0.0;  // centered
    double loglik = 0.0;  // Gaussian, sigma^2 at its MLE ssr/n
    Eigen::Index n = 0;
    Eigen::Index k = 0;
};

/// Multiple regression y = X b + e via column-pivoted QR. Throws on rank
/// deficiency.
inline LeastSquaresFit least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    const Eigen::Index n = X.rows();
    const Eigen::Index k = X.cols();
    if (y.size() != n) fail(ErrorKind::parameter, "design/response length mismatch");
    if (n <= k) fail(ErrorKind::insufficient_data, "need more observations than regressors");

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-12);
    if (qr.rank() < k) fail(ErrorKind::singular_design, "rank-deficient design (rank " + std::to_string(qr.rank()) +
                                                            " < " + std::to_string(k) + ")");

    LeastSquaresFit fit;
    fit.n = n;
    fit.k = k;
    fit.coef = qr.solve(y);
    fit.resid = y - X * fit.coef;
    fit.ssr = fit.resid.squaredNorm();
    fit.sigma2 = fit.ssr / static_cast<double>(n - k);

    // (X'X)^-1 = P R^-1 R^-T P^T
    const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
    const Eigen::MatrixXd cov_unpermuted = Rinv * Rinv.transpose();
    const Eigen::MatrixXd xtx_inv = qr.colsPermutation() * cov_unpermuted * qr.colsPermutation().transpose();
    fit.se = (xtx_inv.diagonal() * fit.sigma2).cwiseSqrt();

    const double ybar = y.mean();
    const double tss = (y.array() - ybar).square().sum();
    fit.r_squared = tss > 0.0 ? 1.0 - fit.ssr / tss : 0.0;
    const double nn = static_cast<double>(n);
    fit.loglik = -0.5 * nn * (std::log(2.0 * M_PI) + std::log(fit.ssr / nn) + 1.0);
    return fit;
}

}  // namespace fxrp::detail
