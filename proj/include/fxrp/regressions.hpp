#pragma once

// Univariate forward-premium regressions and the premium existence /
// time-variation tests built on them.

#include "fxrp/detail/distributions.hpp"
#include "fxrp/diagnostics.hpp"
#include "fxrp/error.hpp"
#include "fxrp/timeseries.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace fxrp {

struct OlsFit {
    double alpha = 0.0;
    double beta = 0.0;
    double se_alpha = 0.0;
    double se_beta = 0.0;
    double t_alpha = 0.0;
    double t_beta = 0.0;
    double p_two_tail_beta = 1.0;
    std::vector<double> residuals;
    double r_squared = 0.0;
    std::size_t n = 0;
};

struct OlsOptions {
    bool robust = false;  // White (HC0) standard errors
};

/// y = alpha + beta x + e by least squares; p-values from Student-t(n-2).
inline OlsFit ols(std::span<const double> y, std::span<const double> x, OlsOptions opts = {}) {
    if (y.size() != x.size()) fail(ErrorKind::parameter, "ols: y and x lengths differ");
    if (y.size() < 3) fail(ErrorKind::insufficient_data, "ols needs n >= 3");
    const std::size_t n = y.size();
    const double nn = static_cast<double>(n);

    double xbar = 0.0, ybar = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        xbar += x[i];
        ybar += y[i];
    }
    xbar /= nn;
    ybar /= nn;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - xbar;
        const double dy = y[i] - ybar;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    double x_scale = 0.0;
    for (double v : x) x_scale = std::max(x_scale, std::abs(v));
    if (!(sxx > 1e-28 * nn * std::max(1.0, x_scale * x_scale))) fail(ErrorKind::singular_design, "ols: regressor is constant");

    OlsFit f;
    f.n = n;
    f.beta = sxy / sxx;
    f.alpha = ybar - f.beta * xbar;
    f.residuals.resize(n);
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        f.residuals[i] = y[i] - f.alpha - f.beta * x[i];
        ssr += f.residuals[i] * f.residuals[i];
    }
    const double s2 = ssr / (nn - 2.0);
    if (opts.robust) {
        // HC0 sandwich for the (alpha, beta) pair.
        double sum_x2 = 0.0;
        for (double v : x) sum_x2 += v * v;
        double m00 = 0.0, m01 = 0.0, m11 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e2 = f.residuals[i] * f.residuals[i];
            m00 += e2;
            m01 += e2 * x[i];
            m11 += e2 * x[i] * x[i];
        }
        // (X'X)^-1 = 1/(n sxx) [[sum x^2, -sum x], [-sum x, n]]
        const double det = nn * sxx;
        const double a00 = sum_x2 / det, a01 = -nn * xbar / det, a11 = nn / det;
        const double v00 = a00 * (a00 * m00 + a01 * m01) + a01 * (a00 * m01 + a01 * m11);
        const double v11 = a01 * (a01 * m00 + a11 * m01) + a11 * (a01 * m01 + a11 * m11);
        f.se_alpha = std::sqrt(v00);
        f.se_beta = std::sqrt(v11);
    } else {
        f.se_beta = std::sqrt(s2 / sxx);
        f.se_alpha = std::sqrt(s2 * (1.0 / nn + xbar * xbar / sxx));
    }
    f.t_beta = f.beta / f.se_beta;
    f.t_alpha = f.alpha / f.se_alpha;
    f.p_two_tail_beta = detail::student_t_two_tail(f.t_beta, nn - 2.0);
    f.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 0.0;
    return f;
}

struct FamaFits {
    OlsFit fit1;  // forward error on forward-spot differential
    OlsFit fit2;  // spot change on forward-spot differential
};

struct AdjustedFits {
    OlsFit fit3;  // minus forward error on the differential
    OlsFit fit4;  // forward error minus spot change on the differential
};

inline FamaFits run_fama(const AlignedSeries& s, OlsOptions opts = {}) {
    return {ols(s.fwd_err, s.fs_diff, opts), ols(s.spot_chg, s.fs_diff, opts)};
}

inline AdjustedFits run_adjusted(const AlignedSeries& s, OlsOptions opts = {}) {
    const std::size_t T = s.t_count();
    std::vector<double> neg_fe(T), fe_minus_ds(T);
    for (std::size_t t = 0; t < T; ++t) {
        neg_fe[t] = -s.fwd_err[t];
        fe_minus_ds[t] = s.fwd_err[t] - s.spot_chg[t];
    }
    return {ols(neg_fe, s.fs_diff, opts), ols(fe_minus_ds, s.fs_diff, opts)};
}

/// One-tail p for H1: beta > 0 from a two-tail p and the sign of t.
inline double one_tail_upper(double p_two_tail, double t) {
    return t > 0.0 ? p_two_tail / 2.0 : 1.0 - p_two_tail / 2.0;
}

struct PremiaTimeVariationVerdict {
    OlsFit beta3_fit;
    OlsFit beta4_fit;
    double p_beta3_two_tail = 1.0;
    double p_beta4_one_tail = 1.0;
    TestResult resid_adf_beta3;
    TestResult resid_adf_beta4;
    double reject_level = 0.05;
    bool premia_exist_and_vary = false;
};

/// H1: beta3 != 0 (forward rates differ from future spots) and H1: beta4 > 0
/// (premium variance exceeds expected-depreciation variance), each with an
/// ADF stationarity check on the regression disturbance.
inline PremiaTimeVariationVerdict test_time_varying_premia(const AlignedSeries& s, double level = 0.05,
                                                           OlsOptions opts = {}) {
    if (!(level > 0.0 && level < 1.0)) fail(ErrorKind::parameter, "significance level must lie in (0, 1)");
    auto adj = run_adjusted(s, opts);
    PremiaTimeVariationVerdict v;
    v.reject_level = level;
    v.p_beta3_two_tail = adj.fit3.p_two_tail_beta;
    v.p_beta4_one_tail = one_tail_upper(adj.fit4.p_two_tail_beta, adj.fit4.t_beta);
    v.resid_adf_beta3 = adf_test(adj.fit3.residuals);
    v.resid_adf_beta4 = adf_test(adj.fit4.residuals);
    v.beta3_fit = std::move(adj.fit3);
    v.beta4_fit = std::move(adj.fit4);
    v.premia_exist_and_vary = v.p_beta3_two_tail < level && v.p_beta4_one_tail < level &&
                              v.resid_adf_beta3.p_value < level && v.resid_adf_beta4.p_value < level;
    return v;
}

}  // namespace fxrp
