#pragma once

// Descriptive statistics and the residual/series tests used across the
// analysis: moments, Jarque-Bera, ADF (intercept + trend), correlogram,
// Ljung-Box and Breusch-Godfrey.

#include "fxrp/detail/distributions.hpp"
#include "fxrp/detail/least_squares.hpp"
#include "fxrp/error.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fxrp {

struct MomentSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;  // n-1 denominator
    std::optional<double> skewness;         // empty for a constant series
    std::optional<double> excess_kurtosis;  // empty for a constant series
};

struct TestResult {
    std::string test;
    double statistic = 0.0;
    double p_value = 1.0;
    std::map<std::string, double> meta;
};

inline MomentSummary moments(std::span<const double> x) {
    if (x.size() < 2) fail(ErrorKind::insufficient_data, "moments need at least 2 values");
    const double n = static_cast<double>(x.size());
    double mean = 0.0, max_abs = 0.0;
    for (double v : x) {
        mean += v;
        max_abs = std::max(max_abs, std::abs(v));
    }
    mean /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = v - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    MomentSummary out;
    out.n = x.size();
    out.mean = mean;
    out.sd = std::sqrt(m2 / (n - 1.0));
    m2 /= n;
    m3 /= n;
    m4 /= n;
    // Rounding in the mean leaves O(eps * |x|) deviations in a constant series.
    const double noise = 16.0 * std::numeric_limits<double>::epsilon() * max_abs;
    if (m2 > noise * noise) {
        out.skewness = m3 / std::pow(m2, 1.5);
        out.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    } else {
        out.sd = 0.0;
    }
    return out;
}

/// n/6 (S^2 + K^2/4), chi-squared(2) p-value.
inline TestResult jarque_bera_from_moments(std::size_t n, double skewness, double excess_kurtosis) {
    TestResult r;
    r.test = "jarque_bera";
    r.statistic = static_cast<double>(n) / 6.0 * (skewness * skewness + excess_kurtosis * excess_kurtosis / 4.0);
    r.p_value = detail::chi2_sf(r.statistic, 2.0);
    r.meta["df"] = 2.0;
    r.meta["n"] = static_cast<double>(n);
    return r;
}

inline TestResult jarque_bera(std::span<const double> x) {
    if (x.size() < 8) fail(ErrorKind::insufficient_data, "Jarque-Bera needs at least 8 values");
    auto m = moments(x);
    if (!m.skewness) fail(ErrorKind::degenerate_input, "Jarque-Bera on a constant series");
    return jarque_bera_from_moments(m.n, *m.skewness, *m.excess_kurtosis);
}

// ---------------------------------------------------------------------------
// ADF

namespace detail {

// MacKinnon (1994) response-surface coefficients for the tau statistic with
// constant and trend, one I(1) series (as tabulated in statsmodels'
// adfvalues.py). p = Phi(poly(tau)).
struct MacKinnonCt {
    static constexpr double tau_max = 0.7;
    static constexpr double tau_min = -16.18;
    static constexpr double tau_star = -2.89;
    static constexpr std::array<double, 3> small_p = {3.2512, 1.6047, 0.049588};
    static constexpr std::array<double, 4> large_p = {2.5261, 0.61654, -0.37956, -0.060285};
};

template <std::size_t N>
double polyval_ascending(const std::array<double, N>& c, double x) {
    double acc = 0.0;
    for (std::size_t i = N; i-- > 0;) acc = acc * x + c[i];
    return acc;
}

}  // namespace detail

/// Approximate asymptotic p-value for an ADF t-ratio (intercept and trend).
inline double adf_pvalue_ct(double tau) {
    using C = detail::MacKinnonCt;
    if (tau > C::tau_max) return 1.0;
    if (tau < C::tau_min) return 0.0;
    const double z = tau <= C::tau_star ? detail::polyval_ascending(C::small_p, tau)
                                        : detail::polyval_ascending(C::large_p, tau);
    return detail::clamp_prob(detail::normal_cdf(z));
}

inline int adf_default_max_lag(std::size_t n) {
    return static_cast<int>(std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
}

struct AdfOptions {
    std::optional<int> max_lag;  // default: floor(12 (n/100)^(1/4))
    bool autolag = true;         // false: use max_lag itself
};

/// Augmented Dickey-Fuller regression with intercept and linear trend:
///   dx_t = a + b t + g x_{t-1} + sum_j d_j dx_{t-j} + e_t
/// The lag order minimises AIC over 0..max_lag on a common sample, then the
/// chosen regression is re-run on all usable observations. The statistic is
/// the t-ratio on g.
inline TestResult adf_test(std::span<const double> x, AdfOptions opts = {}) {
    const auto n = static_cast<int>(x.size());
    if (n < 20) fail(ErrorKind::insufficient_data, "ADF needs at least 20 observations");
    int max_lag = opts.max_lag.value_or(adf_default_max_lag(x.size()));
    if (max_lag < 0) fail(ErrorKind::parameter, "ADF max_lag must be non-negative");
    // need nobs > regressors: (n-1-L) > L + 3
    max_lag = std::min(max_lag, (n - 5) / 2);

    std::vector<double> dx(n - 1);
    for (int t = 0; t + 1 < n; ++t) dx[t] = x[t + 1] - x[t];

    // Regression on rows dx[first..n-2], `lags` lagged differences.
    const auto regress = [&](int first, int lags) {
        const int nobs = (n - 1) - first;
        Eigen::MatrixXd X(nobs, 3 + lags);
        Eigen::VectorXd y(nobs);
        for (int r = 0; r < nobs; ++r) {
            const int t = first + r;
            y(r) = dx[t];
            X(r, 0) = x[t];
            for (int j = 1; j <= lags; ++j) X(r, j) = dx[t - j];
            X(r, 1 + lags) = 1.0;
            X(r, 2 + lags) = static_cast<double>(r + 1);
        }
        return detail::least_squares(X, y);
    };

    int lag = max_lag;
    if (opts.autolag) {
        double best = std::numeric_limits<double>::infinity();
        for (int l = 0; l <= max_lag; ++l) {
            auto fit = regress(max_lag, l);
            const double aic = -2.0 * fit.loglik + 2.0 * static_cast<double>(fit.k);
            if (aic < best) {
                best = aic;
                lag = l;
            }
        }
    }
    auto fit = regress(lag, lag);
    TestResult r;
    r.test = "adf";
    r.statistic = fit.coef(0) / fit.se(0);
    r.p_value = adf_pvalue_ct(r.statistic);
    r.meta["lags"] = lag;
    r.meta["max_lag"] = max_lag;
    r.meta["nobs"] = static_cast<double>(fit.n);
    r.meta["intercept"] = 1;
    r.meta["trend"] = 1;
    return r;
}

// ---------------------------------------------------------------------------
// Correlogram

enum class SigLevel { none, p10, p05, p01 };

inline std::string_view to_string(SigLevel s) {
    switch (s) {
        case SigLevel::none: return "";
        case SigLevel::p10: return "*";
        case SigLevel::p05: return "**";
        case SigLevel::p01: return "***";
    }
    return "";
}

/// Two-sided critical z for the three conventional levels; other levels use
/// the exact normal quantile.
inline double critical_z(double level) {
    if (!(level > 0.0 && level < 1.0)) fail(ErrorKind::parameter, "significance level must lie in (0, 1)");
    if (std::abs(level - 0.10) < 1e-12) return 1.645;
    if (std::abs(level - 0.05) < 1e-12) return 1.960;
    if (std::abs(level - 0.01) < 1e-12) return 2.576;
    return boost::math::quantile(boost::math::complement(boost::math::normal(), level / 2.0));
}

/// z_{level/2} / sqrt(T): the +/- band for sample (partial) autocorrelations.
inline double significance_threshold(std::size_t T, double level) {
    return critical_z(level) / std::sqrt(static_cast<double>(T));
}

inline SigLevel classify(double value, std::size_t T) {
    const double a = std::abs(value);
    if (a > significance_threshold(T, 0.01)) return SigLevel::p01;
    if (a > significance_threshold(T, 0.05)) return SigLevel::p05;
    if (a > significance_threshold(T, 0.10)) return SigLevel::p10;
    return SigLevel::none;
}

/// True when `s` is at least as strong as the given level.
inline bool significant_at(SigLevel s, double level) {
    if (s == SigLevel::none) return false;
    const double p = s == SigLevel::p01 ? 0.01 : s == SigLevel::p05 ? 0.05 : 0.10;
    return p <= level + 1e-12;
}

/// Sample autocorrelations r_1..r_max_lag (lag 0 omitted).
inline std::vector<double> autocorrelations(std::span<const double> x, int max_lag) {
    const auto n = static_cast<int>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double c0 = 0.0;
    for (double v : x) c0 += (v - mean) * (v - mean);
    if (!(c0 > 0.0)) fail(ErrorKind::degenerate_input, "autocorrelation of a constant series");
    std::vector<double> ac(max_lag);
    for (int k = 1; k <= max_lag; ++k) {
        double ck = 0.0;
        for (int t = k; t < n; ++t) ck += (x[t] - mean) * (x[t - k] - mean);
        ac[k - 1] = ck / c0;
    }
    return ac;
}

/// Durbin-Levinson recursion over sample autocorrelations.
inline std::vector<double> partial_autocorrelations(std::span<const double> ac) {
    const auto K = static_cast<int>(ac.size());
    std::vector<double> pac(K);
    std::vector<double> phi(K + 1, 0.0), prev(K + 1, 0.0);
    double v = 1.0;
    for (int k = 1; k <= K; ++k) {
        double num = ac[k - 1];
        for (int j = 1; j < k; ++j) num -= prev[j] * ac[k - j - 1];
        const double kk = v > 0.0 ? num / v : 0.0;
        phi[k] = kk;
        for (int j = 1; j < k; ++j) phi[j] = prev[j] - kk * prev[k - j];
        v *= (1.0 - kk * kk);
        pac[k - 1] = kk;
        prev = phi;
    }
    return pac;
}

struct CorrelogramRow {
    int lag = 0;
    double pac = 0.0;
    double ac = 0.0;
    SigLevel pac_sig = SigLevel::none;
    SigLevel ac_sig = SigLevel::none;
};

inline std::vector<CorrelogramRow> correlogram(std::span<const double> x, int max_lag) {
    if (max_lag < 1) fail(ErrorKind::parameter, "correlogram max_lag must be >= 1");
    if (2 * static_cast<std::size_t>(max_lag) >= x.size())
        fail(ErrorKind::parameter, "correlogram max_lag must be below half the sample length");
    const auto ac = autocorrelations(x, max_lag);
    const auto pac = partial_autocorrelations(ac);
    std::vector<CorrelogramRow> rows;
    rows.reserve(max_lag);
    for (int k = 1; k <= max_lag; ++k)
        rows.push_back({k, pac[k - 1], ac[k - 1], classify(pac[k - 1], x.size()), classify(ac[k - 1], x.size())});
    return rows;
}

/// Q = T(T+2) sum_k r_k^2 / (T-k), chi-squared(lags - fitted_params).
inline TestResult ljung_box(std::span<const double> x, int lags, int fitted_params = 0) {
    if (lags <= fitted_params) fail(ErrorKind::parameter, "Ljung-Box lags must exceed fitted parameter count");
    if (lags < 1 || static_cast<std::size_t>(lags) >= x.size())
        fail(ErrorKind::parameter, "Ljung-Box lags must be in [1, T)");
    const auto ac = autocorrelations(x, lags);
    const double T = static_cast<double>(x.size());
    double q = 0.0;
    for (int k = 1; k <= lags; ++k) q += ac[k - 1] * ac[k - 1] / (T - k);
    q *= T * (T + 2.0);
    TestResult r;
    r.test = "ljung_box";
    r.statistic = q;
    r.p_value = detail::chi2_sf(q, lags - fitted_params);
    r.meta["lags"] = lags;
    r.meta["df"] = lags - fitted_params;
    return r;
}

/// Auxiliary regression of the residuals on the original regressors plus
/// `lags` lagged residuals (zero pre-sample); statistic T R^2, chi-squared(lags).
/// An intercept is added when the regressors lack a constant column.
inline TestResult breusch_godfrey(std::span<const double> residuals, const Eigen::MatrixXd& regressors, int lags = 2) {
    const auto T = static_cast<Eigen::Index>(residuals.size());
    if (lags < 1) fail(ErrorKind::parameter, "Breusch-Godfrey lags must be >= 1");
    if (regressors.cols() > 0 && regressors.rows() != T)
        fail(ErrorKind::parameter, "Breusch-Godfrey regressors must have one row per residual");

    bool has_const = false;
    for (Eigen::Index j = 0; j < regressors.cols(); ++j) {
        const auto col = regressors.col(j);
        if (col.maxCoeff() == col.minCoeff() && col(0) != 0.0) has_const = true;
    }
    const Eigen::Index k = regressors.cols() + (has_const ? 0 : 1);
    if (T <= k + lags) fail(ErrorKind::insufficient_data, "Breusch-Godfrey needs T > regressors + lags");

    Eigen::MatrixXd X(T, k + lags);
    if (regressors.cols() > 0) X.leftCols(regressors.cols()) = regressors;
    if (!has_const) X.col(regressors.cols()).setOnes();
    for (int j = 1; j <= lags; ++j)
        for (Eigen::Index t = 0; t < T; ++t) X(t, k + j - 1) = t >= j ? residuals[t - j] : 0.0;
    Eigen::VectorXd u = Eigen::Map<const Eigen::VectorXd>(residuals.data(), T);

    detail::LeastSquaresFit fit;
    try {
        fit = detail::least_squares(X, u);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::singular_design) fail(ErrorKind::numerical, "Breusch-Godfrey: " + std::string(e.what()));
        throw;
    }
    TestResult r;
    r.test = "breusch_godfrey";
    r.statistic = static_cast<double>(T) * std::max(0.0, fit.r_squared);
    r.p_value = detail::chi2_sf(r.statistic, lags);
    r.meta["lags"] = lags;
    r.meta["df"] = lags;
    return r;
}

}  // namespace fxrp
