#pragma once

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>

namespace fxrp::detail {

inline double clamp_prob(double p) { return std::clamp(p, 0.0, 1.0); }

/// P(X > x) for X ~ chi-squared(df).
inline double chi2_sf(double x, double df) {
    if (!(x > 0.0)) return 1.0;
    if (!std::isfinite(x)) return 0.0;
    return clamp_prob(boost::math::cdf(boost::math::complement(boost::math::chi_squared(df), x)));
}

/// Two-tail p-value of a Student-t statistic.
inline double student_t_two_tail(double t, double df) {
    if (!std::isfinite(t)) return 0.0;
    boost::math::students_t dist(df);
    return clamp_prob(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

/// Two-tail p-value of a standard-normal statistic.
inline double normal_two_tail(double z) {
    if (!std::isfinite(z)) return 0.0;
    return clamp_prob(std::erfc(std::abs(z) / std::sqrt(2.0)));
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace fxrp::detail
