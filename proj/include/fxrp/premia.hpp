#pragma once

#include "fxrp/error.hpp"
#include "fxrp/estimation.hpp"
#include "fxrp/state_space.hpp"

#include <algorithm>
#include <span>
#include <vector>

namespace fxrp {

/// Premium path implied by a fitted model and its residual decomposition.
struct PremiaSeries {
    std::vector<double> rp_hat;    // one-step predicted premium Z E_{t-1}(RP_t)
    std::vector<double> rp_filt;   // filtered premium Z E_t(RP_t)
    std::vector<double> re_hat;    // fe - rp_hat
    std::vector<double> a_hat;     // rp_hat - rp_sys
    std::vector<double> rp_sys;    // sum phi_i rp_hat_{t-i} + sum theta_j a_hat_{t-j}
    std::vector<double> combined;  // re_hat + a_hat (= fe - rp_sys)
    std::size_t burn_in = 0;       // leading entries of rp_sys using zero pre-sample values
};

/// Runs the filter at `spec` and decomposes fe into systematic premium, premium
/// innovation and rational error. Pre-sample terms of rp_sys are zero.
inline PremiaSeries extract_premia(const StateSpaceSpec& spec, std::span<const double> fe) {
    const auto filt = kalman_filter(spec, fe, stationary_init(spec));
    const std::size_t T = fe.size();
    PremiaSeries out;
    out.rp_hat.resize(T);
    out.rp_filt.resize(T);
    out.re_hat.resize(T);
    out.a_hat.resize(T);
    out.rp_sys.resize(T);
    out.combined.resize(T);
    out.burn_in = std::min<std::size_t>(T, static_cast<std::size_t>(std::max(spec.p, spec.q)));
    for (std::size_t t = 0; t < T; ++t) {
        out.rp_hat[t] = spec.Z.dot(filt.pred_mean[t]);
        out.rp_filt[t] = spec.Z.dot(filt.filt_mean[t]);
        out.re_hat[t] = fe[t] - out.rp_hat[t];
        double sys = 0.0;
        for (int i = 1; i <= spec.p; ++i)
            if (t >= static_cast<std::size_t>(i)) sys += spec.phi[i - 1] * out.rp_hat[t - i];
        for (int j = 1; j <= spec.q; ++j)
            if (t >= static_cast<std::size_t>(j)) sys += spec.theta[j - 1] * out.a_hat[t - j];
        out.rp_sys[t] = sys;
        out.a_hat[t] = out.rp_hat[t] - sys;
        out.combined[t] = out.re_hat[t] + out.a_hat[t];
    }
    return out;
}

/// Premia at a fitted state-space model's parameters.
inline PremiaSeries extract_premia(const FittedModel& fitted, std::span<const double> fe) {
    if (fitted.kind != ModelKind::state_space)
        fail(ErrorKind::parameter, "extract_premia expects a state-space fit (R > 0), not a classical ARMA fit");
    return extract_premia(fitted.spec, fe);
}

}  // namespace fxrp
