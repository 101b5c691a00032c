#pragma once

#include "fxrp/error.hpp"
#include "fxrp/state_space.hpp"
#include "fxrp/timeseries.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace fxrp {

/// Expected depreciation component for full market simulation:
///   ds_e_{t+1} = loading * rp_t + N(0, sd^2)
struct ExpectedSpotChange {
    double loading = 0.0;
    double sd = 0.0;
};

struct SimulatedPath {
    std::vector<double> fe;  // Z RP_t + re_t
    std::vector<double> rp;  // Z RP_t
    std::vector<double> re;  // observation disturbance of month t
    std::vector<double> a;   // state shock drawn with re[t]; enters RP_{t+1}
    std::optional<std::vector<double>> spot_chg_e;  // ds_e_{t+1}
};

namespace detail {

/// Symmetric square root of a PSD matrix (negative eigenvalues clipped).
inline Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& V) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(V);
    const Eigen::VectorXd d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * d.asDiagonal();
}

}  // namespace detail

/// Draws a path of the state-space model from its stationary distribution.
/// Reproducible for a given seed.
inline SimulatedPath simulate(const StateSpaceSpec& spec, std::size_t T, std::uint64_t seed,
                              std::optional<ExpectedSpotChange> dse = std::nullopt) {
    if (!noise_covariance_is_psd(spec.R, spec.Q, spec.C))
        fail(ErrorKind::covariance_domain, "simulate: noise covariance is not positive semidefinite");
    const auto init = stationary_init(spec);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;

    const Eigen::Index m = spec.m();
    const Eigen::MatrixXd L0 = detail::psd_sqrt(init.var0);
    Eigen::VectorXd u(m);
    for (Eigen::Index i = 0; i < m; ++i) u(i) = z(rng);
    Eigen::VectorXd state = init.mean0 + L0 * u;

    // (re, a) = [sqrt(R), 0; C/sqrt(R), sqrt(Q - C^2/R)] (z1, z2)
    const double sr = std::sqrt(spec.R);
    const double load = spec.R > 0.0 ? spec.C / sr : 0.0;
    const double resid_sd = std::sqrt(std::max(0.0, spec.Q - load * load));

    SimulatedPath path;
    path.fe.resize(T);
    path.rp.resize(T);
    path.re.resize(T);
    path.a.resize(T);
    if (dse) path.spot_chg_e.emplace(T);
    for (std::size_t t = 0; t < T; ++t) {
        const double z1 = z(rng);
        const double z2 = z(rng);
        const double re = sr * z1;
        const double a = load * z1 + resid_sd * z2;
        const double rp = spec.Z.dot(state);
        path.rp[t] = rp;
        path.re[t] = re;
        path.a[t] = a;
        path.fe[t] = rp + re;
        if (dse) (*path.spot_chg_e)[t] = dse->loading * rp + dse->sd * z(rng);
        state = spec.Phi * state + spec.Theta * a;
    }
    return path;
}

/// Turns simulated components into monthly spot/forward quotes (levels) whose
/// aligned series reproduces them: f_t - s_t = rp_t + ds_e_{t+1} and
/// s_{t+1} - s_t = ds_e_{t+1} - re_t. Returns T + 1 observations; the last
/// month's forward is set equal to its spot since only that spot is used.
inline std::vector<RateObservation> synthesize_rates(const SimulatedPath& path, YearMonth start,
                                                     double initial_spot = 1.6) {
    if (!(initial_spot > 0.0)) fail(ErrorKind::domain, "initial spot must be positive");
    const std::size_t T = path.fe.size();
    std::vector<RateObservation> obs;
    obs.reserve(T + 1);
    double ls = std::log(initial_spot);
    YearMonth d = start;
    for (std::size_t t = 0; t < T; ++t) {
        const double dse = path.spot_chg_e ? (*path.spot_chg_e)[t] : 0.0;
        const double lf = ls + path.rp[t] + dse;
        obs.push_back({d, std::exp(ls), std::exp(lf)});
        ls = ls + dse - path.re[t];
        d = d.next();
    }
    obs.push_back({d, std::exp(ls), std::exp(ls)});
    return obs;
}

}  // namespace fxrp
