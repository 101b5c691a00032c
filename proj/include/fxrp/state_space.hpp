#pragma once

// ARMA(p, q) signal-extraction model for forward errors:
//
//   fe_t     = Z RP_t + re_t
//   RP_{t+1} = Phi RP_t + Theta a_t
//   (re_t, a_t) ~ N(0, [[R, C], [C, Q]])
//
// where the observation disturbance of month t is correlated with the state
// shock that carries the premium into month t+1. With that timing the
// generalized Kalman recursions below are exact; see kalman_filter().

#include "fxrp/error.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace fxrp {

enum class StateLayout {
    automatic,  // single-lag layouts for AR(1), MA(1), ARMA(1,1); companion otherwise
    companion,  // always Z = [1, 0, ..., 0] companion form
};

struct StateSpaceSpec {
    int p = 0;
    int q = 0;
    std::vector<double> phi;
    std::vector<double> theta;
    Eigen::RowVectorXd Z;
    Eigen::MatrixXd Phi;
    Eigen::VectorXd Theta;
    double R = 0.0;
    double Q = 0.0;
    double C = 0.0;

    Eigen::Index m() const { return Phi.rows(); }
};

inline double spectral_radius(const Eigen::MatrixXd& A) {
    if (A.rows() == 1) return std::abs(A(0, 0));
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline bool noise_covariance_is_psd(double R, double Q, double C) {
    if (R < 0.0 || Q < 0.0) return false;
    const double rq = R * Q;
    return C * C <= rq * (1.0 + 1e-12) + std::numeric_limits<double>::min();
}

/// Builds the state-space form of an ARMA(p, q) premium.
///
/// AR(1) uses a scalar state. MA(1) and ARMA(1,1) use a two-element state
/// whose second entry is the lag of the first, with the MA coefficient in the
/// observation row: Z = [1, theta]. Any other order uses the companion form of
/// dimension max(p, q+1) with Z = [1, 0, ..., 0] and Theta = [1, theta_1, ...].
/// In every layout Z RP_t is the premium itself.
inline StateSpaceSpec build_arma_spec(int p, int q, std::span<const double> phi, std::span<const double> theta,
                                      double R, double Q, double C,
                                      StateLayout layout = StateLayout::automatic) {
    if (p < 0 || q < 0 || p + q < 1) fail(ErrorKind::parameter, "ARMA orders need p, q >= 0 and p + q >= 1");
    if (static_cast<int>(phi.size()) != p || static_cast<int>(theta.size()) != q)
        fail(ErrorKind::parameter, "coefficient counts must match the ARMA orders");
    for (double v : phi)
        if (!std::isfinite(v)) fail(ErrorKind::domain, "non-finite AR coefficient");
    for (double v : theta)
        if (!std::isfinite(v)) fail(ErrorKind::domain, "non-finite MA coefficient");
    if (!std::isfinite(R) || !std::isfinite(Q) || !std::isfinite(C))
        fail(ErrorKind::domain, "non-finite noise parameter");
    if (R < 0.0 || Q < 0.0) fail(ErrorKind::covariance_domain, "noise variances must be non-negative");
    if (!noise_covariance_is_psd(R, Q, C)) fail(ErrorKind::covariance_domain, "C^2 > R Q");

    StateSpaceSpec s;
    s.p = p;
    s.q = q;
    s.phi.assign(phi.begin(), phi.end());
    s.theta.assign(theta.begin(), theta.end());
    s.R = R;
    s.Q = Q;
    s.C = C;

    const bool single_lag = layout == StateLayout::automatic && p <= 1 && q <= 1;
    if (single_lag && q == 0) {
        s.Phi = Eigen::MatrixXd::Constant(1, 1, phi[0]);
        s.Theta = Eigen::VectorXd::Ones(1);
        s.Z = Eigen::RowVectorXd::Ones(1);
    } else if (single_lag) {
        // sv1 = phi sv1(-1) + a ; sv2 = sv1(-1) ; rp = sv1 + theta sv2
        s.Phi = Eigen::MatrixXd::Zero(2, 2);
        if (p == 1) s.Phi(0, 0) = phi[0];
        s.Phi(1, 0) = 1.0;
        s.Theta = Eigen::VectorXd::Zero(2);
        s.Theta(0) = 1.0;
        s.Z = Eigen::RowVectorXd(2);
        s.Z << 1.0, theta[0];
    } else {
        const int m = std::max(p, q + 1);
        s.Phi = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < p; ++i) s.Phi(i, 0) = phi[i];
        for (int i = 0; i + 1 < m; ++i) s.Phi(i, i + 1) = 1.0;
        s.Theta = Eigen::VectorXd::Zero(m);
        s.Theta(0) = 1.0;
        for (int j = 0; j < q; ++j) s.Theta(j + 1) = theta[j];
        s.Z = Eigen::RowVectorXd::Zero(m);
        s.Z(0) = 1.0;
    }
    if (!(spectral_radius(s.Phi) < 1.0))
        fail(ErrorKind::domain, "AR part is not stationary (transition eigenvalue on or outside the unit circle)");
    return s;
}

struct StateInit {
    Eigen::VectorXd mean0;
    Eigen::MatrixXd var0;
};

/// Unconditional state distribution: mean 0, V = Phi V Phi' + Theta Q Theta'.
inline StateInit stationary_init(const StateSpaceSpec& spec) {
    const Eigen::Index m = spec.m();
    if (!(spectral_radius(spec.Phi) < 1.0)) fail(ErrorKind::domain, "stationary_init on a non-stationary spec");
    StateInit init;
    init.mean0 = Eigen::VectorXd::Zero(m);
    const Eigen::MatrixXd W = spec.Theta * spec.Q * spec.Theta.transpose();
    if (m == 1) {
        init.var0 = Eigen::MatrixXd::Constant(1, 1, W(0, 0) / (1.0 - spec.Phi(0, 0) * spec.Phi(0, 0)));
        return init;
    }
    // vec(V) = (I - Phi (x) Phi)^-1 vec(W)
    const Eigen::Index mm = m * m;
    Eigen::MatrixXd K(mm, mm);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j) K.block(i * m, j * m, m, m) = spec.Phi(i, j) * spec.Phi;
    const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(mm, mm) - K;
    const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(W.data(), mm);
    const Eigen::VectorXd v = A.partialPivLu().solve(w);
    Eigen::MatrixXd V = Eigen::Map<const Eigen::MatrixXd>(v.data(), m, m);
    init.var0 = 0.5 * (V + V.transpose());
    return init;
}

struct FilterOutput {
    std::vector<Eigen::VectorXd> pred_mean;  // E_{t-1}(RP_t)
    std::vector<Eigen::MatrixXd> pred_var;   // V_{t-1}(RP_t)
    std::vector<Eigen::VectorXd> filt_mean;  // E_t(RP_t)
    std::vector<Eigen::MatrixXd> filt_var;   // V_t(RP_t)
    std::vector<Eigen::VectorXd> gain;       // K_t
    std::vector<double> innovation;          // fe_t - Z E_{t-1}(RP_t)
    std::vector<double> innovation_var;      // Z V_{t-1}(RP_t) Z' + R
    double loglik = 0.0;
};

namespace detail {

inline constexpr double half_log_2pi = 0.91893853320467274178;  // 0.5 ln(2 pi)

template <bool Store>
double run_filter(const StateSpaceSpec& spec, std::span<const double> fe, const StateInit& init, FilterOutput* out) {
    if (fe.empty()) fail(ErrorKind::insufficient_data, "kalman_filter needs at least one observation");
    const Eigen::Index m = spec.m();
    const auto T = fe.size();
    if constexpr (Store) {
        out->pred_mean.reserve(T);
        out->pred_var.reserve(T);
        out->filt_mean.reserve(T);
        out->filt_var.reserve(T);
        out->gain.reserve(T);
        out->innovation.reserve(T);
        out->innovation_var.reserve(T);
    }
    const double R = spec.R, Q = spec.Q, C = spec.C;
    double loglik = 0.0;

    if (m == 1 && !Store) {
        const double phi = spec.Phi(0, 0), th = spec.Theta(0), z = spec.Z(0);
        double a = init.mean0(0), P = init.var0(0, 0);
        for (std::size_t t = 0; t < T; ++t) {
            const double F = z * P * z + R;
            if (!(F > 0.0) || !std::isfinite(F))
                fail(ErrorKind::filter_divergence, "non-positive innovation variance at t=" + std::to_string(t));
            const double v = fe[t] - z * a;
            const double K = P * z / F;
            const double af = a + K * v;
            const double Pf = P - K * z * P;
            loglik += -half_log_2pi - 0.5 * std::log(F) - 0.5 * v * v / F;
            a = phi * af + th * C * v / F;
            P = phi * Pf * phi + th * Q * th - th * C * C * th / F - 2.0 * phi * K * C * th;
        }
        return loglik;
    }

    Eigen::VectorXd a = init.mean0;
    Eigen::MatrixXd P = init.var0;
    Eigen::VectorXd K(m), af(m);
    Eigen::MatrixXd Pf(m, m);
    const Eigen::MatrixXd ThQTh = spec.Theta * Q * spec.Theta.transpose();
    const Eigen::VectorXd ThC = spec.Theta * C;
    for (std::size_t t = 0; t < T; ++t) {
        const Eigen::VectorXd PZt = P * spec.Z.transpose();
        const double F = spec.Z.dot(PZt) + R;
        if (!(F > 0.0) || !std::isfinite(F))
            fail(ErrorKind::filter_divergence, "non-positive innovation variance at t=" + std::to_string(t));
        const double v = fe[t] - spec.Z.dot(a);
        K = PZt / F;                                  // gain
        af = a + K * v;                               // update mean
        Pf = P - K * (spec.Z * P);                    // update variance
        Pf = 0.5 * (Pf + Pf.transpose()).eval();
        loglik += -half_log_2pi - 0.5 * std::log(F) - 0.5 * v * v / F;
        if constexpr (Store) {
            out->pred_mean.push_back(a);
            out->pred_var.push_back(P);
            out->filt_mean.push_back(af);
            out->filt_var.push_back(Pf);
            out->gain.push_back(K);
            out->innovation.push_back(v);
            out->innovation_var.push_back(F);
        }
        // prediction with the cross-covariance corrections
        const Eigen::VectorXd PhiK = spec.Phi * K;
        a = spec.Phi * af + ThC * (v / F);
        P = spec.Phi * Pf * spec.Phi.transpose() + ThQTh - ThC * ThC.transpose() / F - PhiK * ThC.transpose() -
            ThC * PhiK.transpose();
        P = 0.5 * (P + P.transpose()).eval();
    }
    return loglik;
}

}  // namespace detail

/// Generalized Kalman filter allowing C != 0.
///
/// Update:
///   K_t      = V_{t-1} Z' (Z V_{t-1} Z' + R)^-1
///   E_t(RP_t) = E_{t-1}(RP_t) + K_t xi_t,   xi_t = fe_t - Z E_{t-1}(RP_t)
///   V_t(RP_t) = V_{t-1}(RP_t) - K_t Z V_{t-1}(RP_t)
/// Prediction:
///   E_t(RP_{t+1}) = Phi E_t(RP_t) + Theta C F_t^-1 xi_t
///   V_t(RP_{t+1}) = Phi V_t Phi' + Theta Q Theta' - Theta C F_t^-1 C' Theta'
///                   - Phi K_t C' Theta' - Theta C K_t' Phi'
/// Both cross terms carry a minus sign; this is what exact conditioning of the
/// joint Gaussian gives (checked against a dense oracle in the tests).
inline FilterOutput kalman_filter(const StateSpaceSpec& spec, std::span<const double> fe, const StateInit& init) {
    FilterOutput out;
    out.loglik = detail::run_filter<true>(spec, fe, init, &out);
    return out;
}

inline FilterOutput kalman_filter(const StateSpaceSpec& spec, std::span<const double> fe) {
    return kalman_filter(spec, fe, stationary_init(spec));
}

/// Log-likelihood only, without storing the filtered path.
inline double kalman_loglik(const StateSpaceSpec& spec, std::span<const double> fe, const StateInit& init) {
    return detail::run_filter<false>(spec, fe, init, nullptr);
}

/// Prediction-error decomposition:
///   L = -(T/2) ln 2pi - 1/2 sum ln F_t - 1/2 sum xi_t^2 / F_t
inline double log_likelihood(const FilterOutput& f) {
    double sum_log = 0.0, sum_sq = 0.0;
    for (std::size_t t = 0; t < f.innovation.size(); ++t) {
        sum_log += std::log(f.innovation_var[t]);
        sum_sq += f.innovation[t] * f.innovation[t] / f.innovation_var[t];
    }
    const double T = static_cast<double>(f.innovation.size());
    return -0.5 * T * std::log(2.0 * std::numbers::pi) - 0.5 * sum_log - 0.5 * sum_sq;
}

}  // namespace fxrp
