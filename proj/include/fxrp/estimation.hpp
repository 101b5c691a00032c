#pragma once

// Exact maximum likelihood for the ARMA state-space model.
//
// Raw parameter vector, in order:
//   log R      (absent in classical ARMA mode, where R = 0)
//   log Q
//   C          (absent when constrained to zero)
//   phi_1..p, theta_1..q
//
// Variances enter through exp(); C enters directly and points with
// C^2 > R Q, or with a non-stationary AR part, are infeasible.

#include "fxrp/detail/distributions.hpp"
#include "fxrp/diagnostics.hpp"
#include "fxrp/error.hpp"
#include "fxrp/optimizer.hpp"
#include "fxrp/state_space.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fxrp {

enum class ModelKind {
    state_space,     // R > 0 and Q > 0: premium plus rational error
    classical_arma,  // R pinned to 0, series demeaned: ARMA fit of the observable itself
};

struct MleOptions {
    ModelKind kind = ModelKind::state_space;
    BfgsOptions bfgs{};
    bool multi_start = true;  // extra AR starting points for the state-space model
};

struct InformationCriteria {
    double aic = 0.0;
    double sc = 0.0;
    double hqc = 0.0;
};

/// Per-observation criteria: (-2L + penalty) / T.
inline InformationCriteria information_criteria(double loglik, std::size_t T, int k) {
    const double n = static_cast<double>(T);
    return {(-2.0 * loglik + 2.0 * k) / n, (-2.0 * loglik + k * std::log(n)) / n,
            (-2.0 * loglik + 2.0 * k * std::log(std::log(n))) / n};
}

struct FittedModel {
    StateSpaceSpec spec;
    ModelKind kind = ModelKind::state_space;
    bool c_constrained_zero = true;
    double mean_offset = 0.0;  // subtracted before filtering (classical mode only)
    std::vector<std::string> param_names;
    Eigen::VectorXd raw_params;
    double loglik = 0.0;
    int k = 0;
    std::size_t T = 0;
    double aic = 0.0;
    double sc = 0.0;
    double hqc = 0.0;
    std::vector<std::optional<double>> se;        // on raw parameters
    std::vector<std::optional<double>> p_values;  // two-tail normal
    bool converged = false;
    int iterations = 0;
    std::string optimizer_message;
};

namespace detail {

struct ParamLayout {
    int p = 0, q = 0;
    ModelKind kind = ModelKind::state_space;
    bool free_c = false;

    int size() const { return (kind == ModelKind::state_space ? 1 : 0) + 1 + (free_c ? 1 : 0) + p + q; }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        if (kind == ModelKind::state_space) out.push_back("log_R");
        out.push_back("log_Q");
        if (free_c) out.push_back("C");
        for (int i = 1; i <= p; ++i) out.push_back("phi_" + std::to_string(i));
        for (int j = 1; j <= q; ++j) out.push_back("theta_" + std::to_string(j));
        return out;
    }

    struct Decoded {
        double R = 0.0, Q = 0.0, C = 0.0;
        std::vector<double> phi, theta;
    };

    Decoded decode(const Eigen::VectorXd& raw) const {
        Decoded d;
        Eigen::Index i = 0;
        if (kind == ModelKind::state_space) d.R = std::exp(raw(i++));
        d.Q = std::exp(raw(i++));
        if (free_c) d.C = raw(i++);
        for (int j = 0; j < p; ++j) d.phi.push_back(raw(i++));
        for (int j = 0; j < q; ++j) d.theta.push_back(raw(i++));
        return d;
    }

    Eigen::VectorXd encode(double R, double Q, double C, std::span<const double> phi,
                           std::span<const double> theta) const {
        Eigen::VectorXd raw(size());
        Eigen::Index i = 0;
        if (kind == ModelKind::state_space) raw(i++) = std::log(R);
        raw(i++) = std::log(Q);
        if (free_c) raw(i++) = C;
        for (double v : phi) raw(i++) = v;
        for (double v : theta) raw(i++) = v;
        return raw;
    }

    /// Spec at `raw`, or empty when infeasible.
    std::optional<StateSpaceSpec> spec_at(const Eigen::VectorXd& raw) const {
        for (Eigen::Index i = 0; i < raw.size(); ++i)
            if (!std::isfinite(raw(i))) return std::nullopt;
        const auto d = decode(raw);
        if (!std::isfinite(d.R) || !std::isfinite(d.Q) || d.Q <= 0.0) return std::nullopt;
        if (kind == ModelKind::state_space && d.R <= 0.0) return std::nullopt;
        if (!noise_covariance_is_psd(d.R, d.Q, d.C)) return std::nullopt;
        try {
            return build_arma_spec(p, q, d.phi, d.theta, d.R, d.Q, d.C);
        } catch (const Error&) {
            return std::nullopt;
        }
    }
};

/// -L at raw parameters; +inf when infeasible or the filter breaks down.
inline double negative_loglik(const ParamLayout& layout, const Eigen::VectorXd& raw, std::span<const double> y) {
    auto spec = layout.spec_at(raw);
    if (!spec) return std::numeric_limits<double>::infinity();
    try {
        const double L = kalman_loglik(*spec, y, stationary_init(*spec));
        return std::isfinite(L) ? -L : std::numeric_limits<double>::infinity();
    } catch (const Error&) {
        return std::numeric_limits<double>::infinity();
    }
}

/// Yule-Walker AR coefficients from sample autocorrelations, shrunk until
/// stationary.
inline std::vector<double> yule_walker(std::span<const double> ac, int p) {
    if (p == 0) return {};
    Eigen::MatrixXd G(p, p);
    Eigen::VectorXd r(p);
    for (int i = 0; i < p; ++i) {
        r(i) = ac[i];
        for (int j = 0; j < p; ++j) G(i, j) = i == j ? 1.0 : ac[std::abs(i - j) - 1];
    }
    Eigen::VectorXd phi = G.ldlt().solve(r);
    std::vector<double> out(phi.data(), phi.data() + p);
    for (int tries = 0; tries < 50; ++tries) {
        Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(p, p);
        for (int i = 0; i < p; ++i) comp(0, i) = out[i];
        for (int i = 1; i < p; ++i) comp(i, i - 1) = 1.0;
        if (spectral_radius(comp) < 0.95) break;
        for (auto& v : out) v *= 0.8;
    }
    return out;
}

}  // namespace detail

/// Exact Gaussian maximum likelihood for an ARMA(p, q) premium observed through
/// fe. Non-convergence within the iteration cap is reported in the result,
/// not thrown; a Hessian that is not positive definite leaves standard errors
/// empty.
inline FittedModel mle_fit(int p, int q, std::span<const double> fe, bool constrain_c_zero, MleOptions opts = {}) {
    if (p < 0 || q < 0 || p + q < 1) fail(ErrorKind::parameter, "mle_fit needs p + q >= 1");
    if (fe.size() < 30) fail(ErrorKind::insufficient_data, "mle_fit needs at least 30 observations");

    detail::ParamLayout layout{p, q, opts.kind, opts.kind == ModelKind::state_space && !constrain_c_zero};

    double mean_offset = 0.0;
    std::vector<double> y(fe.begin(), fe.end());
    if (opts.kind == ModelKind::classical_arma) {
        for (double v : y) mean_offset += v;
        mean_offset /= static_cast<double>(y.size());
        for (double& v : y) v -= mean_offset;
    }
    double var = 0.0, mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    for (double v : y) var += (v - mean) * (v - mean);
    var /= static_cast<double>(y.size());
    double scale = 0.0;
    for (double v : fe) scale = std::max(scale, std::abs(v));
    if (!(var > 1e-24 * scale * scale)) fail(ErrorKind::degenerate_input, "mle_fit on a constant series");

    const int max_ac = std::max(p, 2);
    const auto ac = autocorrelations(y, max_ac);

    // Starting points.
    std::vector<std::vector<double>> phi_starts;
    {
        auto yw = detail::yule_walker(ac, p);
        if (opts.kind == ModelKind::state_space && p == 1 && std::abs(ac[0]) > 1e-3) {
            // AR(1) plus noise: rho_2 / rho_1 estimates phi
            yw[0] = std::clamp(ac[1] / ac[0], -0.9, 0.9);
        }
        phi_starts.push_back(yw);
        if (opts.multi_start && opts.kind == ModelKind::state_space && p >= 1) {
            for (double s : {-0.5, 0.2, 0.5, 0.85}) {
                std::vector<double> alt(p, 0.0);
                alt[0] = s;
                phi_starts.push_back(alt);
            }
        }
    }
    std::vector<double> theta0(q, 0.0);
    if (q > 0 && p == 0) theta0[0] = std::clamp(ac[0], -0.8, 0.8);

    Eigen::VectorXd typical = Eigen::VectorXd::Ones(layout.size());

    const auto objective = [&](const Eigen::VectorXd& raw) { return detail::negative_loglik(layout, raw, y); };

    std::optional<BfgsResult> best;
    for (const auto& phi0 : phi_starts) {
        double R0 = 0.0, Q0 = 0.0;
        double ar_gain = 1.0;
        for (double v : phi0) ar_gain -= v * v;
        ar_gain = std::max(ar_gain, 0.05);
        if (opts.kind == ModelKind::state_space) {
            R0 = 0.5 * var;
            Q0 = 0.5 * var * ar_gain;
        } else {
            Q0 = var * ar_gain;
        }
        Eigen::VectorXd x0 = layout.encode(R0, Q0, 0.0, phi0, theta0);
        if (layout.free_c) typical(layout.kind == ModelKind::state_space ? 2 : 1) = std::sqrt(R0 * Q0);
        if (!std::isfinite(objective(x0))) continue;
        auto r = minimize_bfgs(objective, x0, typical, opts.bfgs);
        if (!best || r.f < best->f - 1e-9 * std::abs(r.f) || (!best->converged && r.converged && r.f <= best->f))
            best = std::move(r);
    }
    if (!best) fail(ErrorKind::numerical, "no feasible starting point for the likelihood");

    FittedModel fm;
    fm.kind = opts.kind;
    fm.c_constrained_zero = !layout.free_c;
    fm.mean_offset = mean_offset;
    fm.param_names = layout.names();
    fm.raw_params = best->x;
    fm.spec = *layout.spec_at(best->x);
    fm.loglik = -best->f;
    fm.k = layout.size();
    fm.T = y.size();
    const auto ic = information_criteria(fm.loglik, fm.T, fm.k);
    fm.aic = ic.aic;
    fm.sc = ic.sc;
    fm.hqc = ic.hqc;
    fm.converged = best->converged;
    fm.iterations = best->iterations;
    fm.optimizer_message = best->message;

    fm.se.assign(fm.k, std::nullopt);
    fm.p_values.assign(fm.k, std::nullopt);
    if (auto H = numeric_hessian(objective, best->x, typical)) {
        Eigen::LLT<Eigen::MatrixXd> llt(*H);
        if (llt.info() == Eigen::Success) {
            const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(fm.k, fm.k));
            for (int i = 0; i < fm.k; ++i) {
                if (cov(i, i) > 0.0 && std::isfinite(cov(i, i))) {
                    fm.se[i] = std::sqrt(cov(i, i));
                    fm.p_values[i] = detail::normal_two_tail(best->x(i) / *fm.se[i]);
                }
            }
        }
    }
    return fm;
}

/// -L at raw parameters for the layout used by mle_fit; exposed for gradient
/// checks.
inline double mle_objective(int p, int q, ModelKind kind, bool constrain_c_zero, const Eigen::VectorXd& raw,
                            std::span<const double> y) {
    detail::ParamLayout layout{p, q, kind, kind == ModelKind::state_space && !constrain_c_zero};
    return detail::negative_loglik(layout, raw, y);
}

/// State-space form denoted by a raw parameter vector (throws when infeasible).
inline StateSpaceSpec spec_from_raw(int p, int q, ModelKind kind, bool constrain_c_zero, const Eigen::VectorXd& raw) {
    detail::ParamLayout layout{p, q, kind, kind == ModelKind::state_space && !constrain_c_zero};
    if (raw.size() != layout.size()) fail(ErrorKind::parameter, "raw parameter vector has the wrong length");
    auto spec = layout.spec_at(raw);
    if (!spec) fail(ErrorKind::domain, "raw parameters are outside the feasible region");
    return *spec;
}

}  // namespace fxrp
