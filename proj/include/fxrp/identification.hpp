#pragma once

// Box-Jenkins order identification, classical ARMA candidate fits and the
// forward-error to premium process mapping.

#include "fxrp/diagnostics.hpp"
#include "fxrp/error.hpp"
#include "fxrp/estimation.hpp"
#include "fxrp/state_space.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace fxrp {

struct ArmaOrder {
    int p = 0;
    int q = 0;
    auto operator<=>(const ArmaOrder&) const = default;
};

inline std::string to_string(ArmaOrder o) {
    if (o.q == 0) return "AR(" + std::to_string(o.p) + ")";
    if (o.p == 0) return "MA(" + std::to_string(o.q) + ")";
    return "ARMA(" + std::to_string(o.p) + "," + std::to_string(o.q) + ")";
}

struct OrderSuggestion {
    int p_suggested = 0;
    int q_suggested = 0;
    std::vector<CorrelogramRow> correlogram;
};

namespace detail {

template <class Get>
int contiguous_significant(const std::vector<CorrelogramRow>& rows, double level, Get get) {
    int order = 0;
    for (const auto& r : rows) {
        if (!significant_at(get(r), level)) break;
        order = r.lag;
    }
    return order;
}

}  // namespace detail

/// p from the PACF and q from the ACF: the highest lag reached by a run of
/// significant values starting at lag 1.
inline OrderSuggestion identify_orders(std::span<const double> fe, int max_lag = 12, double level = 0.05) {
    OrderSuggestion s;
    s.correlogram = correlogram(fe, max_lag);
    s.p_suggested = detail::contiguous_significant(s.correlogram, level, [](const auto& r) { return r.pac_sig; });
    s.q_suggested = detail::contiguous_significant(s.correlogram, level, [](const auto& r) { return r.ac_sig; });
    return s;
}

/// Candidate set implied by a suggestion: the full ARMA(p,q) and both pure
/// processes. Falls back to {(1,1), (1,0), (0,1)} when nothing is significant.
inline std::vector<ArmaOrder> default_candidates(const OrderSuggestion& s) {
    const int p = s.p_suggested, q = s.q_suggested;
    if (p == 0 && q == 0) return {{1, 1}, {1, 0}, {0, 1}};
    std::vector<ArmaOrder> out;
    if (p > 0 && q > 0) out.push_back({p, q});
    if (p > 0) out.push_back({p, 0});
    if (q > 0) out.push_back({0, q});
    if (out.size() == 1) out.push_back(p > 0 ? ArmaOrder{0, 1} : ArmaOrder{1, 0});
    return out;
}

struct CandidateReport {
    int p = 0;
    int q = 0;
    double loglik = std::numeric_limits<double>::quiet_NaN();
    int k = 0;
    double aic = std::numeric_limits<double>::quiet_NaN();
    double sc = std::numeric_limits<double>::quiet_NaN();
    double hqc = std::numeric_limits<double>::quiet_NaN();
    std::map<int, double> lb_p_values;  // lag -> p, df = lag - (p + q)
    double bg_p_value = std::numeric_limits<double>::quiet_NaN();
    double resid_adf_p = std::numeric_limits<double>::quiet_NaN();
    std::set<std::string> selected_by;  // subset of {"aic", "sc", "hqc"}
    bool converged = false;
    std::string note;  // why a candidate is flagged
    std::optional<FittedModel> fit;
};

namespace detail {

inline Eigen::MatrixXd ar_lag_regressors(std::span<const double> y, int p) {
    const auto T = static_cast<Eigen::Index>(y.size());
    Eigen::MatrixXd X(T, p + 1);
    X.col(0).setOnes();
    for (int i = 1; i <= p; ++i)
        for (Eigen::Index t = 0; t < T; ++t) X(t, i) = t >= i ? y[t - i] : 0.0;
    return X;
}

inline void mark_selection(std::vector<CandidateReport>& reports) {
    const auto pick = [&](const char* name, double CandidateReport::*field) {
        CandidateReport* best = nullptr;
        for (auto& r : reports) {
            if (!r.converged || !std::isfinite(r.*field)) continue;
            if (!best || r.*field < best->*field) best = &r;
        }
        if (best) best->selected_by.insert(name);
    };
    pick("aic", &CandidateReport::aic);
    pick("sc", &CandidateReport::sc);
    pick("hqc", &CandidateReport::hqc);
}

}  // namespace detail

/// Exact-likelihood ARMA fits of fe itself (R = 0, mean removed) with the
/// residual diagnostics reported per candidate. Failed or unconverged fits
/// stay in the output with `converged == false`.
inline std::vector<CandidateReport> fit_candidates(std::span<const double> fe, const std::vector<ArmaOrder>& candidates,
                                                   BfgsOptions bfgs = {}) {
    if (candidates.empty()) fail(ErrorKind::parameter, "fit_candidates needs at least one candidate");
    std::vector<CandidateReport> out;
    out.reserve(candidates.size());
    MleOptions mo;
    mo.kind = ModelKind::classical_arma;
    mo.bfgs = bfgs;
    for (const auto& c : candidates) {
        CandidateReport r;
        r.p = c.p;
        r.q = c.q;
        try {
            FittedModel fm = mle_fit(c.p, c.q, fe, true, mo);
            r.loglik = fm.loglik;
            r.k = fm.k;
            r.aic = fm.aic;
            r.sc = fm.sc;
            r.hqc = fm.hqc;
            r.converged = fm.converged;
            if (!fm.converged) r.note = fm.optimizer_message;

            std::vector<double> y(fe.begin(), fe.end());
            for (double& v : y) v -= fm.mean_offset;
            const auto filt = kalman_filter(fm.spec, y);
            const std::vector<double>& resid = filt.innovation;
            for (int lag : {12, 24, 36})
                if (lag > c.p + c.q && static_cast<std::size_t>(lag) < resid.size())
                    r.lb_p_values[lag] = ljung_box(resid, lag, c.p + c.q).p_value;
            r.bg_p_value = breusch_godfrey(resid, detail::ar_lag_regressors(y, c.p), 2).p_value;
            r.resid_adf_p = adf_test(resid).p_value;
            r.fit = std::move(fm);
        } catch (const Error& e) {
            r.converged = false;
            r.note = e.what();
        }
        out.push_back(std::move(r));
    }
    detail::mark_selection(out);
    return out;
}

inline std::vector<CandidateReport> fit_candidates(std::span<const double> fe) {
    return fit_candidates(fe, {{1, 1}, {1, 0}, {0, 1}});
}

/// The candidate picked by most criteria, ties broken by AIC. Empty when no
/// candidate converged.
inline std::optional<ArmaOrder> selected_order(const std::vector<CandidateReport>& reports) {
    const CandidateReport* best = nullptr;
    for (const auto& r : reports) {
        if (!r.converged || r.selected_by.empty()) continue;
        if (!best || r.selected_by.size() > best->selected_by.size() ||
            (r.selected_by.size() == best->selected_by.size() && r.aic < best->aic))
            best = &r;
    }
    if (!best) return std::nullopt;
    return ArmaOrder{best->p, best->q};
}

/// Premium process implied by the forward-error process: pure AR and pure MA
/// carry over; ARMA(1,1) is AR(1) plus white noise.
inline ArmaOrder map_fe_to_rp_process(ArmaOrder fe_process) {
    const auto [p, q] = fe_process;
    if (p < 0 || q < 0 || p + q < 1) fail(ErrorKind::parameter, "process order must have p + q >= 1");
    if (q == 0 || p == 0) return fe_process;
    if (p == 1 && q == 1) return {1, 0};
    fail(ErrorKind::unsupported_process, "no premium process mapping for " + to_string(fe_process));
}

}  // namespace fxrp
