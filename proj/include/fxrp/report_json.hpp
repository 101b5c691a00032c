#pragma once

// JSON and CSV renderings of analysis results. Requires nlohmann_json
// (link fxrp::json).

#include "fxrp/diagnostics.hpp"
#include "fxrp/estimation.hpp"
#include "fxrp/identification.hpp"
#include "fxrp/premia.hpp"
#include "fxrp/regressions.hpp"
#include "fxrp/timeseries.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <span>
#include <string>
#include <vector>

namespace fxrp {

using json = nlohmann::ordered_json;

namespace detail {

// Non-finite values become null.
inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json num(const std::optional<double>& v) { return v ? num(*v) : json(nullptr); }

inline std::string csv_num(double v) {
    if (!std::isfinite(v)) return "";
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

}  // namespace detail

inline json to_json(const MomentSummary& m) {
    return {{"n", m.n},
            {"mean", detail::num(m.mean)},
            {"sd", detail::num(m.sd)},
            {"skewness", detail::num(m.skewness)},
            {"excess_kurtosis", detail::num(m.excess_kurtosis)}};
}

inline json to_json(const TestResult& r) {
    json meta = json::object();
    for (const auto& [k, v] : r.meta) meta[k] = detail::num(v);
    return {{"test", r.test}, {"statistic", detail::num(r.statistic)}, {"p_value", detail::num(r.p_value)}, {"meta", meta}};
}

inline json to_json(const std::vector<CorrelogramRow>& rows) {
    json a = json::array();
    for (const auto& r : rows)
        a.push_back({{"lag", r.lag},
                     {"pac", detail::num(r.pac)},
                     {"ac", detail::num(r.ac)},
                     {"pac_sig", std::string(to_string(r.pac_sig))},
                     {"ac_sig", std::string(to_string(r.ac_sig))}});
    return a;
}

inline json to_json(const OlsFit& f) {
    return {{"alpha", detail::num(f.alpha)},     {"beta", detail::num(f.beta)},
            {"se_alpha", detail::num(f.se_alpha)}, {"se_beta", detail::num(f.se_beta)},
            {"t_alpha", detail::num(f.t_alpha)},   {"t_beta", detail::num(f.t_beta)},
            {"p_two_tail_beta", detail::num(f.p_two_tail_beta)}, {"r_squared", detail::num(f.r_squared)},
            {"n", f.n}};
}

inline json to_json(const PremiaTimeVariationVerdict& v) {
    const auto row = [](const OlsFit& f, double p, const TestResult& adf) {
        return json{{"beta", detail::num(f.beta)},
                    {"se", detail::num(f.se_beta)},
                    {"t", detail::num(f.t_beta)},
                    {"p", detail::num(p)},
                    {"resid_adf_p", detail::num(adf.p_value)}};
    };
    return {{"beta3", row(v.beta3_fit, v.p_beta3_two_tail, v.resid_adf_beta3)},
            {"beta4", row(v.beta4_fit, v.p_beta4_one_tail, v.resid_adf_beta4)},
            {"beta3_p_kind", "two_tail"},
            {"beta4_p_kind", "one_tail_upper"},
            {"reject_level", v.reject_level},
            {"premia_exist_and_vary", v.premia_exist_and_vary}};
}

inline json to_json(const FittedModel& m) {
    json params = json::array();
    for (std::size_t i = 0; i < m.param_names.size(); ++i)
        params.push_back({{"name", m.param_names[i]},
                          {"raw", detail::num(m.raw_params(static_cast<Eigen::Index>(i)))},
                          {"se", detail::num(m.se[i])},
                          {"p_value", detail::num(m.p_values[i])}});
    json phi = json::array(), theta = json::array();
    for (double v : m.spec.phi) phi.push_back(detail::num(v));
    for (double v : m.spec.theta) theta.push_back(detail::num(v));
    return {{"kind", m.kind == ModelKind::state_space ? "state_space" : "classical_arma"},
            {"p", m.spec.p},
            {"q", m.spec.q},
            {"c_constrained_zero", m.c_constrained_zero},
            {"phi", phi},
            {"theta", theta},
            {"R", detail::num(m.spec.R)},
            {"Q", detail::num(m.spec.Q)},
            {"C", detail::num(m.spec.C)},
            {"mean_offset", detail::num(m.mean_offset)},
            {"params", params},
            {"loglik", detail::num(m.loglik)},
            {"k", m.k},
            {"T", m.T},
            {"aic", detail::num(m.aic)},
            {"sc", detail::num(m.sc)},
            {"hqc", detail::num(m.hqc)},
            {"converged", m.converged},
            {"iterations", m.iterations},
            {"optimizer_message", m.optimizer_message}};
}

inline json to_json(const CandidateReport& r) {
    json lb = json::object();
    for (const auto& [lag, p] : r.lb_p_values) lb[std::to_string(lag)] = detail::num(p);
    json sel = json::array();
    for (const auto& s : r.selected_by) sel.push_back(s);
    return {{"model", to_string(ArmaOrder{r.p, r.q})},
            {"p", r.p},
            {"q", r.q},
            {"loglik", detail::num(r.loglik)},
            {"k", r.k},
            {"aic", detail::num(r.aic)},
            {"sc", detail::num(r.sc)},
            {"hqc", detail::num(r.hqc)},
            {"lb_p_values", lb},
            {"bg_p_value", detail::num(r.bg_p_value)},
            {"resid_adf_p", detail::num(r.resid_adf_p)},
            {"selected_by", sel},
            {"converged", r.converged},
            {"note", r.note}};
}

inline void write_correlogram_csv(std::ostream& os, const std::vector<CorrelogramRow>& rows) {
    os << "lag,pac,ac,pac_sig,ac_sig\n";
    for (const auto& r : rows)
        os << r.lag << ',' << detail::csv_num(r.pac) << ',' << detail::csv_num(r.ac) << ',' << to_string(r.pac_sig)
           << ',' << to_string(r.ac_sig) << '\n';
}

inline void write_candidates_csv(std::ostream& os, const std::vector<CandidateReport>& reports) {
    os << "model,p,q,loglik,aic,sc,hqc,lb12_p,lb24_p,lb36_p,bg_p,resid_adf_p,selected_by,converged\n";
    for (const auto& r : reports) {
        const auto lb = [&](int lag) {
            auto it = r.lb_p_values.find(lag);
            return it == r.lb_p_values.end() ? std::string() : detail::csv_num(it->second);
        };
        std::string sel;
        for (const auto& s : r.selected_by) sel += (sel.empty() ? "" : ";") + s;
        os << to_string(ArmaOrder{r.p, r.q}) << ',' << r.p << ',' << r.q << ',' << detail::csv_num(r.loglik) << ','
           << detail::csv_num(r.aic) << ',' << detail::csv_num(r.sc) << ',' << detail::csv_num(r.hqc) << ',' << lb(12)
           << ',' << lb(24) << ',' << lb(36) << ',' << detail::csv_num(r.bg_p_value) << ','
           << detail::csv_num(r.resid_adf_p) << ',' << sel << ',' << (r.converged ? "true" : "false") << '\n';
    }
}

/// `dates` labels fe_t; one row per month.
inline void write_premia_csv(std::ostream& os, std::span<const YearMonth> dates, const PremiaSeries& s) {
    os << "date,rp_hat,re_hat,a_hat,rp_sys,combined\n";
    for (std::size_t t = 0; t < s.rp_hat.size(); ++t)
        os << (t < dates.size() ? dates[t].str() : std::string()) << ',' << detail::csv_num(s.rp_hat[t]) << ','
           << detail::csv_num(s.re_hat[t]) << ',' << detail::csv_num(s.a_hat[t]) << ','
           << detail::csv_num(s.rp_sys[t]) << ',' << detail::csv_num(s.combined[t]) << '\n';
}

}  // namespace fxrp
