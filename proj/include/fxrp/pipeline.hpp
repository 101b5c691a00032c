#pragma once

// Batch analysis: descriptives, regressions, identification, state-space fits,
// premia extraction and residual whiteness. Requires nlohmann_json.

#include "fxrp/diagnostics.hpp"
#include "fxrp/error.hpp"
#include "fxrp/estimation.hpp"
#include "fxrp/identification.hpp"
#include "fxrp/premia.hpp"
#include "fxrp/regressions.hpp"
#include "fxrp/report_json.hpp"
#include "fxrp/timeseries.hpp"

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fxrp {

inline constexpr const char* report_schema_version = "1.0";

enum class ConstrainC { both, zero_only, free_only };

inline ConstrainC parse_constrain_c(std::string_view s) {
    if (s == "both") return ConstrainC::both;
    if (s == "zero_only" || s == "zero") return ConstrainC::zero_only;
    if (s == "free_only" || s == "free") return ConstrainC::free_only;
    fail(ErrorKind::parameter, "constrain-c must be both, zero_only or free_only, got '" + std::string(s) + "'");
}

inline std::string_view to_string(ConstrainC c) {
    switch (c) {
        case ConstrainC::both: return "both";
        case ConstrainC::zero_only: return "zero_only";
        case ConstrainC::free_only: return "free_only";
    }
    return "?";
}

struct PipelineConfig {
    std::filesystem::path input;
    CsvFormat format = CsvFormat::generic;
    IngestOptions ingest{};
    std::optional<YearMonth> from;
    std::optional<YearMonth> to;
    double level = 0.05;
    std::optional<std::vector<ArmaOrder>> candidates;  // replaces the identified set
    std::optional<ArmaOrder> premium_order;            // replaces the mapped premium process
    ConstrainC constrain_c = ConstrainC::both;
    std::filesystem::path out_dir;  // empty: no files written
    std::uint64_t seed = 42;
    BfgsOptions bfgs{};
};

/// Output directory used when none is given: $FXRP_OUT_DIR, else "fxrp_out".
inline std::filesystem::path default_out_dir() {
    if (const char* env = std::getenv("FXRP_OUT_DIR"); env && *env) return env;
    return "fxrp_out";
}

/// Applies a key=value model file ('#' starts a comment). Keys: p, q,
/// constrain_c, max_iter, rel_tol, level, candidates (e.g. "1,1;1,0").
inline void apply_model_spec(std::istream& in, PipelineConfig& cfg) {
    std::string line;
    std::optional<int> p, q;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto body = detail::trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos)
            fail(ErrorKind::parse, "model spec line " + std::to_string(line_no) + ": expected key=value");
        const std::string key(detail::trim(body.substr(0, eq)));
        const std::string value(detail::trim(body.substr(eq + 1)));
        const auto as_int = [&] {
            auto v = detail::parse_int(value);
            if (!v) fail(ErrorKind::parse, "model spec line " + std::to_string(line_no) + ": bad integer '" + value + "'");
            return *v;
        };
        const auto as_double = [&] {
            auto v = detail::parse_double(value);
            if (!v) fail(ErrorKind::parse, "model spec line " + std::to_string(line_no) + ": bad number '" + value + "'");
            return *v;
        };
        if (key == "p") p = as_int();
        else if (key == "q") q = as_int();
        else if (key == "constrain_c") cfg.constrain_c = parse_constrain_c(value);
        else if (key == "max_iter") cfg.bfgs.max_iter = as_int();
        else if (key == "rel_tol") cfg.bfgs.rel_tol = as_double();
        else if (key == "level") cfg.level = as_double();
        else if (key == "candidates") {
            std::vector<ArmaOrder> cands;
            std::string_view rest = value;
            while (!rest.empty()) {
                const auto semi = rest.find(';');
                const auto item = detail::trim(rest.substr(0, semi));
                rest = semi == std::string_view::npos ? std::string_view{} : rest.substr(semi + 1);
                if (item.empty()) continue;
                const auto comma = item.find(',');
                const auto cp = comma == std::string_view::npos ? std::nullopt : detail::parse_int(item.substr(0, comma));
                const auto cq = comma == std::string_view::npos ? std::nullopt : detail::parse_int(item.substr(comma + 1));
                if (!cp || !cq)
                    fail(ErrorKind::parse, "model spec line " + std::to_string(line_no) + ": bad candidate '" +
                                               std::string(item) + "'");
                cands.push_back({*cp, *cq});
            }
            cfg.candidates = std::move(cands);
        } else
            fail(ErrorKind::parse, "model spec line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (p.has_value() != q.has_value()) fail(ErrorKind::parse, "model spec must give both p and q");
    if (p) cfg.premium_order = ArmaOrder{*p, *q};
}

inline void apply_model_spec_file(const std::filesystem::path& path, PipelineConfig& cfg) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot open model spec file " + path.string());
    apply_model_spec(in, cfg);
}

struct WhitenessCheck {
    std::size_t n = 0;  // combined-residual length after burn-in
    std::vector<CorrelogramRow> correlogram;
    std::map<int, double> lb_p_values;
    bool correlogram_clean = false;  // no PAC/AC significant at the level
    bool lb_pass = false;            // every LB p-value above the level
    bool verdict = false;            // both
};

/// Whiteness of the combined residual re_hat + a_hat after the burn-in
/// entries: correlogram to lag 12 and Ljung-Box at 12/24/36 with df reduced
/// by `fitted_params`.
inline WhitenessCheck check_residual_whiteness(const PremiaSeries& premia, double level, int fitted_params = 0) {
    if (!(level > 0.0 && level < 1.0)) fail(ErrorKind::parameter, "significance level must lie in (0, 1)");
    const std::span<const double> all(premia.combined);
    const auto x = all.subspan(std::min(premia.burn_in, all.size()));
    if (x.size() <= 40) fail(ErrorKind::insufficient_data, "whiteness check needs more than 40 residuals");
    WhitenessCheck w;
    w.n = x.size();
    w.correlogram = correlogram(x, 12);
    w.correlogram_clean = true;
    for (const auto& r : w.correlogram)
        if (significant_at(r.pac_sig, level) || significant_at(r.ac_sig, level)) w.correlogram_clean = false;
    w.lb_pass = true;
    for (int lag : {12, 24, 36}) {
        if (static_cast<std::size_t>(lag) >= x.size() || lag <= fitted_params) continue;
        const double p = ljung_box(x, lag, fitted_params).p_value;
        w.lb_p_values[lag] = p;
        if (!(p > level)) w.lb_pass = false;
    }
    w.verdict = w.correlogram_clean && w.lb_pass;
    return w;
}

struct DescriptiveSection {
    MomentSummary moments;
    TestResult jarque_bera;
    TestResult adf;
};

struct IdentificationSection {
    OrderSuggestion suggestion;
};

struct CandidateSection {
    std::vector<CandidateReport> candidates;
    std::optional<ArmaOrder> fe_process;  // empty when nothing converged
    std::optional<ArmaOrder> premium_process;  // empty when the selected process has no mapping
    std::string premium_process_source;        // "mapped", "override" or empty
};

struct StateSpaceVariant {
    std::string label;  // "c_zero" or "c_free"
    FittedModel fit;
    double rp_hat_variance = 0.0;  // sample variance of the predicted premium
};

struct WhitenessVariant {
    std::string label;
    WhitenessCheck check;
};

struct PremiaVariant {
    std::string label;
    PremiaSeries series;
};

struct AnalysisReport {
    std::size_t observations = 0;
    std::vector<YearMonth> dates;  // one per forward error
    std::optional<DescriptiveSection> table1;
    std::optional<IdentificationSection> table2;
    std::optional<CandidateSection> tables3_4;
    std::optional<PremiaTimeVariationVerdict> table5;
    std::optional<std::vector<StateSpaceVariant>> tables6_8;
    std::optional<std::vector<WhitenessVariant>> tables7_9;
    std::optional<std::vector<PremiaVariant>> premia;
    std::map<std::string, std::string> skipped;  // section -> reason
    std::vector<std::string> flags;              // non-fatal problems in present sections

    bool degraded() const { return !skipped.empty() || !flags.empty(); }
};

inline const std::vector<std::string>& report_sections() {
    static const std::vector<std::string> names{"table1",    "table2",    "tables3_4", "table5",
                                                "tables6_8", "tables7_9", "premia"};
    return names;
}

namespace detail {

inline double sample_variance(std::span<const double> x) {
    if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    double m = 0.0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

inline std::string error_reason(const Error& e) { return e.what(); }

}  // namespace detail

/// Runs the analysis on an aligned series. Descriptive-stage errors are fatal
/// and propagate; later failures skip the affected section and everything
/// downstream of it.
inline AnalysisReport analyze_series(const AlignedSeries& s, const PipelineConfig& cfg) {
    if (!(cfg.level > 0.0 && cfg.level < 1.0)) fail(ErrorKind::parameter, "significance level must lie in (0, 1)");
    AnalysisReport rep;
    rep.observations = s.t_count();
    rep.dates = s.dates;
    const std::span<const double> fe(s.fwd_err);

    const auto moms = moments(fe);
    rep.table1 = DescriptiveSection{moms, jarque_bera(fe), adf_test(fe)};

    try {
        rep.table2 = IdentificationSection{identify_orders(fe, 12, cfg.level)};
    } catch (const Error& e) {
        rep.skipped["table2"] = detail::error_reason(e);
    }

    try {
        rep.table5 = test_time_varying_premia(s, cfg.level);
    } catch (const Error& e) {
        rep.skipped["table5"] = detail::error_reason(e);
    }

    std::optional<ArmaOrder> rp_order;
    std::string no_rp_reason = "no premium process available";
    if (rep.table2 || cfg.candidates) {
        try {
            const auto cands = cfg.candidates ? *cfg.candidates : default_candidates(rep.table2->suggestion);
            CandidateSection sec;
            sec.candidates = fit_candidates(fe, cands, cfg.bfgs);
            for (const auto& c : sec.candidates)
                if (!c.converged) rep.flags.push_back("tables3_4: " + to_string(ArmaOrder{c.p, c.q}) + " not converged");
            sec.fe_process = selected_order(sec.candidates);
            if (cfg.premium_order) {
                sec.premium_process = *cfg.premium_order;
                sec.premium_process_source = "override";
                rp_order = sec.premium_process;
            } else if (!sec.fe_process) {
                no_rp_reason = "no candidate converged";
            } else {
                try {
                    sec.premium_process = map_fe_to_rp_process(*sec.fe_process);
                    sec.premium_process_source = "mapped";
                    rp_order = sec.premium_process;
                } catch (const Error& e) {
                    no_rp_reason = detail::error_reason(e);
                    rep.flags.push_back("tables3_4: " + no_rp_reason);
                }
            }
            rep.tables3_4 = std::move(sec);
        } catch (const Error& e) {
            rep.skipped["tables3_4"] = detail::error_reason(e);
        }
    } else {
        rep.skipped["tables3_4"] = "identification skipped";
    }
    if (!rp_order && cfg.premium_order) rp_order = cfg.premium_order;

    if (rp_order) {
        std::vector<StateSpaceVariant> fits;
        std::vector<std::pair<std::string, bool>> variants;
        if (cfg.constrain_c != ConstrainC::free_only) variants.emplace_back("c_zero", true);
        if (cfg.constrain_c != ConstrainC::zero_only) variants.emplace_back("c_free", false);
        std::vector<std::string> failures;
        for (const auto& [label, c_zero] : variants) {
            try {
                MleOptions mo;
                mo.bfgs = cfg.bfgs;
                StateSpaceVariant v{label, mle_fit(rp_order->p, rp_order->q, fe, c_zero, mo), 0.0};
                if (!v.fit.converged) rep.flags.push_back("tables6_8: " + label + " not converged");
                fits.push_back(std::move(v));
            } catch (const Error& e) {
                failures.push_back(label + ": " + detail::error_reason(e));
            }
        }
        if (fits.empty()) {
            std::string why;
            for (const auto& f : failures) why += (why.empty() ? "" : "; ") + f;
            rep.skipped["tables6_8"] = why;
        } else {
            for (const auto& f : failures) rep.flags.push_back("tables6_8: " + f);
            std::vector<PremiaVariant> premia;
            for (auto& v : fits) {
                try {
                    auto ps = extract_premia(v.fit, fe);
                    v.rp_hat_variance = detail::sample_variance(ps.rp_hat);
                    premia.push_back({v.label, std::move(ps)});
                } catch (const Error& e) {
                    rep.flags.push_back("premia: " + v.label + ": " + detail::error_reason(e));
                }
            }
            rep.tables6_8 = std::move(fits);
            if (premia.empty()) {
                rep.skipped["premia"] = "premia extraction failed for every variant";
            } else {
                std::vector<WhitenessVariant> white;
                for (const auto& pv : premia) {
                    try {
                        white.push_back({pv.label, check_residual_whiteness(pv.series, cfg.level)});
                    } catch (const Error& e) {
                        rep.flags.push_back("tables7_9: " + pv.label + ": " + detail::error_reason(e));
                    }
                }
                if (white.empty())
                    rep.skipped["tables7_9"] = "whiteness check failed for every variant";
                else
                    rep.tables7_9 = std::move(white);
                rep.premia = std::move(premia);
            }
        }
    } else {
        rep.skipped["tables6_8"] = no_rp_reason;
    }
    for (const char* name : {"tables7_9", "premia"})
        if (!rep.tables6_8 && !rep.skipped.count(name)) rep.skipped[name] = "state-space estimation skipped";
    return rep;
}

inline json to_json(const AnalysisReport& rep, const PipelineConfig& cfg) {
    json j;
    j["schema_version"] = report_schema_version;
    j["config"] = {{"input", cfg.input.filename().string()},
                   {"format", std::string(to_string(cfg.format))},
                   {"from", cfg.from ? json(cfg.from->str()) : json(nullptr)},
                   {"to", cfg.to ? json(cfg.to->str()) : json(nullptr)},
                   {"level", cfg.level},
                   {"constrain_c", std::string(to_string(cfg.constrain_c))},
                   {"seed", cfg.seed},
                   {"max_iter", cfg.bfgs.max_iter},
                   {"rel_tol", cfg.bfgs.rel_tol}};
    j["sample"] = {{"observations", rep.observations},
                   {"first", rep.dates.empty() ? json(nullptr) : json(rep.dates.front().str())},
                   {"last", rep.dates.empty() ? json(nullptr) : json(rep.dates.back().str())}};

    json sections = json::object();
    if (rep.table1)
        sections["table1"] = {{"moments", to_json(rep.table1->moments)},
                              {"jarque_bera", to_json(rep.table1->jarque_bera)},
                              {"adf", to_json(rep.table1->adf)}};
    if (rep.table2)
        sections["table2"] = {{"p_suggested", rep.table2->suggestion.p_suggested},
                              {"q_suggested", rep.table2->suggestion.q_suggested},
                              {"threshold", significance_threshold(rep.observations, cfg.level)},
                              {"correlogram", to_json(rep.table2->suggestion.correlogram)}};
    if (rep.tables3_4) {
        json c = json::array();
        for (const auto& r : rep.tables3_4->candidates) c.push_back(to_json(r));
        const auto& sec = *rep.tables3_4;
        sections["tables3_4"] = {
            {"candidates", c},
            {"fe_process", sec.fe_process ? json(to_string(*sec.fe_process)) : json(nullptr)},
            {"premium_process", sec.premium_process ? json(to_string(*sec.premium_process)) : json(nullptr)},
            {"premium_process_source", sec.premium_process_source}};
    }
    if (rep.table5) sections["table5"] = to_json(*rep.table5);
    if (rep.tables6_8) {
        json a = json::array();
        for (const auto& v : *rep.tables6_8) {
            json m = to_json(v.fit);
            m["label"] = v.label;
            m["rp_hat_variance"] = detail::num(v.rp_hat_variance);
            a.push_back(std::move(m));
        }
        sections["tables6_8"] = a;
    }
    if (rep.tables7_9) {
        json a = json::array();
        for (const auto& v : *rep.tables7_9) {
            json lb = json::object();
            for (const auto& [lag, p] : v.check.lb_p_values) lb[std::to_string(lag)] = detail::num(p);
            a.push_back({{"label", v.label},
                         {"n", v.check.n},
                         {"correlogram", to_json(v.check.correlogram)},
                         {"lb_p_values", lb},
                         {"correlogram_clean", v.check.correlogram_clean},
                         {"lb_pass", v.check.lb_pass},
                         {"verdict", v.check.verdict}});
        }
        sections["tables7_9"] = a;
    }
    if (rep.premia) {
        json a = json::array();
        for (const auto& v : *rep.premia)
            a.push_back({{"label", v.label}, {"file", "premia_" + v.label + ".csv"}, {"burn_in", v.series.burn_in}});
        sections["premia"] = a;
    }
    for (const auto& name : report_sections())
        if (auto it = rep.skipped.find(name); it != rep.skipped.end())
            sections[name] = {{"skipped", true}, {"reason", it->second}};
    json ordered = json::object();
    for (const auto& name : report_sections()) ordered[name] = sections.contains(name) ? sections[name] : json(nullptr);
    j["sections"] = ordered;
    j["flags"] = rep.flags;
    j["status"] = rep.degraded() ? "degraded" : "ok";
    return j;
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream os(p, std::ios::binary);
    if (!os) fail(ErrorKind::io, "cannot write " + p.string());
    return os;
}

}  // namespace detail

/// Writes report.json plus CSV files for each present section.
inline void write_report(const AnalysisReport& rep, const PipelineConfig& cfg, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorKind::io, "cannot create output directory " + dir.string() + ": " + ec.message());

    detail::open_out(dir / "report.json") << to_json(rep, cfg).dump(2) << '\n';

    if (rep.table1) {
        auto os = detail::open_out(dir / "table1.csv");
        const auto& t = *rep.table1;
        os << "statistic,value\n"
           << "observations," << t.moments.n << '\n'
           << "mean," << detail::csv_num(t.moments.mean) << '\n'
           << "sd," << detail::csv_num(t.moments.sd) << '\n'
           << "skewness," << detail::csv_num(t.moments.skewness.value_or(NAN)) << '\n'
           << "excess_kurtosis," << detail::csv_num(t.moments.excess_kurtosis.value_or(NAN)) << '\n'
           << "jb_stat," << detail::csv_num(t.jarque_bera.statistic) << '\n'
           << "jb_p," << detail::csv_num(t.jarque_bera.p_value) << '\n'
           << "adf_t," << detail::csv_num(t.adf.statistic) << '\n'
           << "adf_p," << detail::csv_num(t.adf.p_value) << '\n';
    }
    if (rep.table2) {
        auto os = detail::open_out(dir / "correlogram.csv");
        write_correlogram_csv(os, rep.table2->suggestion.correlogram);
    }
    if (rep.tables3_4) {
        auto os = detail::open_out(dir / "candidates.csv");
        write_candidates_csv(os, rep.tables3_4->candidates);
    }
    if (rep.table5) {
        auto os = detail::open_out(dir / "table5.csv");
        const auto& v = *rep.table5;
        os << "coefficient,beta,se,t,p,resid_adf_p\n"
           << "beta3," << detail::csv_num(v.beta3_fit.beta) << ',' << detail::csv_num(v.beta3_fit.se_beta) << ','
           << detail::csv_num(v.beta3_fit.t_beta) << ',' << detail::csv_num(v.p_beta3_two_tail) << ','
           << detail::csv_num(v.resid_adf_beta3.p_value) << '\n'
           << "beta4," << detail::csv_num(v.beta4_fit.beta) << ',' << detail::csv_num(v.beta4_fit.se_beta) << ','
           << detail::csv_num(v.beta4_fit.t_beta) << ',' << detail::csv_num(v.p_beta4_one_tail) << ','
           << detail::csv_num(v.resid_adf_beta4.p_value) << '\n';
    }
    if (rep.tables6_8) {
        auto os = detail::open_out(dir / "state_space.csv");
        os << "variant,p,q,phi,theta,R,Q,C,rp_hat_variance,loglik,aic,sc,hqc,converged\n";
        for (const auto& v : *rep.tables6_8) {
            const auto join = [](const std::vector<double>& xs) {
                std::string out;
                for (double x : xs) out += (out.empty() ? "" : ";") + detail::csv_num(x);
                return out;
            };
            const auto& f = v.fit;
            os << v.label << ',' << f.spec.p << ',' << f.spec.q << ',' << join(f.spec.phi) << ','
               << join(f.spec.theta) << ',' << detail::csv_num(f.spec.R) << ',' << detail::csv_num(f.spec.Q) << ','
               << detail::csv_num(f.spec.C) << ',' << detail::csv_num(v.rp_hat_variance) << ','
               << detail::csv_num(f.loglik) << ',' << detail::csv_num(f.aic) << ',' << detail::csv_num(f.sc) << ','
               << detail::csv_num(f.hqc) << ',' << (f.converged ? "true" : "false") << '\n';
        }
    }
    if (rep.tables7_9) {
        for (const auto& v : *rep.tables7_9) {
            auto os = detail::open_out(dir / ("whiteness_" + v.label + ".csv"));
            write_correlogram_csv(os, v.check.correlogram);
        }
    }
    if (rep.premia) {
        for (std::size_t i = 0; i < rep.premia->size(); ++i) {
            const auto& v = (*rep.premia)[i];
            {
                auto os = detail::open_out(dir / ("premia_" + v.label + ".csv"));
                write_premia_csv(os, rep.dates, v.series);
            }
            if (i == 0) {
                auto os = detail::open_out(dir / "premia.csv");
                write_premia_csv(os, rep.dates, v.series);
            }
        }
    }
}

/// Ingests cfg.input, runs the analysis and, when cfg.out_dir is set, writes
/// the report files. Ingestion and descriptive-stage errors propagate.
inline AnalysisReport run_pipeline(const PipelineConfig& cfg) {
    auto rates = ingest_csv(cfg.input, cfg.format, cfg.ingest);
    if (cfg.from || cfg.to) {
        rates = filter_range(rates, cfg.from, cfg.to);
        if (rates.empty()) fail(ErrorKind::insufficient_data, "no observations in the requested date range");
    }
    const auto aligned = build_aligned(rates);
    auto rep = analyze_series(aligned, cfg);
    if (!cfg.out_dir.empty()) write_report(rep, cfg, cfg.out_dir);
    return rep;
}

}  // namespace fxrp
