#include "fxrp/pipeline.hpp"
#include "fxrp/simulate.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

constexpr int exit_ok = 0;
constexpr int exit_fatal = 1;
constexpr int exit_degraded = 2;

fxrp::CsvFormat format_from(const std::string& s) {
    if (auto f = fxrp::parse_csv_format(s)) return *f;
    fxrp::fail(fxrp::ErrorKind::parameter, "unknown format '" + s + "'");
}

std::optional<fxrp::YearMonth> month_from(const std::string& s) {
    if (s.empty()) return std::nullopt;
    if (auto m = fxrp::parse_year_month(s)) return m;
    fxrp::fail(fxrp::ErrorKind::parse, "bad month '" + s + "' (expected YYYY-MM)");
}

fxrp::ArmaOrder order_from(const std::string& s) {
    const auto comma = s.find(',');
    std::optional<int> p, q;
    if (comma != std::string::npos) {
        p = fxrp::detail::parse_int(std::string_view(s).substr(0, comma));
        q = fxrp::detail::parse_int(std::string_view(s).substr(comma + 1));
    }
    if (!p || !q) fxrp::fail(fxrp::ErrorKind::parse, "bad candidate '" + s + "' (expected p,q)");
    return {*p, *q};
}

struct AnalyzeArgs {
    std::string input, format = "generic", constrain_c = "both", out, from, to, model_spec;
    std::vector<std::string> candidates;
    double level = 0.05;
    std::optional<bool> invert;
    std::uint64_t seed = 42;
};

int run_analyze(const AnalyzeArgs& a) {
    fxrp::PipelineConfig cfg;
    cfg.input = a.input;
    cfg.format = format_from(a.format);
    cfg.ingest.invert = a.invert;
    cfg.from = month_from(a.from);
    cfg.to = month_from(a.to);
    cfg.level = a.level;
    cfg.constrain_c = fxrp::parse_constrain_c(a.constrain_c);
    cfg.seed = a.seed;
    if (!a.model_spec.empty()) fxrp::apply_model_spec_file(a.model_spec, cfg);
    if (!a.candidates.empty()) {
        std::vector<fxrp::ArmaOrder> c;
        for (const auto& s : a.candidates) c.push_back(order_from(s));
        cfg.candidates = std::move(c);
    }
    cfg.out_dir = a.out.empty() ? fxrp::default_out_dir() : std::filesystem::path(a.out);

    const auto rep = fxrp::run_pipeline(cfg);
    std::cout << "report written to " << (cfg.out_dir / "report.json").string() << '\n';
    if (rep.table5)
        std::cout << "time-varying premia: " << (rep.table5->premia_exist_and_vary ? "yes" : "no") << '\n';
    if (rep.tables3_4 && rep.tables3_4->premium_process)
        std::cout << "premium process: " << fxrp::to_string(*rep.tables3_4->premium_process) << '\n';
    for (const auto& [section, reason] : rep.skipped) std::cerr << "skipped " << section << ": " << reason << '\n';
    for (const auto& f : rep.flags) std::cerr << "flag " << f << '\n';
    return rep.degraded() ? exit_degraded : exit_ok;
}

struct SimulateArgs {
    int p = 1, q = 0;
    std::vector<double> phi, theta;
    double r = 7.27e-4, qvar = 1.12e-4, c = 0.0;
    std::size_t t = 446;
    std::uint64_t seed = 42;
    std::string out, start = "1979-01", components;
    double spot0 = 1.6;
    double dse_sd = 0.0, dse_loading = 0.0;
};

int run_simulate(const SimulateArgs& a) {
    const auto spec = fxrp::build_arma_spec(a.p, a.q, a.phi, a.theta, a.r, a.qvar, a.c);
    std::optional<fxrp::ExpectedSpotChange> dse;
    if (a.dse_sd > 0.0 || a.dse_loading != 0.0) dse = fxrp::ExpectedSpotChange{a.dse_loading, a.dse_sd};
    const auto path = fxrp::simulate(spec, a.t, a.seed, dse);
    const auto rates = fxrp::synthesize_rates(path, *month_from(a.start), a.spot0);

    const auto write = [&](std::ostream& os) { fxrp::write_rates_csv(os, rates); };
    if (a.out.empty() || a.out == "-") {
        write(std::cout);
    } else {
        std::ofstream os(a.out, std::ios::binary);
        if (!os) fxrp::fail(fxrp::ErrorKind::io, "cannot write " + a.out);
        write(os);
    }
    if (!a.components.empty()) {
        std::ofstream os(a.components, std::ios::binary);
        if (!os) fxrp::fail(fxrp::ErrorKind::io, "cannot write " + a.components);
        os << "date,fe,rp,re,a,dse\n" << std::setprecision(12);
        fxrp::YearMonth d = *month_from(a.start);
        for (std::size_t i = 0; i < a.t; ++i, d = d.next())
            os << d.str() << ',' << path.fe[i] << ',' << path.rp[i] << ',' << path.re[i] << ',' << path.a[i] << ','
               << (path.spot_chg_e ? (*path.spot_chg_e)[i] : 0.0) << '\n';
    }
    return exit_ok;
}

int run_test_premia(const std::string& input, const std::string& format, double level, std::optional<bool> invert) {
    fxrp::IngestOptions io;
    io.invert = invert;
    const auto rates = fxrp::ingest_csv(input, format_from(format), io);
    const auto verdict = fxrp::test_time_varying_premia(fxrp::build_aligned(rates), level);
    std::cout << fxrp::to_json(verdict).dump(2) << '\n';
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Foreign-exchange risk premia: regressions and state-space extraction"};
    app.require_subcommand(1);

    AnalyzeArgs aa;
    bool aa_invert = false, aa_no_invert = false;
    auto* analyze = app.add_subcommand("analyze", "run the full analysis and write a report directory");
    analyze->add_option("--input", aa.input, "spot/forward CSV")->required()->check(CLI::ExistingFile);
    analyze->add_option("--format", aa.format, "generic | boe_export | hkma_export")->capture_default_str();
    analyze->add_option("--level", aa.level, "significance level")->capture_default_str();
    analyze->add_option("--constrain-c", aa.constrain_c, "both | zero_only | free_only")->capture_default_str();
    analyze->add_option("--out", aa.out, "output directory (default $FXRP_OUT_DIR or ./fxrp_out)");
    analyze->add_option("--from", aa.from, "first month, YYYY-MM");
    analyze->add_option("--to", aa.to, "last month, YYYY-MM");
    analyze->add_option("--candidates", aa.candidates, "candidate ARMA orders as p,q (repeatable)");
    analyze->add_option("--model-spec", aa.model_spec, "key=value model file")->check(CLI::ExistingFile);
    analyze->add_option("--seed", aa.seed, "seed recorded in the report")->capture_default_str();
    analyze->add_flag("--invert", aa_invert, "invert quotes");
    analyze->add_flag("--no-invert", aa_no_invert, "do not invert quotes");

    SimulateArgs sa;
    auto* sim = app.add_subcommand("simulate", "simulate the state-space model and write spot/forward quotes");
    sim->add_option("--p", sa.p)->capture_default_str();
    sim->add_option("--q", sa.q)->capture_default_str();
    sim->add_option("--phi", sa.phi, "AR coefficients");
    sim->add_option("--theta", sa.theta, "MA coefficients");
    sim->add_option("--r", sa.r, "rational-error variance R")->capture_default_str();
    sim->add_option("--qvar", sa.qvar, "premium-innovation variance Q")->capture_default_str();
    sim->add_option("--c", sa.c, "cross-covariance C")->capture_default_str();
    sim->add_option("--t", sa.t, "number of forward errors")->capture_default_str();
    sim->add_option("--seed", sa.seed)->capture_default_str();
    sim->add_option("--out", sa.out, "output CSV (default stdout)");
    sim->add_option("--start", sa.start, "first month")->capture_default_str();
    sim->add_option("--spot0", sa.spot0, "initial spot level")->capture_default_str();
    sim->add_option("--dse-sd", sa.dse_sd, "sd of the expected spot change")->capture_default_str();
    sim->add_option("--dse-loading", sa.dse_loading, "loading of the expected spot change on rp")->capture_default_str();
    sim->add_option("--components", sa.components, "also write fe, rp, re, a, dse to this CSV");

    std::string tp_input, tp_format = "generic";
    double tp_level = 0.05;
    bool tp_invert = false, tp_no_invert = false;
    auto* tp = app.add_subcommand("test-premia", "regression test for time-varying premia; prints JSON");
    tp->add_option("--input", tp_input)->required()->check(CLI::ExistingFile);
    tp->add_option("--format", tp_format)->capture_default_str();
    tp->add_option("--level", tp_level)->capture_default_str();
    tp->add_flag("--invert", tp_invert);
    tp->add_flag("--no-invert", tp_no_invert);

    CLI11_PARSE(app, argc, argv);

    const auto tri = [](bool yes, bool no) -> std::optional<bool> {
        if (yes && no) fxrp::fail(fxrp::ErrorKind::parameter, "--invert and --no-invert are exclusive");
        if (yes) return true;
        if (no) return false;
        return std::nullopt;
    };
    try {
        if (*analyze) {
            aa.invert = tri(aa_invert, aa_no_invert);
            return run_analyze(aa);
        }
        if (*sim) return run_simulate(sa);
        if (*tp) return run_test_premia(tp_input, tp_format, tp_level, tri(tp_invert, tp_no_invert));
    } catch (const fxrp::Error& e) {
        std::cerr << e.what() << '\n';
        return exit_fatal;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_fatal;
    }
    return exit_fatal;
}
