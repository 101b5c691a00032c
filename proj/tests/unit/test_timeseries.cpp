#include "fxrp/timeseries.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

using namespace fxrp;

namespace {

std::vector<RateObservation> parse(const std::string& text, CsvFormat f = CsvFormat::generic, IngestOptions o = {}) {
    std::istringstream in(text);
    return parse_csv(in, f, o);
}

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no fxrp::Error thrown";
    return ErrorKind::io;
}

std::string message_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST(Ingest, WellFormedRowsRoundTrip) {
    const auto obs = ingest_csv(FXRP_FIXTURE_DIR "/generic_sample.csv", CsvFormat::generic);
    ASSERT_EQ(obs.size(), 3u);
    EXPECT_EQ(obs[0].date, (YearMonth{2000, 1}));
    EXPECT_EQ(obs[2].date, (YearMonth{2000, 3}));
    EXPECT_DOUBLE_EQ(obs[1].spot, 1.62);
    EXPECT_DOUBLE_EQ(obs[1].forward_1m, 1.63);
}

TEST(Ingest, GapIsContinuityErrorNamingMissingMonth) {
    const auto run = [] { parse("date,spot,forward\n2000-01,1.6,1.61\n2000-03,1.59,1.6\n"); };
    EXPECT_EQ(kind_of(run), ErrorKind::continuity);
    EXPECT_NE(message_of(run).find("2000-02"), std::string::npos);
}

TEST(Ingest, NonPositiveRateIsDomainError) {
    EXPECT_EQ(kind_of([] { parse("date,spot,forward\n2000-01,0,1.61\n2000-02,1.6,1.6\n"); }), ErrorKind::domain);
    EXPECT_EQ(kind_of([] { parse("date,spot,forward\n2000-01,1.6,-1\n2000-02,1.6,1.6\n"); }), ErrorKind::domain);
}

TEST(Ingest, MalformedRowReportsRowNumber) {
    const auto run = [] { parse("date,spot,forward\n2000-01,1.6,1.61\n2000-02,abc,1.6\n"); };
    EXPECT_EQ(kind_of(run), ErrorKind::parse);
    EXPECT_NE(message_of(run).find("row 3"), std::string::npos);
    EXPECT_EQ(kind_of([] { parse("date,spot,forward\n2000-01,1.6\n"); }), ErrorKind::parse);
    EXPECT_EQ(kind_of([] { parse("date,spot,forward\n2000-13,1.6,1.6\n"); }), ErrorKind::parse);
}

TEST(Ingest, DuplicateMonthRejected) {
    EXPECT_EQ(kind_of([] { parse("date,spot,forward\n2000-01,1.6,1.61\n2000-01,1.6,1.61\n"); }), ErrorKind::parse);
}

TEST(Ingest, EmptyInputNeedsHeader) { EXPECT_EQ(kind_of([] { parse(""); }), ErrorKind::parse); }

TEST(Ingest, DayComponentTruncatedAndBomAndCrlfAccepted) {
    const auto obs = parse("\xEF\xBB\xBF" "date,spot,forward\r\n2000-01-31,1.6,1.61\r\n\r\n2000-02-29,1.62,1.63\r\n");
    ASSERT_EQ(obs.size(), 2u);
    EXPECT_EQ(obs[1].date, (YearMonth{2000, 2}));
}

TEST(Ingest, BoeExportLayout) {
    const auto obs = ingest_csv(FXRP_FIXTURE_DIR "/boe_sample.csv", CsvFormat::boe_export);
    ASSERT_EQ(obs.size(), 6u);
    EXPECT_EQ(obs.front().date, (YearMonth{1979, 1}));
    EXPECT_EQ(obs.back().date, (YearMonth{1979, 6}));
    EXPECT_DOUBLE_EQ(obs.front().spot, 2.0087);  // USD per GBP kept as quoted
}

TEST(Ingest, HkmaExportIsInvertedByDefault) {
    const auto obs = ingest_csv(FXRP_FIXTURE_DIR "/hkma_sample.csv", CsvFormat::hkma_export);
    ASSERT_EQ(obs.size(), 5u);
    EXPECT_EQ(obs.front().date, (YearMonth{1998, 1}));
    EXPECT_DOUBLE_EQ(obs.front().spot, 1.0 / 7.7450);
    EXPECT_DOUBLE_EQ(obs.front().forward_1m, 1.0 / 7.7990);

    IngestOptions keep;
    keep.invert = false;
    const auto raw = ingest_csv(FXRP_FIXTURE_DIR "/hkma_sample.csv", CsvFormat::hkma_export, keep);
    EXPECT_DOUBLE_EQ(raw.front().spot, 7.7450);
}

TEST(Ingest, MissingFileIsIoError) {
    EXPECT_EQ(kind_of([] { ingest_csv("/nonexistent/rates.csv", CsvFormat::generic); }), ErrorKind::io);
}

TEST(Ingest, RowOrderDoesNotMatter) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> z;
    std::vector<std::string> rows;
    YearMonth d{1990, 1};
    for (int i = 0; i < 40; ++i, d = d.next()) {
        std::ostringstream os;
        os.precision(17);
        os << d.str() << ',' << std::exp(0.4 + 0.05 * z(rng)) << ',' << std::exp(0.4 + 0.05 * z(rng));
        rows.push_back(os.str());
    }
    const auto join = [](const std::vector<std::string>& r) {
        std::string s = "date,spot,forward\n";
        for (const auto& x : r) s += x + "\n";
        return s;
    };
    const auto a = build_aligned(parse(join(rows)));
    std::shuffle(rows.begin(), rows.end(), rng);
    const auto b = build_aligned(parse(join(rows)));
    EXPECT_EQ(a.dates, b.dates);
    EXPECT_EQ(a.fwd_err, b.fwd_err);
    EXPECT_EQ(a.spot_chg, b.spot_chg);
    EXPECT_EQ(a.fs_diff, b.fs_diff);
}

TEST(Aligned, HandEvaluatedLogs) {
    const std::vector<RateObservation> obs{{{2000, 1}, 1.0, 1.1}, {{2000, 2}, 1.2, 1.25}, {{2000, 3}, 1.15, 1.18}};
    const auto s = build_aligned(obs);
    ASSERT_EQ(s.t_count(), 2u);
    // values from an independent calculator
    EXPECT_NEAR(s.fwd_err[0], -0.08701137698962966, 1e-15);
    EXPECT_NEAR(s.fs_diff[0], 0.09531017980432493, 1e-15);
    EXPECT_NEAR(s.spot_chg[0], 0.1823215567939546, 1e-15);
    EXPECT_NEAR(s.fwd_err[1], 0.08338160893905114, 1e-15);
    EXPECT_NEAR(s.spot_chg[1], -0.042559614418795966, 1e-15);
    EXPECT_NEAR(s.fs_diff[1], 0.04082199452025517, 1e-15);
    EXPECT_EQ(s.dates[1], (YearMonth{2000, 2}));
}

TEST(Aligned, ConstantSeriesGivesZeros) {
    std::vector<RateObservation> obs;
    YearMonth d{2001, 1};
    for (int i = 0; i < 10; ++i, d = d.next()) obs.push_back({d, 1.37, 1.37});
    const auto s = build_aligned(obs);
    for (std::size_t t = 0; t < s.t_count(); ++t) {
        EXPECT_EQ(s.fwd_err[t], 0.0);
        EXPECT_EQ(s.spot_chg[t], 0.0);
        EXPECT_EQ(s.fs_diff[t], 0.0);
    }
}

TEST(Aligned, TooFewObservations) {
    const std::vector<RateObservation> obs{{{2000, 1}, 1.0, 1.1}, {{2000, 2}, 1.2, 1.25}};
    EXPECT_EQ(kind_of([&] { build_aligned(obs); }), ErrorKind::insufficient_data);
}

TEST(Aligned, MonthlySampleLengthAndLastMonth) {
    std::vector<RateObservation> obs;
    for (YearMonth d{1979, 1}; d <= YearMonth{2016, 3}; d = d.next()) obs.push_back({d, 1.5, 1.51});
    ASSERT_EQ(obs.size(), 447u);
    const auto s = build_aligned(obs);
    EXPECT_EQ(s.t_count(), 446u);
    EXPECT_EQ(s.dates.back(), (YearMonth{2016, 2}));
}

TEST(AlignedProperty, AdditiveIdentityAndLength) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> z;
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 3 + rep % 50;
        std::vector<RateObservation> obs;
        YearMonth d{1970, 1};
        double ls = 0.0;
        for (std::size_t i = 0; i < n; ++i, d = d.next()) {
            obs.push_back({d, std::exp(ls), std::exp(ls + 0.01 * z(rng))});
            ls += 0.05 * z(rng);
        }
        const auto s = build_aligned(obs);
        ASSERT_EQ(s.t_count(), n - 1);
        ASSERT_EQ(s.spot_chg.size(), n - 1);
        ASSERT_EQ(s.fs_diff.size(), n - 1);
        for (std::size_t t = 0; t < s.t_count(); ++t)
            EXPECT_LE(std::abs(s.fwd_err[t] + s.spot_chg[t] - s.fs_diff[t]), 1e-12);
    }
}

TEST(Aligned, CsvExportHeaderAndPrecision) {
    const std::vector<RateObservation> obs{{{2000, 1}, 1.0, 1.1}, {{2000, 2}, 1.2, 1.25}, {{2000, 3}, 1.15, 1.18}};
    std::ostringstream os;
    write_aligned_csv(os, build_aligned(obs));
    std::istringstream in(os.str());
    std::string header, first;
    std::getline(in, header);
    std::getline(in, first);
    EXPECT_EQ(header, "date,fwd_err,spot_chg,fs_diff");
    EXPECT_EQ(first, "2000-01,-0.08701137699,0.1823215568,0.0953101798");
}

TEST(Range, FilterKeepsInclusiveWindow) {
    std::vector<RateObservation> obs;
    for (YearMonth d{2000, 1}; d <= YearMonth{2000, 12}; d = d.next()) obs.push_back({d, 1.0, 1.0});
    const auto mid = filter_range(obs, YearMonth{2000, 3}, YearMonth{2000, 5});
    ASSERT_EQ(mid.size(), 3u);
    EXPECT_EQ(mid.front().date, (YearMonth{2000, 3}));
    EXPECT_EQ(filter_range(obs, std::nullopt, YearMonth{2000, 2}).size(), 2u);
}

TEST(YearMonthParse, AcceptedSpellings) {
    EXPECT_EQ(parse_year_month("1999-12"), (YearMonth{1999, 12}));
    EXPECT_EQ(parse_year_month("1999/07"), (YearMonth{1999, 7}));
    EXPECT_EQ(parse_year_month("31 Jan 1979"), (YearMonth{1979, 1}));
    EXPECT_EQ(parse_year_month("28-Feb-1979"), (YearMonth{1979, 2}));
    EXPECT_FALSE(parse_year_month("Jan 1979 31").has_value());
    EXPECT_FALSE(parse_year_month("1999-00").has_value());
}
