#pragma once

// Monthly spot/forward ingestion and the aligned log-derived series used by
// every downstream stage.

#include "fxrp/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <compare>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace fxrp {

/// Calendar month stamp.
struct YearMonth {
    int year = 1970;
    int month = 1;  // 1..12

    constexpr auto operator<=>(const YearMonth&) const = default;

    constexpr int index() const { return year * 12 + (month - 1); }
    static constexpr YearMonth from_index(int idx) { return {idx / 12, idx % 12 + 1}; }
    constexpr YearMonth next() const { return from_index(index() + 1); }

    std::string str() const {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
        return buf;
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (std::isspace(static_cast<unsigned char>(s.front())) || s.front() == '"'))
        s.remove_prefix(1);
    while (!s.empty() && (std::isspace(static_cast<unsigned char>(s.back())) || s.back() == '"'))
        s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == ',' && !quoted) {
            fields.push_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    fields.push_back(trim(line.substr(start)));
    return fields;
}

inline std::optional<int> parse_int(std::string_view s) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::optional<double> parse_double(std::string_view s) {
    if (s.empty()) return std::nullopt;
    std::string tmp(s);
    char* end = nullptr;
    double v = std::strtod(tmp.c_str(), &end);
    if (end != tmp.c_str() + tmp.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline std::optional<int> parse_month_name(std::string_view s) {
    static constexpr std::array<std::string_view, 12> names = {
        "jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"};
    if (s.size() < 3) return std::nullopt;
    std::string lower;
    for (char c : s.substr(0, 3)) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    for (std::size_t i = 0; i < names.size(); ++i)
        if (lower == names[i]) return static_cast<int>(i) + 1;
    return std::nullopt;
}

inline std::optional<YearMonth> checked_month(int year, int month) {
    if (month < 1 || month > 12 || year < 1000 || year > 9999) return std::nullopt;
    return YearMonth{year, month};
}

}  // namespace detail

/// Parses `YYYY-MM`, `YYYY-MM-DD` (day truncated), `YYYY/MM`, or
/// `DD Mon YYYY` / `DD-Mon-YYYY` (the Bank of England export style).
inline std::optional<YearMonth> parse_year_month(std::string_view text) {
    auto s = detail::trim(text);
    if (s.size() >= 7 && std::isdigit(static_cast<unsigned char>(s[0])) && (s[4] == '-' || s[4] == '/')) {
        auto y = detail::parse_int(s.substr(0, 4));
        auto rest = s.substr(5);
        auto sep = rest.find_first_of("-/");
        auto m = detail::parse_int(rest.substr(0, sep));
        if (sep != std::string_view::npos) {
            auto d = detail::parse_int(rest.substr(sep + 1));
            if (!d || *d < 1 || *d > 31) return std::nullopt;
        }
        if (!y || !m) return std::nullopt;
        return detail::checked_month(*y, *m);
    }
    // DD Mon YYYY
    std::string norm(s);
    std::replace(norm.begin(), norm.end(), '-', ' ');
    std::istringstream in(norm);
    std::string day, mon, year;
    if (in >> day >> mon >> year) {
        auto d = detail::parse_int(day);
        auto m = detail::parse_month_name(mon);
        auto y = detail::parse_int(year);
        if (d && m && y && *d >= 1 && *d <= 31) return detail::checked_month(*y, *m);
    }
    return std::nullopt;
}

/// One month's quotes, domestic currency per unit of foreign currency.
struct RateObservation {
    YearMonth date;
    double spot = 0.0;
    double forward_1m = 0.0;
};

enum class CsvFormat { generic, boe_export, hkma_export };

inline std::optional<CsvFormat> parse_csv_format(std::string_view s) {
    if (s == "generic") return CsvFormat::generic;
    if (s == "boe_export") return CsvFormat::boe_export;
    if (s == "hkma_export") return CsvFormat::hkma_export;
    return std::nullopt;
}

inline std::string_view to_string(CsvFormat f) {
    switch (f) {
        case CsvFormat::generic: return "generic";
        case CsvFormat::boe_export: return "boe_export";
        case CsvFormat::hkma_export: return "hkma_export";
    }
    return "?";
}

/// Whether a format's source quotes foreign-per-domestic and must be inverted.
/// BoE quotes USD per GBP (already domestic/foreign); HKMA quotes HKD per USD.
inline bool default_inversion(CsvFormat format) { return format == CsvFormat::hkma_export; }

struct IngestOptions {
    std::optional<bool> invert;  // unset: per-format default
};

namespace detail {

inline void validate_and_sort(std::vector<RateObservation>& obs) {
    std::sort(obs.begin(), obs.end(), [](const auto& a, const auto& b) { return a.date < b.date; });
    for (std::size_t i = 0; i < obs.size(); ++i) {
        if (!(obs[i].spot > 0.0) || !(obs[i].forward_1m > 0.0))
            fail(ErrorKind::domain, "non-positive rate at " + obs[i].date.str());
        if (i == 0) continue;
        if (obs[i].date == obs[i - 1].date)
            fail(ErrorKind::parse, "duplicate month " + obs[i].date.str());
        if (obs[i].date != obs[i - 1].date.next())
            fail(ErrorKind::continuity, "missing month " + obs[i - 1].date.next().str() + " (between " +
                                            obs[i - 1].date.str() + " and " + obs[i].date.str() + ")");
    }
}

}  // namespace detail

/// Reads rate observations from CSV text. A header row is required.
///
/// Layouts:
///  - generic:     `date,spot,forward` with `YYYY-MM` (or `YYYY-MM-DD`) dates
///  - boe_export:  `DATE,<spot series>,<forward series>` with `DD Mon YYYY` dates
///  - hkma_export: `year,month,spot,forward` where month is 1..12 or a month
///                 name; rates are HKD per USD and inverted by default
///
/// Rows may arrive in any order; the result is sorted, and duplicate or
/// missing months are errors.
inline std::vector<RateObservation> parse_csv(std::istream& in, CsvFormat format, IngestOptions opts = {}) {
    const bool invert = opts.invert.value_or(default_inversion(format));
    std::vector<RateObservation> out;
    std::string line;
    std::size_t row = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (row == 1 && line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM
        if (detail::trim(line).empty()) continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        auto fields = detail::split_csv_line(line);
        const auto bad = [&](const std::string& why) {
            fail(ErrorKind::parse, "row " + std::to_string(row) + ": " + why);
        };
        std::optional<YearMonth> date;
        std::optional<double> spot, fwd;
        switch (format) {
            case CsvFormat::generic:
            case CsvFormat::boe_export:
                if (fields.size() != 3) bad("expected 3 fields, got " + std::to_string(fields.size()));
                date = parse_year_month(fields[0]);
                spot = detail::parse_double(fields[1]);
                fwd = detail::parse_double(fields[2]);
                break;
            case CsvFormat::hkma_export: {
                if (fields.size() != 4) bad("expected 4 fields, got " + std::to_string(fields.size()));
                auto y = detail::parse_int(fields[0]);
                auto m = detail::parse_int(fields[1]);
                if (!m) m = detail::parse_month_name(fields[1]);
                if (y && m) date = detail::checked_month(*y, *m);
                spot = detail::parse_double(fields[2]);
                fwd = detail::parse_double(fields[3]);
                break;
            }
        }
        if (!date) bad("unparseable date");
        if (!spot || !fwd) bad("unparseable rate");
        if (!(*spot > 0.0) || !(*fwd > 0.0))
            fail(ErrorKind::domain, "row " + std::to_string(row) + ": non-positive rate");
        if (invert) {
            spot = 1.0 / *spot;
            fwd = 1.0 / *fwd;
        }
        out.push_back({*date, *spot, *fwd});
    }
    if (!header_seen) fail(ErrorKind::parse, "empty input (header row required)");
    detail::validate_and_sort(out);
    return out;
}

inline std::vector<RateObservation> ingest_csv(const std::filesystem::path& path, CsvFormat format,
                                               IngestOptions opts = {}) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot open " + path.string());
    return parse_csv(in, format, opts);
}

/// Keeps observations with from <= date <= to.
inline std::vector<RateObservation> filter_range(std::span<const RateObservation> obs, std::optional<YearMonth> from,
                                                 std::optional<YearMonth> to) {
    std::vector<RateObservation> out;
    for (const auto& o : obs)
        if ((!from || o.date >= *from) && (!to || o.date <= *to)) out.push_back(o);
    return out;
}

/// Log-derived series. Entry t pairs month t's forward with month t+1's spot,
/// so the last raw observation contributes only its spot.
struct AlignedSeries {
    std::vector<YearMonth> dates;
    std::vector<double> fwd_err;   // ln f_t - ln s_{t+1}
    std::vector<double> spot_chg;  // ln s_{t+1} - ln s_t
    std::vector<double> fs_diff;   // ln f_t - ln s_t

    std::size_t t_count() const { return fwd_err.size(); }
};

inline AlignedSeries build_aligned(std::span<const RateObservation> observations) {
    if (observations.size() < 3)
        fail(ErrorKind::insufficient_data,
             "need at least 3 observations, got " + std::to_string(observations.size()));
    std::vector<RateObservation> obs(observations.begin(), observations.end());
    detail::validate_and_sort(obs);

    const std::size_t T = obs.size() - 1;
    AlignedSeries s;
    s.dates.reserve(T);
    s.fwd_err.reserve(T);
    s.spot_chg.reserve(T);
    s.fs_diff.reserve(T);
    for (std::size_t t = 0; t < T; ++t) {
        const double ls = std::log(obs[t].spot);
        const double lf = std::log(obs[t].forward_1m);
        const double ls_next = std::log(obs[t + 1].spot);
        s.dates.push_back(obs[t].date);
        s.fwd_err.push_back(lf - ls_next);
        s.spot_chg.push_back(ls_next - ls);
        s.fs_diff.push_back(lf - ls);
    }
    return s;
}

/// `date,fwd_err,spot_chg,fs_diff`, 10 significant digits.
inline void write_aligned_csv(std::ostream& os, const AlignedSeries& s) {
    os << "date,fwd_err,spot_chg,fs_diff\n";
    auto flags = os.flags();
    auto prec = os.precision();
    os << std::setprecision(10);
    for (std::size_t t = 0; t < s.t_count(); ++t)
        os << s.dates[t].str() << ',' << s.fwd_err[t] << ',' << s.spot_chg[t] << ',' << s.fs_diff[t] << '\n';
    os.flags(flags);
    os.precision(prec);
}

inline void write_rates_csv(std::ostream& os, std::span<const RateObservation> obs) {
    os << "date,spot,forward\n";
    auto prec = os.precision();
    os << std::setprecision(12);
    for (const auto& o : obs) os << o.date.str() << ',' << o.spot << ',' << o.forward_1m << '\n';
    os.precision(prec);
}

}  // namespace fxrp
