#include "fxcog/ingest.hpp"

#include "fxcog/error.hpp"
#include "fxcog/rng.hpp"
#include "fxcog/text.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

namespace fxcog {

namespace {

constexpr std::string_view kPriceHeader = "date,open,high,low,close";
constexpr std::string_view kMacroHeader = "release_date,value";

std::string location(const std::string& source, std::size_t line) {
    return source + ":" + std::to_string(line);
}

// Yields (line number, line) for non-empty lines, stripping a trailing '\r'.
template <typename F>
void for_each_line(std::string_view contents, F&& f) {
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= contents.size()) {
        auto end = contents.find('\n', start);
        if (end == std::string_view::npos) end = contents.size();
        ++line_no;
        auto line = contents.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!text::trim(line).empty()) f(line_no, line);
        start = end + 1;
    }
}

double round6(double x) { return std::round(x * 1e6) / 1e6; }

} // namespace

void validate_candle(const Candle& c) {
    const auto fail = [&](const char* why) {
        throw ValidationError("invalid candle on " + c.date.to_string() + ": " + why);
    };
    if (!std::isfinite(c.open) || !std::isfinite(c.high) || !std::isfinite(c.low) || !std::isfinite(c.close))
        fail("non-finite price");
    if (c.open <= 0 || c.high <= 0 || c.low <= 0 || c.close <= 0) fail("prices must be strictly positive");
    if (c.low > c.high) fail("high < low");
    if (c.open < c.low || c.open > c.high) fail("open outside [low, high]");
    if (c.close < c.low || c.close > c.high) fail("close outside [low, high]");
}

PriceSeries::PriceSeries(std::vector<Candle> candles) : candles_(std::move(candles)) {
    for (std::size_t i = 0; i < candles_.size(); ++i) {
        validate_candle(candles_[i]);
        if (i > 0 && candles_[i].date <= candles_[i - 1].date)
            throw ValidationError("dates not strictly increasing at " + candles_[i].date.to_string());
    }
}

std::vector<double> PriceSeries::opens() const {
    std::vector<double> v(candles_.size());
    std::ranges::transform(candles_, v.begin(), &Candle::open);
    return v;
}
std::vector<double> PriceSeries::highs() const {
    std::vector<double> v(candles_.size());
    std::ranges::transform(candles_, v.begin(), &Candle::high);
    return v;
}
std::vector<double> PriceSeries::lows() const {
    std::vector<double> v(candles_.size());
    std::ranges::transform(candles_, v.begin(), &Candle::low);
    return v;
}
std::vector<double> PriceSeries::closes() const {
    std::vector<double> v(candles_.size());
    std::ranges::transform(candles_, v.begin(), &Candle::close);
    return v;
}
std::vector<Date> PriceSeries::dates() const {
    std::vector<Date> v(candles_.size());
    std::ranges::transform(candles_, v.begin(), &Candle::date);
    return v;
}

PriceSeries PriceSeries::prefix(std::size_t n) const {
    n = std::min(n, candles_.size());
    PriceSeries out;
    out.candles_.assign(candles_.begin(), candles_.begin() + static_cast<std::ptrdiff_t>(n));
    return out;
}

std::size_t PriceSeries::index_of(Date d) const {
    auto it = std::ranges::lower_bound(candles_, d, {}, &Candle::date);
    if (it == candles_.end() || it->date != d) return candles_.size();
    return static_cast<std::size_t>(it - candles_.begin());
}

PriceSeries parse_price_series(std::string_view contents, const std::string& source) {
    std::vector<Candle> candles;
    bool header_seen = false;
    for_each_line(contents, [&](std::size_t line_no, std::string_view line) {
        if (!header_seen) {
            if (text::trim(line) != kPriceHeader)
                throw ParseError(location(source, line_no) + ": expected header '" + std::string(kPriceHeader) + "'");
            header_seen = true;
            return;
        }
        const auto fields = text::split(line);
        if (fields.size() != 5)
            throw ParseError(location(source, line_no) + ": expected 5 fields, got " + std::to_string(fields.size()));
        Candle c;
        try {
            c.date = Date::parse(text::trim(fields[0]));
        } catch (const ParseError& e) {
            throw ParseError(location(source, line_no) + ": " + e.what());
        }
        double* targets[] = {&c.open, &c.high, &c.low, &c.close};
        for (int k = 0; k < 4; ++k) {
            auto v = text::parse_double(fields[k + 1]);
            if (!v)
                throw ParseError(location(source, line_no) + ": malformed number '" + std::string(fields[k + 1]) + "'");
            *targets[k] = *v;
        }
        candles.push_back(c);
    });
    if (candles.empty()) throw EmptyInputError(source + ": no price rows");
    std::ranges::sort(candles, {}, &Candle::date);
    return PriceSeries(std::move(candles));
}

PriceSeries load_price_series(const std::string& path) { return parse_price_series(text::read_file(path), path); }

std::string format_price_series(const PriceSeries& series) {
    std::string out(kPriceHeader);
    out += '\n';
    for (const auto& c : series.candles()) {
        out += c.date.to_string();
        for (double v : {c.open, c.high, c.low, c.close}) {
            out += ',';
            out += text::format_double(v);
        }
        out += '\n';
    }
    return out;
}

void save_price_series(const PriceSeries& series, const std::string& path) {
    text::write_file_atomic(path, format_price_series(series));
}

std::string to_string(Region r) { return r == Region::US ? "US" : "EA"; }

Region parse_region(std::string_view s) {
    if (s == "US") return Region::US;
    if (s == "EA") return Region::EA;
    throw ParseError("unknown region tag '" + std::string(s) + "' (expected US or EA)");
}

MacroSeries parse_macro_series(std::string_view contents, Region region, std::string name, const std::string& source) {
    MacroSeries out{std::move(name), region, {}};
    bool header_seen = false;
    for_each_line(contents, [&](std::size_t line_no, std::string_view line) {
        if (text::trim(line).starts_with('#')) return;
        if (!header_seen) {
            if (text::trim(line) != kMacroHeader)
                throw ParseError(location(source, line_no) + ": expected header '" + std::string(kMacroHeader) + "'");
            header_seen = true;
            return;
        }
        const auto fields = text::split(line);
        if (fields.size() != 2)
            throw ParseError(location(source, line_no) + ": expected 2 fields, got " + std::to_string(fields.size()));
        Release r;
        try {
            r.date = Date::parse(text::trim(fields[0]));
        } catch (const ParseError& e) {
            throw ParseError(location(source, line_no) + ": " + e.what());
        }
        auto v = text::parse_double(fields[1]);
        if (!v || !std::isfinite(*v))
            throw ParseError(location(source, line_no) + ": malformed number '" + std::string(fields[1]) + "'");
        r.value = *v;
        if (!out.releases.empty() && r.date <= out.releases.back().date)
            throw ValidationError(location(source, line_no) + ": release " + r.date.to_string() +
                                  " is not after " + out.releases.back().date.to_string());
        out.releases.push_back(r);
    });
    if (out.releases.empty()) throw EmptyInputError(source + ": no releases");
    return out;
}

MacroSeries load_macro_series(const std::string& path) {
    const std::string contents = text::read_file(path);
    std::optional<Region> region;
    std::string name;

    // Optional metadata line: "# region=US name=HICP".
    const auto first_nl = contents.find('\n');
    const auto first = text::trim(std::string_view(contents).substr(0, first_nl));
    if (first.starts_with('#')) {
        std::istringstream ss{std::string(first.substr(1))};
        std::string tok;
        while (ss >> tok) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos) continue;
            const auto key = tok.substr(0, eq);
            const auto val = tok.substr(eq + 1);
            if (key == "region") region = parse_region(val);
            else if (key == "name") name = val;
        }
    }
    if (!region || name.empty()) {
        const std::string stem = std::filesystem::path(path).stem().string();
        const auto us = stem.find('_');
        if (us == std::string::npos || us == 0 || us + 1 == stem.size())
            throw ParseError(path + ": file name must follow <region>_<name>.csv");
        if (!region) region = parse_region(stem.substr(0, us));
        if (name.empty()) name = stem.substr(us + 1);
    }
    return parse_macro_series(contents, *region, std::move(name), path);
}

void save_macro_series(const MacroSeries& series, const std::string& path) {
    std::string out = "# region=" + to_string(series.region) + " name=" + series.name + "\n";
    out += kMacroHeader;
    out += '\n';
    for (const auto& r : series.releases) out += r.date.to_string() + "," + text::format_double(r.value) + "\n";
    text::write_file_atomic(path, out);
}

std::vector<MacroSeries> load_macro_directory(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw IoError("macro directory '" + dir + "' does not exist");
    std::vector<MacroSeries> out;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".csv")
            out.push_back(load_macro_series(entry.path().string()));
    std::ranges::sort(out, {}, &MacroSeries::key);
    for (std::size_t i = 1; i < out.size(); ++i)
        if (out[i].key() == out[i - 1].key()) throw ValidationError("duplicate macro series " + out[i].key());
    return out;
}

AlignedMacroFeature align_macro(const MacroSeries& series, std::span<const Date> calendar) {
    AlignedMacroFeature out;
    out.key = series.key();
    out.latest_value.reserve(calendar.size());
    out.days_since_release.reserve(calendar.size());
    std::size_t next = 0; // first release strictly after the current day
    for (Date day : calendar) {
        while (next < series.releases.size() && series.releases[next].date <= day) ++next;
        if (next == 0)
            throw CoverageError(series.key() + ": no release at or before " + day.to_string());
        const Release& r = series.releases[next - 1];
        out.latest_value.push_back(r.value);
        out.days_since_release.push_back(day - r.date);
    }
    return out;
}

std::string to_string(Regime r) {
    switch (r) {
    case Regime::random_walk: return "random_walk";
    case Regime::trending: return "trending";
    case Regime::mean_reverting: return "mean_reverting";
    }
    return "?";
}

Regime parse_regime(std::string_view s) {
    if (s == "random_walk") return Regime::random_walk;
    if (s == "trending") return Regime::trending;
    if (s == "mean_reverting") return Regime::mean_reverting;
    throw ConfigError("unknown regime '" + std::string(s) + "'");
}

PriceSeries generate_synthetic(std::uint64_t seed, std::size_t days, Regime regime, const SyntheticOptions& opt) {
    if (days == 0) throw EmptyInputError("synthetic series needs at least one day");
    Rng rng(seed);
    std::vector<Candle> candles;
    candles.reserve(days);

    Date day = opt.start;
    const auto weekday = [](Date d) { return ((d.days() % 7) + 7 + 3) % 7; }; // 0 = Monday
    const double anchor = std::log(opt.start_price);
    double log_close = anchor;
    double prev_close = round6(opt.start_price);

    for (std::size_t i = 0; i < days; ++i) {
        while (weekday(day) >= 5) day = day + 1;

        double step = opt.volatility * rng.normal();
        switch (regime) {
        case Regime::random_walk: break;
        case Regime::trending: step += opt.drift; break;
        case Regime::mean_reverting: step += opt.reversion * (anchor - log_close); break;
        }
        log_close += step;

        Candle c;
        c.date = day;
        c.open = prev_close;
        const double close = std::exp(log_close);
        const double top = std::max(c.open, close);
        const double bottom = std::min(c.open, close);
        c.close = round6(close);
        c.high = round6(top * std::exp(opt.wick * std::abs(rng.normal())));
        c.low = round6(bottom * std::exp(-opt.wick * std::abs(rng.normal())));
        // Rounding is monotone, so the body stays inside [low, high].
        c.high = std::max({c.high, c.open, c.close});
        c.low = std::min({c.low, c.open, c.close});
        candles.push_back(c);

        prev_close = c.close;
        day = day + 1;
    }
    return PriceSeries(std::move(candles));
}

std::vector<MacroSeries> generate_synthetic_macro(std::uint64_t seed, Date first, Date last) {
    struct Spec {
        const char* name;
        int period_days;
        double base;
        double step;
    };
    // Publication cadence per variable: monthly ~30, quarterly ~91, annual ~365.
    static constexpr Spec specs[] = {
        {"HICP_INFLATION", 30, 2.0, 0.3},      {"HICP_CONTRIBUTIONS", 30, 0.5, 0.1},
        {"UNEMPLOYMENT_ANNUAL", 365, 7.0, 0.5}, {"UNEMPLOYMENT_QUARTERLY_SA", 91, 7.0, 0.3},
        {"NET_EXTERNAL_DEBT_Q", 91, 30.0, 1.5}, {"GOV_DEBT_EDP_ANNUAL", 365, 85.0, 2.0},
        {"GOV_DEBT_COMPONENTS_ANNUAL", 365, 80.0, 2.0}, {"GOV_DEBT_EDP_QUARTERLY", 91, 85.0, 1.0},
    };
    std::vector<MacroSeries> out;
    for (Region region : {Region::EA, Region::US}) {
        for (std::size_t k = 0; k < std::size(specs); ++k) {
            const Spec& s = specs[k];
            Rng rng(derive_seed(seed, {static_cast<std::int64_t>(region), static_cast<std::int64_t>(k)}));
            MacroSeries m{s.name, region, {}};
            // First release lands strictly before the calendar so alignment always has coverage.
            Date d = first + (-static_cast<std::int32_t>(1 + rng.below(static_cast<std::uint64_t>(s.period_days))));
            double value = s.base + s.step * rng.normal();
            while (d <= last) {
                m.releases.push_back({d, std::round(value * 1000.0) / 1000.0});
                value += s.step * rng.normal();
                d = d + s.period_days;
            }
            out.push_back(std::move(m));
        }
    }
    std::ranges::sort(out, {}, &MacroSeries::key);
    return out;
}

} // namespace fxcog
