#pragma once

#include "fxcog/date.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fxcog {

struct Candle {
    Date date;
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;

    friend bool operator==(const Candle&, const Candle&) = default;
};

// Throws ValidationError naming the date when the OHLC relations or the
// positivity requirement are broken.
void validate_candle(const Candle& c);

// Dated OHLC observations with strictly increasing dates. Immutable once built.
class PriceSeries {
public:
    PriceSeries() = default;
    // Validates every candle and the date ordering.
    explicit PriceSeries(std::vector<Candle> candles);

    std::size_t size() const noexcept { return candles_.size(); }
    bool empty() const noexcept { return candles_.empty(); }
    const Candle& operator[](std::size_t i) const { return candles_[i]; }
    std::span<const Candle> candles() const noexcept { return candles_; }

    std::vector<double> opens() const;
    std::vector<double> highs() const;
    std::vector<double> lows() const;
    std::vector<double> closes() const;
    std::vector<Date> dates() const;

    // First `n` candles (n clamped to size()).
    PriceSeries prefix(std::size_t n) const;
    // Index of the candle dated `d`, or size() when absent.
    std::size_t index_of(Date d) const;

private:
    std::vector<Candle> candles_;
};

PriceSeries load_price_series(const std::string& path);
PriceSeries parse_price_series(std::string_view contents, const std::string& source = "<memory>");
std::string format_price_series(const PriceSeries& series);
void save_price_series(const PriceSeries& series, const std::string& path);

enum class Region { US, EA };
std::string to_string(Region r);
Region parse_region(std::string_view s);

struct Release {
    Date date;
    double value = 0.0;
};

struct MacroSeries {
    std::string name;
    Region region = Region::US;
    std::vector<Release> releases;

    // "<region>_<name>", the column stem used in feature frames.
    std::string key() const { return to_string(region) + "_" + name; }
};

// Reads `release_date,value` rows. Region and name come from a leading
// `# region=<US|EA> name=<id>` line when present, else from the file name
// `<region>_<name>.csv`.
MacroSeries load_macro_series(const std::string& path);
MacroSeries parse_macro_series(std::string_view contents, Region region, std::string name,
                               const std::string& source = "<memory>");
void save_macro_series(const MacroSeries& series, const std::string& path);
// Every *.csv in `dir`, sorted by key.
std::vector<MacroSeries> load_macro_directory(const std::string& dir);

// Step-function view of a macro series on a trading calendar.
struct AlignedMacroFeature {
    std::string key;
    std::vector<double> latest_value;
    std::vector<std::int32_t> days_since_release;
};

// Throws CoverageError naming the first calendar day that precedes every release.
AlignedMacroFeature align_macro(const MacroSeries& series, std::span<const Date> calendar);

enum class Regime { random_walk, trending, mean_reverting };
std::string to_string(Regime r);
Regime parse_regime(std::string_view s);

struct SyntheticOptions {
    double start_price = 1.10;
    double volatility = 0.005;    // daily log-return standard deviation
    double drift = 0.0008;        // trending regime, per day
    double reversion = 0.03;      // mean_reverting regime, pull per day toward start_price
    double wick = 0.002;          // scale of high/low excursions beyond the body
    Date start = Date::from_ymd(2012, 1, 2);
};

// Weekday-only calendar, prices rounded to 6 decimals. Throws EmptyInputError for days == 0.
PriceSeries generate_synthetic(std::uint64_t seed, std::size_t days, Regime regime,
                               const SyntheticOptions& options = {});

// Sixteen opaque macro series (8 US + 8 EA) with monthly, quarterly and
// annual publication schedules covering [first, last].
std::vector<MacroSeries> generate_synthetic_macro(std::uint64_t seed, Date first, Date last);

} // namespace fxcog
