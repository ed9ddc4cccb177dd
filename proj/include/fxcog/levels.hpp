#pragma once

#include "fxcog/indicators.hpp"
#include "fxcog/ingest.hpp"

#include <optional>
#include <span>
#include <vector>

namespace fxcog {

struct GrouperConfig {
    double alpha = 0.04; // grouping tolerance relative to the current close
    int lookback = 200;
    int window = 20;

    // Throws ConfigError unless 0 < alpha < 1, window >= 1 and lookback == 10 * window.
    void validate() const;
};

// Two nearest levels on each side of the close; absent slots are nullopt.
// support2 < support1 < close <= resistance1 < resistance2.
struct LevelEntry {
    std::optional<double> support2;
    std::optional<double> support1;
    std::optional<double> resistance1;
    std::optional<double> resistance2;

    friend bool operator==(const LevelEntry&, const LevelEntry&) = default;
};

namespace levels {

// Splits an ascending list into maximal runs whose consecutive gaps are < delta.
// Throws PreconditionError if the input is unsorted or delta <= 0.
std::vector<std::vector<double>> grouper(std::span<const double> sorted_values, double delta);

// Picks the two nearest candidates below `close` (strictly) and the two
// nearest at or above it. Candidates need not be sorted.
LevelEntry nearest_levels(std::span<const double> candidates, double close);

// Clustered support/resistance from the `lookback` candles preceding `day`.
// nullopt when day < lookback.
std::optional<LevelEntry> support_resistance(const PriceSeries& series, std::size_t day,
                                             const GrouperConfig& cfg = {});

struct FibonacciConfig {
    int lookback = 200;
    bool include_bounds = true; // add the 0% and 100% anchors
    std::vector<double> ratios{0.236, 0.382, 0.5, 0.618, 0.786, 1.272, 1.618};

    std::vector<double> all_ratios() const;
};

// Levels low + r * (high - low) over the `lookback` candles preceding `day`.
// nullopt when day < lookback or the window is flat.
std::optional<LevelEntry> fibonacci_levels(const PriceSeries& series, std::size_t day,
                                           const FibonacciConfig& cfg = {});

// Per-day columns: <prefix>_S2, <prefix>_S1, <prefix>_R1, <prefix>_R2.
std::vector<IndicatorColumn> support_resistance_columns(const PriceSeries& series, const GrouperConfig& cfg = {});
std::vector<IndicatorColumn> fibonacci_columns(const PriceSeries& series, const FibonacciConfig& cfg = {});

// Feature-column fill for days with a defined entry: a missing outer slot
// repeats the inner one, a missing inner slot falls back to the close.
void collapse_missing(std::vector<IndicatorColumn>& cols, std::span<const double> closes);

} // namespace levels
} // namespace fxcog
