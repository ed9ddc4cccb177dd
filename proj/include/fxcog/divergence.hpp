#pragma once

#include "fxcog/indicators.hpp"
#include "fxcog/ingest.hpp"

#include <optional>
#include <span>
#include <vector>

namespace fxcog::divergence {

enum class ExtremumKind { peak, trough };

struct Extremum {
    std::size_t index = 0;
    double value = 0.0;

    friend bool operator==(const Extremum&, const Extremum&) = default;
};

// The two most recent strict local extrema (most recent last). `sufficient`
// is false when fewer than two exist; `points` then holds what was found.
struct ExtremaPair {
    std::vector<Extremum> points;
    bool sufficient() const noexcept { return points.size() == 2; }
};

ExtremaPair find_local_extrema(std::span<const double> values, ExtremumKind kind);

// independent: indicator extrema located on their own.
// price_anchored: indicator read at the dates of the price extrema.
enum class Mode { independent, price_anchored };

struct State {
    int s_high = 0; // +1 convergence, -1 divergence, 0 undefined
    int s_low = 0;

    friend bool operator==(const State&, const State&) = default;
};

// Throws PreconditionError when the windows differ in length.
State divergence_state(std::span<const double> price_window, std::span<const double> indicator_window,
                       Mode mode = Mode::independent);

struct Config {
    int window = 40;
    Mode mode = Mode::independent;
};

// S_high and S_low per day, against the given indicator column (Squeeze
// Momentum in the feature pipeline). Absent until `window` consecutive
// indicator values exist.
std::vector<IndicatorColumn> divergence_columns(const PriceSeries& series, const IndicatorColumn& indicator,
                                                const Config& cfg = {});

Mode parse_mode(std::string_view s);

} // namespace fxcog::divergence
