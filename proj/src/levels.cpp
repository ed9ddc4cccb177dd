#include "fxcog/levels.hpp"

#include "fxcog/error.hpp"

#include <algorithm>
#include <cmath>

namespace fxcog {

void GrouperConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("grouper alpha must lie in (0, 1)");
    if (window < 1) throw ConfigError("grouper window must be >= 1");
    if (lookback != 10 * window) throw ConfigError("grouper lookback must equal 10 * window");
}

namespace levels {

std::vector<std::vector<double>> grouper(std::span<const double> xs, double delta) {
    if (!(delta > 0.0)) throw PreconditionError("grouper delta must be positive");
    if (!std::ranges::is_sorted(xs)) throw PreconditionError("grouper input must be sorted ascending");
    std::vector<std::vector<double>> groups;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i == 0 || !(xs[i] - xs[i - 1] < delta)) groups.emplace_back();
        groups.back().push_back(xs[i]);
    }
    return groups;
}

LevelEntry nearest_levels(std::span<const double> candidates, double close) {
    std::vector<double> below, above;
    for (double v : candidates) (v < close ? below : above).push_back(v);
    std::ranges::sort(below, std::greater<>{});
    std::ranges::sort(above);
    below.erase(std::unique(below.begin(), below.end()), below.end());
    above.erase(std::unique(above.begin(), above.end()), above.end());

    LevelEntry e;
    if (below.size() > 0) e.support1 = below[0];
    if (below.size() > 1) e.support2 = below[1];
    if (above.size() > 0) e.resistance1 = above[0];
    if (above.size() > 1) e.resistance2 = above[1];
    return e;
}

std::optional<LevelEntry> support_resistance(const PriceSeries& series, std::size_t day, const GrouperConfig& cfg) {
    cfg.validate();
    const auto lookback = static_cast<std::size_t>(cfg.lookback);
    const auto window = static_cast<std::size_t>(cfg.window);
    if (day < lookback || day >= series.size()) return std::nullopt;

    std::vector<double> extrema;
    extrema.reserve(4 * (lookback / window));
    for (std::size_t start = day - lookback; start < day; start += window) {
        double max_high = series[start].high, max_close = series[start].close;
        double min_low = series[start].low, min_close = series[start].close;
        for (std::size_t i = start; i < start + window; ++i) {
            const Candle& c = series[i];
            max_high = std::max(max_high, c.high);
            max_close = std::max(max_close, c.close);
            min_low = std::min(min_low, c.low);
            min_close = std::min(min_close, c.close);
        }
        extrema.insert(extrema.end(), {max_high, max_close, min_low, min_close});
    }
    std::ranges::sort(extrema);

    const double close = series[day].close;
    std::vector<double> means;
    for (const auto& g : grouper(extrema, cfg.alpha * close)) {
        double sum = 0.0;
        for (double v : g) sum += v;
        means.push_back(sum / static_cast<double>(g.size()));
    }
    return nearest_levels(means, close);
}

std::vector<double> FibonacciConfig::all_ratios() const {
    std::vector<double> r = ratios;
    if (include_bounds) {
        r.push_back(0.0);
        r.push_back(1.0);
    }
    std::ranges::sort(r);
    r.erase(std::unique(r.begin(), r.end()), r.end());
    return r;
}

std::optional<LevelEntry> fibonacci_levels(const PriceSeries& series, std::size_t day, const FibonacciConfig& cfg) {
    if (cfg.lookback < 1) throw ConfigError("fibonacci lookback must be >= 1");
    const auto lookback = static_cast<std::size_t>(cfg.lookback);
    if (day < lookback || day >= series.size()) return std::nullopt;
    double high = series[day - lookback].high;
    double low = series[day - lookback].low;
    for (std::size_t i = day - lookback; i < day; ++i) {
        high = std::max(high, series[i].high);
        low = std::min(low, series[i].low);
    }
    if (high == low) return std::nullopt;
    std::vector<double> levels;
    for (double r : cfg.all_ratios()) levels.push_back(low + r * (high - low));
    return nearest_levels(levels, series[day].close);
}

namespace {

template <typename F>
std::vector<IndicatorColumn> entry_columns(const PriceSeries& series, const std::string& prefix, F&& entry_at) {
    const std::size_t T = series.size();
    std::vector<IndicatorColumn> cols{{prefix + "_S2", {}}, {prefix + "_S1", {}}, {prefix + "_R1", {}}, {prefix + "_R2", {}}};
    for (auto& c : cols) c.values.resize(T);
    for (std::size_t t = 0; t < T; ++t) {
        const std::optional<LevelEntry> e = entry_at(t);
        if (!e) continue;
        cols[0].values[t] = e->support2;
        cols[1].values[t] = e->support1;
        cols[2].values[t] = e->resistance1;
        cols[3].values[t] = e->resistance2;
    }
    return cols;
}

} // namespace

std::vector<IndicatorColumn> support_resistance_columns(const PriceSeries& series, const GrouperConfig& cfg) {
    cfg.validate();
    return entry_columns(series, "SR", [&](std::size_t t) { return support_resistance(series, t, cfg); });
}

std::vector<IndicatorColumn> fibonacci_columns(const PriceSeries& series, const FibonacciConfig& cfg) {
    return entry_columns(series, "FIB", [&](std::size_t t) { return fibonacci_levels(series, t, cfg); });
}

void collapse_missing(std::vector<IndicatorColumn>& cols, std::span<const double> closes) {
    if (cols.size() != 4) throw ShapeError("level columns must be S2, S1, R1, R2");
    for (std::size_t t = 0; t < closes.size(); ++t) {
        auto& s2 = cols[0].values[t];
        auto& s1 = cols[1].values[t];
        auto& r1 = cols[2].values[t];
        auto& r2 = cols[3].values[t];
        if (!s2 && !s1 && !r1 && !r2) continue; // warm-up stays absent
        if (!s1) s1 = closes[t];
        if (!s2) s2 = *s1;
        if (!r1) r1 = closes[t];
        if (!r2) r2 = *r1;
    }
}

} // namespace levels
} // namespace fxcog
