#include "fxcog/divergence.hpp"

#include "fxcog/error.hpp"

namespace fxcog::divergence {

ExtremaPair find_local_extrema(std::span<const double> v, ExtremumKind kind) {
    ExtremaPair out;
    if (v.size() < 3) return out;
    for (std::size_t i = v.size() - 2; i >= 1 && out.points.size() < 2; --i) {
        const bool hit = kind == ExtremumKind::peak ? (v[i] > v[i - 1] && v[i] > v[i + 1])
                                                    : (v[i] < v[i - 1] && v[i] < v[i + 1]);
        if (hit) out.points.insert(out.points.begin(), Extremum{i, v[i]});
    }
    return out;
}

namespace {

int sign(double x) { return (x > 0) - (x < 0); }

std::optional<double> slope(const Extremum& a, const Extremum& b) {
    if (a.index == b.index) return std::nullopt;
    return (b.value - a.value) / (static_cast<double>(b.index) - static_cast<double>(a.index));
}

int side_state(std::span<const double> price, std::span<const double> ind, ExtremumKind kind, Mode mode) {
    const ExtremaPair p = find_local_extrema(price, kind);
    if (!p.sufficient()) return 0;
    ExtremaPair q;
    if (mode == Mode::independent) {
        q = find_local_extrema(ind, kind);
        if (!q.sufficient()) return 0;
    } else {
        for (const auto& e : p.points) q.points.push_back({e.index, ind[e.index]});
    }
    const auto mp = slope(p.points[0], p.points[1]);
    const auto mi = slope(q.points[0], q.points[1]);
    if (!mp || !mi) return 0;
    return sign(*mp) * sign(*mi);
}

} // namespace

State divergence_state(std::span<const double> price, std::span<const double> ind, Mode mode) {
    if (price.size() != ind.size()) throw PreconditionError("price and indicator windows are misaligned");
    return {side_state(price, ind, ExtremumKind::peak, mode), side_state(price, ind, ExtremumKind::trough, mode)};
}

std::vector<IndicatorColumn> divergence_columns(const PriceSeries& series, const IndicatorColumn& indicator,
                                                const Config& cfg) {
    if (cfg.window < 3) throw ConfigError("divergence window must be >= 3");
    const std::size_t T = series.size();
    if (indicator.values.size() != T) throw PreconditionError("indicator column length differs from the series");
    const auto closes = series.closes();
    const auto w = static_cast<std::size_t>(cfg.window);

    IndicatorColumn high{"S_high", std::vector<std::optional<double>>(T)};
    IndicatorColumn low{"S_low", std::vector<std::optional<double>>(T)};
    std::vector<double> ind(w);
    std::size_t run = 0;
    for (std::size_t t = 0; t < T; ++t) {
        run = indicator.values[t] ? run + 1 : 0;
        if (run < w) continue;
        for (std::size_t i = 0; i < w; ++i) ind[i] = *indicator.values[t + 1 - w + i];
        const State s = divergence_state(std::span(closes).subspan(t + 1 - w, w), ind, cfg.mode);
        high.values[t] = s.s_high;
        low.values[t] = s.s_low;
    }
    return {std::move(high), std::move(low)};
}

Mode parse_mode(std::string_view s) {
    if (s == "independent") return Mode::independent;
    if (s == "price_anchored") return Mode::price_anchored;
    throw ConfigError("unknown divergence mode '" + std::string(s) + "'");
}

} // namespace fxcog::divergence
