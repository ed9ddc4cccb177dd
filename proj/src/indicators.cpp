#include "fxcog/indicators.hpp"

#include "fxcog/error.hpp"
#include "fxcog/text.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace fxcog {

using Values = std::vector<std::optional<double>>;

std::size_t IndicatorColumn::first_defined() const {
    auto it = std::ranges::find_if(values, [](const auto& v) { return v.has_value(); });
    return static_cast<std::size_t>(it - values.begin());
}

void IndicatorParams::validate() const {
    const auto positive = [](int w, const char* what) {
        if (w < 1) throw ConfigError(std::string(what) + " window must be >= 1");
    };
    for (int w : sma_windows) positive(w, "sma");
    for (int w : ema_windows) positive(w, "ema");
    for (int w : rsi_windows) positive(w, "rsi");
    if (bollinger.n < 2) throw ConfigError("bollinger window must be >= 2");
    positive(ichimoku.n, "ichimoku n");
    positive(ichimoku.m, "ichimoku m");
    positive(ichimoku.p, "ichimoku p");
    positive(macd.n, "macd n");
    positive(macd.p, "macd p");
    if (macd.m <= macd.n) throw ConfigError("macd requires m > n");
    positive(adx_n, "adx");
    positive(willr_n, "williams %R");
    positive(atr_n, "atr");
    positive(kdj.k_window, "kdj k");
    positive(kdj.d_smooth, "kdj d");
    positive(squeeze.n, "squeeze n");
    if (!(squeeze.p >= squeeze.m && squeeze.m >= squeeze.n)) throw ConfigError("squeeze requires p >= m >= n");
    if (!(squeeze.q > 0)) throw ConfigError("squeeze q must be positive");
}

int IndicatorParams::max_warmup() const {
    int w = 0;
    for (int n : sma_windows) w = std::max(w, n - 1);
    for (int n : ema_windows) w = std::max(w, n - 1);
    for (int n : rsi_windows) w = std::max(w, n);
    w = std::max(w, bollinger.n - 1);
    w = std::max(w, ichimoku.p - 1 + ichimoku.p / 2);
    w = std::max(w, std::max(ichimoku.n, ichimoku.m) - 1 + ichimoku.p / 2);
    w = std::max(w, macd.m - 1 + macd.p - 1);
    w = std::max(w, adx_n);
    w = std::max(w, willr_n - 1);
    w = std::max(w, atr_n - 1);
    w = std::max(w, kdj.k_window - 1 + kdj.d_smooth - 1);
    w = std::max(w, squeeze.p - 1);
    return w;
}

namespace indicators {

namespace {

void require_finite(std::span<const double> x) {
    for (double v : x)
        if (!std::isfinite(v)) throw ComputationError("non-finite input to indicator");
}

std::string num(double v) { return text::format_double(v); }

IndicatorColumn make(std::string name, Values values) { return {std::move(name), std::move(values)}; }

} // namespace

Values rolling_mean(std::span<const double> x, int n) {
    require_finite(x);
    Values out(x.size());
    const auto w = static_cast<std::size_t>(n);
    double sum = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        sum += x[t];
        if (t >= w) sum -= x[t - w];
        if (t + 1 >= w) out[t] = sum / n;
    }
    return out;
}

Values rolling_mean(std::span<const std::optional<double>> x, int n) {
    Values out(x.size());
    const auto w = static_cast<std::size_t>(n);
    std::size_t run = 0; // consecutive defined values ending at t
    for (std::size_t t = 0; t < x.size(); ++t) {
        run = x[t] ? run + 1 : 0;
        if (run < w) continue;
        double sum = 0.0;
        for (std::size_t i = t + 1 - w; i <= t; ++i) sum += *x[i];
        out[t] = sum / n;
    }
    return out;
}

Values ema_of(std::span<const std::optional<double>> x, int n) {
    Values out(x.size());
    const auto w = static_cast<std::size_t>(n);
    std::size_t start = 0;
    while (start < x.size() && !x[start]) ++start;
    if (start + w > x.size()) return out;

    double seed = 0.0;
    for (std::size_t i = start; i < start + w; ++i) {
        if (!x[i] || !std::isfinite(*x[i])) throw ComputationError("ema input has a gap or non-finite value");
        seed += *x[i];
    }
    double e = seed / n;
    out[start + w - 1] = e;
    const double alpha = 2.0 / (n + 1.0);
    for (std::size_t t = start + w; t < x.size(); ++t) {
        if (!x[t] || !std::isfinite(*x[t])) throw ComputationError("ema input has a gap or non-finite value");
        e = e + alpha * (*x[t] - e);
        out[t] = e;
    }
    return out;
}

namespace {

template <typename Better>
std::vector<double> rolling_extreme(std::span<const double> x, int n, Better better) {
    std::vector<double> out(x.size(), 0.0);
    std::deque<std::size_t> q; // monotone candidate indices
    const auto w = static_cast<std::size_t>(n);
    for (std::size_t t = 0; t < x.size(); ++t) {
        while (!q.empty() && !better(x[q.back()], x[t])) q.pop_back();
        q.push_back(t);
        if (q.front() + w <= t) q.pop_front();
        out[t] = x[q.front()];
    }
    return out;
}

} // namespace

std::vector<double> rolling_max(std::span<const double> x, int n) {
    return rolling_extreme(x, n, [](double a, double b) { return a > b; });
}

std::vector<double> rolling_min(std::span<const double> x, int n) {
    return rolling_extreme(x, n, [](double a, double b) { return a < b; });
}

IndicatorColumn sma(const PriceSeries& s, int n) {
    if (n < 1) throw PreconditionError("sma window must be >= 1");
    const auto c = s.closes();
    return make("SMA_" + std::to_string(n), rolling_mean(c, n));
}

IndicatorColumn ema(const PriceSeries& s, int n) {
    if (n < 1) throw PreconditionError("ema window must be >= 1");
    const auto c = s.closes();
    const Values in(c.begin(), c.end());
    return make("EMA_" + std::to_string(n), ema_of(in, n));
}

std::vector<IndicatorColumn> bollinger(const PriceSeries& s, int n, double k) {
    if (n < 2) throw PreconditionError("bollinger window must be >= 2");
    const auto c = s.closes();
    const auto mean = rolling_mean(c, n);
    const auto hi = rolling_max(c, n);
    const auto lo = rolling_min(c, n);
    const std::size_t T = c.size();
    Values bbl(T), bbm(T), bbu(T), bbb(T), bbp(T);
    for (std::size_t t = 0; t < T; ++t) {
        if (!mean[t]) continue;
        const double m = *mean[t];
        double sd = 0.0;
        if (hi[t] != lo[t]) {
            double ss = 0.0;
            for (std::size_t i = t + 1 - static_cast<std::size_t>(n); i <= t; ++i) ss += (c[i] - m) * (c[i] - m);
            sd = std::sqrt(ss / n);
        }
        const double lower = m - k * sd;
        const double upper = m + k * sd;
        bbl[t] = lower;
        bbm[t] = m;
        bbu[t] = upper;
        bbb[t] = (upper - lower) / m;
        if (upper != lower) bbp[t] = (c[t] - lower) / (upper - lower);
    }
    const std::string sfx = "_" + std::to_string(n) + "_" + num(k);
    return {make("BBL" + sfx, std::move(bbl)), make("BBM" + sfx, std::move(bbm)), make("BBU" + sfx, std::move(bbu)),
            make("BBB" + sfx, std::move(bbb)), make("BBP" + sfx, std::move(bbp))};
}

std::vector<IndicatorColumn> ichimoku(const PriceSeries& s, int n, int m, int p) {
    if (n < 1 || m < 1 || p < 1) throw PreconditionError("ichimoku windows must be >= 1");
    const auto h = s.highs();
    const auto l = s.lows();
    const auto c = s.closes();
    const std::size_t T = c.size();

    const auto midpoint = [&](int w) {
        const auto mx = rolling_max(h, w);
        const auto mn = rolling_min(l, w);
        Values out(T);
        for (std::size_t t = static_cast<std::size_t>(w) - 1; t < T; ++t) out[t] = (mx[t] + mn[t]) / 2.0;
        return out;
    };
    const Values its = midpoint(n);
    const Values iks = midpoint(m);
    const Values isb_raw = midpoint(p);

    const auto shift = static_cast<std::size_t>(p / 2);
    Values isa(T), isb(T), cs(T);
    for (std::size_t t = shift; t < T; ++t) {
        const std::size_t src = t - shift;
        if (its[src] && iks[src]) isa[t] = (*its[src] + *iks[src]) / 2.0;
        isb[t] = isb_raw[src];
    }
    for (std::size_t t = 0; t + static_cast<std::size_t>(m) < T; ++t) cs[t] = c[t + static_cast<std::size_t>(m)];

    return {make("ITS_" + std::to_string(n), its), make("IKS_" + std::to_string(m), iks),
            make("ISA_" + std::to_string(n), std::move(isa)), make("ISB_" + std::to_string(m), std::move(isb)),
            make("ICS_" + std::to_string(m), std::move(cs))};
}

IndicatorColumn rsi(const PriceSeries& s, int n) {
    if (n < 1) throw PreconditionError("rsi window must be >= 1");
    const auto c = s.closes();
    const std::size_t T = c.size();
    const auto w = static_cast<std::size_t>(n);
    Values out(T);
    for (std::size_t t = w; t < T; ++t) {
        double gain = 0.0, loss = 0.0;
        for (std::size_t i = t + 1 - w; i <= t; ++i) {
            const double d = c[i] - c[i - 1];
            if (d > 0) gain += d;
            else loss -= d;
        }
        gain /= n;
        loss /= n;
        if (loss == 0.0) out[t] = gain == 0.0 ? 50.0 : 100.0;
        else out[t] = 100.0 - 100.0 / (1.0 + gain / loss);
    }
    return make("RSI_" + std::to_string(n), std::move(out));
}

std::vector<IndicatorColumn> macd(const PriceSeries& s, int n, int m, int p) {
    if (n < 1 || p < 1 || m <= n) throw PreconditionError("macd requires m > n >= 1 and p >= 1");
    const auto fast = ema(s, n).values;
    const auto slow = ema(s, m).values;
    const std::size_t T = fast.size();
    Values line(T);
    for (std::size_t t = 0; t < T; ++t)
        if (fast[t] && slow[t]) line[t] = *fast[t] - *slow[t];
    Values signal = ema_of(line, p);
    Values hist(T);
    for (std::size_t t = 0; t < T; ++t)
        if (line[t] && signal[t]) hist[t] = *line[t] - *signal[t];
    const std::string sfx = "_" + std::to_string(n) + "_" + std::to_string(m) + "_" + std::to_string(p);
    return {make("MACD" + sfx, std::move(line)), make("MACDh" + sfx, std::move(hist)),
            make("MACDs" + sfx, std::move(signal))};
}

IndicatorColumn adx(const PriceSeries& s, int n) {
    if (n < 1) throw PreconditionError("adx window must be >= 1");
    const auto h = s.highs();
    const auto l = s.lows();
    const std::size_t T = h.size();
    const auto w = static_cast<std::size_t>(n);
    Values out(T);
    if (T <= w) return make("ADX_" + std::to_string(n), std::move(out));

    std::vector<double> dx(T, 0.0);
    for (std::size_t t = 1; t < T; ++t) {
        const double plus = h[t] - h[t - 1];
        const double minus = l[t - 1] - l[t];
        const double denom = std::abs(plus + minus);
        dx[t] = denom == 0.0 ? 0.0 : std::abs(plus - minus) / denom;
    }
    double acc = 0.0;
    for (std::size_t t = 1; t <= w; ++t) acc += dx[t];
    double value = acc / n;
    out[w] = value;
    for (std::size_t t = w + 1; t < T; ++t) {
        value = (value * (n - 1) + dx[t]) / n;
        out[t] = value;
    }
    return make("ADX_" + std::to_string(n), std::move(out));
}

IndicatorColumn williams_r(const PriceSeries& s, int n) {
    if (n < 1) throw PreconditionError("williams %R window must be >= 1");
    const auto c = s.closes();
    const auto hh = rolling_max(s.highs(), n);
    const auto ll = rolling_min(s.lows(), n);
    Values out(c.size());
    for (std::size_t t = static_cast<std::size_t>(n) - 1; t < c.size(); ++t)
        if (hh[t] != ll[t]) out[t] = (hh[t] - c[t]) / (hh[t] - ll[t]) * 100.0;
    return make("WILLR_" + std::to_string(n), std::move(out));
}

IndicatorColumn atr(const PriceSeries& s, int n) {
    if (n < 1) throw PreconditionError("atr window must be >= 1");
    const auto h = s.highs();
    const auto l = s.lows();
    const auto c = s.closes();
    std::vector<double> tr(c.size());
    for (std::size_t t = 0; t < c.size(); ++t) {
        tr[t] = h[t] - l[t];
        if (t > 0) tr[t] = std::max({tr[t], std::abs(h[t] - c[t - 1]), std::abs(l[t] - c[t - 1])});
    }
    return make("ATR_" + std::to_string(n), rolling_mean(tr, n));
}

std::vector<IndicatorColumn> kdj(const PriceSeries& s, int k_window, int d_smooth) {
    if (k_window < 1 || d_smooth < 1) throw PreconditionError("kdj windows must be >= 1");
    const auto c = s.closes();
    const auto hh = rolling_max(s.highs(), k_window);
    const auto ll = rolling_min(s.lows(), k_window);
    const std::size_t T = c.size();
    Values k(T);
    for (std::size_t t = static_cast<std::size_t>(k_window) - 1; t < T; ++t)
        if (hh[t] != ll[t]) k[t] = (c[t] - ll[t]) / (hh[t] - ll[t]) * 100.0;
    Values d = rolling_mean(std::span<const std::optional<double>>(k), d_smooth);
    Values j(T);
    for (std::size_t t = 0; t < T; ++t)
        if (k[t] && d[t]) j[t] = 3.0 * *k[t] - 2.0 * *d[t];
    const std::string sfx = "_" + std::to_string(k_window) + "_" + std::to_string(d_smooth);
    return {make("K" + sfx, std::move(k)), make("D" + sfx, std::move(d)), make("J" + sfx, std::move(j))};
}

IndicatorColumn squeeze(const PriceSeries& s, int n, int m, int p, double q) {
    if (n < 1 || m < 1 || p < 1 || !(q > 0)) throw PreconditionError("squeeze windows must be >= 1 and q > 0");
    const auto c = s.closes();
    const auto a = rolling_mean(c, n);
    const auto b = rolling_mean(c, m);
    const auto base = rolling_mean(c, p);
    Values out(c.size());
    for (std::size_t t = 0; t < c.size(); ++t)
        if (a[t] && b[t] && base[t]) out[t] = (*a[t] - *b[t]) / (*base[t] * q);
    return make("SQZ_" + std::to_string(n) + "_" + std::to_string(m) + "_" + std::to_string(p) + "_" + num(q),
                std::move(out));
}

std::vector<IndicatorColumn> compute_all(const PriceSeries& s, const IndicatorParams& prm) {
    prm.validate();
    std::vector<IndicatorColumn> out;
    const auto append = [&out](std::vector<IndicatorColumn> cols) {
        for (auto& col : cols) out.push_back(std::move(col));
    };
    for (int n : prm.sma_windows) out.push_back(sma(s, n));
    for (int n : prm.ema_windows) out.push_back(ema(s, n));
    append(bollinger(s, prm.bollinger.n, prm.bollinger.k));
    append(ichimoku(s, prm.ichimoku.n, prm.ichimoku.m, prm.ichimoku.p));
    for (int n : prm.rsi_windows) out.push_back(rsi(s, n));
    append(macd(s, prm.macd.n, prm.macd.m, prm.macd.p));
    out.push_back(adx(s, prm.adx_n));
    out.push_back(williams_r(s, prm.willr_n));
    out.push_back(atr(s, prm.atr_n));
    append(kdj(s, prm.kdj.k_window, prm.kdj.d_smooth));
    out.push_back(squeeze(s, prm.squeeze.n, prm.squeeze.m, prm.squeeze.p, prm.squeeze.q));
    return out;
}

bool is_forward_looking(const std::string& column_name) { return column_name.starts_with("ICS_"); }

} // namespace indicators
} // namespace fxcog
