#pragma once

#include "fxcog/ingest.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fxcog {

// One value per day; std::nullopt during the warm-up prefix.
struct IndicatorColumn {
    std::string name;
    std::vector<std::optional<double>> values;

    std::size_t first_defined() const;
};

struct IndicatorParams {
    std::vector<int> sma_windows{20, 55};
    std::vector<int> ema_windows{20, 55, 200};
    struct {
        int n = 20;
        double k = 2.0;
    } bollinger;
    struct {
        int n = 9, m = 26, p = 52;
    } ichimoku;
    std::vector<int> rsi_windows{6, 12, 14, 24};
    struct {
        int n = 12, m = 26, p = 9;
    } macd;
    int adx_n = 14;
    int willr_n = 14;
    int atr_n = 14;
    struct {
        int k_window = 14, d_smooth = 3;
    } kdj;
    struct {
        int n = 20, m = 50, p = 200;
        double q = 2.0;
    } squeeze;

    // Throws ConfigError on a window < 1, macd m <= n, or squeeze not p >= m >= n.
    void validate() const;
    // Longest warm-up across all columns except the lagging span.
    int max_warmup() const;
};

namespace indicators {

// Building blocks, exposed for reuse by the levels and divergence code.
std::vector<std::optional<double>> rolling_mean(std::span<const double> x, int n);
std::vector<std::optional<double>> rolling_mean(std::span<const std::optional<double>> x, int n);
// EMA over the defined suffix of `x`, seeded with the mean of its first n defined values.
std::vector<std::optional<double>> ema_of(std::span<const std::optional<double>> x, int n);
std::vector<double> rolling_max(std::span<const double> x, int n); // valid from index n-1
std::vector<double> rolling_min(std::span<const double> x, int n);

IndicatorColumn sma(const PriceSeries& s, int n);
IndicatorColumn ema(const PriceSeries& s, int n);
// BBL, BBM, BBU, BBB, BBP. Population standard deviation.
std::vector<IndicatorColumn> bollinger(const PriceSeries& s, int n, double k);
// ITS, IKS, ISA, ISB, CS. ISA/ISB are displaced floor(p/2) days forward; CS is
// the close displaced m days back and therefore looks ahead.
std::vector<IndicatorColumn> ichimoku(const PriceSeries& s, int n, int m, int p);
IndicatorColumn rsi(const PriceSeries& s, int n);
// MACD, MACDh, MACDs.
std::vector<IndicatorColumn> macd(const PriceSeries& s, int n, int m, int p);
IndicatorColumn adx(const PriceSeries& s, int n);
IndicatorColumn williams_r(const PriceSeries& s, int n);
IndicatorColumn atr(const PriceSeries& s, int n);
// K, D, J.
std::vector<IndicatorColumn> kdj(const PriceSeries& s, int k_window, int d_smooth);
IndicatorColumn squeeze(const PriceSeries& s, int n, int m, int p, double q);

// Every column above for the given parameters, in a fixed order.
std::vector<IndicatorColumn> compute_all(const PriceSeries& s, const IndicatorParams& params = {});

// Column names that read future prices; excluded from model features.
bool is_forward_looking(const std::string& column_name);

} // namespace indicators
} // namespace fxcog
