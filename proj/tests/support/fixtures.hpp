#pragma once

#include "fxcog/ingest.hpp"
#include "fxcog/rng.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

namespace fxtest {

// Bars around a Gaussian random walk of closes; open is the previous close.
inline fxcog::PriceSeries random_walk(std::uint64_t seed, std::size_t days, double start = 1.1, double vol = 0.006) {
    fxcog::Rng rng(seed);
    std::vector<fxcog::Candle> out;
    fxcog::Date d = fxcog::Date::from_ymd(2010, 1, 4);
    double prev = start;
    for (std::size_t i = 0; i < days; ++i) {
        const double close = prev * std::exp(vol * rng.normal());
        const double open = prev;
        const double high = std::max(open, close) * (1.0 + 0.003 * rng.uniform());
        const double low = std::min(open, close) * (1.0 - 0.003 * rng.uniform());
        out.push_back({d, open, high, low, close});
        d = d + 1;
        prev = close;
    }
    return fxcog::PriceSeries(std::move(out));
}

// Candles with open = close = high = low = each given value.
inline fxcog::PriceSeries from_closes(const std::vector<double>& closes) {
    std::vector<fxcog::Candle> out;
    fxcog::Date d = fxcog::Date::from_ymd(2020, 1, 1);
    for (double c : closes) {
        out.push_back({d, c, c, c, c});
        d = d + 1;
    }
    return fxcog::PriceSeries(std::move(out));
}

inline fxcog::PriceSeries scaled(const fxcog::PriceSeries& s, double c) {
    std::vector<fxcog::Candle> out(s.candles().begin(), s.candles().end());
    for (auto& k : out) {
        k.open *= c;
        k.high *= c;
        k.low *= c;
        k.close *= c;
    }
    return fxcog::PriceSeries(std::move(out));
}

// Unique scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("fxcog_" + tag + "_" + std::to_string(std::hash<const void*>{}(this)) + "_" +
                 std::to_string(counter()++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::string str(const std::string& rel = "") const { return (path_ / rel).string(); }

private:
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::filesystem::path path_;
};

} // namespace fxtest
