#pragma once

#include "fxcog/date.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fxcog {

enum class NormalizationMode { whole_window, rolling };

struct SignalSeries {
    std::vector<Date> dates;
    std::vector<double> raw;
    std::vector<double> weighted; // min-max normalised into [0, 1]
};

// Min-max normalisation of raw probabilities over the whole window. Throws
// PreconditionError for fewer than two values and DegenerateSignalError when
// max == min. Rolling mode normalises each day against the trailing
// `rolling_window` values (expanding at the start); a flat trailing window
// maps to 0.5.
SignalSeries normalize_signals(std::span<const Date> dates, std::span<const double> raw,
                               NormalizationMode mode = NormalizationMode::whole_window,
                               std::size_t rolling_window = 0);

enum class SimRegime { fixed_horizon, dynamic };
std::string to_string(SimRegime r);

struct StrategyConfig {
    double long_threshold = 0.7;
    double short_threshold = 0.35;
    int horizon = 10; // trading days, fixed-horizon regime
    double spread_pips = 1.0;
    double pip_size = 0.0001;
    double commission = 0.0;    // fraction of notional per round turn
    double slippage_pips = 0.0; // per round turn
    double swap_per_day = 0.0;  // fraction of notional per calendar day held

    // Zero-cost settings used to reproduce published trade arithmetic.
    static StrategyConfig zero_cost();
    void validate() const;
};

enum class Direction { long_, short_ };
std::string to_string(Direction d);

struct Trade {
    Direction direction = Direction::long_;
    std::size_t entry_index = 0;
    std::size_t exit_index = 0;
    Date entry_date;
    Date exit_date;
    double entry_price = 0.0;
    double exit_price = 0.0;
    double gross_return = 0.0; // fraction
    double net_return = 0.0;   // fraction, after costs

    friend bool operator==(const Trade&, const Trade&) = default;
};

// Simple unleveraged return of a unit position.
double gross_return(Direction d, double entry_price, double exit_price);
Trade apply_costs(Trade trade, const StrategyConfig& cfg);

struct DirectionSummary {
    std::size_t winners = 0;
    std::size_t losers = 0; // a zero net return counts as losing
    double total_return = 0.0;
    std::optional<double> win_rate; // percent; absent without trades
};

struct SimulationReport {
    DirectionSummary long_side;
    DirectionSummary short_side;
};

SimulationReport summarize(std::span<const Trade> trades);

struct SimulationResult {
    std::vector<Trade> trades;
    SimulationReport report;
};

// Close prices aligned with the signal dates.
struct PricePath {
    std::vector<Date> dates;
    std::vector<double> closes;
};

// Opens a unit long (short) on every day whose weighted probability is at or
// above (at or below) the threshold and closes it `horizon` trading days later.
// Entries that cannot complete are skipped.
SimulationResult fixed_horizon_sim(const SignalSeries& signals, const PricePath& prices, const StrategyConfig& cfg);

// At most one open position per direction, held while the entry condition
// persists and closed on the first day it fails (or the last day).
SimulationResult dynamic_sim(const SignalSeries& signals, const PricePath& prices, const StrategyConfig& cfg);

SimulationResult simulate(SimRegime regime, const SignalSeries& signals, const PricePath& prices,
                          const StrategyConfig& cfg);

// Ledger columns: model, direction, entry_date, exit_date, entry_price,
// exit_price, gross_return, net_return.
struct LedgerRow {
    std::string model;
    Trade trade;
};
std::string ledger_header();
std::string format_ledger(std::span<const LedgerRow> rows);
std::vector<LedgerRow> parse_ledger(std::string_view contents, const std::string& source = "<memory>");

// Plain-text tables: per-direction summary, and per-trade listing.
struct NamedReport {
    std::string model;
    SimulationReport report;
};
std::string render_summary(std::span<const NamedReport> reports);
std::string render_trades(std::span<const LedgerRow> rows);

} // namespace fxcog
