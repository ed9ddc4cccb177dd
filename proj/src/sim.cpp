#include "fxcog/sim.hpp"

#include "fxcog/error.hpp"
#include "fxcog/text.hpp"

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <sstream>

namespace fxcog {

SignalSeries normalize_signals(std::span<const Date> dates, std::span<const double> raw, NormalizationMode mode,
                               std::size_t rolling_window) {
    if (dates.size() != raw.size()) throw PreconditionError("signal dates and values differ in length");
    if (raw.size() < 2) throw PreconditionError("normalisation needs at least two values");
    for (double v : raw)
        if (!std::isfinite(v)) throw PreconditionError("non-finite probability");
    SignalSeries s{{dates.begin(), dates.end()}, {raw.begin(), raw.end()}, std::vector<double>(raw.size())};

    if (mode == NormalizationMode::whole_window) {
        const auto [lo, hi] = std::ranges::minmax(raw);
        if (hi == lo) throw DegenerateSignalError("all probabilities are equal; no trading signal");
        for (std::size_t i = 0; i < raw.size(); ++i) s.weighted[i] = (raw[i] - lo) / (hi - lo);
        return s;
    }
    if (rolling_window < 2) throw ConfigError("rolling normalisation window must be >= 2");
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const std::size_t start = i + 1 >= rolling_window ? i + 1 - rolling_window : 0;
        const auto win = raw.subspan(start, i + 1 - start);
        const auto [lo, hi] = std::ranges::minmax(win);
        s.weighted[i] = hi == lo ? 0.5 : (raw[i] - lo) / (hi - lo);
    }
    return s;
}

std::string to_string(SimRegime r) { return r == SimRegime::fixed_horizon ? "fixed_horizon" : "dynamic"; }

StrategyConfig StrategyConfig::zero_cost() {
    StrategyConfig c;
    c.spread_pips = 0.0;
    return c;
}

void StrategyConfig::validate() const {
    if (!(0.0 <= short_threshold && short_threshold < long_threshold && long_threshold <= 1.0))
        throw ConfigError("thresholds must satisfy 0 <= short < long <= 1");
    if (horizon < 1) throw ConfigError("horizon must be >= 1");
    if (spread_pips < 0 || slippage_pips < 0 || commission < 0 || swap_per_day < 0 || !(pip_size > 0))
        throw ConfigError("costs must be non-negative and pip size positive");
}

std::string to_string(Direction d) { return d == Direction::long_ ? "long" : "short"; }

double gross_return(Direction d, double entry, double exit) {
    return d == Direction::long_ ? (exit - entry) / entry : (entry - exit) / entry;
}

Trade apply_costs(Trade t, const StrategyConfig& cfg) {
    const double per_price = (cfg.spread_pips + cfg.slippage_pips) * cfg.pip_size / t.entry_price;
    const double swap = cfg.swap_per_day * static_cast<double>(t.exit_date - t.entry_date);
    t.net_return = t.gross_return - per_price - cfg.commission - swap;
    return t;
}

SimulationReport summarize(std::span<const Trade> trades) {
    SimulationReport rep;
    for (const auto& t : trades) {
        DirectionSummary& s = t.direction == Direction::long_ ? rep.long_side : rep.short_side;
        (t.net_return > 0.0 ? s.winners : s.losers) += 1;
        s.total_return += t.net_return;
    }
    for (DirectionSummary* s : {&rep.long_side, &rep.short_side})
        if (s->winners + s->losers > 0)
            s->win_rate = 100.0 * static_cast<double>(s->winners) / static_cast<double>(s->winners + s->losers);
    return rep;
}

namespace {

void check_alignment(const SignalSeries& s, const PricePath& p) {
    if (s.dates.size() != s.weighted.size() || p.dates.size() != p.closes.size())
        throw PreconditionError("ragged signal or price input");
    if (s.dates != p.dates) throw PreconditionError("signals are not date-aligned with prices");
}

Trade make_trade(Direction d, std::size_t entry, std::size_t exit, const PricePath& p, const StrategyConfig& cfg) {
    Trade t;
    t.direction = d;
    t.entry_index = entry;
    t.exit_index = exit;
    t.entry_date = p.dates[entry];
    t.exit_date = p.dates[exit];
    t.entry_price = p.closes[entry];
    t.exit_price = p.closes[exit];
    t.gross_return = gross_return(d, t.entry_price, t.exit_price);
    return apply_costs(t, cfg);
}

SimulationResult finish(std::vector<Trade> trades) {
    std::ranges::stable_sort(trades, [](const Trade& a, const Trade& b) {
        if (a.direction != b.direction) return a.direction == Direction::long_;
        return a.entry_index < b.entry_index;
    });
    SimulationResult r{std::move(trades), {}};
    r.report = summarize(r.trades);
    return r;
}

} // namespace

SimulationResult fixed_horizon_sim(const SignalSeries& s, const PricePath& p, const StrategyConfig& cfg) {
    cfg.validate();
    check_alignment(s, p);
    const auto h = static_cast<std::size_t>(cfg.horizon);
    std::vector<Trade> trades;
    for (std::size_t i = 0; i + h < s.weighted.size(); ++i) {
        if (s.weighted[i] >= cfg.long_threshold) trades.push_back(make_trade(Direction::long_, i, i + h, p, cfg));
        if (s.weighted[i] <= cfg.short_threshold) trades.push_back(make_trade(Direction::short_, i, i + h, p, cfg));
    }
    return finish(std::move(trades));
}

SimulationResult dynamic_sim(const SignalSeries& s, const PricePath& p, const StrategyConfig& cfg) {
    cfg.validate();
    check_alignment(s, p);
    const std::size_t n = s.weighted.size();
    std::vector<Trade> trades;
    constexpr std::size_t none = SIZE_MAX;
    std::size_t long_open = none, short_open = none;
    for (std::size_t i = 0; i < n; ++i) {
        const bool long_signal = s.weighted[i] >= cfg.long_threshold;
        const bool short_signal = s.weighted[i] <= cfg.short_threshold;
        if (long_open != none && !long_signal) {
            trades.push_back(make_trade(Direction::long_, long_open, i, p, cfg));
            long_open = none;
        } else if (long_open == none && long_signal) {
            long_open = i;
        }
        if (short_open != none && !short_signal) {
            trades.push_back(make_trade(Direction::short_, short_open, i, p, cfg));
            short_open = none;
        } else if (short_open == none && short_signal) {
            short_open = i;
        }
    }
    // Positions still open are closed on the last day when that day is later than the entry.
    if (long_open != none && long_open + 1 < n) trades.push_back(make_trade(Direction::long_, long_open, n - 1, p, cfg));
    if (short_open != none && short_open + 1 < n) trades.push_back(make_trade(Direction::short_, short_open, n - 1, p, cfg));
    return finish(std::move(trades));
}

SimulationResult simulate(SimRegime regime, const SignalSeries& s, const PricePath& p, const StrategyConfig& cfg) {
    return regime == SimRegime::fixed_horizon ? fixed_horizon_sim(s, p, cfg) : dynamic_sim(s, p, cfg);
}

std::string ledger_header() {
    return "model,direction,entry_date,exit_date,entry_price,exit_price,gross_return,net_return";
}

std::string format_ledger(std::span<const LedgerRow> rows) {
    std::string out = ledger_header() + "\n";
    for (const auto& r : rows) {
        const Trade& t = r.trade;
        out += r.model + "," + to_string(t.direction) + "," + t.entry_date.to_string() + "," + t.exit_date.to_string() +
               "," + text::format_double(t.entry_price) + "," + text::format_double(t.exit_price) + "," +
               text::format_double(t.gross_return) + "," + text::format_double(t.net_return) + "\n";
    }
    return out;
}

std::vector<LedgerRow> parse_ledger(std::string_view contents, const std::string& source) {
    std::vector<LedgerRow> rows;
    std::istringstream in{std::string(contents)};
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty()) continue;
        const std::string where = source + ":" + std::to_string(line_no);
        if (!header) {
            if (line != ledger_header()) throw ParseError(where + ": unexpected ledger header");
            header = true;
            continue;
        }
        const auto f = text::split(line);
        if (f.size() != 8) throw ParseError(where + ": expected 8 fields");
        LedgerRow r;
        r.model = std::string(f[0]);
        if (f[1] == "long") r.trade.direction = Direction::long_;
        else if (f[1] == "short") r.trade.direction = Direction::short_;
        else throw ParseError(where + ": direction must be long or short");
        r.trade.entry_date = Date::parse(f[2]);
        r.trade.exit_date = Date::parse(f[3]);
        double* fields[] = {&r.trade.entry_price, &r.trade.exit_price, &r.trade.gross_return, &r.trade.net_return};
        for (int k = 0; k < 4; ++k) {
            auto v = text::parse_double(f[4 + k]);
            if (!v) throw ParseError(where + ": malformed number");
            *fields[k] = *v;
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string render_summary(std::span<const NamedReport> reports) {
    std::vector<std::vector<std::string>> cells;
    for (const auto& nr : reports)
        for (const auto& [side, sum] : {std::pair{"Long", &nr.report.long_side}, std::pair{"Short", &nr.report.short_side}})
            cells.push_back({nr.model, side, std::to_string(sum->winners), std::to_string(sum->losers),
                             text::format_fixed(sum->total_return * 100.0, 2) + "%",
                             sum->win_rate ? text::format_fixed(*sum->win_rate, 2) : std::string("-")});
    return text::render_table({"Model", "Position", "Winning Trades", "Losing Trades", "Total Return", "Win Rate (%)"},
                              cells);
}

std::string render_trades(std::span<const LedgerRow> rows) {
    std::vector<std::vector<std::string>> cells;
    for (const auto& r : rows) {
        const Trade& t = r.trade;
        cells.push_back({r.model, t.direction == Direction::long_ ? "Long" : "Short", t.entry_date.to_string(),
                         t.exit_date.to_string(), text::format_fixed(t.entry_price, 6), text::format_fixed(t.exit_price, 6),
                         text::format_fixed(t.net_return * 100.0, 2)});
    }
    return text::render_table({"Model", "Position", "Entry Date", "Exit Date", "Entry Price", "Exit Price", "Return (%)"},
                              cells);
}

} // namespace fxcog
