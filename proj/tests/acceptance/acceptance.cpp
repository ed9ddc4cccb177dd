// Acceptance suite: one PASS/FAIL line per criterion. Exit status is non-zero
// when any criterion fails. Pass criterion numbers to run a subset.

#include "fixtures.hpp"
#include "oracles.hpp"

#include "fxcog/dataset.hpp"
#include "fxcog/error.hpp"
#include "fxcog/eval.hpp"
#include "fxcog/indicators.hpp"
#include "fxcog/levels.hpp"
#include "fxcog/net.hpp"
#include "fxcog/pipeline.hpp"
#include "fxcog/sim.hpp"
#include "fxcog/text.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

using namespace fxcog;
namespace orc = fxtest::oracle;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

// Collects failures; the first few are kept for the report line.
class Verdict {
public:
    void require(bool ok, const std::string& what) {
        if (ok) return;
        ++failures_;
        if (notes_.size() < 3) notes_.push_back(what);
    }
    bool ok() const { return failures_ == 0; }
    Outcome outcome(const std::string& summary) const {
        if (ok()) return {true, summary};
        std::string d = summary + "; " + std::to_string(failures_) + " failure(s):";
        for (const auto& n : notes_) d += " [" + n + "]";
        return {false, d};
    }

private:
    std::size_t failures_ = 0;
    std::vector<std::string> notes_;
};

class Stopwatch {
public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// ---- 1 ----------------------------------------------------------------------

Outcome indicator_oracles() {
    Verdict v;
    const Stopwatch clock;
    const auto s = fxtest::random_walk(2024, 1000);
    const auto h = s.highs(), l = s.lows(), c = s.closes();

    const auto lib = indicators::compute_all(s);

    std::vector<std::pair<std::string, orc::Col>> expect;
    for (int n : {20, 55}) expect.emplace_back("SMA_" + std::to_string(n), orc::sma(c, n));
    for (int n : {20, 55, 200}) expect.emplace_back("EMA_" + std::to_string(n), orc::ema(c, n));
    const auto bb = orc::bollinger(c, 20, 2);
    expect.insert(expect.end(), {{"BBL_20_2", bb.lower}, {"BBM_20_2", bb.middle}, {"BBU_20_2", bb.upper},
                                 {"BBB_20_2", bb.width}, {"BBP_20_2", bb.percent}});
    const auto ic = orc::ichimoku(h, l, c, 9, 26, 52);
    expect.insert(expect.end(),
                  {{"ITS_9", ic.its}, {"IKS_26", ic.iks}, {"ISA_9", ic.isa}, {"ISB_26", ic.isb}, {"ICS_26", ic.cs}});
    for (int n : {6, 12, 14, 24}) expect.emplace_back("RSI_" + std::to_string(n), orc::rsi(c, n));
    const auto m = orc::macd(c, 12, 26, 9);
    expect.insert(expect.end(), {{"MACD_12_26_9", m.line}, {"MACDh_12_26_9", m.hist}, {"MACDs_12_26_9", m.signal}});
    expect.emplace_back("ADX_14", orc::adx(h, l, 14));
    expect.emplace_back("WILLR_14", orc::williams(h, l, c, 14));
    expect.emplace_back("ATR_14", orc::atr(h, l, c, 14));
    const auto k = orc::kdj(h, l, c, 14, 3);
    expect.insert(expect.end(), {{"K_14_3", k.k}, {"D_14_3", k.d}, {"J_14_3", k.j}});
    expect.emplace_back("SQZ_20_50_200_2", orc::squeeze(c, 20, 50, 200, 2));

    v.require(lib.size() == expect.size(),
              "column count " + std::to_string(lib.size()) + " vs " + std::to_string(expect.size()));
    double worst = 0.0;
    std::size_t compared = 0;
    for (std::size_t i = 0; i < std::min(lib.size(), expect.size()); ++i) {
        const auto& got = lib[i].values;
        const auto& want = expect[i].second;
        v.require(lib[i].name == expect[i].first, "column " + lib[i].name + " vs " + expect[i].first);
        v.require(got.size() == want.size(), lib[i].name + " length");
        for (std::size_t t = 0; t < std::min(got.size(), want.size()); ++t) {
            if (got[t].has_value() != want[t].has_value()) {
                v.require(false, lib[i].name + " definedness at day " + std::to_string(t));
                continue;
            }
            if (got[t]) {
                worst = std::max(worst, std::fabs(*got[t] - *want[t]));
                ++compared;
            }
        }
    }
    const double secs = clock.seconds();
    v.require(worst < 1e-10, "max abs diff " + fmt("%.3g", worst));
    v.require(secs < 10.0, "runtime " + fmt("%.2f s", secs));
    return v.outcome(std::to_string(lib.size()) + " columns, " + std::to_string(compared) + " values, max |diff| " +
                     fmt("%.3g", worst) + ", " + fmt("%.2f s", secs));
}

// ---- 2 ----------------------------------------------------------------------

Outcome grouper_and_levels() {
    Verdict v;
    Rng rng(2);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> xs(1 + rng.below(300));
        // Mix of spread-out values and exact duplicates.
        for (auto& x : xs) x = rng.uniform() < 0.1 && &x != xs.data() ? *(&x - 1) : rng.uniform(0.9, 1.4);
        std::ranges::sort(xs);
        const double delta = 0.0005 + 0.03 * rng.uniform();
        const auto g = levels::grouper(xs, delta);
        std::vector<double> flat;
        for (std::size_t k = 0; k < g.size(); ++k) {
            v.require(!g[k].empty(), "empty group");
            for (std::size_t i = 1; i < g[k].size(); ++i) v.require(g[k][i] - g[k][i - 1] < delta, "within-gap");
            if (k > 0) v.require(g[k].front() - g[k - 1].back() >= delta, "cross-gap");
            flat.insert(flat.end(), g[k].begin(), g[k].end());
        }
        v.require(flat == xs, "partition");
        v.require(g == orc::grouper(xs, delta), "linear-scan oracle");
    }

    // Powers of two keep every product exact in binary floating point.
    const auto s = fxtest::random_walk(22, 800, 1.1, 0.012);
    std::size_t checked = 0;
    for (double c : {2.0, 0.5, 1024.0}) {
        const auto sc = fxtest::scaled(s, c);
        Rng days(7);
        for (int k = 0; k < 100; ++k) {
            const std::size_t day = 200 + days.below(600);
            const auto a = levels::support_resistance(s, day);
            const auto b = levels::support_resistance(sc, day);
            if (!a || !b) {
                v.require(false, "no levels on day " + std::to_string(day));
                continue;
            }
            const auto times = [c](std::optional<double> x) { return x ? std::optional(*x * c) : x; };
            v.require(b->support2 == times(a->support2) && b->support1 == times(a->support1) &&
                          b->resistance1 == times(a->resistance1) && b->resistance2 == times(a->resistance2),
                      "scaling on day " + std::to_string(day) + " c=" + fmt("%g", c));
            ++checked;
        }
    }
    return v.outcome("1000 grouper lists; " + std::to_string(checked) + " scaled level days (c = 2, 0.5, 1024)");
}

// ---- 3 ----------------------------------------------------------------------

Outcome directional_labels() {
    Verdict v;
    const auto s = fxtest::random_walk(33, 1500);
    const auto c = s.closes();
    const auto labels = label(s, 10);
    Rng rng(3);
    for (int k = 0; k < 500; ++k) {
        const std::size_t n = rng.below(c.size());
        const auto got = directional_index(c, n, 10);
        const auto want = orc::directional_index(c, n, 10);
        v.require(got == want, "index at " + std::to_string(n));
        if (want && n < labels.size()) {
            v.require(labels[n].directional_index == *want, "label value at " + std::to_string(n));
            v.require(labels[n].target == (*want > 0 ? 1 : 0), "target at " + std::to_string(n));
        }
    }
    for (std::size_t T : {11, 12, 20, 100, 777, 1500}) {
        const auto part = s.prefix(T);
        v.require(label(part, 10).size() == T - 10, "label count for T=" + std::to_string(T));
    }
    return v.outcome("500 positions exact; label count T-10 on 6 lengths");
}

// ---- 4 ----------------------------------------------------------------------

struct Sample {
    std::vector<double> s;
    std::vector<int> y;
};

// Scores on a coarse grid so ties are common; both classes present.
Sample tied_sample(Rng& rng, std::size_t n) {
    Sample d;
    for (std::size_t i = 0; i < n; ++i) {
        d.s.push_back(static_cast<double>(rng.below(25)) / 24.0);
        d.y.push_back(rng.uniform() < 0.3 + 0.4 * d.s.back() ? 1 : 0);
    }
    d.y[0] = 1;
    d.y[1] = 0;
    return d;
}

Outcome classification_metrics() {
    Verdict v;
    Rng rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        const auto d = tied_sample(rng, 200);
        v.require(auc(d.s, d.y) == orc::auc(d.s, d.y), "auc trial " + std::to_string(trial));

        std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
        for (std::size_t i = 0; i < d.s.size(); ++i) {
            const bool pred = d.s[i] >= 0.5;
            if (pred && d.y[i]) ++tp;
            else if (pred) ++fp;
            else if (d.y[i]) ++fn;
            else ++tn;
        }
        v.require(confusion(d.s, d.y) == Confusion{tp, fp, tn, fn}, "confusion");
        v.require(accuracy(d.s, d.y) == static_cast<double>(tp + tn) / 200.0, "accuracy");
        v.require(recall(d.s, d.y) == static_cast<double>(tp) / static_cast<double>(tp + fn), "recall");

        // Stable descending order; bucket k holds ranks [k n/10, (k+1) n/10).
        std::vector<std::size_t> order(d.s.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        for (std::size_t i = 1; i < order.size(); ++i)
            for (std::size_t j = i; j > 0 && d.s[order[j]] > d.s[order[j - 1]]; --j) std::swap(order[j], order[j - 1]);
        const double rate = static_cast<double>(tp + fn) / 200.0;
        const auto lift = lift_curve(d.s, d.y, 10);
        for (std::size_t k = 0; k < 10; ++k) {
            const std::size_t lo = k * 200 / 10, hi = (k + 1) * 200 / 10;
            double hits = 0;
            for (std::size_t r = lo; r < hi; ++r) hits += d.y[order[r]];
            v.require(lift[k] == hits / static_cast<double>(hi - lo) / rate, "lift bucket " + std::to_string(k));
        }
    }
    return v.outcome("50 tied datasets (n = 200): AUC, confusion, accuracy, recall, lift exact");
}

// ---- 5 ----------------------------------------------------------------------

Outcome gradient_check_criterion() {
    Verdict v;
    const Stopwatch clock;
    double worst = 0.0;
    int configs = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed)
        for (int layers : {1, 2}) {
            Rng rng(seed * 31 + static_cast<std::uint64_t>(layers));
            const int H = 3 + static_cast<int>(seed % 6);
            const auto net = LstmNetwork::initialized(3, H, layers, seed);
            std::vector<double> x(6 * 3);
            for (auto& e : x) e = rng.uniform(-1, 1);
            const auto r = gradient_check(net, x, 6, static_cast<int>(seed % 2), 1e-5);
            worst = std::max(worst, r.max_relative_error);
            v.require(r.max_relative_error < 1e-4, "seed " + std::to_string(seed) + " layers " + std::to_string(layers) +
                                                       " error " + fmt("%.3g", r.max_relative_error));
            ++configs;
        }
    const double secs = clock.seconds();
    v.require(secs < 60.0, "runtime " + fmt("%.2f s", secs));
    return v.outcome(std::to_string(configs) + " configs (5 seeds, layers 1-2, hidden 4-8), max rel error " +
                     fmt("%.3g", worst) + ", " + fmt("%.2f s", secs));
}

// ---- 6 ----------------------------------------------------------------------

Outcome capacity() {
    Verdict v;
    const Stopwatch clock;
    Rng rng(8);
    WindowedDataset ds;
    ds.back_days = 10;
    ds.feature_dim = 4;
    for (std::size_t i = 0; i < 200; ++i) {
        const int y = static_cast<int>(i % 2);
        for (std::size_t t = 0; t < 10; ++t)
            for (std::size_t j = 0; j < 4; ++j)
                ds.inputs.push_back(j == 0 ? (y ? 0.5 : -0.5) + 0.3 * rng.normal() : rng.uniform(-1, 1));
        ds.targets.push_back(y);
        ds.dates.push_back(Date(static_cast<std::int32_t>(i)));
    }
    LstmConfig cfg;
    cfg.layers = 1;
    cfg.hidden_size = 16;
    cfg.epochs = 200;
    cfg.learning_rate = 0.05;
    cfg.dropout_rate = 0.0;
    cfg.seed = 1;
    auto net = LstmNetwork::initialized(4, 16, 1, 1);
    const auto r = train(net, ds, cfg);
    const double secs = clock.seconds();
    v.require(r.final_accuracy >= 0.95, "train ACC " + fmt("%.4f", r.final_accuracy));
    v.require(secs < 120.0, "runtime " + fmt("%.2f s", secs));
    return v.outcome("train ACC " + fmt("%.4f", r.final_accuracy) + " after 200 epochs, " + fmt("%.2f s", secs));
}

// ---- 7 ----------------------------------------------------------------------

struct ReferenceTrade {
    const char* model;
    Direction dir;
    const char* entry_date;
    const char* exit_date;
    double entry, exit, percent;
};

Outcome reference_arithmetic() {
    Verdict v;
    const ReferenceTrade rows[] = {
        {"Model 2", Direction::long_, "2023-07-18", "2023-08-15", 1.123760, 1.090417, -2.97},
        {"Model 2", Direction::long_, "2023-08-14", "2023-09-23", 1.094439, 1.066155, -2.58},
        {"Model 2", Direction::long_, "2023-10-14", "2023-11-26", 1.053674, 1.090631, 3.51},
        {"Model 2", Direction::short_, "2023-06-21", "2023-07-11", 1.092037, 1.100594, -0.78},
        {"Model 3", Direction::long_, "2023-08-18", "2024-03-03", 1.087465, 1.080497, -0.64},
        {"Model 3", Direction::long_, "2024-02-24", "2024-03-05", 1.082567, 1.085305, 0.25},
        {"Model 3", Direction::short_, "2023-07-22", "2023-08-11", 1.113710, 1.098165, 1.40},
        {"Model 7", Direction::long_, "2023-11-05", "2023-11-18", 1.061909, 1.085376, 2.21},
        {"Model 7", Direction::long_, "2024-02-14", "2024-03-03", 1.070893, 1.080497, 0.90},
        {"Model 7", Direction::long_, "2024-02-24", "2024-03-05", 1.082567, 1.085305, 0.25},
        {"Model 7", Direction::short_, "2023-08-13", "2023-08-28", 1.098165, 1.086921, 1.02},
    };

    // Each row is replayed through the simulator: a two-day path whose first
    // signal opens the position and whose one-day horizon closes it.
    StrategyConfig cfg = StrategyConfig::zero_cost();
    cfg.horizon = 1;
    std::vector<LedgerRow> ledger;
    double worst = 0.0;
    for (const auto& p : rows) {
        SignalSeries sig;
        sig.dates = {Date::parse(p.entry_date), Date::parse(p.exit_date)};
        sig.weighted = p.dir == Direction::long_ ? std::vector{1.0, 0.5} : std::vector{0.0, 0.5};
        sig.raw = sig.weighted;
        const PricePath path{sig.dates, {p.entry, p.exit}};
        const auto res = fixed_horizon_sim(sig, path, cfg);
        if (res.trades.size() != 1) {
            v.require(false, std::string(p.model) + " " + p.entry_date + " produced " +
                                 std::to_string(res.trades.size()) + " trades");
            continue;
        }
        ledger.push_back({p.model, res.trades.front()});
    }
    // Read back from the ledger text so the printed form is what gets checked.
    const auto parsed = parse_ledger(format_ledger(ledger));
    for (std::size_t i = 0; i < parsed.size(); ++i) {
        const auto& t = parsed[i].trade;
        const double pct = 100.0 * t.net_return;
        const double diff = std::fabs(pct - rows[i].percent);
        worst = std::max(worst, diff);
        v.require(t.entry_price == rows[i].entry && t.exit_price == rows[i].exit && t.direction == rows[i].dir,
                  "ledger row " + std::to_string(i) + " altered");
        v.require(t.net_return == t.gross_return, "zero-cost mode charged costs on row " + std::to_string(i));
        v.require(diff <= 0.005, std::string(rows[i].model) + " " + rows[i].entry_date + " got " + fmt("%.4f%%", pct));
    }
    v.require(parsed.size() == std::size(rows), "ledger holds " + std::to_string(parsed.size()) + " rows");

    std::vector<Trade> wl(11);
    for (std::size_t i = 0; i < wl.size(); ++i) {
        wl[i].direction = Direction::short_;
        wl[i].net_return = i < 9 ? 0.01 : -0.01;
    }
    const auto rep = summarize(wl);
    const double rate = rep.short_side.win_rate.value_or(-1.0);
    v.require(rep.short_side.winners == 9 && rep.short_side.losers == 2, "win/loss counts");
    v.require(text::format_fixed(rate, 2) == "81.82", "win rate " + fmt("%.6f", rate));
    return v.outcome("11 ledger rows, max deviation " + fmt("%.4f", worst) + " pp; 9W/2L win rate " +
                     text::format_fixed(rate, 2) + "%");
}

// ---- desk-scale grid shared by 8 and 10 -------------------------------------

struct DeskGrid {
    std::vector<GridResult> rows;
    std::string store_text;
    std::vector<GridResult> reparsed;
    double feature_seconds = 0.0;
    double grid_seconds = 0.0;
    unsigned jobs = 1;
};

const DeskGrid& desk_grid() {
    static const DeskGrid g = [] {
        DeskGrid out;
        static fxtest::TempDir dir("acceptance_grid");
        const Stopwatch features;
        const auto prices = generate_synthetic(42, 2000, Regime::random_walk);
        const auto macro = generate_synthetic_macro(42, prices[0].date, prices[prices.size() - 1].date);
        std::vector<int> models(kModelCount);
        for (int m = 0; m < kModelCount; ++m) models[static_cast<std::size_t>(m)] = m;
        const auto tables = pipeline::build_tables(prices, macro, models);
        out.feature_seconds = features.seconds();

        GridOptions opt;
        opt.base.hidden_size = 16;
        opt.master_seed = 42;
        out.jobs = std::max(1u, std::thread::hardware_concurrency());
        opt.jobs = out.jobs;
        opt.store_path = dir.str("results.csv");
        std::cout << "  (running the 180-cell grid on " << out.jobs << " worker(s); this takes a while)" << std::endl;
        const Stopwatch grid;
        out.rows = run_grid(tables, GridLattice{}, opt);
        out.grid_seconds = grid.seconds();
        out.store_text = text::read_file(opt.store_path);
        out.reparsed = load_results(opt.store_path);
        return out;
    }();
    return g;
}

// ---- 8 ----------------------------------------------------------------------

std::vector<std::string> header_cells(const std::string& table) {
    // Second line of the rendered table: "| a | b | ... |".
    std::istringstream in(table);
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    std::vector<std::string> cells;
    for (auto part : text::split(line, '|')) {
        std::string c(part);
        const auto b = c.find_first_not_of(' ');
        const auto e = c.find_last_not_of(' ');
        if (b != std::string::npos) cells.push_back(c.substr(b, e - b + 1));
    }
    return cells;
}

Outcome grid_shape() {
    Verdict v;
    const auto& g = desk_grid();
    const GridLattice lattice;

    std::set<GridKey> expected;
    for (int m = 0; m < kModelCount; ++m)
        for (int e : lattice.epochs)
            for (int l : lattice.layers)
                for (int d : lattice.back_days) expected.insert({m, e, l, d});
    std::set<GridKey> seen;
    for (const auto& r : g.rows) seen.insert(r.key);
    v.require(g.rows.size() == 180, "row count " + std::to_string(g.rows.size()));
    v.require(seen == expected, "keys differ from 10 models x 18 configurations");
    v.require(g.reparsed.size() == 180, "store holds " + std::to_string(g.reparsed.size()) + " rows");
    v.require(format_results(g.reparsed) == g.store_text, "store text does not round trip");

    std::size_t ok = 0;
    double worst = 0.0;
    for (const auto* rows : {&g.rows, &g.reparsed})
        for (const auto& r : *rows) {
            if (!r.ok()) continue;
            const auto& m = r.metrics;
            const double a = std::fabs(m.auc_min - std::min(m.auc_train, m.auc_test));
            const double b = std::fabs(m.auc_diff - (m.auc_train - m.auc_test));
            worst = std::max({worst, a, b});
            v.require(a <= 1e-12 && b <= 1e-12, "AUC identities on model " + std::to_string(r.key.model_id));
            if (rows == &g.rows) ++ok;
        }
    v.require(ok == g.rows.size(), std::to_string(g.rows.size() - ok) + " cell(s) failed");

    const std::pair<AggregateBy, std::string> bys[] = {{AggregateBy::model, "Model"},
                                                       {AggregateBy::epochs, "Epochs"},
                                                       {AggregateBy::layers, "Layers"},
                                                       {AggregateBy::back_days, "Back Days"}};
    const std::size_t groups[] = {10, 3, 3, 2};
    for (std::size_t i = 0; i < 4; ++i) {
        const auto [by, title] = bys[i];
        const auto agg = aggregate(g.rows, by);
        v.require(agg.size() == groups[i], to_string(by) + " groups " + std::to_string(agg.size()));

        const auto csv = format_aggregate_csv(agg, by);
        v.require(csv.substr(0, csv.find('\n')) == to_string(by) + ",max_auc_min,avg_auc_min,min_auc_min,avg_auc_diff",
                  to_string(by) + " csv header");
        const std::vector<std::string> want{title, "MAX(AUC_min)", "AVG(AUC_min)", "MIN(AUC_min)", "AVG(AUC_diff)"};
        v.require(header_cells(render_aggregate(agg, by)) == want, to_string(by) + " table header");

        std::map<int, std::vector<const GridResult*>> members;
        for (const auto& r : g.rows) {
            if (!r.ok()) continue;
            const int key = by == AggregateBy::model    ? r.key.model_id
                            : by == AggregateBy::epochs ? r.key.epochs
                            : by == AggregateBy::layers ? r.key.layers
                                                        : r.key.back_days;
            members[key].push_back(&r);
        }
        for (const auto& a : agg) {
            const auto& ms = members[a.key];
            double mx = -1e300, mn = 1e300, sum = 0, diff = 0;
            for (const auto* r : ms) {
                mx = std::max(mx, r->metrics.auc_min);
                mn = std::min(mn, r->metrics.auc_min);
                sum += r->metrics.auc_min;
                diff += r->metrics.auc_diff;
            }
            const double n = static_cast<double>(ms.size());
            v.require(std::fabs(a.max_auc_min - mx) <= 1e-12 && std::fabs(a.min_auc_min - mn) <= 1e-12 &&
                          std::fabs(a.avg_auc_min - sum / n) <= 1e-12 && std::fabs(a.avg_auc_diff - diff / n) <= 1e-12,
                      to_string(by) + " aggregate for key " + std::to_string(a.key));
        }
    }
    return v.outcome(std::to_string(g.rows.size()) + " rows (" + std::to_string(ok) +
                     " ok), 4 aggregate tables, identity error " + fmt("%.3g", worst));
}

// ---- 9 ----------------------------------------------------------------------

Outcome no_look_ahead() {
    Verdict v;
    const auto prices = generate_synthetic(9, 1200, Regime::random_walk);
    const auto macro = generate_synthetic_macro(9, prices[0].date, prices[prices.size() - 1].date);
    const auto full = build_feature_store(prices, macro);
    std::vector<FeatureTable> full_tables;
    for (int m = 0; m < kModelCount; ++m) full_tables.push_back(assemble(model_spec(m), full));

    Rng rng(99);
    std::size_t values = 0, rows = 0;
    for (int k = 0; k < 20; ++k) {
        const std::size_t cut = 250 + rng.below(prices.size() - 250);
        const Date day = prices[cut].date;
        const auto part = build_feature_store(prices.prefix(cut + 1), macro);
        for (const auto& [group, cols] : full.columns) {
            const auto it = part.columns.find(group);
            if (it == part.columns.end() || it->second.size() != cols.size()) {
                v.require(false, "group " + to_string(group) + " shape on prefix");
                continue;
            }
            for (std::size_t c = 0; c < cols.size(); ++c) {
                v.require(it->second[c].name == cols[c].name, "column order");
                v.require(it->second[c].values[cut] == cols[c].values[cut],
                          cols[c].name + " on " + day.to_string());
                ++values;
            }
        }
        for (int m = 0; m < kModelCount; ++m) {
            const auto& ft = full_tables[static_cast<std::size_t>(m)];
            const auto pt = assemble(model_spec(m), part);
            const auto fi = std::ranges::find(ft.dates, day);
            const auto pi = std::ranges::find(pt.dates, day);
            v.require((fi == ft.dates.end()) == (pi == pt.dates.end()), "row presence, model " + std::to_string(m));
            if (fi == ft.dates.end() || pi == pt.dates.end()) continue;
            const auto a = ft.row(static_cast<std::size_t>(fi - ft.dates.begin()));
            const auto b = pt.row(static_cast<std::size_t>(pi - pt.dates.begin()));
            v.require(std::ranges::equal(a, b), "model " + std::to_string(m) + " row on " + day.to_string());
            ++rows;
        }
    }
    return v.outcome("20 dates: " + std::to_string(values) + " column values and " + std::to_string(rows) +
                     " model rows identical");
}

// ---- 10 ---------------------------------------------------------------------

// Longest-processing-time assignment of measured cell times to `workers`.
double lpt_makespan(std::vector<double> times, unsigned workers) {
    std::ranges::sort(times, std::greater<>{});
    std::vector<double> load(workers, 0.0);
    for (double t : times) *std::ranges::min_element(load) += t;
    return *std::ranges::max_element(load);
}

Outcome determinism_and_scale() {
    Verdict v;
    fxtest::TempDir a("acceptance_run_a"), b("acceptance_run_b");
    const std::vector<std::string> outputs{
        "prices.csv",
        "features/model_7.csv",
        "grid/results.csv",
        "checkpoints/model7_e20_l1_d20.ckpt",
        "simulation/signals.csv",
        "simulation/ledger_fixed_horizon.csv",
        "simulation/ledger_dynamic.csv",
    };
    std::vector<std::string> contents[2];
    int idx = 0;
    for (const auto* dir : {&a, &b}) {
        const std::vector<std::string> base{"--run-dir", dir->str(), "--seed", "42", "--no-timestamp"};
        const auto fx = [&](std::vector<std::string> extra) {
            auto args = base;
            args.insert(args.end(), extra.begin(), extra.end());
            std::ostringstream out, err;
            const int code = pipeline::run_cli(args, out, err);
            v.require(code == 0, extra.front() + " exited " + std::to_string(code) + ": " + err.str());
            return code == 0;
        };
        const bool ran = fx({"synth"}) && fx({"features"}) &&
                         fx({"grid", "--models", "7", "--epochs", "20", "--layers", "1", "--back-days", "20",
                             "--save-checkpoints"}) &&
                         fx({"simulate", "--checkpoint", dir->str("checkpoints/model7_e20_l1_d20.ckpt")});
        if (!ran) return v.outcome("pipeline run failed");
        for (const auto& f : outputs) contents[idx].push_back(text::read_file(dir->str(f)));
        ++idx;
    }
    std::size_t bytes = 0;
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        v.require(contents[0][i] == contents[1][i], outputs[i] + " differs between runs");
        bytes += contents[0][i].size();
    }

    const auto& g = desk_grid();
    std::vector<double> cell_times;
    for (const auto& r : g.rows) cell_times.push_back(r.elapsed_seconds);
    double serial = 0.0;
    for (double t : cell_times) serial += t;
    // On a host with 8+ cores the measured wall time is the answer; otherwise
    // the measured per-cell times are scheduled onto 8 workers.
    const bool measured = g.jobs >= 8;
    const double eight = measured ? g.feature_seconds + g.grid_seconds : g.feature_seconds + lpt_makespan(cell_times, 8);
    v.require(eight < 30.0 * 60.0, "8-core grid time " + fmt("%.1f min", eight / 60.0));

    std::string detail = std::to_string(outputs.size()) + " artifacts (" + std::to_string(bytes) +
                         " bytes) byte-identical across runs; grid wall " + fmt("%.1f min", g.grid_seconds / 60.0) +
                         " on " + std::to_string(g.jobs) + " core(s), cell sum " + fmt("%.1f min", serial / 60.0) +
                         ", 8-core " + (measured ? "measured " : "projected ") + fmt("%.1f min", eight / 60.0);
    return v.outcome(detail);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    std::vector<int> only;
    app.add_option("criteria", only, "Criterion numbers to run (default: all)")->check(CLI::Range(1, 10));
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"indicator oracle equivalence", indicator_oracles},
        {"grouper partition and level scaling", grouper_and_levels},
        {"directional index and labels", directional_labels},
        {"classification metrics", classification_metrics},
        {"LSTM gradient check", gradient_check_criterion},
        {"LSTM capacity", capacity},
        {"reference trade arithmetic", reference_arithmetic},
        {"grid shape and aggregation tables", grid_shape},
        {"no look-ahead audit", no_look_ahead},
        {"end-to-end determinism and grid scale", determinism_and_scale},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int number = static_cast<int>(i) + 1;
        if (!only.empty() && std::ranges::find(only, number) == only.end()) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "PASS" : "FAIL") << " [" << number << "] " << criteria[i].first << ": " << o.detail
                  << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
