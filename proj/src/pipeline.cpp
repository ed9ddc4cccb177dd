#include "fxcog/pipeline.hpp"

#include "fxcog/error.hpp"
#include "fxcog/text.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;

namespace fxcog::pipeline {

std::vector<FeatureTable> build_tables(const PriceSeries& prices, std::span<const MacroSeries> macro,
                                       std::span<const int> models, const FeatureConfig& cfg) {
    const FeatureStore store = build_feature_store(prices, macro, cfg);
    std::vector<FeatureTable> tables;
    for (int id : models) tables.push_back(assemble(model_spec(id), store));
    return tables;
}

std::string feature_config_hash(const FeatureConfig& c) {
    std::ostringstream s;
    const auto list = [&](const std::vector<int>& v) {
        for (int x : v) s << x << ' ';
        s << '|';
    };
    const auto& i = c.indicators;
    list(i.sma_windows);
    list(i.ema_windows);
    list(i.rsi_windows);
    s << i.bollinger.n << ' ' << text::format_double(i.bollinger.k) << '|' << i.ichimoku.n << ' ' << i.ichimoku.m << ' '
      << i.ichimoku.p << '|' << i.macd.n << ' ' << i.macd.m << ' ' << i.macd.p << '|' << i.adx_n << ' ' << i.willr_n
      << ' ' << i.atr_n << '|' << i.kdj.k_window << ' ' << i.kdj.d_smooth << '|' << i.squeeze.n << ' ' << i.squeeze.m
      << ' ' << i.squeeze.p << ' ' << text::format_double(i.squeeze.q) << '|';
    s << text::format_double(c.grouper.alpha) << ' ' << c.grouper.lookback << ' ' << c.grouper.window << '|';
    s << c.fibonacci.lookback << ' ' << c.fibonacci.include_bounds << ' ';
    for (double r : c.fibonacci.ratios) s << text::format_double(r) << ' ';
    s << '|' << c.divergence.window << ' ' << static_cast<int>(c.divergence.mode) << '|' << c.horizon;
    return text::fnv1a_hex(s.str());
}

std::vector<std::string> frame_provenance(const FeatureTable& table, const std::string& prices_hash,
                                          const std::string& macro_hash, const std::string& config_hash) {
    std::string groups;
    for (auto g : model_spec(table.model_id).groups) groups += (groups.empty() ? "" : "+") + to_string(g);
    return {"model=" + std::to_string(table.model_id), "groups=" + groups, "prices_hash=" + prices_hash,
            "macro_hash=" + macro_hash, "config_hash=" + config_hash};
}

Predictions predict_out_of_sample(const ModelBundle& bundle, const FeatureTable& table, std::optional<Date> from) {
    if (table.columns != bundle.columns)
        throw ShapeError("feature columns of model " + std::to_string(table.model_id) +
                         " differ from the checkpoint's columns");
    const Date start = from.value_or(bundle.train_end);
    std::size_t first = 0;
    while (first < table.rows() && table.dates[first] <= start) ++first;
    const auto back = static_cast<std::size_t>(bundle.checkpoint.config.back_days);
    const WindowedDataset ds = make_windows(table, bundle.scaler, back, first, table.rows(), Split::inference);
    return {ds.dates, predict_series(bundle.checkpoint.net, ds)};
}

ModelSignals make_signals(const std::string& model, const Predictions& preds, const PriceSeries& prices,
                          NormalizationMode mode, std::size_t rolling_window) {
    ModelSignals ms;
    ms.model = model;
    ms.signals = normalize_signals(preds.dates, preds.probabilities, mode, rolling_window);
    ms.prices.dates = preds.dates;
    for (Date d : preds.dates) {
        const std::size_t i = prices.index_of(d);
        if (i == prices.size()) throw PreconditionError("no close price for " + d.to_string());
        ms.prices.closes.push_back(prices[i].close);
    }
    return ms;
}

// ---- command line -----------------------------------------------------------

namespace {

struct Global {
    std::string run_dir = "run";
    std::uint64_t seed = 42;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    bool no_timestamp = false;
};

std::string timestamp_line() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return std::string("generated=") + buf;
}

std::string under(const Global& g, const std::string& rel) { return (fs::path(g.run_dir) / rel).string(); }

std::string or_default(const std::string& v, const std::string& fallback) { return v.empty() ? fallback : v; }

std::string hash_file(const std::string& path) { return text::fnv1a_hex(text::read_file(path)); }

std::string hash_macro_dir(const std::string& dir) {
    if (!fs::is_directory(dir)) return "none";
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
    std::ranges::sort(files);
    std::string all;
    for (const auto& f : files) all += f.filename().string() + "\n" + text::read_file(f.string());
    return text::fnv1a_hex(all);
}

std::vector<MacroSeries> load_macro_optional(const std::string& dir) {
    if (dir.empty() || !fs::is_directory(dir)) return {};
    return load_macro_directory(dir);
}

std::string frame_path(const Global& g, int model) { return under(g, "features/model_" + std::to_string(model) + ".csv"); }

void write_config_snapshot(const Global& g, const CLI::App& app, const std::string& command) {
    text::write_file_atomic(under(g, "config/" + command + ".ini"), app.config_to_str(true, false));
}

struct SynthArgs {
    std::size_t days = 2000;
    std::string regime = "random_walk";
    std::string out;
    std::string macro_out;
    bool no_macro = false;
};

struct FeatureArgs {
    std::string prices;
    std::string macro_dir;
    std::vector<int> models{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::string divergence_mode = "independent";
    std::size_t horizon = 10;
};

struct NetArgs {
    int hidden = 32;
    double learning_rate = 0.001;
    double momentum = 0.9;
    double dropout = 0.1;
    double l1 = 0.0;
    int batch = 32;
    double split = 0.8;
    std::string scaling = "min_max";
};

struct TrainArgs {
    int model = 0;
    int epochs = 20;
    int layers = 4;
    int back_days = 20;
};

struct GridArgs {
    std::vector<int> models{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::vector<int> epochs{20, 40, 60};
    std::vector<int> layers{1, 4, 8};
    std::vector<int> back_days{20, 30};
    bool save_checkpoints = false;
    std::size_t top_k = 5;
    std::size_t max_new_rows = SIZE_MAX;
};

struct SimArgs {
    std::vector<std::string> checkpoints;
    std::string prices;
    std::string macro_dir;
    std::string from;
    bool zero_cost = false;
    double long_threshold = 0.7;
    double short_threshold = 0.35;
    int horizon = 10;
    double spread_pips = 1.0;
    double commission = 0.0;
    std::string normalization = "whole_window";
    std::size_t rolling_window = 0;
};

struct ReportArgs {
    std::string results;
    std::string ledger;
};

void add_net_options(CLI::App* sub, NetArgs& n) {
    sub->add_option("--hidden", n.hidden, "LSTM hidden width")->capture_default_str();
    sub->add_option("--learning-rate", n.learning_rate, "SGD learning rate")->capture_default_str();
    sub->add_option("--momentum", n.momentum, "SGD momentum")->capture_default_str();
    sub->add_option("--dropout", n.dropout, "Inter-layer dropout rate")->capture_default_str();
    sub->add_option("--l1", n.l1, "L1 penalty on weights")->capture_default_str();
    sub->add_option("--batch", n.batch, "Mini-batch size")->capture_default_str();
    sub->add_option("--split", n.split, "Chronological train fraction")->capture_default_str();
    sub->add_option("--scaling", n.scaling, "min_max or z_score")->capture_default_str();
}

LstmConfig to_lstm(const NetArgs& n) {
    LstmConfig c;
    c.hidden_size = n.hidden;
    c.learning_rate = n.learning_rate;
    c.momentum = n.momentum;
    c.dropout_rate = n.dropout;
    c.l1_penalty = n.l1;
    c.batch_size = n.batch;
    return c;
}

ScalingKind to_scaling(const std::string& s) {
    if (s == "min_max") return ScalingKind::min_max;
    if (s == "z_score") return ScalingKind::z_score;
    throw ConfigError("unknown scaling '" + s + "'");
}

FeatureConfig to_feature_config(const FeatureArgs& a) {
    FeatureConfig c;
    c.divergence.mode = divergence::parse_mode(a.divergence_mode);
    c.horizon = a.horizon;
    return c;
}

std::vector<FeatureTable> load_frames(const Global& g, const std::vector<int>& models) {
    std::vector<FeatureTable> tables;
    for (int id : models) {
        model_spec(id);
        const std::string path = frame_path(g, id);
        if (!fs::exists(path)) throw IoError("missing feature frame '" + path + "' (run `fx features` first)");
        FeatureTable t = load_frame(path);
        t.model_id = id;
        tables.push_back(std::move(t));
    }
    return tables;
}

int cmd_synth(const Global& g, const SynthArgs& a, std::ostream& out) {
    const PriceSeries series = generate_synthetic(g.seed, a.days, parse_regime(a.regime));
    const std::string path = or_default(a.out, under(g, "prices.csv"));
    save_price_series(series, path);
    out << "wrote " << series.size() << " candles to " << path << "\n";
    if (!a.no_macro) {
        const std::string dir = or_default(a.macro_out, under(g, "macro"));
        const auto macro = generate_synthetic_macro(g.seed, series[0].date, series[series.size() - 1].date);
        for (const auto& m : macro) save_macro_series(m, (fs::path(dir) / (m.key() + ".csv")).string());
        out << "wrote " << macro.size() << " macro series to " << dir << "\n";
    }
    return exit_ok;
}

int cmd_features(const Global& g, const FeatureArgs& a, std::ostream& out) {
    const std::string prices_path = or_default(a.prices, under(g, "prices.csv"));
    const std::string macro_dir = or_default(a.macro_dir, under(g, "macro"));
    const PriceSeries prices = load_price_series(prices_path);
    const auto macro = load_macro_optional(macro_dir);
    const FeatureConfig cfg = to_feature_config(a);
    const auto tables = build_tables(prices, macro, a.models, cfg);
    const std::string ph = hash_file(prices_path), mh = hash_macro_dir(macro_dir), ch = feature_config_hash(cfg);
    for (const auto& t : tables) {
        auto prov = frame_provenance(t, ph, mh, ch);
        if (!g.no_timestamp) prov.push_back(timestamp_line());
        save_frame(t, frame_path(g, t.model_id), prov);
        out << "model " << t.model_id << ": " << t.rows() << " rows x " << t.cols() << " features -> "
            << frame_path(g, t.model_id) << "\n";
    }
    return exit_ok;
}

int cmd_label(const Global& g, const FeatureArgs& a, std::ostream& out) {
    const std::string prices_path = or_default(a.prices, under(g, "prices.csv"));
    const PriceSeries prices = load_price_series(prices_path);
    const auto labels = label(prices, a.horizon);
    std::string csv = "date,directional_index,target\n";
    std::size_t ups = 0;
    for (const auto& l : labels) {
        csv += l.date.to_string() + "," + text::format_double(l.directional_index) + "," + std::to_string(l.target) + "\n";
        ups += static_cast<std::size_t>(l.target);
    }
    text::write_file_atomic(under(g, "labels.csv"), csv);
    out << "labeled " << labels.size() << " days (" << ups << " up) -> " << under(g, "labels.csv") << "\n";
    return exit_ok;
}

int cmd_train(const Global& g, const TrainArgs& a, const NetArgs& n, std::ostream& out) {
    const auto tables = load_frames(g, {a.model});
    GridOptions opt;
    opt.base = to_lstm(n);
    opt.split_fraction = n.split;
    opt.scaling = to_scaling(n.scaling);
    opt.master_seed = g.seed;
    opt.checkpoint_dir = under(g, "checkpoints");
    const GridKey key{a.model, a.epochs, a.layers, a.back_days};
    const GridResult r = run_cell(tables.front(), key, opt);
    out << results_header() << "\n" << format_result_row(r) << "\n";
    if (!r.ok()) throw ComputationError("training failed: " + r.status);
    return exit_ok;
}

int cmd_grid(const Global& g, const GridArgs& a, const NetArgs& n, std::ostream& out) {
    const auto tables = load_frames(g, a.models);
    GridOptions opt;
    opt.base = to_lstm(n);
    opt.split_fraction = n.split;
    opt.scaling = to_scaling(n.scaling);
    opt.master_seed = g.seed;
    opt.jobs = g.jobs;
    opt.store_path = under(g, "grid/results.csv");
    if (a.save_checkpoints) opt.checkpoint_dir = under(g, "checkpoints");
    opt.max_new_rows = a.max_new_rows;
    const GridLattice lattice{a.epochs, a.layers, a.back_days};
    const auto results = run_grid(tables, lattice, opt);

    std::string report;
    if (!g.no_timestamp) report += "# " + timestamp_line() + "\n";
    const std::pair<AggregateBy, const char*> tables_by[] = {
        {AggregateBy::model, "Aggregated AUC results per model"},
        {AggregateBy::epochs, "Aggregated AUC results by training epochs"},
        {AggregateBy::layers, "Aggregated AUC results by LSTM layers"},
        {AggregateBy::back_days, "Aggregated AUC results by look-back window"}};
    for (const auto& [by, title] : tables_by) {
        const auto agg = aggregate(results, by);
        text::write_file_atomic(under(g, "grid/by_" + to_string(by) + ".csv"), format_aggregate_csv(agg, by));
        report += std::string(title) + "\n" + render_aggregate(agg, by) + "\n";
    }
    const auto best = select_best(results, a.top_k);
    report += "Top configurations by AUC_min\n" + render_best(best);
    text::write_file_atomic(under(g, "grid/tables.txt"), report);
    out << report;

    const auto ok = std::ranges::count_if(results, [](const GridResult& r) { return r.ok(); });
    out << ok << " of " << results.size() << " rows succeeded; store: " << opt.store_path << "\n";
    return ok > 0 ? exit_ok : exit_runtime;
}

int cmd_simulate(const Global& g, const SimArgs& a, std::ostream& out, std::ostream& err) {
    const std::string prices_path = or_default(a.prices, under(g, "prices.csv"));
    const PriceSeries prices = load_price_series(prices_path);
    const auto macro = load_macro_optional(or_default(a.macro_dir, under(g, "macro")));

    StrategyConfig cfg = a.zero_cost ? StrategyConfig::zero_cost() : StrategyConfig{};
    cfg.long_threshold = a.long_threshold;
    cfg.short_threshold = a.short_threshold;
    cfg.horizon = a.horizon;
    if (!a.zero_cost) {
        cfg.spread_pips = a.spread_pips;
        cfg.commission = a.commission;
    }
    cfg.validate();
    const NormalizationMode mode =
        a.normalization == "rolling" ? NormalizationMode::rolling
        : a.normalization == "whole_window" ? NormalizationMode::whole_window
                                            : throw ConfigError("unknown normalization '" + a.normalization + "'");
    std::optional<Date> from;
    if (!a.from.empty()) from = Date::parse(a.from);

    std::vector<ModelBundle> bundles;
    std::vector<int> ids;
    for (const auto& path : a.checkpoints) {
        bundles.push_back(from_checkpoint(load_checkpoint(path)));
        ids.push_back(bundles.back().model_id);
    }
    // One shared feature store; the cheapest way to get every model's table.
    FeatureConfig fcfg;
    const FeatureStore store = build_feature_store(prices, macro, fcfg);

    std::vector<LedgerRow> fixed_rows, dynamic_rows;
    std::vector<NamedReport> fixed_reports, dynamic_reports;
    std::string signals_csv = "model,date,raw,weighted\n";
    std::size_t failures = 0;
    for (std::size_t k = 0; k < bundles.size(); ++k) {
        const ModelBundle& b = bundles[k];
        const std::string name = "Model " + std::to_string(b.model_id);
        try {
            const FeatureTable table = assemble(model_spec(b.model_id), store);
            const auto preds = predict_out_of_sample(b, table, from);
            const auto ms = make_signals(name, preds, prices, mode, a.rolling_window);
            for (std::size_t i = 0; i < ms.signals.dates.size(); ++i)
                signals_csv += name + "," + ms.signals.dates[i].to_string() + "," +
                               text::format_double(ms.signals.raw[i]) + "," + text::format_double(ms.signals.weighted[i]) +
                               "\n";
            const auto fixed = fixed_horizon_sim(ms.signals, ms.prices, cfg);
            const auto dyn = dynamic_sim(ms.signals, ms.prices, cfg);
            for (const auto& t : fixed.trades) fixed_rows.push_back({name, t});
            for (const auto& t : dyn.trades) dynamic_rows.push_back({name, t});
            fixed_reports.push_back({name, fixed.report});
            dynamic_reports.push_back({name, dyn.report});
        } catch (const Error& e) {
            ++failures;
            err << name << ": " << e.what() << "\n";
        }
    }
    text::write_file_atomic(under(g, "simulation/ledger_fixed_horizon.csv"), format_ledger(fixed_rows));
    text::write_file_atomic(under(g, "simulation/ledger_dynamic.csv"), format_ledger(dynamic_rows));
    text::write_file_atomic(under(g, "simulation/signals.csv"), signals_csv);

    std::string report;
    if (!g.no_timestamp) report += "# " + timestamp_line() + "\n";
    report += "Fixed-horizon trading performance (" + std::to_string(cfg.horizon) + "-day holding period)\n" +
              render_summary(fixed_reports) + "\n";
    report += "Dynamic position management: summary\n" + render_summary(dynamic_reports) + "\n";
    report += "Dynamic position management: trades\n" + render_trades(dynamic_rows);
    text::write_file_atomic(under(g, "simulation/report.txt"), report);
    out << report;
    if (failures == bundles.size()) throw DegenerateSignalError("no model produced a usable signal");
    return exit_ok;
}

int cmd_report(const Global& g, const ReportArgs& a, std::ostream& out) {
    if (!a.ledger.empty()) {
        const auto rows = parse_ledger(text::read_file(a.ledger), a.ledger);
        std::vector<NamedReport> reports;
        std::vector<std::string> names;
        for (const auto& r : rows)
            if (std::ranges::find(names, r.model) == names.end()) names.push_back(r.model);
        for (const auto& n : names) {
            std::vector<Trade> trades;
            for (const auto& r : rows)
                if (r.model == n) trades.push_back(r.trade);
            reports.push_back({n, summarize(trades)});
        }
        out << render_summary(reports) << render_trades(rows);
        return exit_ok;
    }
    const std::string path = or_default(a.results, under(g, "grid/results.csv"));
    if (!fs::exists(path)) throw IoError("results store '" + path + "' not found");
    const auto results = load_results(path);
    for (auto by : {AggregateBy::model, AggregateBy::epochs, AggregateBy::layers, AggregateBy::back_days})
        out << "By " << to_string(by) << "\n" << render_aggregate(aggregate(results, by), by) << "\n";
    out << "Top configurations by AUC_min\n" << render_best(select_best(results, 5));
    return exit_ok;
}

int exit_code_for(const Error& e) {
    switch (e.category()) {
    case ErrorCategory::usage: return exit_usage;
    case ErrorCategory::data: return exit_data;
    case ErrorCategory::runtime: return exit_runtime;
    }
    return exit_runtime;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Technical + fundamental EUR/USD direction pipeline"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Flat key=value configuration file; flags override it");
    Global g;
    app.add_option("--run-dir", g.run_dir, "Directory holding every output")->capture_default_str();
    app.add_option("--seed", g.seed, "Master seed")->capture_default_str();
    app.add_option("--jobs", g.jobs, "Worker threads for the grid")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_flag("--no-timestamp", g.no_timestamp, "Omit timestamp lines from outputs");

    SynthArgs synth;
    auto* s_synth = app.add_subcommand("synth", "Write a synthetic price series and macro snapshots");
    s_synth->add_option("--days", synth.days, "Number of trading days")->capture_default_str();
    s_synth->add_option("--regime", synth.regime, "random_walk | trending | mean_reverting")->capture_default_str();
    s_synth->add_option("--out", synth.out, "Price file (default <run-dir>/prices.csv)");
    s_synth->add_option("--macro-out", synth.macro_out, "Macro directory (default <run-dir>/macro)");
    s_synth->add_flag("--no-macro", synth.no_macro, "Skip the macro series");

    FeatureArgs feat;
    const auto add_inputs = [&](CLI::App* sub) {
        sub->add_option("--prices", feat.prices, "OHLC file (default <run-dir>/prices.csv)");
        sub->add_option("--macro-dir", feat.macro_dir, "Macro directory (default <run-dir>/macro)");
        sub->add_option("--horizon", feat.horizon, "Label horizon in trading days")->capture_default_str();
    };
    auto* s_features = app.add_subcommand("features", "Build one feature frame per model");
    add_inputs(s_features);
    s_features->add_option("--models", feat.models, "Model ids (0-9)")->delimiter(',')->capture_default_str();
    s_features->add_option("--divergence-mode", feat.divergence_mode, "independent | price_anchored")
        ->capture_default_str();
    auto* s_label = app.add_subcommand("label", "Write directional-index labels");
    add_inputs(s_label);

    TrainArgs tr;
    NetArgs net;
    auto* s_train = app.add_subcommand("train", "Train one configuration and save its checkpoint");
    s_train->add_option("--model", tr.model, "Model id")->required();
    s_train->add_option("--epochs", tr.epochs)->capture_default_str();
    s_train->add_option("--layers", tr.layers)->capture_default_str();
    s_train->add_option("--back-days", tr.back_days)->capture_default_str();
    add_net_options(s_train, net);

    GridArgs grid;
    auto* s_grid = app.add_subcommand("grid", "Train and evaluate the hyperparameter grid");
    s_grid->add_option("--models", grid.models)->delimiter(',')->capture_default_str();
    s_grid->add_option("--epochs", grid.epochs)->delimiter(',')->capture_default_str();
    s_grid->add_option("--layers", grid.layers)->delimiter(',')->capture_default_str();
    s_grid->add_option("--back-days", grid.back_days)->delimiter(',')->capture_default_str();
    s_grid->add_option("--top-k", grid.top_k)->capture_default_str();
    s_grid->add_flag("--save-checkpoints", grid.save_checkpoints, "Save every trained cell");
    s_grid->add_option("--max-new-rows", grid.max_new_rows, "Stop after this many new rows");
    add_net_options(s_grid, net);

    SimArgs sim;
    auto* s_sim = app.add_subcommand("simulate", "Run both trading regimes for trained checkpoints");
    s_sim->add_option("--checkpoint", sim.checkpoints, "Checkpoint file (repeatable)")->required();
    s_sim->add_option("--prices", sim.prices, "OHLC file covering history and the trading period");
    s_sim->add_option("--macro-dir", sim.macro_dir);
    s_sim->add_option("--from", sim.from, "Trade after this date (default: checkpoint train end)");
    s_sim->add_flag("--zero-cost", sim.zero_cost, "Zero transaction costs");
    s_sim->add_option("--long", sim.long_threshold)->capture_default_str();
    s_sim->add_option("--short", sim.short_threshold)->capture_default_str();
    s_sim->add_option("--horizon", sim.horizon)->capture_default_str();
    s_sim->add_option("--spread-pips", sim.spread_pips)->capture_default_str();
    s_sim->add_option("--commission", sim.commission)->capture_default_str();
    s_sim->add_option("--normalization", sim.normalization, "whole_window | rolling")->capture_default_str();
    s_sim->add_option("--rolling-window", sim.rolling_window)->capture_default_str();

    ReportArgs rep;
    auto* s_report = app.add_subcommand("report", "Render stored grid results or a trade ledger");
    s_report->add_option("--results", rep.results);
    s_report->add_option("--ledger", rep.ledger);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return exit_usage;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        const std::string name = sub->get_name();
        fs::create_directories(g.run_dir);
        int rc = exit_ok;
        if (sub == s_synth) rc = cmd_synth(g, synth, out);
        else if (sub == s_features) rc = cmd_features(g, feat, out);
        else if (sub == s_label) rc = cmd_label(g, feat, out);
        else if (sub == s_train) rc = cmd_train(g, tr, net, out);
        else if (sub == s_grid) rc = cmd_grid(g, grid, net, out);
        else if (sub == s_sim) rc = cmd_simulate(g, sim, out, err);
        else if (sub == s_report) rc = cmd_report(g, rep, out);
        write_config_snapshot(g, app, name);
        return rc;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_runtime;
    }
}

} // namespace fxcog::pipeline
