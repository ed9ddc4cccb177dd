#include "fxcog/eval.hpp"

#include "fxcog/error.hpp"
#include "fxcog/rng.hpp"
#include "fxcog/text.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace fxcog {

namespace {

void check_pairs(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw PreconditionError("scores and labels differ in length");
    if (scores.empty()) throw PreconditionError("metric needs at least one sample");
    for (int y : labels)
        if (y != 0 && y != 1) throw PreconditionError("labels must be 0 or 1");
}

} // namespace

double auc(std::span<const double> scores, std::span<const int> labels) {
    check_pairs(scores, labels);
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::ranges::sort(idx, [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Twice the Mann-Whitney U, kept integral so the result is exact.
    std::uint64_t twice_u = 0, neg_below = 0, pos = 0, neg = 0;
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        std::uint64_t p = 0, n = 0;
        while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
            (labels[idx[j]] == 1 ? p : n) += 1;
            ++j;
        }
        twice_u += 2 * p * neg_below + p * n;
        neg_below += n;
        pos += p;
        neg += n;
        i = j;
    }
    if (pos == 0 || neg == 0) throw UndefinedMetricError("AUC is undefined for single-class labels");
    return static_cast<double>(twice_u) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

Confusion confusion(std::span<const double> scores, std::span<const int> labels, double threshold) {
    check_pairs(scores, labels);
    Confusion c;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool predicted = scores[i] >= threshold;
        if (labels[i] == 1) (predicted ? c.tp : c.fn) += 1;
        else (predicted ? c.fp : c.tn) += 1;
    }
    return c;
}

double accuracy(std::span<const double> scores, std::span<const int> labels, double threshold) {
    const Confusion c = confusion(scores, labels, threshold);
    return static_cast<double>(c.tp + c.tn) / static_cast<double>(scores.size());
}

double recall(std::span<const double> scores, std::span<const int> labels, double threshold) {
    const Confusion c = confusion(scores, labels, threshold);
    if (c.tp + c.fn == 0) throw UndefinedMetricError("recall is undefined without positives");
    return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

std::vector<double> lift_curve(std::span<const double> scores, std::span<const int> labels, int deciles) {
    check_pairs(scores, labels);
    if (deciles < 1) throw PreconditionError("lift needs at least one bucket");
    const std::size_t n = scores.size();
    const auto d = static_cast<std::size_t>(deciles);
    if (n < d) throw PreconditionError("lift needs at least as many samples as buckets");
    const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    if (positives == 0) throw UndefinedMetricError("lift is undefined without positives");
    const double overall = static_cast<double>(positives) / static_cast<double>(n);

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::ranges::stable_sort(idx, [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    std::vector<double> out;
    for (std::size_t k = 0; k < d; ++k) {
        const std::size_t lo = k * n / d, hi = (k + 1) * n / d;
        std::size_t pos = 0;
        for (std::size_t r = lo; r < hi; ++r) pos += static_cast<std::size_t>(labels[idx[r]] == 1);
        out.push_back(static_cast<double>(pos) / static_cast<double>(hi - lo) / overall);
    }
    return out;
}

MetricsReport evaluate(std::span<const double> train_scores, std::span<const int> train_labels,
                       std::span<const double> test_scores, std::span<const int> test_labels) {
    MetricsReport m;
    m.auc_train = auc(train_scores, train_labels);
    m.auc_test = auc(test_scores, test_labels);
    m.acc_train = accuracy(train_scores, train_labels);
    m.acc_test = accuracy(test_scores, test_labels);
    m.confusion_test = confusion(test_scores, test_labels);
    if (m.confusion_test.tp + m.confusion_test.fn > 0) m.recall_test = recall(test_scores, test_labels);
    if (test_scores.size() >= 10) m.lift_test = lift_curve(test_scores, test_labels, 10);
    m.auc_min = std::min(m.auc_train, m.auc_test);
    m.auc_diff = m.auc_train - m.auc_test;
    m.acc_diff = m.acc_train - m.acc_test;
    return m;
}

std::uint64_t cell_seed(std::uint64_t master_seed, const GridKey& k) {
    return derive_seed(master_seed, {k.model_id, k.epochs, k.layers, k.back_days});
}

GridResult run_cell(const FeatureTable& table, const GridKey& key, const GridOptions& options) {
    GridResult r;
    r.key = key;
    r.feature_count = table.cols();
    r.seed = cell_seed(options.master_seed, key);
    const auto started = std::chrono::steady_clock::now();
    try {
        LstmConfig cfg = options.base;
        cfg.epochs = key.epochs;
        cfg.layers = key.layers;
        cfg.back_days = key.back_days;
        cfg.seed = r.seed;
        cfg.validate();

        const auto split = scale_and_window(table, static_cast<std::size_t>(key.back_days), options.split_fraction,
                                            options.scaling);
        r.train_samples = split.train.size();
        r.test_samples = split.test.size();
        LstmNetwork net = LstmNetwork::initialized(static_cast<int>(table.cols()), cfg.hidden_size, cfg.layers,
                                                   splitmix64(r.seed));
        train(net, split.train, cfg);
        const auto p_train = predict_series(net, split.train);
        const auto p_test = predict_series(net, split.test);
        r.metrics = evaluate(p_train, split.train.targets, p_test, split.test.targets);

        if (!options.checkpoint_dir.empty()) {
            ModelBundle bundle;
            bundle.checkpoint = {cfg, std::move(net), {}};
            bundle.model_id = key.model_id;
            bundle.columns = table.columns;
            bundle.scaler = split.train.scaler;
            bundle.train_end = split.train.dates.back();
            const std::string name = "model" + std::to_string(key.model_id) + "_e" + std::to_string(key.epochs) + "_l" +
                                     std::to_string(key.layers) + "_d" + std::to_string(key.back_days) + ".ckpt";
            save_checkpoint(to_checkpoint(bundle), (std::filesystem::path(options.checkpoint_dir) / name).string());
        }
    } catch (const Error& e) {
        r.status = e.what();
        std::ranges::replace(r.status, ',', ';');
        std::ranges::replace(r.status, '\n', ' ');
        if (r.status.empty() || r.status == "ok") r.status = "failed";
    }
    r.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return r;
}

// ---- results store ----------------------------------------------------------

namespace {

constexpr const char* kResultColumns[] = {
    "model",    "features", "epochs",      "layers", "back_days", "seed", "status", "train_samples",
    "test_samples", "auc_train", "auc_test", "auc_min", "auc_diff", "acc_train", "acc_test", "acc_diff",
    "recall_test", "tp", "fp", "tn", "fn", "lift_test"};

std::string join(std::span<const double> v, char sep) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += sep;
        out += text::format_double(v[i]);
    }
    return out;
}

} // namespace

namespace {

std::string csv_safe(std::string s) {
    std::ranges::replace(s, ',', ';');
    std::ranges::replace(s, '\n', ' ');
    return s;
}

} // namespace

std::string results_header() {
    std::string h;
    for (const char* c : kResultColumns) {
        if (!h.empty()) h += ',';
        h += c;
    }
    return h;
}

std::string format_result_row(const GridResult& r) {
    std::ostringstream out;
    out << r.key.model_id << ',' << r.feature_count << ',' << r.key.epochs << ',' << r.key.layers << ','
        << r.key.back_days << ',' << r.seed << ',' << csv_safe(r.status) << ',' << r.train_samples << ',' << r.test_samples;
    if (r.ok()) {
        const auto& m = r.metrics;
        for (double v : {m.auc_train, m.auc_test, m.auc_min, m.auc_diff, m.acc_train, m.acc_test, m.acc_diff})
            out << ',' << text::format_double(v);
        out << ',' << text::format_optional(m.recall_test);
        out << ',' << m.confusion_test.tp << ',' << m.confusion_test.fp << ',' << m.confusion_test.tn << ','
            << m.confusion_test.fn;
        out << ',' << join(m.lift_test, ';');
    } else {
        for (int i = 0; i < 13; ++i) out << ',';
    }
    return out.str();
}

std::string format_results(std::span<const GridResult> rows) {
    std::string out = results_header() + "\n";
    for (const auto& r : rows) out += format_result_row(r) + "\n";
    return out;
}

std::vector<GridResult> parse_results(std::string_view contents, const std::string& source) {
    std::vector<GridResult> rows;
    std::istringstream in{std::string(contents)};
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    constexpr std::size_t ncols = std::size(kResultColumns);
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty()) continue;
        const std::string where = source + ":" + std::to_string(line_no);
        if (!header) {
            if (line != results_header()) throw ParseError(where + ": unexpected results header");
            header = true;
            continue;
        }
        const auto f = text::split(line);
        if (f.size() != ncols) throw ParseError(where + ": expected " + std::to_string(ncols) + " fields");
        const auto num = [&](std::size_t i) {
            auto v = text::parse_double(f[i]);
            if (!v) throw ParseError(where + ": bad number in column " + kResultColumns[i]);
            return *v;
        };
        const auto integer = [&](std::size_t i) {
            auto v = text::parse_int(f[i]);
            if (!v) throw ParseError(where + ": bad integer in column " + kResultColumns[i]);
            return *v;
        };
        GridResult r;
        r.key.model_id = static_cast<int>(integer(0));
        r.feature_count = static_cast<std::size_t>(integer(1));
        r.key.epochs = static_cast<int>(integer(2));
        r.key.layers = static_cast<int>(integer(3));
        r.key.back_days = static_cast<int>(integer(4));
        r.seed = std::stoull(std::string(f[5]));
        r.status = std::string(f[6]);
        r.train_samples = static_cast<std::size_t>(integer(7));
        r.test_samples = static_cast<std::size_t>(integer(8));
        if (r.ok()) {
            auto& m = r.metrics;
            m.auc_train = num(9);
            m.auc_test = num(10);
            m.auc_min = num(11);
            m.auc_diff = num(12);
            m.acc_train = num(13);
            m.acc_test = num(14);
            m.acc_diff = num(15);
            m.recall_test = text::parse_double(f[16]);
            m.confusion_test = {static_cast<std::size_t>(integer(17)), static_cast<std::size_t>(integer(18)),
                                static_cast<std::size_t>(integer(19)), static_cast<std::size_t>(integer(20))};
            if (!text::trim(f[21]).empty())
                for (auto part : text::split(f[21], ';')) {
                    auto v = text::parse_double(part);
                    if (!v) throw ParseError(where + ": bad lift value");
                    m.lift_test.push_back(*v);
                }
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<GridResult> load_results(const std::string& path) {
    if (!std::filesystem::exists(path)) return {};
    return parse_results(text::read_file(path), path);
}

std::vector<GridResult> run_grid(std::span<const FeatureTable> tables, const GridLattice& lattice,
                                 const GridOptions& options) {
    options.base.validate();
    std::vector<std::pair<GridKey, const FeatureTable*>> cells;
    for (const auto& t : tables)
        for (int e : lattice.epochs)
            for (int l : lattice.layers)
                for (int d : lattice.back_days) cells.push_back({{t.model_id, e, l, d}, &t});
    std::ranges::sort(cells, {}, &std::pair<GridKey, const FeatureTable*>::first);
    for (std::size_t i = 1; i < cells.size(); ++i)
        if (cells[i].first == cells[i - 1].first)
            throw ConfigError("duplicate grid cell for model " + std::to_string(cells[i].first.model_id));

    std::map<GridKey, GridResult> done;
    if (!options.store_path.empty())
        for (auto& r : load_results(options.store_path))
            if (r.seed == cell_seed(options.master_seed, r.key)) done[r.key] = std::move(r);

    std::vector<std::pair<GridKey, const FeatureTable*>> pending;
    for (const auto& c : cells)
        if (!done.contains(c.first)) pending.push_back(c);
    if (pending.size() > options.max_new_rows) pending.resize(options.max_new_rows);

    std::mutex mu;
    std::ofstream journal;
    if (!options.store_path.empty()) {
        const std::filesystem::path p(options.store_path);
        if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
        const bool fresh = !std::filesystem::exists(p) || std::filesystem::file_size(p) == 0;
        journal.open(p, std::ios::app);
        if (!journal) throw IoError("cannot open results store '" + options.store_path + "'");
        if (fresh) journal << results_header() << "\n" << std::flush;
    }

    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < pending.size(); i = next++) {
            GridResult r = run_cell(*pending[i].second, pending[i].first, options);
            std::lock_guard lock(mu);
            if (journal.is_open()) journal << format_result_row(r) << "\n" << std::flush;
            done[r.key] = std::move(r);
        }
    };
    const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(pending.size())));
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }
    if (journal.is_open()) journal.close();

    std::vector<GridResult> out;
    for (const auto& c : cells)
        if (auto it = done.find(c.first); it != done.end()) out.push_back(it->second);
    if (!options.store_path.empty()) text::write_file_atomic(options.store_path, format_results(out));
    return out;
}

// ---- aggregation ------------------------------------------------------------

std::string to_string(AggregateBy by) {
    switch (by) {
    case AggregateBy::model: return "model";
    case AggregateBy::epochs: return "epochs";
    case AggregateBy::layers: return "layers";
    case AggregateBy::back_days: return "back_days";
    }
    return "?";
}

std::vector<AggregateRow> aggregate(std::span<const GridResult> results, AggregateBy by) {
    std::map<int, std::vector<const GridResult*>> groups;
    for (const auto& r : results) {
        if (!r.ok()) continue;
        int key = 0;
        switch (by) {
        case AggregateBy::model: key = r.key.model_id; break;
        case AggregateBy::epochs: key = r.key.epochs; break;
        case AggregateBy::layers: key = r.key.layers; break;
        case AggregateBy::back_days: key = r.key.back_days; break;
        }
        groups[key].push_back(&r);
    }
    std::vector<AggregateRow> out;
    for (const auto& [key, rows] : groups) {
        AggregateRow a;
        a.key = key;
        a.count = rows.size();
        a.max_auc_min = rows.front()->metrics.auc_min;
        a.min_auc_min = rows.front()->metrics.auc_min;
        double sum_min = 0.0, sum_diff = 0.0;
        for (const auto* r : rows) {
            a.max_auc_min = std::max(a.max_auc_min, r->metrics.auc_min);
            a.min_auc_min = std::min(a.min_auc_min, r->metrics.auc_min);
            sum_min += r->metrics.auc_min;
            sum_diff += r->metrics.auc_diff;
        }
        a.avg_auc_min = sum_min / static_cast<double>(rows.size());
        a.avg_auc_diff = sum_diff / static_cast<double>(rows.size());
        out.push_back(a);
    }
    return out;
}

namespace {

std::string key_title(AggregateBy by) {
    switch (by) {
    case AggregateBy::model: return "Model";
    case AggregateBy::epochs: return "Epochs";
    case AggregateBy::layers: return "Layers";
    case AggregateBy::back_days: return "Back Days";
    }
    return "?";
}

} // namespace

std::string format_aggregate_csv(std::span<const AggregateRow> rows, AggregateBy by) {
    std::string out = to_string(by) + ",max_auc_min,avg_auc_min,min_auc_min,avg_auc_diff\n";
    for (const auto& r : rows)
        out += std::to_string(r.key) + "," + text::format_double(r.max_auc_min) + "," +
               text::format_double(r.avg_auc_min) + "," + text::format_double(r.min_auc_min) + "," +
               text::format_double(r.avg_auc_diff) + "\n";
    return out;
}

std::string render_aggregate(std::span<const AggregateRow> rows, AggregateBy by) {
    std::vector<std::vector<std::string>> cells;
    for (const auto& r : rows)
        cells.push_back({std::to_string(r.key), text::format_fixed(r.max_auc_min, 2), text::format_fixed(r.avg_auc_min, 2),
                         text::format_fixed(r.min_auc_min, 2), text::format_fixed(r.avg_auc_diff, 2)});
    return text::render_table({key_title(by), "MAX(AUC_min)", "AVG(AUC_min)", "MIN(AUC_min)", "AVG(AUC_diff)"}, cells);
}

std::vector<GridResult> select_best(std::span<const GridResult> results, std::size_t top_k) {
    std::vector<GridResult> rows;
    for (const auto& r : results)
        if (r.ok()) rows.push_back(r);
    std::ranges::stable_sort(rows, [](const GridResult& a, const GridResult& b) {
        const auto& ma = a.metrics;
        const auto& mb = b.metrics;
        if (ma.auc_min != mb.auc_min) return ma.auc_min > mb.auc_min;
        if (ma.auc_diff != mb.auc_diff) return ma.auc_diff < mb.auc_diff;
        if (a.key.layers != b.key.layers) return a.key.layers < b.key.layers;
        if (a.key.epochs != b.key.epochs) return a.key.epochs < b.key.epochs;
        if (a.key.back_days != b.key.back_days) return a.key.back_days < b.key.back_days;
        return a.key.model_id < b.key.model_id;
    });
    if (rows.size() > top_k) rows.resize(top_k);
    return rows;
}

std::string render_best(std::span<const GridResult> rows) {
    std::vector<std::vector<std::string>> cells;
    for (const auto& r : rows)
        cells.push_back({std::to_string(r.key.model_id), std::to_string(r.feature_count), std::to_string(r.key.epochs),
                         std::to_string(r.key.layers), std::to_string(r.key.back_days),
                         text::format_fixed(r.metrics.auc_test, 2), text::format_fixed(r.metrics.auc_train, 2),
                         text::format_fixed(r.metrics.auc_min, 2), text::format_fixed(r.metrics.auc_diff, 2)});
    return text::render_table({"Model", "Features", "Epochs", "Layers", "Days", "AUC_test", "AUC_train", "AUC_min", "AUC_diff"},
                        cells);
}

// ---- bundles ----------------------------------------------------------------

namespace {

std::string join_doubles(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ' ';
        out += text::format_double(v[i]);
    }
    return out;
}

std::vector<double> split_doubles(const std::string& s, const std::string& what) {
    std::vector<double> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) {
        auto v = text::parse_double(tok);
        if (!v) throw ParseError("bad value in checkpoint field " + what);
        out.push_back(*v);
    }
    return out;
}

} // namespace

Checkpoint to_checkpoint(const ModelBundle& b) {
    Checkpoint c = b.checkpoint;
    c.extra["model"] = std::to_string(b.model_id);
    std::string cols;
    for (std::size_t i = 0; i < b.columns.size(); ++i) cols += (i ? "," : "") + b.columns[i];
    c.extra["columns"] = cols;
    c.extra["scaler_kind"] = b.scaler.kind == ScalingKind::min_max ? "min_max" : "z_score";
    c.extra["scaler_offset"] = join_doubles(b.scaler.offset);
    c.extra["scaler_scale"] = join_doubles(b.scaler.scale);
    c.extra["train_end"] = b.train_end.to_string();
    return c;
}

ModelBundle from_checkpoint(const Checkpoint& ckpt) {
    const auto need = [&](const char* key) -> const std::string& {
        auto it = ckpt.extra.find(key);
        if (it == ckpt.extra.end()) throw ParseError(std::string("checkpoint lacks bundle field '") + key + "'");
        return it->second;
    };
    ModelBundle b;
    b.checkpoint = ckpt;
    auto id = text::parse_int(need("model"));
    if (!id) throw ParseError("bad model id in checkpoint");
    b.model_id = static_cast<int>(*id);
    for (auto c : text::split(need("columns"))) b.columns.emplace_back(c);
    const std::string& kind = need("scaler_kind");
    if (kind != "min_max" && kind != "z_score") throw ParseError("bad scaler kind in checkpoint");
    b.scaler.kind = kind == "min_max" ? ScalingKind::min_max : ScalingKind::z_score;
    b.scaler.offset = split_doubles(need("scaler_offset"), "scaler_offset");
    b.scaler.scale = split_doubles(need("scaler_scale"), "scaler_scale");
    b.train_end = Date::parse(need("train_end"));
    if (b.scaler.offset.size() != b.columns.size() || b.scaler.scale.size() != b.columns.size() ||
        b.columns.size() != static_cast<std::size_t>(ckpt.net.input_dim()))
        throw ParseError("checkpoint bundle fields disagree on the feature count");
    return b;
}

} // namespace fxcog
