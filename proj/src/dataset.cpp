#include "fxcog/dataset.hpp"

#include "fxcog/error.hpp"
#include "fxcog/text.hpp"

#include <algorithm>
#include <cmath>

namespace fxcog {

std::optional<double> directional_index(std::span<const double> closes, std::size_t n, std::size_t h) {
    if (h == 0 || n + h >= closes.size()) return std::nullopt;
    const double p = closes[n];
    double hi = closes[n + 1];
    double lo = closes[n + 1];
    for (std::size_t i = n + 1; i <= n + h; ++i) {
        hi = std::max(hi, closes[i]);
        lo = std::min(lo, closes[i]);
    }
    return 0.5 * (hi - p) + 0.5 * (lo - p) + 0.5 * (closes[n + h] - p);
}

std::vector<LabeledDay> label(const PriceSeries& series, std::size_t h) {
    if (h == 0) throw PreconditionError("label horizon must be >= 1");
    const auto closes = series.closes();
    std::vector<LabeledDay> out;
    if (closes.size() <= h) return out;
    out.reserve(closes.size() - h);
    for (std::size_t n = 0; n + h < closes.size(); ++n) {
        const double d = *directional_index(closes, n, h);
        out.push_back({n, series[n].date, d, d > 0.0 ? 1 : 0});
    }
    return out;
}

std::string to_string(FeatureGroup g) {
    switch (g) {
    case FeatureGroup::price: return "price";
    case FeatureGroup::indicators: return "indicators";
    case FeatureGroup::fundamentals: return "fundamentals";
    case FeatureGroup::levels: return "levels";
    case FeatureGroup::divergence: return "divergence";
    case FeatureGroup::fibonacci: return "fibonacci";
    }
    return "?";
}

FeatureGroup parse_group(std::string_view s) {
    for (auto g : kAllGroups)
        if (to_string(g) == s) return g;
    throw ConfigError("unknown feature group '" + std::string(s) + "'");
}

ModelSpec model_spec(int id) {
    using G = FeatureGroup;
    switch (id) {
    case 0: return {0, {G::price}};
    case 1: return {1, {G::indicators}};
    case 2: return {2, {G::fundamentals}};
    case 3: return {3, {G::indicators, G::fundamentals}};
    case 4: return {4, {G::indicators, G::levels}};
    case 5: return {5, {G::indicators, G::fundamentals, G::levels}};
    case 6: return {6, {G::indicators, G::levels, G::divergence}};
    case 7: return {7, {G::indicators, G::fundamentals, G::levels, G::divergence}};
    case 8: return {8, {G::indicators, G::levels, G::divergence, G::fibonacci}};
    case 9: return {9, {kAllGroups.begin(), kAllGroups.end()}};
    default: throw ConfigError("model id must be in 0..9, got " + std::to_string(id));
    }
}

FeatureStore build_feature_store(const PriceSeries& series, std::span<const MacroSeries> macro,
                                 const FeatureConfig& cfg) {
    FeatureStore store;
    store.dates = series.dates();
    const std::size_t T = series.size();

    auto as_column = [&](std::string name, const std::vector<double>& v) {
        return IndicatorColumn{std::move(name), std::vector<std::optional<double>>(v.begin(), v.end())};
    };
    store.columns[FeatureGroup::price] = {as_column("open", series.opens()), as_column("high", series.highs()),
                                          as_column("low", series.lows()), as_column("close", series.closes())};

    auto& ind = store.columns[FeatureGroup::indicators];
    for (auto& col : indicators::compute_all(series, cfg.indicators))
        if (!indicators::is_forward_looking(col.name)) ind.push_back(std::move(col));

    if (!macro.empty()) {
        auto& fund = store.columns[FeatureGroup::fundamentals];
        for (const auto& m : macro) {
            const auto aligned = align_macro(m, store.dates);
            IndicatorColumn value{aligned.key, std::vector<std::optional<double>>(T)};
            IndicatorColumn days{aligned.key + "_days", std::vector<std::optional<double>>(T)};
            for (std::size_t t = 0; t < T; ++t) {
                value.values[t] = aligned.latest_value[t];
                days.values[t] = static_cast<double>(aligned.days_since_release[t]);
            }
            fund.push_back(std::move(value));
            fund.push_back(std::move(days));
        }
    }

    store.columns[FeatureGroup::levels] = levels::support_resistance_columns(series, cfg.grouper);
    store.columns[FeatureGroup::fibonacci] = levels::fibonacci_columns(series, cfg.fibonacci);
    if (cfg.collapse_missing_levels) {
        levels::collapse_missing(store.columns[FeatureGroup::levels], series.closes());
        levels::collapse_missing(store.columns[FeatureGroup::fibonacci], series.closes());
    }

    const auto& sq = cfg.indicators.squeeze;
    const IndicatorColumn sqz = indicators::squeeze(series, sq.n, sq.m, sq.p, sq.q);
    store.columns[FeatureGroup::divergence] = divergence::divergence_columns(series, sqz, cfg.divergence);

    store.labels = label(series, cfg.horizon);
    return store;
}

FeatureTable assemble(const ModelSpec& model, const FeatureStore& store) {
    std::vector<const IndicatorColumn*> cols;
    for (FeatureGroup g : model.groups) {
        auto it = store.columns.find(g);
        if (it == store.columns.end() || it->second.empty())
            throw ConfigError("model " + std::to_string(model.id) + " needs feature group '" + to_string(g) +
                              "' which has no columns");
        std::vector<const IndicatorColumn*> group;
        for (const auto& c : it->second) group.push_back(&c);
        std::ranges::sort(group, {}, &IndicatorColumn::name);
        cols.insert(cols.end(), group.begin(), group.end());
    }

    FeatureTable table;
    table.model_id = model.id;
    for (const auto* c : cols) table.columns.push_back(c->name);
    const std::size_t T = store.dates.size();
    for (std::size_t t = 0; t < T; ++t) {
        const bool complete = std::ranges::all_of(cols, [t](const IndicatorColumn* c) { return c->values[t].has_value(); });
        if (!complete) continue;
        table.dates.push_back(store.dates[t]);
        for (const auto* c : cols) table.values.push_back(*c->values[t]);
        table.targets.push_back(t < store.labels.size() ? std::optional<int>(store.labels[t].target) : std::nullopt);
    }
    return table;
}

std::string format_frame(const FeatureTable& table, std::span<const std::string> provenance) {
    std::string out;
    for (const auto& line : provenance) out += "# " + line + "\n";
    out += "date";
    for (const auto& c : table.columns) out += "," + c;
    out += ",target\n";
    for (std::size_t r = 0; r < table.rows(); ++r) {
        out += table.dates[r].to_string();
        for (double v : table.row(r)) {
            out += ',';
            out += text::format_double(v);
        }
        out += ',';
        if (table.targets[r]) out += std::to_string(*table.targets[r]);
        out += '\n';
    }
    return out;
}

FeatureTable parse_frame(std::string_view contents, const std::string& source) {
    FeatureTable table;
    bool header_seen = false;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < contents.size()) {
        auto end = contents.find('\n', start);
        if (end == std::string_view::npos) end = contents.size();
        auto line = contents.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (text::trim(line).empty()) continue;
        const std::string where = source + ":" + std::to_string(line_no);
        if (line.starts_with('#')) {
            const auto body = text::trim(line.substr(1));
            if (body.starts_with("model=")) {
                auto id = text::parse_int(body.substr(6));
                if (!id) throw ParseError(where + ": malformed model id");
                table.model_id = static_cast<int>(*id);
            }
            continue;
        }
        const auto fields = text::split(line);
        if (!header_seen) {
            if (fields.size() < 2 || fields.front() != "date" || fields.back() != "target")
                throw ParseError(where + ": frame header must start with 'date' and end with 'target'");
            for (std::size_t i = 1; i + 1 < fields.size(); ++i) table.columns.emplace_back(fields[i]);
            header_seen = true;
            continue;
        }
        if (fields.size() != table.cols() + 2)
            throw ParseError(where + ": expected " + std::to_string(table.cols() + 2) + " fields");
        try {
            table.dates.push_back(Date::parse(fields[0]));
        } catch (const ParseError& e) {
            throw ParseError(where + ": " + e.what());
        }
        for (std::size_t i = 1; i + 1 < fields.size(); ++i) {
            auto v = text::parse_double(fields[i]);
            if (!v) throw ParseError(where + ": malformed or empty value in column '" + table.columns[i - 1] + "'");
            table.values.push_back(*v);
        }
        const auto tgt = text::trim(fields.back());
        if (tgt.empty()) table.targets.emplace_back();
        else if (tgt == "0" || tgt == "1") table.targets.emplace_back(tgt == "1" ? 1 : 0);
        else throw ParseError(where + ": target must be 0, 1 or empty");
    }
    if (!header_seen) throw EmptyInputError(source + ": empty feature frame");
    return table;
}

void save_frame(const FeatureTable& table, const std::string& path, std::span<const std::string> provenance) {
    text::write_file_atomic(path, format_frame(table, provenance));
}

FeatureTable load_frame(const std::string& path) { return parse_frame(text::read_file(path), path); }

Scaler Scaler::fit(const FeatureTable& table, std::size_t row_begin, std::size_t row_end, ScalingKind kind) {
    if (row_begin >= row_end || row_end > table.rows()) throw PreconditionError("scaler needs a non-empty row range");
    const std::size_t d = table.cols();
    Scaler s;
    s.kind = kind;
    s.offset.assign(d, 0.0);
    s.scale.assign(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        if (kind == ScalingKind::min_max) {
            double lo = table.row(row_begin)[j], hi = lo;
            for (std::size_t r = row_begin; r < row_end; ++r) {
                lo = std::min(lo, table.row(r)[j]);
                hi = std::max(hi, table.row(r)[j]);
            }
            s.offset[j] = lo;
            s.scale[j] = hi - lo;
        } else {
            const double n = static_cast<double>(row_end - row_begin);
            double mean = 0.0;
            for (std::size_t r = row_begin; r < row_end; ++r) mean += table.row(r)[j];
            mean /= n;
            double ss = 0.0;
            for (std::size_t r = row_begin; r < row_end; ++r) ss += (table.row(r)[j] - mean) * (table.row(r)[j] - mean);
            s.offset[j] = mean;
            s.scale[j] = std::sqrt(ss / n);
        }
    }
    return s;
}

WindowedDataset make_windows(const FeatureTable& table, const Scaler& scaler, std::size_t back_days,
                             std::size_t end_begin, std::size_t end_end, Split split) {
    if (back_days == 0) throw PreconditionError("back_days must be >= 1");
    if (scaler.offset.size() != table.cols()) throw ShapeError("scaler does not match the table width");
    end_begin = std::max(end_begin, back_days - 1);
    end_end = std::min(end_end, table.rows());

    WindowedDataset ds;
    ds.split = split;
    ds.back_days = back_days;
    ds.feature_dim = table.cols();
    ds.scaler = scaler;
    for (std::size_t end = end_begin; end < end_end; ++end) {
        for (std::size_t r = end + 1 - back_days; r <= end; ++r) {
            const auto row = table.row(r);
            for (std::size_t j = 0; j < row.size(); ++j) ds.inputs.push_back(scaler.apply(j, row[j]));
        }
        ds.targets.push_back(table.targets[end] ? *table.targets[end] : -1);
        ds.dates.push_back(table.dates[end]);
    }
    return ds;
}

std::size_t labeled_rows(const FeatureTable& table) {
    std::size_t n = 0;
    while (n < table.rows() && table.targets[n]) ++n;
    return n;
}

SplitDatasets scale_and_window(const FeatureTable& table, std::size_t back_days, double split_fraction,
                               ScalingKind kind) {
    if (!(split_fraction > 0.0 && split_fraction < 1.0)) throw ConfigError("split fraction must lie in (0, 1)");
    const std::size_t labeled = labeled_rows(table);
    if (back_days == 0 || labeled <= back_days)
        throw PreconditionError("need more than back_days labeled rows (have " + std::to_string(labeled) + ")");
    const auto n_train = static_cast<std::size_t>(std::floor(split_fraction * static_cast<double>(labeled)));
    if (n_train < back_days || n_train >= labeled)
        throw PreconditionError("split leaves no complete training window or no test rows");
    const Scaler scaler = Scaler::fit(table, 0, n_train, kind);
    return {make_windows(table, scaler, back_days, 0, n_train, Split::train),
            make_windows(table, scaler, back_days, n_train, labeled, Split::test)};
}

} // namespace fxcog
