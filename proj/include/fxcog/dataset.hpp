#pragma once

#include "fxcog/divergence.hpp"
#include "fxcog/indicators.hpp"
#include "fxcog/ingest.hpp"
#include "fxcog/levels.hpp"

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fxcog {

// ---- target -----------------------------------------------------------------

// Half the forward max excursion, plus half the forward min excursion, plus
// half the horizon-end move, all relative to closes[n]. nullopt when
// n + h is past the end.
std::optional<double> directional_index(std::span<const double> closes, std::size_t n, std::size_t h = 10);

struct LabeledDay {
    std::size_t index = 0;
    Date date;
    double directional_index = 0.0;
    int target = 0; // 1 iff directional_index > 0
};

// One entry for each of the first size() - h days.
std::vector<LabeledDay> label(const PriceSeries& series, std::size_t h = 10);

// ---- feature groups and models ----------------------------------------------

enum class FeatureGroup { price, indicators, fundamentals, levels, divergence, fibonacci };
inline constexpr std::array kAllGroups{FeatureGroup::price,  FeatureGroup::indicators, FeatureGroup::fundamentals,
                                       FeatureGroup::levels, FeatureGroup::divergence, FeatureGroup::fibonacci};
std::string to_string(FeatureGroup g);
FeatureGroup parse_group(std::string_view s);

struct ModelSpec {
    int id = 0;
    std::vector<FeatureGroup> groups; // canonical group order
};

inline constexpr int kModelCount = 10;
// Throws ConfigError for ids outside 0..9.
ModelSpec model_spec(int id);

struct FeatureConfig {
    IndicatorParams indicators;
    GrouperConfig grouper;
    levels::FibonacciConfig fibonacci;
    divergence::Config divergence;
    std::size_t horizon = 10;
    // Fill absent level slots instead of dropping the day (see levels::collapse_missing).
    bool collapse_missing_levels = true;
};

// Every candidate column computed once over the whole series, keyed by group.
struct FeatureStore {
    std::vector<Date> dates;
    std::map<FeatureGroup, std::vector<IndicatorColumn>> columns;
    std::vector<LabeledDay> labels;
};

FeatureStore build_feature_store(const PriceSeries& series, std::span<const MacroSeries> macro,
                                 const FeatureConfig& cfg = {});

// ---- tables -----------------------------------------------------------------

// Dense row-major feature matrix for one model. Rows are days where every
// column is defined; the target is absent on the trailing unlabeled days.
struct FeatureTable {
    int model_id = 0;
    std::vector<std::string> columns;
    std::vector<Date> dates;
    std::vector<double> values;
    std::vector<std::optional<int>> targets;

    std::size_t rows() const noexcept { return dates.size(); }
    std::size_t cols() const noexcept { return columns.size(); }
    std::span<const double> row(std::size_t i) const { return std::span(values).subspan(i * cols(), cols()); }
};

// Joins the model's groups (group order, alphabetical within a group),
// dropping rows with any absent value. Throws ConfigError if a group is missing.
FeatureTable assemble(const ModelSpec& model, const FeatureStore& store);

// FeatureFrame text: '#' provenance lines, header `date,<columns>,target`,
// empty field = absent.
std::string format_frame(const FeatureTable& table, std::span<const std::string> provenance = {});
FeatureTable parse_frame(std::string_view contents, const std::string& source = "<memory>");
void save_frame(const FeatureTable& table, const std::string& path, std::span<const std::string> provenance = {});
FeatureTable load_frame(const std::string& path);

// ---- scaling and windowing --------------------------------------------------

enum class ScalingKind { min_max, z_score };

struct Scaler {
    ScalingKind kind = ScalingKind::min_max;
    std::vector<double> offset;
    std::vector<double> scale; // 0 marks a constant feature, mapped to 0

    static Scaler fit(const FeatureTable& table, std::size_t row_begin, std::size_t row_end, ScalingKind kind);
    double apply(std::size_t feature, double v) const {
        return scale[feature] == 0.0 ? 0.0 : (v - offset[feature]) / scale[feature];
    }
};

enum class Split { train, test, inference };

struct WindowedDataset {
    Split split = Split::train;
    std::size_t back_days = 0;
    std::size_t feature_dim = 0;
    std::vector<double> inputs;  // samples x back_days x feature_dim
    std::vector<int> targets;    // -1 when the window's last row is unlabeled
    std::vector<Date> dates;     // date of each window's last row
    Scaler scaler;

    std::size_t size() const noexcept { return dates.size(); }
    std::span<const double> sample(std::size_t i) const {
        const std::size_t n = back_days * feature_dim;
        return std::span(inputs).subspan(i * n, n);
    }
};

// Windows ending at rows [end_begin, end_end) of the table, each back_days
// rows long and scaled with `scaler`.
WindowedDataset make_windows(const FeatureTable& table, const Scaler& scaler, std::size_t back_days,
                             std::size_t end_begin, std::size_t end_end, Split split);

struct SplitDatasets {
    WindowedDataset train;
    WindowedDataset test;
};

// Chronological split of the labeled rows at split_fraction. The scaler is
// fit on training rows only; test windows may read training rows as history.
SplitDatasets scale_and_window(const FeatureTable& table, std::size_t back_days, double split_fraction = 0.8,
                               ScalingKind kind = ScalingKind::min_max);

// Number of leading rows that carry a target.
std::size_t labeled_rows(const FeatureTable& table);

} // namespace fxcog
