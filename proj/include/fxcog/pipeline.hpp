#pragma once

#include "fxcog/dataset.hpp"
#include "fxcog/eval.hpp"
#include "fxcog/sim.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fxcog::pipeline {

// One table per requested model id, sharing a single feature store.
std::vector<FeatureTable> build_tables(const PriceSeries& prices, std::span<const MacroSeries> macro,
                                       std::span<const int> models, const FeatureConfig& cfg = {});

// Provenance lines for a frame: model, groups, input and config hashes.
std::vector<std::string> frame_provenance(const FeatureTable& table, const std::string& prices_hash,
                                          const std::string& macro_hash, const std::string& config_hash);
std::string feature_config_hash(const FeatureConfig& cfg);

struct ModelSignals {
    std::string model;
    SignalSeries signals;
    PricePath prices;
};

// Windows ending after `from` (default: the bundle's last training date),
// scaled with the bundle's scaler and run through its network. Throws
// ShapeError when the table's columns differ from the bundle's.
struct Predictions {
    std::vector<Date> dates;
    std::vector<double> probabilities;
};
Predictions predict_out_of_sample(const ModelBundle& bundle, const FeatureTable& table,
                                  std::optional<Date> from = std::nullopt);

// Normalises predictions and attaches the matching closes.
ModelSignals make_signals(const std::string& model, const Predictions& preds, const PriceSeries& prices,
                          NormalizationMode mode = NormalizationMode::whole_window, std::size_t rolling_window = 0);

// Exit codes of the command-line front end.
enum ExitCode : int { exit_ok = 0, exit_usage = 1, exit_data = 2, exit_runtime = 3 };

// Entry point of the `fx` tool; args exclude the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace fxcog::pipeline
