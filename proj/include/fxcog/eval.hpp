#pragma once

#include "fxcog/dataset.hpp"
#include "fxcog/net.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fxcog {

// ---- metrics ----------------------------------------------------------------

// Mann-Whitney AUC, ties credited one half. Throws UndefinedMetricError when
// labels hold a single class.
double auc(std::span<const double> scores, std::span<const int> labels);

struct Confusion {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    friend bool operator==(const Confusion&, const Confusion&) = default;
};

// A score >= threshold predicts the positive class.
Confusion confusion(std::span<const double> scores, std::span<const int> labels, double threshold = 0.5);
double accuracy(std::span<const double> scores, std::span<const int> labels, double threshold = 0.5);
// Throws UndefinedMetricError when there are no positives.
double recall(std::span<const double> scores, std::span<const int> labels, double threshold = 0.5);

// Positive rate per equal-count bucket of the descending score order, divided
// by the overall positive rate. Bucket k holds ranks [k*n/d, (k+1)*n/d).
std::vector<double> lift_curve(std::span<const double> scores, std::span<const int> labels, int deciles = 10);

struct MetricsReport {
    double auc_train = 0.0;
    double auc_test = 0.0;
    double acc_train = 0.0;
    double acc_test = 0.0;
    std::optional<double> recall_test;
    Confusion confusion_test;
    std::vector<double> lift_test;
    double auc_min = 0.0;  // min(auc_train, auc_test)
    double auc_diff = 0.0; // auc_train - auc_test
    double acc_diff = 0.0; // acc_train - acc_test
};

MetricsReport evaluate(std::span<const double> train_scores, std::span<const int> train_labels,
                       std::span<const double> test_scores, std::span<const int> test_labels);

// ---- grid -------------------------------------------------------------------

struct GridLattice {
    std::vector<int> epochs{20, 40, 60};
    std::vector<int> layers{1, 4, 8};
    std::vector<int> back_days{20, 30};

    std::size_t size() const noexcept { return epochs.size() * layers.size() * back_days.size(); }
};

struct GridKey {
    int model_id = 0;
    int epochs = 0;
    int layers = 0;
    int back_days = 0;

    friend auto operator<=>(const GridKey&, const GridKey&) = default;
};

struct GridResult {
    GridKey key;
    std::size_t feature_count = 0;
    std::uint64_t seed = 0;
    std::string status = "ok"; // "ok" or a failure description
    std::size_t train_samples = 0;
    std::size_t test_samples = 0;
    MetricsReport metrics;
    double elapsed_seconds = 0.0; // wall time of this cell; not stored

    bool ok() const noexcept { return status == "ok"; }
};

struct GridOptions {
    LstmConfig base;              // hidden size, optimiser, dropout, batch size
    double split_fraction = 0.8;
    ScalingKind scaling = ScalingKind::min_max;
    std::uint64_t master_seed = 42;
    unsigned jobs = 1;
    std::string store_path;       // results store; empty = in-memory only
    std::string checkpoint_dir;   // when set, every trained cell is saved here
    std::size_t max_new_rows = SIZE_MAX; // stop after this many fresh rows (used to exercise resume)
};

// Seed for one cell, independent of execution order.
std::uint64_t cell_seed(std::uint64_t master_seed, const GridKey& key);

// Trains and evaluates one cell. Failures are reported in `status`.
GridResult run_cell(const FeatureTable& table, const GridKey& key, const GridOptions& options);

// Every (table, lattice point) cell. Rows already in the store are reused.
// Returns rows in canonical key order and rewrites the store in that order.
std::vector<GridResult> run_grid(std::span<const FeatureTable> tables, const GridLattice& lattice,
                                 const GridOptions& options);

std::string results_header();
std::string format_result_row(const GridResult& r);
std::string format_results(std::span<const GridResult> rows);
std::vector<GridResult> parse_results(std::string_view contents, const std::string& source = "<memory>");
std::vector<GridResult> load_results(const std::string& path); // empty when the file does not exist

// ---- aggregation and selection ----------------------------------------------

enum class AggregateBy { model, epochs, layers, back_days };
std::string to_string(AggregateBy by);

struct AggregateRow {
    int key = 0;
    std::size_t count = 0;
    double max_auc_min = 0.0;
    double avg_auc_min = 0.0;
    double min_auc_min = 0.0;
    double avg_auc_diff = 0.0;
};

// Groups successful rows by the key, ascending.
std::vector<AggregateRow> aggregate(std::span<const GridResult> results, AggregateBy by);
std::string format_aggregate_csv(std::span<const AggregateRow> rows, AggregateBy by);
std::string render_aggregate(std::span<const AggregateRow> rows, AggregateBy by);

// Descending AUC_min; ties by smaller AUC_diff, fewer layers, fewer epochs,
// then smaller back_days and model id. Failed rows are skipped.
std::vector<GridResult> select_best(std::span<const GridResult> results, std::size_t top_k);
std::string render_best(std::span<const GridResult> rows);

// ---- trained model bundle ---------------------------------------------------

// A checkpoint plus what inference needs: feature columns, scaler and the
// last training date.
struct ModelBundle {
    Checkpoint checkpoint;
    int model_id = 0;
    std::vector<std::string> columns;
    Scaler scaler;
    Date train_end;
};

Checkpoint to_checkpoint(const ModelBundle& bundle);
ModelBundle from_checkpoint(const Checkpoint& ckpt);

} // namespace fxcog
