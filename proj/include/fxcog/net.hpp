#pragma once

#include "fxcog/dataset.hpp"
#include "fxcog/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace fxcog {

struct LstmConfig {
    int layers = 1;
    int hidden_size = 32;
    int back_days = 20;
    int epochs = 20;
    double dropout_rate = 0.1; // between stacked layers, training only
    double l1_penalty = 0.0;   // on weight matrices, not biases
    double learning_rate = 0.001;
    double momentum = 0.9;
    int batch_size = 32;
    std::uint64_t seed = 0;

    // Throws ConfigError on non-positive sizes or dropout outside [0, 1).
    void validate() const;
};

// Stacked LSTM with a single-logit affine head. All parameters live in one
// flat vector; per-layer matrices are views into it.
//
// Layout per layer l (column-major): W_x (4H x in_l), W_h (4H x H), b (4H),
// gate blocks ordered input, forget, cell, output. Then w_out (H), b_out.
struct DropoutSpec {
    double rate = 0.0;
    Rng* rng = nullptr;
};

class LstmNetwork {
public:
    LstmNetwork() = default;
    LstmNetwork(int input_dim, int hidden_size, int layers);

    // Uniform(-1/sqrt(H), 1/sqrt(H)) weights, forget-gate bias 1, head bias 0.
    static LstmNetwork initialized(int input_dim, int hidden_size, int layers, std::uint64_t seed);

    int input_dim() const noexcept { return input_dim_; }
    int hidden_size() const noexcept { return hidden_; }
    int layers() const noexcept { return layers_; }
    std::size_t parameter_count() const noexcept { return static_cast<std::size_t>(params_.size()); }

    Eigen::VectorXd& parameters() noexcept { return params_; }
    const Eigen::VectorXd& parameters() const noexcept { return params_; }

    // Probability for one (steps x input_dim, row-major) sequence; dropout off.
    double forward(std::span<const double> sample, std::size_t steps) const;
    // Logits for `count` consecutive samples of `steps` rows each.
    std::vector<double> logits(std::span<const double> samples, std::size_t steps, std::size_t count) const;

    // Mean binary cross-entropy over the batch (plus the L1 term) and its
    // gradient with respect to parameters(). `grad` is resized and overwritten.
    double loss_and_gradient(std::span<const double> samples, std::span<const int> labels, std::size_t steps,
                             Eigen::VectorXd& grad, DropoutSpec dropout = {}, double l1_penalty = 0.0,
                             std::size_t* correct = nullptr) const;
    double loss(std::span<const double> samples, std::span<const int> labels, std::size_t steps,
                double l1_penalty = 0.0) const;

    // True for entries of W_x / W_h / w_out (the L1 target set).
    std::vector<bool> weight_mask() const;

private:
    struct LayerView;
    struct ForwardPass;
    LayerView layer(int l) const;
    ForwardPass forward_pass(const Eigen::MatrixXd& xs, std::size_t steps, double dropout, Rng* rng) const;
    std::size_t layer_input(int l) const noexcept { return l == 0 ? static_cast<std::size_t>(input_dim_) : hidden_; }

    int input_dim_ = 0;
    int hidden_ = 0;
    int layers_ = 0;
    std::vector<std::size_t> layer_offset_;
    std::size_t head_offset_ = 0;
    Eigen::VectorXd params_;
};

struct EpochStats {
    int epoch = 0;
    double loss = 0.0;     // mean training-mode batch loss
    double accuracy = 0.0; // training-mode batch accuracy at 0.5
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    double initial_loss = 0.0; // full train set, inference mode, before training
    double final_loss = 0.0;   // same, after training
    double final_accuracy = 0.0;
    std::uint64_t seed = 0;
};

// Mini-batch SGD with momentum on binary cross-entropy. Deterministic for a
// given cfg.seed. Throws TrainingDivergedError when an epoch's loss is not finite.
TrainReport train(LstmNetwork& net, const WindowedDataset& data, const LstmConfig& cfg);

// Inference-mode probabilities, one per sample in dataset order.
std::vector<double> predict_series(const LstmNetwork& net, const WindowedDataset& data);

struct GradientCheckResult {
    double max_relative_error = 0.0;
    std::size_t worst_index = 0;
    Eigen::VectorXd analytic;
    Eigen::VectorXd numeric;
};

// Central differences over every parameter. Relative error per entry is
// |a - n| / max(|a|, |n|, floor).
GradientCheckResult gradient_check(const LstmNetwork& net, std::span<const double> sample, std::size_t steps,
                                   int label, double step = 1e-5, double floor = 1e-6);

// Text checkpoint: versioned key=value lines, parameters in shortest
// round-trip decimal. `extra` carries caller metadata.
struct Checkpoint {
    LstmConfig config;
    LstmNetwork net;
    std::map<std::string, std::string> extra;
};

std::string format_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(std::string_view contents, const std::string& source = "<memory>");
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

} // namespace fxcog
