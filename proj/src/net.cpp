#include "fxcog/net.hpp"

#include "fxcog/error.hpp"
#include "fxcog/text.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace fxcog {

using Eigen::ArrayXXd;
using Eigen::Map;
using Eigen::MatrixXd;
using Eigen::VectorXd;

void LstmConfig::validate() const {
    if (layers < 1) throw ConfigError("layers must be >= 1");
    if (hidden_size < 1) throw ConfigError("hidden_size must be >= 1");
    if (back_days < 1) throw ConfigError("back_days must be >= 1");
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("dropout_rate must lie in [0, 1)");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
    if (!(l1_penalty >= 0.0)) throw ConfigError("l1_penalty must be >= 0");
}

struct LstmNetwork::LayerView {
    Map<const MatrixXd> wx;
    Map<const MatrixXd> wh;
    Map<const VectorXd> b;
};

LstmNetwork::LstmNetwork(int input_dim, int hidden_size, int layers)
    : input_dim_(input_dim), hidden_(hidden_size), layers_(layers) {
    if (input_dim < 1 || hidden_size < 1 || layers < 1) throw ShapeError("network dimensions must be positive");
    std::size_t offset = 0;
    const auto H = static_cast<std::size_t>(hidden_);
    for (int l = 0; l < layers_; ++l) {
        layer_offset_.push_back(offset);
        offset += 4 * H * layer_input(l) + 4 * H * H + 4 * H;
    }
    head_offset_ = offset;
    offset += H + 1;
    params_ = VectorXd::Zero(static_cast<Eigen::Index>(offset));
}

LstmNetwork LstmNetwork::initialized(int input_dim, int hidden_size, int layers, std::uint64_t seed) {
    LstmNetwork net(input_dim, hidden_size, layers);
    Rng rng(seed);
    const double k = 1.0 / std::sqrt(static_cast<double>(hidden_size));
    for (Eigen::Index i = 0; i < net.params_.size(); ++i) net.params_[i] = rng.uniform(-k, k);
    const auto H = static_cast<std::size_t>(hidden_size);
    for (int l = 0; l < layers; ++l) {
        const std::size_t b = net.layer_offset_[static_cast<std::size_t>(l)] + 4 * H * net.layer_input(l) + 4 * H * H;
        for (std::size_t j = 0; j < 4 * H; ++j) net.params_[static_cast<Eigen::Index>(b + j)] = (j >= H && j < 2 * H) ? 1.0 : 0.0;
    }
    net.params_[static_cast<Eigen::Index>(net.head_offset_ + H)] = 0.0;
    return net;
}

LstmNetwork::LayerView LstmNetwork::layer(int l) const {
    const auto H = static_cast<Eigen::Index>(hidden_);
    const auto in = static_cast<Eigen::Index>(layer_input(l));
    const double* base = params_.data() + layer_offset_[static_cast<std::size_t>(l)];
    return {Map<const MatrixXd>(base, 4 * H, in), Map<const MatrixXd>(base + 4 * H * in, 4 * H, H),
            Map<const VectorXd>(base + 4 * H * in + 4 * H * H, 4 * H)};
}

std::vector<bool> LstmNetwork::weight_mask() const {
    std::vector<bool> mask(parameter_count(), true);
    const auto H = static_cast<std::size_t>(hidden_);
    for (int l = 0; l < layers_; ++l) {
        const std::size_t b = layer_offset_[static_cast<std::size_t>(l)] + 4 * H * layer_input(l) + 4 * H * H;
        std::fill(mask.begin() + static_cast<std::ptrdiff_t>(b), mask.begin() + static_cast<std::ptrdiff_t>(b + 4 * H), false);
    }
    mask.back() = false;
    return mask;
}

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log(1 + exp(-|z|)) + max(z, 0) - z*y
inline double bce_with_logit(double z, int y) {
    return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

} // namespace

struct LstmNetwork::ForwardPass {
    // Step t occupies columns [t*B, (t+1)*B) of every matrix.
    struct Layer {
        MatrixXd input; // in_l x T*B, after dropout
        MatrixXd gates; // 4H x T*B, activated: i, f, g, o
        MatrixXd c;     // H x T*B
        MatrixXd tanh_c;
        MatrixXd h;
        ArrayXXd mask; // dropout scale on this layer's input (l > 0)
    };
    std::vector<Layer> layers;
    Eigen::Index batch = 0;
    Eigen::RowVectorXd logits;
};

namespace {

// Rearranges `count` row-major (steps x dim) samples into one dim x (steps*count) matrix.
MatrixXd to_steps(std::span<const double> samples, std::size_t steps, std::size_t dim, std::size_t count) {
    if (samples.size() != steps * dim * count)
        throw ShapeError("sample buffer has " + std::to_string(samples.size()) + " values, expected " +
                         std::to_string(steps * dim * count));
    MatrixXd xs(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(steps * count));
    for (std::size_t b = 0; b < count; ++b)
        for (std::size_t t = 0; t < steps; ++t) {
            const double* row = samples.data() + (b * steps + t) * dim;
            double* col = xs.col(static_cast<Eigen::Index>(t * count + b)).data();
            for (std::size_t j = 0; j < dim; ++j) {
                if (!std::isfinite(row[j])) throw ComputationError("non-finite value in network input");
                col[j] = row[j];
            }
        }
    return xs;
}

template <typename Derived>
auto sigmoid_of(const Eigen::ArrayBase<Derived>& z) {
    return 1.0 / (1.0 + (-z).exp());
}

} // namespace

double LstmNetwork::forward(std::span<const double> sample, std::size_t steps) const {
    return sigmoid(logits(sample, steps, 1).front());
}

std::vector<double> LstmNetwork::logits(std::span<const double> samples, std::size_t steps, std::size_t count) const {
    if (count == 0) return {};
    const auto xs = to_steps(samples, steps, static_cast<std::size_t>(input_dim_), count);
    const auto pass = forward_pass(xs, steps, 0.0, nullptr);
    return std::vector<double>(pass.logits.data(), pass.logits.data() + pass.logits.size());
}

LstmNetwork::ForwardPass LstmNetwork::forward_pass(const MatrixXd& xs, std::size_t steps, double dropout,
                                                   Rng* rng) const {
    const Eigen::Index H = hidden_;
    const auto T = static_cast<Eigen::Index>(steps);
    const Eigen::Index B = xs.cols() / T;
    ForwardPass pass;
    pass.batch = B;
    pass.layers.resize(static_cast<std::size_t>(layers_));

    for (int l = 0; l < layers_; ++l) {
        const auto view = layer(l);
        ForwardPass::Layer& lc = pass.layers[static_cast<std::size_t>(l)];
        if (l == 0) {
            lc.input = xs;
        } else {
            const MatrixXd& below = pass.layers[static_cast<std::size_t>(l - 1)].h;
            if (dropout > 0.0 && rng != nullptr) {
                lc.mask.resize(H, T * B);
                const double keep = 1.0 / (1.0 - dropout);
                // One draw per unit, step and sample, in column order.
                for (Eigen::Index j = 0; j < lc.mask.size(); ++j) lc.mask.data()[j] = rng->uniform() < dropout ? 0.0 : keep;
                lc.input = (below.array() * lc.mask).matrix();
            } else {
                lc.input = below;
            }
        }

        lc.gates.noalias() = view.wx * lc.input;
        lc.gates.colwise() += view.b;
        lc.c.resize(H, T * B);
        lc.tanh_c.resize(H, T * B);
        lc.h.resize(H, T * B);

        for (Eigen::Index t = 0; t < T; ++t) {
            auto g = lc.gates.middleCols(t * B, B);
            if (t > 0) g.noalias() += view.wh * lc.h.middleCols((t - 1) * B, B);
            g.topRows(2 * H) = sigmoid_of(g.topRows(2 * H).array()).matrix();
            g.middleRows(2 * H, H) = g.middleRows(2 * H, H).array().tanh().matrix();
            g.bottomRows(H) = sigmoid_of(g.bottomRows(H).array()).matrix();

            auto c = lc.c.middleCols(t * B, B);
            if (t > 0)
                c = (g.middleRows(H, H).array() * lc.c.middleCols((t - 1) * B, B).array() +
                     g.topRows(H).array() * g.middleRows(2 * H, H).array())
                        .matrix();
            else
                c = (g.topRows(H).array() * g.middleRows(2 * H, H).array()).matrix();
            lc.tanh_c.middleCols(t * B, B) = c.array().tanh().matrix();
            lc.h.middleCols(t * B, B) = (g.bottomRows(H).array() * lc.tanh_c.middleCols(t * B, B).array()).matrix();
        }
    }

    const double* head = params_.data() + head_offset_;
    const Map<const VectorXd> w_out(head, H);
    pass.logits = (w_out.transpose() * pass.layers.back().h.rightCols(B)).array() + head[H];
    return pass;
}

double LstmNetwork::loss(std::span<const double> samples, std::span<const int> labels, std::size_t steps,
                         double l1_penalty) const {
    const auto z = logits(samples, steps, labels.size());
    double total = 0.0;
    for (std::size_t b = 0; b < labels.size(); ++b) total += bce_with_logit(z[b], labels[b]);
    total /= static_cast<double>(labels.size());
    if (l1_penalty > 0.0) {
        const auto mask = weight_mask();
        double l1 = 0.0;
        for (std::size_t i = 0; i < mask.size(); ++i)
            if (mask[i]) l1 += std::abs(params_[static_cast<Eigen::Index>(i)]);
        total += l1_penalty * l1;
    }
    return total;
}

double LstmNetwork::loss_and_gradient(std::span<const double> samples, std::span<const int> labels, std::size_t steps,
                                      VectorXd& grad, DropoutSpec dropout, double l1_penalty,
                                      std::size_t* correct) const {
    const std::size_t count = labels.size();
    if (count == 0) throw PreconditionError("empty batch");
    for (int y : labels)
        if (y != 0 && y != 1) throw PreconditionError("training labels must be 0 or 1");
    const auto xs = to_steps(samples, steps, static_cast<std::size_t>(input_dim_), count);
    const ForwardPass pass = forward_pass(xs, steps, dropout.rate, dropout.rng);

    const Eigen::Index H = hidden_;
    const auto B = static_cast<Eigen::Index>(count);
    const auto T = static_cast<Eigen::Index>(steps);
    grad.setZero(params_.size());

    // Head.
    Eigen::RowVectorXd dz(B);
    double total = 0.0;
    std::size_t hits = 0;
    for (Eigen::Index b = 0; b < B; ++b) {
        const double z = pass.logits[b];
        const int y = labels[static_cast<std::size_t>(b)];
        total += bce_with_logit(z, y);
        const double p = sigmoid(z);
        hits += static_cast<std::size_t>((p >= 0.5) == (y == 1));
        dz[b] = (p - y) / static_cast<double>(B);
    }
    total /= static_cast<double>(B);
    if (correct) *correct = hits;

    const double* head = params_.data() + head_offset_;
    const Map<const VectorXd> w_out(head, H);
    Map<VectorXd> g_wout(grad.data() + head_offset_, H);
    g_wout = pass.layers.back().h.rightCols(B) * dz.transpose();
    grad[static_cast<Eigen::Index>(head_offset_) + H] = dz.sum();

    // Gradient flowing into each layer's hidden output, all steps side by side.
    MatrixXd dh_above = MatrixXd::Zero(H, T * B);
    dh_above.rightCols(B) = w_out * dz;

    MatrixXd dZ(4 * H, T * B);
    MatrixXd dh_next(H, B), dc_next(H, B);
    ArrayXXd dh(H, B), dc(H, B);
    for (int l = layers_ - 1; l >= 0; --l) {
        const auto view = layer(l);
        const ForwardPass::Layer& lc = pass.layers[static_cast<std::size_t>(l)];
        const auto in = static_cast<Eigen::Index>(layer_input(l));
        double* gbase = grad.data() + layer_offset_[static_cast<std::size_t>(l)];
        Map<MatrixXd> g_wx(gbase, 4 * H, in);
        Map<MatrixXd> g_wh(gbase + 4 * H * in, 4 * H, H);
        Map<VectorXd> g_b(gbase + 4 * H * in + 4 * H * H, 4 * H);

        dh_next.setZero();
        dc_next.setZero();
        for (Eigen::Index t = T; t-- > 0;) {
            const auto g = lc.gates.middleCols(t * B, B);
            const auto i = g.topRows(H).array();
            const auto f = g.middleRows(H, H).array();
            const auto gg = g.middleRows(2 * H, H).array();
            const auto o = g.bottomRows(H).array();
            const auto tc = lc.tanh_c.middleCols(t * B, B).array();

            dh = dh_above.middleCols(t * B, B).array() + dh_next.array();
            dc = dc_next.array() + dh * o * (1.0 - tc * tc);

            auto d = dZ.middleCols(t * B, B);
            d.topRows(H) = (dc * gg * i * (1.0 - i)).matrix();
            if (t > 0) d.middleRows(H, H) = (dc * lc.c.middleCols((t - 1) * B, B).array() * f * (1.0 - f)).matrix();
            else d.middleRows(H, H).setZero();
            d.middleRows(2 * H, H) = (dc * i * (1.0 - gg * gg)).matrix();
            d.bottomRows(H) = (dh * tc * o * (1.0 - o)).matrix();

            dh_next.noalias() = view.wh.transpose() * d;
            dc_next = (dc * f).matrix();
        }

        g_wx.noalias() = dZ * lc.input.transpose();
        if (T > 1) g_wh.noalias() = dZ.rightCols((T - 1) * B) * lc.h.leftCols((T - 1) * B).transpose();
        g_b = dZ.rowwise().sum();
        if (l > 0) {
            dh_above.noalias() = view.wx.transpose() * dZ;
            if (lc.mask.size() > 0) dh_above.array() *= lc.mask;
        }
    }

    if (l1_penalty > 0.0) {
        const auto mask = weight_mask();
        double l1 = 0.0;
        for (std::size_t k = 0; k < mask.size(); ++k) {
            if (!mask[k]) continue;
            const double w = params_[static_cast<Eigen::Index>(k)];
            l1 += std::abs(w);
            grad[static_cast<Eigen::Index>(k)] += l1_penalty * static_cast<double>((w > 0) - (w < 0));
        }
        total += l1_penalty * l1;
    }
    return total;
}

namespace {

void check_dataset(const LstmNetwork& net, const WindowedDataset& data) {
    if (data.size() == 0) throw PreconditionError("dataset is empty");
    if (data.feature_dim != static_cast<std::size_t>(net.input_dim()))
        throw ShapeError("dataset has " + std::to_string(data.feature_dim) + " features, network expects " +
                         std::to_string(net.input_dim()));
}

} // namespace

std::vector<double> predict_series(const LstmNetwork& net, const WindowedDataset& data) {
    if (data.size() == 0) return {};
    check_dataset(net, data);
    constexpr std::size_t chunk = 256;
    const std::size_t per = data.back_days * data.feature_dim;
    std::vector<double> out;
    out.reserve(data.size());
    for (std::size_t start = 0; start < data.size(); start += chunk) {
        const std::size_t n = std::min(chunk, data.size() - start);
        const auto z = net.logits(std::span(data.inputs).subspan(start * per, n * per), data.back_days, n);
        for (double v : z) out.push_back(sigmoid(v));
    }
    return out;
}

TrainReport train(LstmNetwork& net, const WindowedDataset& data, const LstmConfig& cfg) {
    cfg.validate();
    check_dataset(net, data);
    for (int y : data.targets)
        if (y != 0 && y != 1) throw PreconditionError("training set contains unlabeled windows");

    TrainReport report;
    report.seed = cfg.seed;
    report.initial_loss = net.loss(data.inputs, data.targets, data.back_days, cfg.l1_penalty);

    Rng rng(cfg.seed);
    const std::size_t n = data.size();
    const std::size_t per = data.back_days * data.feature_dim;
    const auto batch = static_cast<std::size_t>(cfg.batch_size);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    VectorXd velocity = VectorXd::Zero(net.parameters().size());
    VectorXd grad;
    std::vector<double> xb;
    std::vector<int> yb;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        rng.shuffle(order.begin(), order.end());
        double loss_sum = 0.0;
        std::size_t hits = 0;
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t m = std::min(batch, n - start);
            xb.resize(m * per);
            yb.resize(m);
            for (std::size_t k = 0; k < m; ++k) {
                const auto s = data.sample(order[start + k]);
                std::copy(s.begin(), s.end(), xb.begin() + static_cast<std::ptrdiff_t>(k * per));
                yb[k] = data.targets[order[start + k]];
            }
            std::size_t batch_hits = 0;
            const double l = net.loss_and_gradient(xb, yb, data.back_days, grad, {cfg.dropout_rate, &rng},
                                                   cfg.l1_penalty, &batch_hits);
            if (!std::isfinite(l) || !grad.allFinite())
                throw TrainingDivergedError(epoch, "training diverged in epoch " + std::to_string(epoch));
            velocity = cfg.momentum * velocity - cfg.learning_rate * grad;
            net.parameters() += velocity;
            if (!net.parameters().allFinite())
                throw TrainingDivergedError(epoch, "parameters overflowed in epoch " + std::to_string(epoch));
            loss_sum += l * static_cast<double>(m);
            hits += batch_hits;
        }
        report.epochs.push_back({epoch, loss_sum / static_cast<double>(n), static_cast<double>(hits) / static_cast<double>(n)});
    }

    report.final_loss = net.loss(data.inputs, data.targets, data.back_days, cfg.l1_penalty);
    if (!std::isfinite(report.final_loss))
        throw TrainingDivergedError(cfg.epochs, "training diverged: final loss is not finite");
    const auto probs = predict_series(net, data);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) hits += static_cast<std::size_t>((probs[i] >= 0.5) == (data.targets[i] == 1));
    report.final_accuracy = static_cast<double>(hits) / static_cast<double>(n);
    return report;
}

GradientCheckResult gradient_check(const LstmNetwork& net, std::span<const double> sample, std::size_t steps, int label,
                                   double step, double floor) {
    const std::array<int, 1> y{label};
    GradientCheckResult r;
    net.loss_and_gradient(sample, y, steps, r.analytic);
    LstmNetwork probe = net;
    r.numeric.resize(r.analytic.size());
    for (Eigen::Index k = 0; k < probe.parameters().size(); ++k) {
        const double orig = probe.parameters()[k];
        probe.parameters()[k] = orig + step;
        const double up = probe.loss(sample, y, steps);
        probe.parameters()[k] = orig - step;
        const double down = probe.loss(sample, y, steps);
        probe.parameters()[k] = orig;
        r.numeric[k] = (up - down) / (2.0 * step);
        const double a = r.analytic[k];
        const double nmr = r.numeric[k];
        const double rel = std::abs(a - nmr) / std::max({std::abs(a), std::abs(nmr), floor});
        if (rel > r.max_relative_error) {
            r.max_relative_error = rel;
            r.worst_index = static_cast<std::size_t>(k);
        }
    }
    return r;
}

namespace {

constexpr std::string_view kCheckpointMagic = "fxcog-lstm-checkpoint v1";

} // namespace

std::string format_checkpoint(const Checkpoint& ckpt) {
    const LstmConfig& c = ckpt.config;
    const LstmNetwork& net = ckpt.net;
    std::ostringstream out;
    out << kCheckpointMagic << "\n";
    out << "input_dim=" << net.input_dim() << "\n";
    out << "hidden_size=" << net.hidden_size() << "\n";
    out << "layers=" << net.layers() << "\n";
    out << "back_days=" << c.back_days << "\n";
    out << "epochs=" << c.epochs << "\n";
    out << "dropout_rate=" << text::format_double(c.dropout_rate) << "\n";
    out << "l1_penalty=" << text::format_double(c.l1_penalty) << "\n";
    out << "learning_rate=" << text::format_double(c.learning_rate) << "\n";
    out << "momentum=" << text::format_double(c.momentum) << "\n";
    out << "batch_size=" << c.batch_size << "\n";
    out << "seed=" << c.seed << "\n";
    for (const auto& [k, v] : ckpt.extra) out << "extra." << k << "=" << v << "\n";
    out << "parameters=" << net.parameter_count() << "\n";
    for (Eigen::Index i = 0; i < net.parameters().size(); ++i) out << text::format_double(net.parameters()[i]) << "\n";
    return out.str();
}

Checkpoint parse_checkpoint(std::string_view contents, const std::string& source) {
    std::istringstream in{std::string(contents)};
    std::string line;
    if (!std::getline(in, line) || text::trim(line) != kCheckpointMagic)
        throw ParseError(source + ": not a checkpoint (bad magic line)");
    std::map<std::string, std::string> kv;
    Checkpoint ckpt;
    std::size_t count = 0;
    bool have_count = false;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(source + ": malformed line '" + line + "'");
        const std::string key = line.substr(0, eq);
        const std::string val(text::trim(line.substr(eq + 1)));
        if (key == "parameters") {
            auto n = text::parse_int(val);
            if (!n || *n < 0) throw ParseError(source + ": bad parameter count");
            count = static_cast<std::size_t>(*n);
            have_count = true;
            break;
        }
        if (key.starts_with("extra.")) ckpt.extra[key.substr(6)] = val;
        else kv[key] = val;
    }
    if (!have_count) throw ParseError(source + ": missing parameters block");

    const auto get_int = [&](const char* key) {
        auto it = kv.find(key);
        if (it == kv.end()) throw ParseError(source + ": missing key '" + key + "'");
        auto v = text::parse_int(it->second);
        if (!v) throw ParseError(source + ": bad integer for '" + key + "'");
        return *v;
    };
    const auto get_double = [&](const char* key) {
        auto it = kv.find(key);
        if (it == kv.end()) throw ParseError(source + ": missing key '" + key + "'");
        auto v = text::parse_double(it->second);
        if (!v) throw ParseError(source + ": bad number for '" + key + "'");
        return *v;
    };
    LstmConfig& c = ckpt.config;
    c.hidden_size = static_cast<int>(get_int("hidden_size"));
    c.layers = static_cast<int>(get_int("layers"));
    c.back_days = static_cast<int>(get_int("back_days"));
    c.epochs = static_cast<int>(get_int("epochs"));
    c.dropout_rate = get_double("dropout_rate");
    c.l1_penalty = get_double("l1_penalty");
    c.learning_rate = get_double("learning_rate");
    c.momentum = get_double("momentum");
    c.batch_size = static_cast<int>(get_int("batch_size"));
    {
        auto it = kv.find("seed");
        if (it == kv.end()) throw ParseError(source + ": missing key 'seed'");
        c.seed = std::stoull(it->second);
    }
    ckpt.net = LstmNetwork(static_cast<int>(get_int("input_dim")), c.hidden_size, c.layers);
    if (ckpt.net.parameter_count() != count)
        throw ParseError(source + ": parameter count " + std::to_string(count) + " does not match the shape");
    for (std::size_t i = 0; i < count; ++i) {
        if (!std::getline(in, line)) throw ParseError(source + ": truncated parameter block");
        auto v = text::parse_double(line);
        if (!v) throw ParseError(source + ": bad parameter value '" + line + "'");
        ckpt.net.parameters()[static_cast<Eigen::Index>(i)] = *v;
    }
    return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    text::write_file_atomic(path, format_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::string& path) { return parse_checkpoint(text::read_file(path), path); }

} // namespace fxcog
