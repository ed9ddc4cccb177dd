#include "fixtures.hpp"

#include "fxcog/error.hpp"
#include "fxcog/net.hpp"

#include <catch_amalgamated.hpp>

using namespace fxcog;

namespace {

std::vector<double> random_input(Rng& rng, std::size_t n) {
    std::vector<double> x(n);
    for (auto& v : x) v = rng.uniform(-1, 1);
    return x;
}

// Sequences whose label is the sign of the first feature's mean.
WindowedDataset separable(std::uint64_t seed, std::size_t count, std::size_t steps, std::size_t dim) {
    Rng rng(seed);
    WindowedDataset ds;
    ds.back_days = steps;
    ds.feature_dim = dim;
    for (std::size_t i = 0; i < count; ++i) {
        const int y = static_cast<int>(i % 2);
        for (std::size_t t = 0; t < steps; ++t)
            for (std::size_t j = 0; j < dim; ++j)
                ds.inputs.push_back(j == 0 ? (y ? 0.5 : -0.5) + 0.3 * rng.normal() : rng.uniform(-1, 1));
        ds.targets.push_back(y);
        ds.dates.push_back(Date(static_cast<std::int32_t>(i)));
    }
    return ds;
}

} // namespace

TEST_CASE("parameter layout size") {
    const int in = 5, H = 4;
    const auto net = LstmNetwork::initialized(in, H, 2, 1);
    const std::size_t l0 = 4 * H * in + 4 * H * H + 4 * H;
    const std::size_t l1 = 4 * H * H + 4 * H * H + 4 * H;
    CHECK(net.parameter_count() == l0 + l1 + H + 1);
    const auto mask = net.weight_mask();
    const auto biases = static_cast<std::size_t>(std::ranges::count(mask, false));
    CHECK(biases == 2 * 4 * H + 1);
}

TEST_CASE("initialisation bounds and forget bias") {
    const int H = 8;
    const auto net = LstmNetwork::initialized(3, H, 1, 7);
    const auto& p = net.parameters();
    const std::size_t bias0 = 4 * H * 3 + 4 * H * H;
    for (int i = 0; i < H; ++i) CHECK(p[static_cast<Eigen::Index>(bias0) + H + i] == 1.0); // forget block
    const double bound = 1.0 / std::sqrt(static_cast<double>(H));
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(bias0); ++i) CHECK(std::fabs(p[i]) <= bound);
    CHECK(LstmNetwork::initialized(3, H, 1, 7).parameters() == p);
    CHECK(LstmNetwork::initialized(3, H, 1, 8).parameters() != p);
}

TEST_CASE("batched logits equal per-sample forward") {
    Rng rng(2);
    const auto net = LstmNetwork::initialized(4, 6, 2, 3);
    const auto x = random_input(rng, 5 * 7 * 4);
    const auto z = net.logits(x, 7, 5);
    for (std::size_t i = 0; i < 5; ++i) {
        const double p = net.forward(std::span(x).subspan(i * 28, 28), 7);
        CHECK(p == Catch::Approx(1.0 / (1.0 + std::exp(-z[i]))).epsilon(1e-12));
    }
}

TEST_CASE("analytic gradient agrees with central differences") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed)
        for (int layers : {1, 2}) {
            Rng rng(seed * 31 + static_cast<std::uint64_t>(layers));
            const int H = 3 + static_cast<int>(seed % 6);
            const auto net = LstmNetwork::initialized(3, H, layers, seed);
            const auto x = random_input(rng, 6 * 3);
            const auto r = gradient_check(net, x, 6, static_cast<int>(seed % 2));
            INFO("seed " << seed << " layers " << layers << " worst " << r.worst_index);
            CHECK(r.max_relative_error < 1e-4);
        }
}

TEST_CASE("l1 term adds the weight magnitude") {
    Rng rng(4);
    const auto net = LstmNetwork::initialized(2, 4, 1, 4);
    const auto x = random_input(rng, 3 * 5 * 2);
    const std::vector<int> y{1, 0, 1};
    double l1 = 0;
    const auto mask = net.weight_mask();
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) l1 += std::fabs(net.parameters()[static_cast<Eigen::Index>(i)]);
    CHECK(net.loss(x, y, 5, 0.01) == Catch::Approx(net.loss(x, y, 5, 0.0) + 0.01 * l1).epsilon(1e-12));
    Eigen::VectorXd g0, g1;
    net.loss_and_gradient(x, y, 5, g0);
    net.loss_and_gradient(x, y, 5, g1, {}, 0.01);
    const Eigen::VectorXd diff = g1 - g0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        const double w = net.parameters()[static_cast<Eigen::Index>(i)];
        const double want = mask[i] ? 0.01 * ((w > 0) - (w < 0)) : 0.0;
        CHECK(diff[static_cast<Eigen::Index>(i)] == Catch::Approx(want).margin(1e-12));
    }
}

TEST_CASE("dropout is inactive without an rng and changes training-mode loss") {
    Rng rng(6);
    const auto net = LstmNetwork::initialized(3, 8, 2, 6);
    const auto x = random_input(rng, 4 * 5 * 3);
    const std::vector<int> y{1, 0, 0, 1};
    Eigen::VectorXd g;
    const double plain = net.loss_and_gradient(x, y, 5, g);
    Rng drop(1);
    const double dropped = net.loss_and_gradient(x, y, 5, g, {0.5, &drop});
    CHECK(plain == Catch::Approx(net.loss(x, y, 5)).epsilon(1e-12));
    CHECK(plain != dropped);
}

TEST_CASE("training is deterministic and reduces the loss") {
    const auto data = separable(3, 64, 5, 3);
    LstmConfig cfg;
    cfg.hidden_size = 8;
    cfg.epochs = 30;
    cfg.learning_rate = 0.05;
    cfg.seed = 11;
    auto a = LstmNetwork::initialized(3, 8, 1, 11);
    auto b = a;
    const auto ra = train(a, data, cfg);
    const auto rb = train(b, data, cfg);
    CHECK(a.parameters() == b.parameters());
    CHECK(ra.final_loss == rb.final_loss);
    CHECK(ra.final_loss < ra.initial_loss);
    CHECK(ra.epochs.size() == 30);
}

TEST_CASE("single-layer network fits separable sequences") {
    const auto data = separable(8, 200, 10, 4);
    LstmConfig cfg;
    cfg.hidden_size = 16;
    cfg.epochs = 200;
    cfg.learning_rate = 0.05;
    cfg.dropout_rate = 0.0;
    cfg.seed = 1;
    auto net = LstmNetwork::initialized(4, 16, 1, 1);
    const auto r = train(net, data, cfg);
    CHECK(r.final_accuracy >= 0.95);
}

TEST_CASE("diverging training is reported") {
    // Noise inputs with alternating labels; an absurd step size blows the weights up.
    WindowedDataset data;
    data.back_days = 4;
    data.feature_dim = 2;
    Rng rng(1);
    for (int i = 0; i < 32; ++i) {
        for (int k = 0; k < 8; ++k) data.inputs.push_back(rng.uniform(-1, 1));
        data.targets.push_back(i % 2);
        data.dates.push_back(Date(i));
    }
    LstmConfig cfg;
    cfg.hidden_size = 4;
    cfg.epochs = 50;
    cfg.learning_rate = 1e307;
    auto net = LstmNetwork::initialized(2, 4, 1, 1);
    CHECK_THROWS_AS(train(net, data, cfg), TrainingDivergedError);

    auto poisoned = separable(1, 32, 4, 2);
    poisoned.inputs[0] = std::numeric_limits<double>::quiet_NaN();
    cfg.learning_rate = 0.01;
    auto fresh = LstmNetwork::initialized(2, 4, 1, 1);
    CHECK_THROWS_AS(train(fresh, poisoned, cfg), ComputationError);
}

TEST_CASE("config validation and shape errors") {
    LstmConfig cfg;
    cfg.dropout_rate = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.layers = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    auto net = LstmNetwork::initialized(5, 4, 1, 1);
    const auto data = separable(1, 8, 4, 3);
    CHECK_THROWS_AS(predict_series(net, data), ShapeError);
}

TEST_CASE("checkpoint text round trip is exact") {
    Checkpoint c;
    c.config.layers = 2;
    c.config.hidden_size = 5;
    c.config.seed = 123456789012345ULL;
    c.net = LstmNetwork::initialized(3, 5, 2, 9);
    c.extra["model"] = "7";
    const auto text = format_checkpoint(c);
    CHECK(text.starts_with("fxcog-lstm-checkpoint v1\n"));
    const auto back = parse_checkpoint(text);
    CHECK(back.net.parameters() == c.net.parameters());
    CHECK(back.config.seed == c.config.seed);
    CHECK(back.extra.at("model") == "7");
    CHECK(format_checkpoint(back) == text);
    CHECK_THROWS_AS(parse_checkpoint("not a checkpoint\n"), ParseError);
    std::string truncated = text.substr(0, text.size() - 30);
    CHECK_THROWS_AS(parse_checkpoint(truncated), ParseError);
}

TEST_CASE("predictions match the single-sample path") {
    const auto data = separable(5, 300, 6, 3);
    const auto net = LstmNetwork::initialized(3, 4, 2, 2);
    const auto p = predict_series(net, data);
    REQUIRE(p.size() == 300);
    for (std::size_t i = 0; i < 300; i += 37) CHECK(p[i] == Catch::Approx(net.forward(data.sample(i), 6)).epsilon(1e-12));
}
