#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "qmlp/train.hpp"

using namespace qmlp;
using Catch::Approx;

TEST_CASE("the first ADAM step moves each parameter by about lr in the gradient direction") {
    TrainConfig cfg;
    cfg.learning_rate = 0.01;
    cfg.weight_decay = 0.0;
    AdamState state(3);
    std::vector<double> params = {1.0, -2.0, 0.5};
    const std::vector<double> grads = {0.3, -40.0, 1e-3};
    adam_step(state, params, grads, cfg);
    REQUIRE(params[0] == Approx(1.0 - 0.01).epsilon(1e-4));
    REQUIRE(params[1] == Approx(-2.0 + 0.01).epsilon(1e-4));
    REQUIRE(params[2] == Approx(0.5 - 0.01).epsilon(1e-4));
    REQUIRE(state.t == 1);
}

TEST_CASE("a zero gradient without decay leaves parameters untouched") {
    TrainConfig cfg;
    cfg.weight_decay = 0.0;
    AdamState state(2);
    std::vector<double> params = {0.7, -0.4};
    const auto before = params;
    for (int i = 0; i < 5; ++i) adam_step(state, params, {0.0, 0.0}, cfg);
    REQUIRE(params == before);
}

TEST_CASE("a fully masked decay equals no decay") {
    TrainConfig with_wd;
    with_wd.weight_decay = 0.1;
    TrainConfig no_wd;
    no_wd.weight_decay = 0.0;
    const std::vector<bool> mask = {false, false};
    AdamState sa(2), sb(2);
    std::vector<double> pa = {1.0, -1.0}, pb = {1.0, -1.0};
    for (int i = 0; i < 10; ++i) {
        const std::vector<double> g = {0.2 * i, -0.1};
        adam_step(sa, pa, g, with_wd, &mask);
        adam_step(sb, pb, g, no_wd);
    }
    REQUIRE(pa == pb);
}

TEST_CASE("adam_step guards") {
    TrainConfig cfg;
    AdamState state(2);
    std::vector<double> params = {0.0, 0.0};
    REQUIRE_THROWS_AS(adam_step(state, params, {1.0}, cfg), TrainingError);
    REQUIRE_THROWS_AS(adam_step(state, params, {1.0, std::nan("")}, cfg), TrainingError);
}

TEST_CASE("train config validation") {
    TrainConfig cfg;
    cfg.epochs = 0;
    REQUIRE_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.batch_size = 0;
    REQUIRE_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.learning_rate = 0.0;
    REQUIRE_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.eval_every = 0;
    REQUIRE_THROWS_AS(cfg.validate(), ConfigError);
}

// Driving <Z> of a single RX qubit to its minimum is the smallest end-to-end
// optimization: ADAM on the exact gradient must reach <Z> < -0.999.
TEST_CASE("ADAM drives a single rotation to the <Z> minimum") {
    CircuitScheme scheme;
    scheme.name = "toy";
    scheme.n_qubits = 1;
    scheme.ops.push_back(GateOp::one(GateKind::RX, 0, Param::slot(0)));
    scheme.n_params = 1;

    TrainConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.weight_decay = 0.0;
    AdamState state(1);
    std::vector<double> theta = {0.1};
    for (int step = 0; step < 200; ++step)
        adam_step(state, theta, grad(scheme, theta, {}, 0), cfg);
    REQUIRE(forward(scheme, theta, {})[0] < -0.999);
}

TEST_CASE("evaluate produces a consistent confusion matrix") {
    const auto scheme = build_scheme("RX-CNOT", 4, 4);
    const auto hp = init_params(scheme, 3);
    const auto data = synthetic(SyntheticKind::TwoGaussians, 40, 7, 2);
    const auto r = evaluate(scheme, hp, data);
    int total = 0, diag = 0;
    for (int t = 0; t < kNumClasses; ++t)
        for (int p = 0; p < kNumClasses; ++p) {
            total += r.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
            if (t == p) diag += r.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
        }
    REQUIRE(total == 40);
    REQUIRE(r.accuracy == Approx(diag / 40.0));
    REQUIRE_THROWS_AS(evaluate(scheme, hp, Dataset{}), TrainingError);
}

TEST_CASE("fit is deterministic in the seed") {
    const auto scheme = build_scheme("RX-CNOT", 4, 4);
    const auto train = synthetic(SyntheticKind::TwoGaussians, 24, 1, 2);
    const auto test = synthetic(SyntheticKind::TwoGaussians, 12, 2, 2);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 8;
    cfg.seed = 42;

    const auto a = fit(scheme, cfg, train, test);
    const auto b = fit(scheme, cfg, train, test);
    REQUIRE(a.history.size() == 2);
    for (std::size_t e = 0; e < a.history.size(); ++e) {
        REQUIRE(a.history[e].train_loss == b.history[e].train_loss);
        REQUIRE(a.history[e].test_acc == b.history[e].test_acc);
    }
    REQUIRE(a.best.flatten() == b.best.flatten());
    REQUIRE(a.best_epoch == b.best_epoch);

    cfg.seed = 43;
    const auto c = fit(scheme, cfg, train, test);
    REQUIRE(c.history[1].train_loss != a.history[1].train_loss);
}

TEST_CASE("training overfits a margin-separated two-class toy set") {
    const auto scheme = build_scheme("RX-CRX", 4, 4);
    const auto data = synthetic(SyntheticKind::TwoGaussians, 10, 5, 2);
    TrainConfig cfg;
    cfg.epochs = 40;
    cfg.batch_size = 5;
    cfg.learning_rate = 0.05;
    cfg.weight_decay = 0.0;
    cfg.seed = 0;
    const auto result = fit(scheme, cfg, data, data);
    REQUIRE(result.best_acc >= 0.9);
    // the loss must actually decrease
    REQUIRE(result.history.back().train_loss < result.history.front().train_loss);
}

TEST_CASE("fit honors subsets and eval_every") {
    const auto scheme = build_scheme("RX-CNOT", 4, 4);
    const auto train = synthetic(SyntheticKind::TwoGaussians, 30, 3, 2);
    const auto test = synthetic(SyntheticKind::TwoGaussians, 30, 4, 2);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 4;
    cfg.train_subset = 8;
    cfg.test_subset = 5;
    cfg.eval_every = 2;
    const auto r = fit(scheme, cfg, train, test);
    REQUIRE(r.history.size() == 3);
    REQUIRE_FALSE(std::isnan(r.history[0].test_acc)); // epoch 0 evaluates
    REQUIRE(std::isnan(r.history[1].test_acc));       // skipped
    REQUIRE_FALSE(std::isnan(r.history[2].test_acc)); // last epoch always evaluates
    REQUIRE_THROWS_AS(fit(scheme, cfg, Dataset{}, test), TrainingError);
}
