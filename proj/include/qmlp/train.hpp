#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <optional>
#include <vector>

#include "qmlp/common.hpp"
#include "qmlp/data.hpp"
#include "qmlp/model.hpp"
#include "qmlp/noise.hpp"

namespace qmlp {

struct TrainConfig {
    double learning_rate = 0.001;
    double weight_decay = 0.0001;
    int batch_size = 32;
    int epochs = 30;
    std::uint64_t seed = 0;
    int train_subset = -1; // -1 = all
    int test_subset = -1;
    std::optional<NoiseModel> noise; // evaluation noise during/after training
    int eval_every = 1;
    // L2 decay covers quantum angles too by default; flip to restrict decay
    // to the classical read-out.
    bool decay_quantum = true;

    void validate() const {
        if (learning_rate <= 0.0) throw ConfigError("TrainConfig: learning_rate must be > 0");
        if (batch_size < 1) throw ConfigError("TrainConfig: batch_size must be >= 1");
        if (epochs < 1) throw ConfigError("TrainConfig: epochs must be >= 1");
        if (eval_every < 1) throw ConfigError("TrainConfig: eval_every must be >= 1");
    }
};

// Standard ADAM moments over the flattened parameter vector.
struct AdamState {
    long t = 0;
    std::vector<double> m, v;

    explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

// One ADAM update. Weight decay enters as an L2 term added to the gradient
// before the moment updates. `decay_mask` (optional) disables decay per
// parameter.
inline void adam_step(AdamState& state, std::vector<double>& params,
                      const std::vector<double>& grads, const TrainConfig& cfg,
                      const std::vector<bool>* decay_mask = nullptr) {
    if (params.size() != grads.size() || state.m.size() != params.size())
        throw TrainingError("adam_step: shape mismatch");
    ++state.t;
    const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!std::isfinite(grads[i])) throw TrainingError("adam_step: non-finite gradient");
        double g = grads[i];
        if (cfg.weight_decay != 0.0 && (!decay_mask || (*decay_mask)[i]))
            g += cfg.weight_decay * params[i];
        state.m[i] = kAdamBeta1 * state.m[i] + (1.0 - kAdamBeta1) * g;
        state.v[i] = kAdamBeta2 * state.v[i] + (1.0 - kAdamBeta2) * g * g;
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        params[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + kAdamEps);
    }
}

struct EvalResult {
    double accuracy = 0.0;
    std::array<std::array<int, kNumClasses>, kNumClasses> confusion{}; // [true][predicted]
};

// Fraction of argmax-correct predictions plus per-class confusion counts.
inline EvalResult evaluate(const CircuitScheme& scheme, const HybridParams& hp,
                           const Dataset& data, const NoiseModel* noise = nullptr) {
    if (data.size() == 0) throw TrainingError("evaluate: empty dataset");
    EvalResult r;
    int correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto x = to_angles(data.images[i]);
        const int pred = predict_class(scheme, hp, x, noise);
        const int truth = data.labels[i];
        ++r.confusion[static_cast<std::size_t>(truth)][static_cast<std::size_t>(pred)];
        if (pred == truth) ++correct;
    }
    r.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
    return r;
}

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;
    double test_acc = 0.0;
    long wall_ms = 0;
};

struct FitResult {
    HybridParams best;     // checkpoint with the highest test accuracy
    double best_acc = 0.0;
    int best_epoch = 0;
    std::vector<EpochStats> history;
};

// ADAM training loop: seeded per-epoch shuffling, per-epoch loss and test
// accuracy tracking, best-checkpoint selection by test accuracy.
inline FitResult fit(const CircuitScheme& scheme, const TrainConfig& cfg, const Dataset& train_data,
                     const Dataset& test_data) {
    cfg.validate();
    Dataset train = cfg.train_subset > 0 ? train_data.head(static_cast<std::size_t>(cfg.train_subset))
                                         : train_data;
    Dataset test = cfg.test_subset > 0 ? test_data.head(static_cast<std::size_t>(cfg.test_subset))
                                       : test_data;
    if (train.size() == 0) throw TrainingError("fit: empty training set");

    std::vector<std::vector<double>> angles(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) angles[i] = to_angles(train.images[i]);

    HybridParams hp = init_params(scheme, cfg.seed);
    std::vector<double> flat = hp.flatten();
    AdamState state(flat.size());
    std::vector<bool> decay_mask(flat.size(), true);
    if (!cfg.decay_quantum)
        for (std::size_t i = 0; i < hp.quantum.size(); ++i) decay_mask[i] = false;

    const NoiseModel* noise = cfg.noise && !cfg.noise->silent() ? &*cfg.noise : nullptr;

    FitResult result;
    result.best = hp;
    result.best_acc = -1.0;
    const auto t0 = std::chrono::steady_clock::now();

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto perm = rng::permutation(train.size(), rng::hash_combine(cfg.seed, 0xe90c + static_cast<std::uint64_t>(epoch)));
        double loss_sum = 0.0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < perm.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(perm.size(), start + static_cast<std::size_t>(cfg.batch_size));
            std::vector<std::vector<double>> xs;
            std::vector<int> ys;
            xs.reserve(end - start);
            for (std::size_t i = start; i < end; ++i) {
                xs.push_back(angles[perm[i]]);
                ys.push_back(train.labels[perm[i]]);
            }
            LossGrad lg;
            try {
                lg = loss_and_grad(scheme, hp, xs, ys);
            } catch (const TrainingError& e) {
                throw TrainingError("epoch " + std::to_string(epoch) + ", batch at sample " +
                                    std::to_string(start) + ": " + e.what());
            }
            loss_sum += lg.loss * static_cast<double>(xs.size());
            seen += xs.size();
            flat = hp.flatten();
            adam_step(state, flat, lg.grad.flatten(), cfg, &decay_mask);
            hp = HybridParams::unflatten(flat, hp.quantum.size(),
                                         static_cast<std::size_t>(scheme.n_measured()));
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = loss_sum / static_cast<double>(seen);
        const bool eval_now = (epoch % cfg.eval_every == 0) || epoch == cfg.epochs - 1;
        if (eval_now && test.size() > 0) {
            stats.test_acc = evaluate(scheme, hp, test, noise).accuracy;
            if (stats.test_acc > result.best_acc) {
                result.best_acc = stats.test_acc;
                result.best = hp;
                result.best_epoch = epoch;
            }
        } else {
            stats.test_acc = std::nan("");
        }
        stats.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
        result.history.push_back(stats);
    }
    if (result.best_acc < 0.0) { // no evaluation happened
        result.best = hp;
        result.best_acc = 0.0;
    }
    return result;
}

} // namespace qmlp
