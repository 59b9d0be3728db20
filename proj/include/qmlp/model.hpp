#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qmlp/ansatz.hpp"
#include "qmlp/common.hpp"
#include "qmlp/diff.hpp"
#include "qmlp/noise.hpp"

namespace qmlp {

constexpr int kNumClasses = 10;

// All trainable values: quantum angles plus the classical read-out.
// fc_weights is row-major [feature * 10 + class].
struct HybridParams {
    std::vector<double> quantum;
    std::vector<double> fc_weights;
    std::vector<double> fc_bias;

    std::size_t total() const { return quantum.size() + fc_weights.size() + fc_bias.size(); }

    std::vector<double> flatten() const {
        std::vector<double> f;
        f.reserve(total());
        f.insert(f.end(), quantum.begin(), quantum.end());
        f.insert(f.end(), fc_weights.begin(), fc_weights.end());
        f.insert(f.end(), fc_bias.begin(), fc_bias.end());
        return f;
    }

    static HybridParams unflatten(const std::vector<double>& f, std::size_t n_quantum,
                                  std::size_t n_measured) {
        HybridParams hp;
        hp.quantum.assign(f.begin(), f.begin() + static_cast<std::ptrdiff_t>(n_quantum));
        hp.fc_weights.assign(f.begin() + static_cast<std::ptrdiff_t>(n_quantum),
                             f.begin() + static_cast<std::ptrdiff_t>(n_quantum + n_measured * kNumClasses));
        hp.fc_bias.assign(f.end() - kNumClasses, f.end());
        return hp;
    }
};

// Quantum angles uniform in [0, 2pi); read-out uniform in +-1/sqrt(n_measured).
inline HybridParams init_params(const CircuitScheme& scheme, std::uint64_t seed) {
    HybridParams hp;
    rng::Stream qs(rng::hash_combine(seed, 0x71a2));
    hp.quantum.resize(static_cast<std::size_t>(scheme.n_params));
    for (auto& v : hp.quantum) v = qs.next_uniform(0.0, 2.0 * kPi);
    const int nm = scheme.n_measured();
    const double bound = 1.0 / std::sqrt(static_cast<double>(nm));
    rng::Stream cs(rng::hash_combine(seed, 0xfc01));
    hp.fc_weights.resize(static_cast<std::size_t>(nm) * kNumClasses);
    for (auto& v : hp.fc_weights) v = cs.next_uniform(-bound, bound);
    hp.fc_bias.assign(kNumClasses, 0.0);
    for (auto& v : hp.fc_bias) v = cs.next_uniform(-bound, bound);
    return hp;
}

inline void check_model_dims(const CircuitScheme& scheme, const HybridParams& hp) {
    const std::size_t nm = static_cast<std::size_t>(scheme.n_measured());
    if (hp.quantum.size() != static_cast<std::size_t>(scheme.n_params) ||
        hp.fc_weights.size() != nm * kNumClasses || hp.fc_bias.size() != kNumClasses)
        throw ModelError("HybridParams dimensions inconsistent with scheme '" + scheme.name + "'");
    for (double v : hp.quantum)
        if (!std::isfinite(v)) throw ModelError("non-finite quantum parameter");
    for (double v : hp.fc_weights)
        if (!std::isfinite(v)) throw ModelError("non-finite read-out weight");
}

inline std::vector<double> fc_logits(const HybridParams& hp, const std::vector<double>& z) {
    std::vector<double> logits(hp.fc_bias);
    for (std::size_t f = 0; f < z.size(); ++f)
        for (int c = 0; c < kNumClasses; ++c)
            logits[static_cast<std::size_t>(c)] += hp.fc_weights[f * kNumClasses + static_cast<std::size_t>(c)] * z[f];
    return logits;
}

// Max-subtracted softmax.
inline std::vector<double> softmax(const std::vector<double>& logits) {
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        sum += p[i];
    }
    for (auto& v : p) v /= sum;
    return p;
}

// Class logits for one input; noisy expectations when a noise model is given.
inline std::vector<double> predict(const CircuitScheme& scheme, const HybridParams& hp,
                                   const std::vector<double>& x,
                                   const NoiseModel* noise = nullptr) {
    check_model_dims(scheme, hp);
    if (static_cast<int>(x.size()) != scheme.n_input_slots)
        throw ModelError("predict: input dimension mismatch");
    const std::vector<double> z = noise && !noise->silent()
                                      ? noisy_expectations(scheme, hp.quantum, x, *noise)
                                      : forward(scheme, hp.quantum, x);
    return fc_logits(hp, z);
}

inline int predict_class(const CircuitScheme& scheme, const HybridParams& hp,
                         const std::vector<double>& x, const NoiseModel* noise = nullptr) {
    const auto logits = predict(scheme, hp, x, noise);
    int best = 0;
    for (int c = 1; c < kNumClasses; ++c)
        if (logits[static_cast<std::size_t>(c)] > logits[static_cast<std::size_t>(best)]) best = c;
    return best;
}

struct LossGrad {
    double loss = 0.0;
    HybridParams grad;
};

// Mean softmax cross-entropy over the batch plus its gradient. Quantum
// gradients go through the adjoint path by default; use_parameter_shift
// switches to shifted forward evaluations (both routes agree to 1e-10).
inline LossGrad loss_and_grad(const CircuitScheme& scheme, const HybridParams& hp,
                              const std::vector<std::vector<double>>& xs,
                              const std::vector<int>& ys, bool use_parameter_shift = false) {
    check_model_dims(scheme, hp);
    if (xs.empty() || xs.size() != ys.size())
        throw ModelError("loss_and_grad: empty or inconsistent batch");

    const std::size_t nm = static_cast<std::size_t>(scheme.n_measured());
    LossGrad out;
    out.grad.quantum.assign(hp.quantum.size(), 0.0);
    out.grad.fc_weights.assign(hp.fc_weights.size(), 0.0);
    out.grad.fc_bias.assign(hp.fc_bias.size(), 0.0);

    for (std::size_t s = 0; s < xs.size(); ++s) {
        const auto z = forward(scheme, hp.quantum, xs[s]);
        const auto logits = fc_logits(hp, z);
        const auto p = softmax(logits);
        const int y = ys[s];
        if (y < 0 || y >= kNumClasses) throw ModelError("loss_and_grad: label out of range");
        const double sample_loss = -std::log(p[static_cast<std::size_t>(y)]);
        if (!std::isfinite(sample_loss))
            throw TrainingError("non-finite loss at batch index " + std::to_string(s));
        out.loss += sample_loss;

        std::vector<double> dlogits(p);
        dlogits[static_cast<std::size_t>(y)] -= 1.0;
        std::vector<double> dz(nm, 0.0);
        for (std::size_t f = 0; f < nm; ++f) {
            for (int c = 0; c < kNumClasses; ++c) {
                out.grad.fc_weights[f * kNumClasses + static_cast<std::size_t>(c)] +=
                    z[f] * dlogits[static_cast<std::size_t>(c)];
                dz[f] += hp.fc_weights[f * kNumClasses + static_cast<std::size_t>(c)] *
                         dlogits[static_cast<std::size_t>(c)];
            }
        }
        for (int c = 0; c < kNumClasses; ++c)
            out.grad.fc_bias[static_cast<std::size_t>(c)] += dlogits[static_cast<std::size_t>(c)];

        // dL/dtheta_k = sum_q dL/dz_q * dz_q/dtheta_k
        if (use_parameter_shift) {
            const auto g = grad_all(scheme, hp.quantum, xs[s]);
            for (std::size_t k = 0; k < hp.quantum.size(); ++k)
                for (std::size_t q = 0; q < nm; ++q)
                    out.grad.quantum[k] += g[k * nm + q] * dz[q];
        } else {
            const auto g = grad_weighted_adjoint(scheme, hp.quantum, xs[s], dz);
            for (std::size_t k = 0; k < hp.quantum.size(); ++k) out.grad.quantum[k] += g[k];
        }
    }

    const double inv = 1.0 / static_cast<double>(xs.size());
    out.loss *= inv;
    for (auto& v : out.grad.quantum) v *= inv;
    for (auto& v : out.grad.fc_weights) v *= inv;
    for (auto& v : out.grad.fc_bias) v *= inv;
    return out;
}

inline std::uint64_t scheme_config_hash(const CircuitScheme& scheme) {
    std::uint64_t h = 0x9d2c;
    for (char c : scheme.name) h = rng::hash_combine(h, static_cast<std::uint64_t>(c));
    h = rng::hash_combine(h, static_cast<std::uint64_t>(scheme.n_qubits));
    h = rng::hash_combine(h, static_cast<std::uint64_t>(scheme.n_blocks));
    h = rng::hash_combine(h, static_cast<std::uint64_t>(scheme.n_params));
    h = rng::hash_combine(h, static_cast<std::uint64_t>(scheme.layout));
    return h;
}

// Checkpoint I/O: versioned text record with hex-float values so a reload is
// bit-exact.
inline void save_checkpoint(const std::string& path, const CircuitScheme& scheme,
                            const HybridParams& hp) {
    check_model_dims(scheme, hp);
    std::ofstream out(path);
    if (!out) throw ModelError("cannot write checkpoint " + path);
    out << "qmlp-checkpoint v1\n";
    out << "scheme " << scheme.name << "\n";
    out << "n_qubits " << scheme.n_qubits << "\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(scheme_config_hash(scheme)));
    out << "config " << buf << "\n";
    auto dump = [&](const char* tag, const std::vector<double>& v) {
        out << tag << " " << v.size() << "\n";
        for (double d : v) {
            std::snprintf(buf, sizeof buf, "%a\n", d);
            out << buf;
        }
    };
    dump("quantum", hp.quantum);
    dump("fc_weights", hp.fc_weights);
    dump("fc_bias", hp.fc_bias);
    if (!out) throw ModelError("write failure on checkpoint " + path);
}

inline HybridParams load_checkpoint(const std::string& path, const CircuitScheme& scheme) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open checkpoint " + path);
    std::string line;
    std::getline(in, line);
    if (line != "qmlp-checkpoint v1") throw ModelError(path + ": unknown checkpoint format");
    std::string word, name;
    in >> word >> name;
    if (word != "scheme" || name != scheme.name)
        throw ModelError(path + ": checkpoint is for scheme '" + name + "', expected '" +
                         scheme.name + "'");
    int nq = 0;
    in >> word >> nq;
    if (word != "n_qubits" || nq != scheme.n_qubits)
        throw ModelError(path + ": qubit count mismatch");
    std::string hash_hex;
    in >> word >> hash_hex;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(scheme_config_hash(scheme)));
    if (word != "config" || hash_hex != buf) throw ModelError(path + ": config hash mismatch");

    HybridParams hp;
    auto slurp = [&](const char* tag, std::vector<double>& v) {
        std::size_t n = 0;
        in >> word >> n;
        if (word != tag) throw ModelError(path + ": expected section '" + tag + "'");
        v.resize(n);
        for (auto& d : v) {
            std::string tok;
            in >> tok;
            d = std::strtod(tok.c_str(), nullptr);
        }
    };
    slurp("quantum", hp.quantum);
    slurp("fc_weights", hp.fc_weights);
    slurp("fc_bias", hp.fc_bias);
    if (!in) throw ModelError(path + ": truncated checkpoint");
    check_model_dims(scheme, hp);
    return hp;
}

} // namespace qmlp
