#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "qmlp/common.hpp"
#include "qmlp/diff.hpp"
#include "qmlp/simulator.hpp"

namespace qmlp {

// Stochastic bit-flip / phase-flip channel: after each gate, independently
// for each qubit the gate touches, X fires with p_bitflip and Z with
// p_phaseflip (both may fire).
struct NoiseModel {
    double p_bitflip = 0.01;
    double p_phaseflip = 0.01;
    int n_trajectories = 300;
    std::uint64_t base_seed = 0;

    void validate() const {
        if (p_bitflip < 0.0 || p_bitflip > 1.0 || p_phaseflip < 0.0 || p_phaseflip > 1.0)
            throw ConfigError("NoiseModel: probabilities must lie in [0, 1]");
        if (n_trajectories < 1) throw ConfigError("NoiseModel: need at least one trajectory");
    }

    bool silent() const { return p_bitflip == 0.0 && p_phaseflip == 0.0; }
};

namespace detail {

// One decision point: a fresh stream per (seed, trajectory, gate, qubit),
// so trajectories are reproducible under any parallel schedule.
inline void noise_decision(const NoiseModel& noise, std::uint64_t trajectory, std::uint64_t gate,
                           std::uint64_t qubit, bool& flip_x, bool& flip_z) {
    std::uint64_t h = rng::hash_combine(noise.base_seed, trajectory);
    h = rng::hash_combine(h, gate);
    h = rng::hash_combine(h, qubit);
    flip_x = rng::to_unit_double(rng::splitmix64(h ^ 0x58f1d9d0a7b3c2e1ULL)) < noise.p_bitflip;
    flip_z = rng::to_unit_double(rng::splitmix64(h ^ 0x2cd5af9b164e07a3ULL)) < noise.p_phaseflip;
}

struct Insertion {
    int gate;  // error fires after this gate index
    int qubit;
    bool pauli_z; // false = X, true = Z

    friend bool operator<(const Insertion& a, const Insertion& b) {
        if (a.gate != b.gate) return a.gate < b.gate;
        if (a.qubit != b.qubit) return a.qubit < b.qubit;
        return a.pauli_z < b.pauli_z;
    }
    friend bool operator==(const Insertion& a, const Insertion& b) {
        return a.gate == b.gate && a.qubit == b.qubit && a.pauli_z == b.pauli_z;
    }
};

// The sampled insertion pattern of one trajectory, in execution order.
inline std::vector<Insertion> sample_insertions(const CircuitScheme& scheme,
                                                const NoiseModel& noise, int trajectory) {
    std::vector<Insertion> ins;
    for (std::size_t k = 0; k < scheme.ops.size(); ++k) {
        const GateOp& g = scheme.ops[k];
        const int arity = qubit_arity(g.kind);
        for (int i = 0; i < arity; ++i) {
            const int q = g.qubits[static_cast<std::size_t>(i)];
            bool fx = false, fz = false;
            noise_decision(noise, static_cast<std::uint64_t>(trajectory),
                           static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(q), fx, fz);
            if (fx) ins.push_back({static_cast<int>(k), q, false});
            if (fz) ins.push_back({static_cast<int>(k), q, true});
        }
    }
    return ins;
}

// Runs the tail of the circuit from the state after gate `start` with the
// pattern's insertions applied where they fall.
inline std::vector<double> run_with_insertions(const CircuitScheme& scheme,
                                               const std::vector<double>& params,
                                               const std::vector<double>& x,
                                               Statevector sv, std::size_t start,
                                               const std::vector<Insertion>& ins,
                                               std::size_t ins_from) {
    std::size_t next = ins_from;
    std::vector<double> angles;
    // insertions scheduled right after gate `start` itself
    while (next < ins.size() && ins[next].gate == static_cast<int>(start)) {
        if (ins[next].pauli_z)
            kernel::apply_z(sv, ins[next].qubit);
        else
            kernel::apply_x(sv, ins[next].qubit);
        ++next;
    }
    for (std::size_t k = start + 1; k < scheme.ops.size(); ++k) {
        const GateOp& g = scheme.ops[k];
        resolve_angles(g, params, x, scheme.scale_inside_relu, angles);
        qmlp::detail::apply_resolved(sv, g, angles);
        while (next < ins.size() && ins[next].gate == static_cast<int>(k)) {
            if (ins[next].pauli_z)
                kernel::apply_z(sv, ins[next].qubit);
            else
                kernel::apply_x(sv, ins[next].qubit);
            ++next;
        }
    }
    return expect_z_all(sv);
}

} // namespace detail

// Executes one Monte Carlo trajectory; fully determined by
// (base_seed, trajectory_index).
inline std::vector<double> noisy_run(const CircuitScheme& scheme, const std::vector<double>& params,
                                     const std::vector<double>& x, const NoiseModel& noise,
                                     int trajectory_index) {
    noise.validate();
    qmlp::detail::check_bindings(scheme, params, x);
    Statevector sv = new_ground(scheme.n_qubits);
    std::vector<double> angles;
    for (std::size_t k = 0; k < scheme.ops.size(); ++k) {
        const GateOp& g = scheme.ops[k];
        resolve_angles(g, params, x, scheme.scale_inside_relu, angles);
        qmlp::detail::apply_resolved(sv, g, angles);
        const int arity = qubit_arity(g.kind);
        for (int i = 0; i < arity; ++i) {
            const int q = g.qubits[static_cast<std::size_t>(i)];
            bool fx = false, fz = false;
            detail::noise_decision(noise, static_cast<std::uint64_t>(trajectory_index),
                                   static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(q),
                                   fx, fz);
            if (fx) kernel::apply_x(sv, q);
            if (fz) kernel::apply_z(sv, q);
        }
    }
    return expect_z_all(sv);
}

// Monte Carlo estimator: mean of noisy_run over trajectories
// 0..n_trajectories-1, deterministic given base_seed.
//
// Trajectories sharing an insertion pattern are evaluated once and weighted
// by multiplicity, and every pattern restarts from a cached noiseless prefix
// state at its first insertion point. Both transformations change only the
// schedule, not the set of trajectory states being averaged.
inline std::vector<double> noisy_expectations(const CircuitScheme& scheme,
                                              const std::vector<double>& params,
                                              const std::vector<double>& x,
                                              const NoiseModel& noise) {
    noise.validate();
    if (noise.silent()) return forward(scheme, params, x); // all trajectories identical

    std::map<std::vector<detail::Insertion>, int> patterns;
    for (int t = 0; t < noise.n_trajectories; ++t)
        ++patterns[detail::sample_insertions(scheme, noise, t)];

    // Noiseless prefix states, prefix[k] = state after gates 0..k-1.
    // Skipped above 2^16 amplitudes to bound memory.
    const bool cache = scheme.n_qubits <= 16;
    std::vector<Statevector> prefix;
    if (cache) {
        prefix.reserve(scheme.ops.size() + 1);
        Statevector sv = new_ground(scheme.n_qubits);
        prefix.push_back(sv);
        std::vector<double> angles;
        for (const auto& g : scheme.ops) {
            resolve_angles(g, params, x, scheme.scale_inside_relu, angles);
            qmlp::detail::apply_resolved(sv, g, angles);
            prefix.push_back(sv);
        }
    }

    const std::size_t nq = static_cast<std::size_t>(scheme.n_qubits);
    std::vector<double> mean(nq, 0.0);
    std::vector<double> angles;
    for (const auto& [ins, count] : patterns) {
        std::vector<double> z;
        if (ins.empty()) {
            z = cache ? expect_z_all(prefix.back())
                      : forward(scheme, params, x);
        } else if (cache) {
            const std::size_t first = static_cast<std::size_t>(ins.front().gate);
            z = detail::run_with_insertions(scheme, params, x, prefix[first + 1], first, ins, 0);
        } else {
            Statevector sv = new_ground(scheme.n_qubits);
            std::size_t next = 0;
            for (std::size_t k = 0; k < scheme.ops.size(); ++k) {
                resolve_angles(scheme.ops[k], params, x, scheme.scale_inside_relu, angles);
                qmlp::detail::apply_resolved(sv, scheme.ops[k], angles);
                while (next < ins.size() && ins[next].gate == static_cast<int>(k)) {
                    if (ins[next].pauli_z)
                        kernel::apply_z(sv, ins[next].qubit);
                    else
                        kernel::apply_x(sv, ins[next].qubit);
                    ++next;
                }
            }
            z = expect_z_all(sv);
        }
        for (std::size_t q = 0; q < nq; ++q) mean[q] += count * z[q];
    }
    for (double& v : mean) v /= noise.n_trajectories;
    return mean;
}

} // namespace qmlp
