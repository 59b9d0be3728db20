#pragma once

#include <vector>

#include "qmlp/common.hpp"
#include "qmlp/gates.hpp"
#include "qmlp/simulator.hpp"

namespace qmlp::test {

// Normalized random state, deterministic per seed.
inline Statevector random_state(int n_qubits, std::uint64_t seed) {
    Statevector sv = new_ground(n_qubits);
    rng::Stream s(rng::hash_combine(seed, 0xabcd));
    double norm = 0.0;
    for (auto& a : sv.amps) {
        a = cdouble{s.next_uniform(-1.0, 1.0), s.next_uniform(-1.0, 1.0)};
        norm += std::norm(a);
    }
    norm = std::sqrt(norm);
    for (auto& a : sv.amps) a /= norm;
    return sv;
}

// Independent oracle: embed the gate into a full 2^n x 2^n matrix (tensor
// with identities, respecting the qubit-0-is-LSB convention) and multiply.
inline Statevector brute_force_apply(const Statevector& in, const GateOp& gate) {
    const auto u = gate_matrix(gate.kind, literal_angles(gate));
    const std::size_t dim = in.dim();
    Statevector out = in;
    for (auto& a : out.amps) a = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            cdouble entry{0.0, 0.0};
            if (u.dim == 2) {
                const std::size_t mask = std::size_t{1} << gate.qubits[0];
                if ((i & ~mask) == (j & ~mask))
                    entry = u.at((i & mask) ? 1 : 0, (j & mask) ? 1 : 0);
            } else {
                const std::size_t cmask = std::size_t{1} << gate.qubits[0];
                const std::size_t tmask = std::size_t{1} << gate.qubits[1];
                if ((i & ~(cmask | tmask)) == (j & ~(cmask | tmask))) {
                    const int ri = 2 * ((i & cmask) ? 1 : 0) + ((i & tmask) ? 1 : 0);
                    const int ci = 2 * ((j & cmask) ? 1 : 0) + ((j & tmask) ? 1 : 0);
                    entry = u.at(ri, ci);
                }
            }
            out.amps[i] += entry * in.amps[j];
        }
    }
    return out;
}

inline double max_amp_diff(const Statevector& a, const Statevector& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) m = std::max(m, std::abs(a.amps[i] - b.amps[i]));
    return m;
}

} // namespace qmlp::test
