#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "qmlp/common.hpp"
#include "qmlp/gates.hpp"

namespace qmlp {

// Dense statevector of an n-qubit register. Qubit index 0 is the
// least-significant bit of the basis index (so for |q1 q0> = |10>,
// the amplitude lives at basis index 2).
struct Statevector {
    int n_qubits = 0;
    std::vector<cdouble> amps;

    std::size_t dim() const { return amps.size(); }

    double norm_sq() const {
        double s = 0.0;
        for (const auto& a : amps) s += std::norm(a);
        return s;
    }
};

inline Statevector new_ground(int n_qubits) {
    if (n_qubits < 1 || n_qubits > 24)
        throw ConfigError("new_ground: qubit count " + std::to_string(n_qubits) +
                          " outside [1, 24]");
    Statevector sv;
    sv.n_qubits = n_qubits;
    sv.amps.assign(std::size_t{1} << n_qubits, cdouble{0.0, 0.0});
    sv.amps[0] = 1.0;
    return sv;
}

namespace kernel {

// Generic 2x2 on `target`, in place over bit-masked index pairs.
inline void apply_1q(Statevector& sv, const GateMatrix& u, int target) {
    const std::size_t mask = std::size_t{1} << target;
    const std::size_t lo_mask = mask - 1;
    const std::size_t hi_mask = ~lo_mask;
    const std::size_t half = sv.dim() >> 1;
    const cdouble m00 = u.at(0, 0), m01 = u.at(0, 1), m10 = u.at(1, 0), m11 = u.at(1, 1);
    cdouble* a = sv.amps.data();
    for (std::size_t i = 0; i < half; ++i) {
        const std::size_t i0 = ((i & hi_mask) << 1) | (i & lo_mask);
        const std::size_t i1 = i0 | mask;
        const cdouble a0 = a[i0], a1 = a[i1];
        a[i0] = m00 * a0 + m01 * a1;
        a[i1] = m10 * a0 + m11 * a1;
    }
}

// 2x2 on `target` restricted to basis states where `control` is 1.
// Covers every controlled gate in the gate set.
inline void apply_controlled_1q(Statevector& sv, const GateMatrix& u, int control, int target) {
    const std::size_t tmask = std::size_t{1} << target;
    const std::size_t cmask = std::size_t{1} << control;
    const std::size_t lo_mask = tmask - 1;
    const std::size_t hi_mask = ~lo_mask;
    const std::size_t half = sv.dim() >> 1;
    const cdouble m00 = u.at(0, 0), m01 = u.at(0, 1), m10 = u.at(1, 0), m11 = u.at(1, 1);
    cdouble* a = sv.amps.data();
    for (std::size_t i = 0; i < half; ++i) {
        const std::size_t i0 = ((i & hi_mask) << 1) | (i & lo_mask);
        if (!(i0 & cmask)) continue;
        const std::size_t i1 = i0 | tmask;
        const cdouble a0 = a[i0], a1 = a[i1];
        a[i0] = m00 * a0 + m01 * a1;
        a[i1] = m10 * a0 + m11 * a1;
    }
}

// Generic 4x4 on (control, target) index quadruples; sub-index ordering is
// 2*control_bit + target_bit to match GateMatrix's convention.
inline void apply_2q(Statevector& sv, const GateMatrix& u, int control, int target) {
    const std::size_t cmask = std::size_t{1} << control;
    const std::size_t tmask = std::size_t{1} << target;
    const std::size_t n = sv.dim();
    cdouble* a = sv.amps.data();
    for (std::size_t i = 0; i < n; ++i) {
        if (i & (cmask | tmask)) continue;
        const std::size_t i00 = i;
        const std::size_t i01 = i | tmask;
        const std::size_t i10 = i | cmask;
        const std::size_t i11 = i | cmask | tmask;
        const cdouble a00 = a[i00], a01 = a[i01], a10 = a[i10], a11 = a[i11];
        a[i00] = u.at(0, 0) * a00 + u.at(0, 1) * a01 + u.at(0, 2) * a10 + u.at(0, 3) * a11;
        a[i01] = u.at(1, 0) * a00 + u.at(1, 1) * a01 + u.at(1, 2) * a10 + u.at(1, 3) * a11;
        a[i10] = u.at(2, 0) * a00 + u.at(2, 1) * a01 + u.at(2, 2) * a10 + u.at(2, 3) * a11;
        a[i11] = u.at(3, 0) * a00 + u.at(3, 1) * a01 + u.at(3, 2) * a10 + u.at(3, 3) * a11;
    }
}

// Pauli-X: swap the two halves of each masked pair.
inline void apply_x(Statevector& sv, int target) {
    const std::size_t mask = std::size_t{1} << target;
    const std::size_t lo_mask = mask - 1;
    const std::size_t hi_mask = ~lo_mask;
    const std::size_t half = sv.dim() >> 1;
    cdouble* a = sv.amps.data();
    for (std::size_t i = 0; i < half; ++i) {
        const std::size_t i0 = ((i & hi_mask) << 1) | (i & lo_mask);
        std::swap(a[i0], a[i0 | mask]);
    }
}

// Pauli-Z: negate amplitudes where the target bit is set.
inline void apply_z(Statevector& sv, int target) {
    const std::size_t mask = std::size_t{1} << target;
    const std::size_t n = sv.dim();
    cdouble* a = sv.amps.data();
    for (std::size_t i = 0; i < n; ++i)
        if (i & mask) a[i] = -a[i];
}

} // namespace kernel

// Resolves a GateOp's angles, which must all be literals here.
inline std::vector<double> literal_angles(const GateOp& gate) {
    std::vector<double> angles;
    angles.reserve(gate.params.size());
    for (const auto& p : gate.params) {
        if (p.source != Param::Source::Literal)
            throw CircuitError("apply_gate: unbound parameter slot on gate " +
                               std::string(gate_name(gate.kind)));
        angles.push_back(p.value);
    }
    return angles;
}

inline void check_gate_indices(const Statevector& sv, const GateOp& gate) {
    const int arity = qubit_arity(gate.kind);
    for (int i = 0; i < arity; ++i) {
        if (gate.qubits[static_cast<std::size_t>(i)] < 0 ||
            gate.qubits[static_cast<std::size_t>(i)] >= sv.n_qubits)
            throw CircuitError("apply_gate: qubit index " +
                               std::to_string(gate.qubits[static_cast<std::size_t>(i)]) +
                               " out of range for " + std::to_string(sv.n_qubits) + " qubits");
    }
    if (arity == 2 && gate.qubits[0] == gate.qubits[1])
        throw CircuitError("apply_gate: duplicate qubit indices on two-qubit gate");
}

// Applies a fully bound gate in place.
inline void apply_gate(Statevector& sv, const GateOp& gate) {
    check_gate_indices(sv, gate);
    const auto angles = literal_angles(gate);
    switch (gate.kind) {
        case GateKind::X: kernel::apply_x(sv, gate.qubits[0]); return;
        case GateKind::Z: kernel::apply_z(sv, gate.qubits[0]); return;
        case GateKind::CNOT: {
            const GateMatrix x = gate_matrix(GateKind::X);
            kernel::apply_controlled_1q(sv, x, gate.qubits[0], gate.qubits[1]);
            return;
        }
        case GateKind::CRX:
        case GateKind::CRY:
        case GateKind::CRot: {
            GateKind inner = gate.kind == GateKind::CRX   ? GateKind::RX
                             : gate.kind == GateKind::CRY ? GateKind::RY
                                                          : GateKind::Rot;
            kernel::apply_controlled_1q(sv, gate_matrix(inner, angles), gate.qubits[0],
                                        gate.qubits[1]);
            return;
        }
        default: kernel::apply_1q(sv, gate_matrix(gate.kind, angles), gate.qubits[0]); return;
    }
}

// Applies an explicit (possibly non-unitary) matrix on the gate's qubits.
// Used by the adjoint differentiation sweep for derivative matrices.
inline void apply_matrix(Statevector& sv, const GateMatrix& u, const GateOp& gate) {
    if (u.dim == 2)
        kernel::apply_1q(sv, u, gate.qubits[0]);
    else
        kernel::apply_2q(sv, u, gate.qubits[0], gate.qubits[1]);
}

// <Z_q> = sum over basis states with qubit bit 0 of |a|^2, minus bit-1 sum.
inline double expect_z(const Statevector& sv, int qubit) {
    if (qubit < 0 || qubit >= sv.n_qubits)
        throw CircuitError("expect_z: qubit index out of range");
    const std::size_t mask = std::size_t{1} << qubit;
    const std::size_t n = sv.dim();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double p = std::norm(sv.amps[i]);
        s += (i & mask) ? -p : p;
    }
    return s;
}

// All per-qubit <Z_q> in one pass over the amplitudes.
inline std::vector<double> expect_z_all(const Statevector& sv) {
    std::vector<double> z(static_cast<std::size_t>(sv.n_qubits), 0.0);
    const std::size_t n = sv.dim();
    for (std::size_t i = 0; i < n; ++i) {
        const double p = std::norm(sv.amps[i]);
        for (int q = 0; q < sv.n_qubits; ++q)
            z[static_cast<std::size_t>(q)] += (i >> q) & 1 ? -p : p;
    }
    return z;
}

// L2-normalized real amplitudes; zero-pads to the next power of two.
inline Statevector amplitude_encode(const std::vector<double>& pixels) {
    if (pixels.empty()) throw EncodingError("amplitude_encode: empty input");
    double norm_sq = 0.0;
    for (double p : pixels) {
        if (!std::isfinite(p)) throw EncodingError("amplitude_encode: non-finite pixel");
        norm_sq += p * p;
    }
    if (norm_sq == 0.0) throw EncodingError("amplitude_encode: all-zero input");
    int n_qubits = 1;
    while ((std::size_t{1} << n_qubits) < pixels.size()) ++n_qubits;
    Statevector sv = new_ground(n_qubits);
    const double inv = 1.0 / std::sqrt(norm_sq);
    sv.amps[0] = 0.0;
    for (std::size_t i = 0; i < pixels.size(); ++i) sv.amps[i] = pixels[i] * inv;
    return sv;
}

} // namespace qmlp
