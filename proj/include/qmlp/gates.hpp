#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qmlp/common.hpp"

namespace qmlp {

enum class GateKind : std::uint8_t { X, Z, H, RX, RY, RZ, Rot, CNOT, CRX, CRY, CRot };

inline const char* gate_name(GateKind k) {
    switch (k) {
        case GateKind::X: return "X";
        case GateKind::Z: return "Z";
        case GateKind::H: return "H";
        case GateKind::RX: return "RX";
        case GateKind::RY: return "RY";
        case GateKind::RZ: return "RZ";
        case GateKind::Rot: return "ROT";
        case GateKind::CNOT: return "CNOT";
        case GateKind::CRX: return "CRX";
        case GateKind::CRY: return "CRY";
        case GateKind::CRot: return "CROT";
    }
    return "?";
}

inline int param_arity(GateKind k) {
    switch (k) {
        case GateKind::X:
        case GateKind::Z:
        case GateKind::H:
        case GateKind::CNOT: return 0;
        case GateKind::RX:
        case GateKind::RY:
        case GateKind::RZ:
        case GateKind::CRX:
        case GateKind::CRY: return 1;
        case GateKind::Rot:
        case GateKind::CRot: return 3;
    }
    return 0;
}

inline int qubit_arity(GateKind k) {
    switch (k) {
        case GateKind::CNOT:
        case GateKind::CRX:
        case GateKind::CRY:
        case GateKind::CRot: return 2;
        default: return 1;
    }
}

inline bool is_controlled(GateKind k) {
    return k == GateKind::CNOT || k == GateKind::CRX || k == GateKind::CRY ||
           k == GateKind::CRot;
}

// Classical preprocessing applied to an input value before it becomes an angle.
enum class Preproc : std::uint8_t { Identity, Relu, ScaledRelu };

// When true (default) SCALED_RELU means relu(2x); otherwise 2*relu(x).
inline double apply_preproc(Preproc p, double x, bool scale_inside_relu = true) {
    switch (p) {
        case Preproc::Identity: return x;
        case Preproc::Relu: return x > 0.0 ? x : 0.0;
        case Preproc::ScaledRelu:
            if (scale_inside_relu) return 2.0 * x > 0.0 ? 2.0 * x : 0.0;
            return x > 0.0 ? 2.0 * x : 0.0;
    }
    return x;
}

// One angle of a gate: a literal value, a trainable slot, or an input slot
// with a preprocessing tag.
struct Param {
    enum class Source : std::uint8_t { Literal, Slot, Input };
    Source source = Source::Literal;
    double value = 0.0;         // Literal only
    int index = -1;             // Slot / Input only
    Preproc preproc = Preproc::Identity; // Input only

    static Param literal(double v) { return {Source::Literal, v, -1, Preproc::Identity}; }
    static Param slot(int i) { return {Source::Slot, 0.0, i, Preproc::Identity}; }
    static Param input(int i, Preproc p = Preproc::Identity) {
        return {Source::Input, 0.0, i, p};
    }
};

// One gate instance in a compiled circuit. Control qubit first for
// controlled gates.
struct GateOp {
    GateKind kind;
    std::array<int, 2> qubits{-1, -1};
    std::vector<Param> params;

    static GateOp one(GateKind k, int q) { return {k, {q, -1}, {}}; }
    static GateOp one(GateKind k, int q, Param p) { return {k, {q, -1}, {p}}; }
    static GateOp two(GateKind k, int control, int target) { return {k, {control, target}, {}}; }
    static GateOp two(GateKind k, int control, int target, Param p) {
        return {k, {control, target}, {p}};
    }

    int control() const { return qubits[0]; }
    int target() const { return qubit_arity(kind) == 2 ? qubits[1] : qubits[0]; }
};

// A dense gate unitary, 2x2 or 4x4. For 4x4 the basis ordering is
// |control,target>, i.e. row/col index = 2*control_bit + target_bit.
struct GateMatrix {
    int dim = 2;
    std::array<cdouble, 16> m{};

    cdouble& at(int r, int c) { return m[static_cast<std::size_t>(r * dim + c)]; }
    const cdouble& at(int r, int c) const { return m[static_cast<std::size_t>(r * dim + c)]; }
};

namespace detail {

inline GateMatrix mat2(cdouble a, cdouble b, cdouble c, cdouble d) {
    GateMatrix g;
    g.dim = 2;
    g.m[0] = a; g.m[1] = b; g.m[2] = c; g.m[3] = d;
    return g;
}

inline GateMatrix mul2(const GateMatrix& a, const GateMatrix& b) {
    GateMatrix r;
    r.dim = 2;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            r.at(i, j) = a.at(i, 0) * b.at(0, j) + a.at(i, 1) * b.at(1, j);
    return r;
}

inline GateMatrix rx2(double t) {
    const double c = std::cos(t / 2), s = std::sin(t / 2);
    return mat2({c, 0}, {0, -s}, {0, -s}, {c, 0});
}
inline GateMatrix ry2(double t) {
    const double c = std::cos(t / 2), s = std::sin(t / 2);
    return mat2({c, 0}, {-s, 0}, {s, 0}, {c, 0});
}
inline GateMatrix rz2(double t) {
    const double c = std::cos(t / 2), s = std::sin(t / 2);
    return mat2({c, -s}, {0, 0}, {0, 0}, {c, s});
}

// Z-Y-Z Euler composition: ROT(phi, theta, omega) = RZ(omega) RY(theta) RZ(phi).
inline GateMatrix rot2(double phi, double theta, double omega) {
    return mul2(rz2(omega), mul2(ry2(theta), rz2(phi)));
}

// Embed a 2x2 into the controlled block of a 4x4.
inline GateMatrix controlled(const GateMatrix& u) {
    GateMatrix g;
    g.dim = 4;
    g.at(0, 0) = 1.0;
    g.at(1, 1) = 1.0;
    g.at(2, 2) = u.at(0, 0);
    g.at(2, 3) = u.at(0, 1);
    g.at(3, 2) = u.at(1, 0);
    g.at(3, 3) = u.at(1, 1);
    return g;
}

} // namespace detail

// Gate unitary for literal angles. Angle count must match param_arity(kind).
inline GateMatrix gate_matrix(GateKind kind, const std::vector<double>& angles = {}) {
    if (static_cast<int>(angles.size()) != param_arity(kind))
        throw CompilationError(std::string("gate_matrix: ") + gate_name(kind) + " expects " +
                               std::to_string(param_arity(kind)) + " angles, got " +
                               std::to_string(angles.size()));
    using namespace detail;
    switch (kind) {
        case GateKind::X: return mat2({0, 0}, {1, 0}, {1, 0}, {0, 0});
        case GateKind::Z: return mat2({1, 0}, {0, 0}, {0, 0}, {-1, 0});
        case GateKind::H: {
            const double r = 1.0 / std::sqrt(2.0);
            return mat2({r, 0}, {r, 0}, {r, 0}, {-r, 0});
        }
        case GateKind::RX: return rx2(angles[0]);
        case GateKind::RY: return ry2(angles[0]);
        case GateKind::RZ: return rz2(angles[0]);
        case GateKind::Rot: return rot2(angles[0], angles[1], angles[2]);
        case GateKind::CNOT: {
            GateMatrix g;
            g.dim = 4;
            g.at(0, 0) = 1.0;
            g.at(1, 1) = 1.0;
            g.at(2, 3) = 1.0;
            g.at(3, 2) = 1.0;
            return g;
        }
        case GateKind::CRX: return controlled(rx2(angles[0]));
        case GateKind::CRY: return controlled(ry2(angles[0]));
        case GateKind::CRot: return controlled(rot2(angles[0], angles[1], angles[2]));
    }
    throw CompilationError("gate_matrix: unknown kind");
}

// d(gate unitary)/d(angles[which]). Needed by the adjoint differentiation path.
inline GateMatrix gate_matrix_deriv(GateKind kind, const std::vector<double>& angles, int which) {
    using namespace detail;
    auto drx = [](double t) {
        const double c = 0.5 * std::cos(t / 2), s = 0.5 * std::sin(t / 2);
        return mat2({-s, 0}, {0, -c}, {0, -c}, {-s, 0});
    };
    auto dry = [](double t) {
        const double c = 0.5 * std::cos(t / 2), s = 0.5 * std::sin(t / 2);
        return mat2({-s, 0}, {-c, 0}, {c, 0}, {-s, 0});
    };
    auto drz = [](double t) {
        const double c = 0.5 * std::cos(t / 2), s = 0.5 * std::sin(t / 2);
        return mat2({-s, -c}, {0, 0}, {0, 0}, {-s, c});
    };
    auto drot = [&](double phi, double theta, double omega, int idx) {
        switch (idx) {
            case 0: return mul2(rz2(omega), mul2(ry2(theta), drz(phi)));
            case 1: return mul2(rz2(omega), mul2(dry(theta), rz2(phi)));
            default: return mul2(drz(omega), mul2(ry2(theta), rz2(phi)));
        }
    };
    auto dcontrolled = [](const GateMatrix& du) {
        // Identity block is angle-independent, so its derivative is zero.
        GateMatrix g;
        g.dim = 4;
        g.at(2, 2) = du.at(0, 0);
        g.at(2, 3) = du.at(0, 1);
        g.at(3, 2) = du.at(1, 0);
        g.at(3, 3) = du.at(1, 1);
        return g;
    };
    if (which < 0 || which >= param_arity(kind))
        throw CompilationError("gate_matrix_deriv: angle index out of range");
    switch (kind) {
        case GateKind::RX: return drx(angles[0]);
        case GateKind::RY: return dry(angles[0]);
        case GateKind::RZ: return drz(angles[0]);
        case GateKind::Rot: return drot(angles[0], angles[1], angles[2], which);
        case GateKind::CRX: return dcontrolled(drx(angles[0]));
        case GateKind::CRY: return dcontrolled(dry(angles[0]));
        case GateKind::CRot: return dcontrolled(drot(angles[0], angles[1], angles[2], which));
        default: throw CompilationError("gate_matrix_deriv: gate has no parameters");
    }
}

// Parameter-shift descriptor: f'(theta) = sum_i coeff_i * f(theta + shift_i).
struct ShiftTerm {
    double shift;
    double coeff;
};
struct ShiftRule {
    std::vector<ShiftTerm> terms;
};

// Shift rule per gate kind, applied to each of its angles. Single rotations
// and the three ROT Euler angles use the two-term rule. Controlled rotations
// have generator eigenvalue gaps {1/2, 1} and need the four-term rule.
inline std::vector<ShiftRule> shift_rule(GateKind kind) {
    const int arity = param_arity(kind);
    if (arity == 0) return {};
    ShiftRule rule;
    if (is_controlled(kind)) {
        const double c1 = (std::sqrt(2.0) + 1.0) / (4.0 * std::sqrt(2.0));
        const double c2 = (std::sqrt(2.0) - 1.0) / (4.0 * std::sqrt(2.0));
        rule.terms = {{kPi / 2, c1}, {-kPi / 2, -c1}, {3 * kPi / 2, -c2}, {-3 * kPi / 2, c2}};
    } else {
        rule.terms = {{kPi / 2, 0.5}, {-kPi / 2, -0.5}};
    }
    return std::vector<ShiftRule>(static_cast<std::size_t>(arity), rule);
}

} // namespace qmlp
