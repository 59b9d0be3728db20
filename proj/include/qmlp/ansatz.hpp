#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "qmlp/common.hpp"
#include "qmlp/gates.hpp"

namespace qmlp {

enum class Entangler : std::uint8_t { CNOT, CRX, CRX_CRY_ALTERNATING };
enum class Topology : std::uint8_t { CHAIN, RING };
enum class Layout : std::uint8_t { VERTICAL, HORIZONTAL };

// Per-layer re-uploading unit: one gate per qubit, assignment split by
// qubit parity (even/odd). A uniform RUU sets both sides identically.
struct RuuSpec {
    GateKind even_gate = GateKind::RX;
    Preproc even_pre = Preproc::Identity;
    GateKind odd_gate = GateKind::RX;
    Preproc odd_pre = Preproc::Identity;
};

// A compiled QMLP template: ordered gates with trainable-parameter slots and
// input slots. Immutable after compilation.
struct CircuitScheme {
    std::string name;
    int n_qubits = 0;
    int n_blocks = 0;
    Entangler entangler = Entangler::CNOT;
    Topology topology = Topology::CHAIN;
    std::vector<RuuSpec> ruu; // length n_blocks - 1
    Layout layout = Layout::VERTICAL;
    std::vector<GateOp> ops;
    int n_params = 0;
    int n_input_slots = 0;
    // SCALED_RELU reads relu(2x) when true, 2*relu(x) otherwise.
    bool scale_inside_relu = true;

    // All qubits are measured, in both layouts.
    int n_measured() const { return n_qubits; }
};

// Resolves one gate's angles against bound parameters and inputs.
inline void resolve_angles(const GateOp& gate, const std::vector<double>& params,
                           const std::vector<double>& x, bool scale_inside_relu,
                           std::vector<double>& out) {
    out.clear();
    for (const auto& p : gate.params) {
        switch (p.source) {
            case Param::Source::Literal: out.push_back(p.value); break;
            case Param::Source::Slot:
                if (p.index < 0 || p.index >= static_cast<int>(params.size()))
                    throw ExecutionError("unbound trainable slot " + std::to_string(p.index));
                out.push_back(params[static_cast<std::size_t>(p.index)]);
                break;
            case Param::Source::Input:
                if (p.index < 0 || p.index >= static_cast<int>(x.size()))
                    throw ExecutionError("unbound input slot " + std::to_string(p.index));
                out.push_back(
                    apply_preproc(p.preproc, x[static_cast<std::size_t>(p.index)], scale_inside_relu));
                break;
        }
    }
}

// The embedding layer S0(x) for literal angles: one RX(x_k) per qubit.
inline std::vector<GateOp> encode_input(const std::vector<double>& x) {
    if (x.empty()) throw EncodingError("encode_input: empty input");
    for (double v : x)
        if (!std::isfinite(v)) throw EncodingError("encode_input: non-finite angle");
    std::vector<GateOp> ops;
    ops.reserve(x.size());
    for (std::size_t q = 0; q < x.size(); ++q)
        ops.push_back(GateOp::one(GateKind::RX, static_cast<int>(q), Param::literal(x[q])));
    return ops;
}

namespace detail {

struct SchemeDef {
    const char* name;
    Entangler entangler;
    int n_blocks;
    RuuSpec ruu;
};

// The eight registered schemes. CNOT schemes use CHAIN entangling,
// parameterized ones use RING; that split is the only one consistent with
// the reference gate counts (94/188 vs 96/192 at 16 qubits).
inline const std::vector<SchemeDef>& scheme_registry() {
    static const std::vector<SchemeDef> defs = {
        {"RX-CNOT", Entangler::CNOT, 2,
         {GateKind::RX, Preproc::Identity, GateKind::RX, Preproc::Identity}},
        {"DEEP-RX-CNOT", Entangler::CNOT, 4,
         {GateKind::RX, Preproc::Identity, GateKind::RX, Preproc::Identity}},
        {"RX-CRX", Entangler::CRX, 2,
         {GateKind::RX, Preproc::Identity, GateKind::RX, Preproc::Identity}},
        {"DEEP-RX-CRX", Entangler::CRX, 4,
         {GateKind::RX, Preproc::Identity, GateKind::RX, Preproc::Identity}},
        {"RXY(Relu)-CRX", Entangler::CRX, 2,
         {GateKind::RX, Preproc::Identity, GateKind::RY, Preproc::ScaledRelu}},
        {"RXX(Relu)-CRX", Entangler::CRX, 2,
         {GateKind::RX, Preproc::Identity, GateKind::RX, Preproc::Relu}},
        {"RXY-CRXY", Entangler::CRX_CRY_ALTERNATING, 2,
         {GateKind::RX, Preproc::Identity, GateKind::RY, Preproc::Identity}},
        {"RXY-CNOT", Entangler::CNOT, 2,
         {GateKind::RX, Preproc::Identity, GateKind::RY, Preproc::Identity}},
    };
    return defs;
}

// Entangler pair list for one layer on qubits [base, base+n).
inline std::vector<std::pair<int, int>> entangler_pairs(int base, int n, Topology topology) {
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i + 1 < n; ++i) pairs.emplace_back(base + i, base + i + 1);
    if (topology == Topology::RING && n > 1) pairs.emplace_back(base + n - 1, base);
    return pairs;
}

inline GateKind entangler_gate(Entangler e, int position) {
    switch (e) {
        case Entangler::CNOT: return GateKind::CNOT;
        case Entangler::CRX: return GateKind::CRX;
        case Entangler::CRX_CRY_ALTERNATING:
            return position % 2 == 0 ? GateKind::CRX : GateKind::CRY;
    }
    return GateKind::CNOT;
}

inline void emit_encoding(CircuitScheme& s, int base, int n) {
    for (int q = 0; q < n; ++q)
        s.ops.push_back(GateOp::one(GateKind::RX, base + q, Param::input(q)));
}

inline void emit_ruu(CircuitScheme& s, const RuuSpec& ruu, int base, int n) {
    for (int q = 0; q < n; ++q) {
        const bool even = q % 2 == 0;
        s.ops.push_back(GateOp::one(even ? ruu.even_gate : ruu.odd_gate, base + q,
                                    Param::input(q, even ? ruu.even_pre : ruu.odd_pre)));
    }
}

inline void emit_rot_layer(CircuitScheme& s, int base, int n) {
    for (int q = 0; q < n; ++q) {
        GateOp g = GateOp::one(GateKind::Rot, base + q);
        g.params = {Param::slot(s.n_params), Param::slot(s.n_params + 1),
                    Param::slot(s.n_params + 2)};
        s.n_params += 3;
        s.ops.push_back(g);
    }
}

inline void emit_entangler_layer(CircuitScheme& s, int base, int n) {
    const auto pairs = entangler_pairs(base, n, s.topology);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const GateKind k = entangler_gate(s.entangler, static_cast<int>(i));
        if (k == GateKind::CNOT) {
            s.ops.push_back(GateOp::two(k, pairs[i].first, pairs[i].second));
        } else {
            s.ops.push_back(GateOp::two(k, pairs[i].first, pairs[i].second,
                                        Param::slot(s.n_params)));
            ++s.n_params;
        }
    }
}

} // namespace detail

inline std::vector<std::string> scheme_names() {
    std::vector<std::string> names;
    for (const auto& d : detail::scheme_registry()) names.emplace_back(d.name);
    return names;
}

// Compiles a registered scheme: encoding layer, then n_blocks repetitions
// of [ROT on every qubit; entangler layer] with one RUU before every block
// except the first.
inline CircuitScheme build_scheme(const std::string& name, int n_qubits, int input_dim) {
    const detail::SchemeDef* def = nullptr;
    for (const auto& d : detail::scheme_registry())
        if (name == d.name) def = &d;
    if (!def) throw ConfigError("build_scheme: unknown scheme '" + name + "'");
    if (n_qubits != input_dim)
        throw ConfigError("build_scheme: n_qubits must equal input_dim (one pixel per qubit)");
    if (n_qubits < 1 || n_qubits > 24) throw ConfigError("build_scheme: qubit count out of range");

    CircuitScheme s;
    s.name = name;
    s.n_qubits = n_qubits;
    s.n_blocks = def->n_blocks;
    s.entangler = def->entangler;
    s.topology = def->entangler == Entangler::CNOT ? Topology::CHAIN : Topology::RING;
    s.ruu.assign(static_cast<std::size_t>(def->n_blocks - 1), def->ruu);
    s.n_input_slots = input_dim;

    detail::emit_encoding(s, 0, n_qubits);
    for (int b = 0; b < s.n_blocks; ++b) {
        if (b > 0) detail::emit_ruu(s, s.ruu[static_cast<std::size_t>(b - 1)], 0, n_qubits);
        detail::emit_rot_layer(s, 0, n_qubits);
        detail::emit_entangler_layer(s, 0, n_qubits);
    }
    return s;
}

// Same construction as build_scheme but with explicit structure, for
// circuits outside the registry (reduced widths, single-qubit RUU studies).
inline CircuitScheme build_custom_scheme(const std::string& name, int n_qubits, int n_blocks,
                                         Entangler entangler, const RuuSpec& ruu) {
    if (n_qubits < 1 || n_qubits > 24) throw ConfigError("build_custom_scheme: qubit count out of range");
    if (n_blocks < 1) throw ConfigError("build_custom_scheme: need at least one block");
    CircuitScheme s;
    s.name = name;
    s.n_qubits = n_qubits;
    s.n_blocks = n_blocks;
    s.entangler = entangler;
    s.topology = entangler == Entangler::CNOT ? Topology::CHAIN : Topology::RING;
    s.ruu.assign(static_cast<std::size_t>(n_blocks - 1), ruu);
    s.n_input_slots = n_qubits;
    detail::emit_encoding(s, 0, n_qubits);
    for (int b = 0; b < n_blocks; ++b) {
        if (b > 0) detail::emit_ruu(s, s.ruu[static_cast<std::size_t>(b - 1)], 0, n_qubits);
        detail::emit_rot_layer(s, 0, n_qubits);
        detail::emit_entangler_layer(s, 0, n_qubits);
    }
    return s;
}

// Width-expanded variant: block b moves to its own register of n_qubits
// qubits, re-uploading becomes parallel uploading (every register gets its
// own S0(x)), and adjacent registers are coupled by one entangler gate.
inline CircuitScheme build_horizontal(const CircuitScheme& vertical) {
    if (vertical.layout != Layout::VERTICAL)
        throw ConfigError("build_horizontal: scheme is already horizontal");
    const int n = vertical.n_qubits;
    const int blocks = vertical.n_blocks;
    if (n * blocks > 20)
        throw ConfigError("build_horizontal: " + std::to_string(n * blocks) +
                          " qubits exceeds the 20-qubit budget");

    CircuitScheme s;
    s.name = vertical.name + "-HORIZONTAL";
    s.n_qubits = n * blocks;
    s.n_blocks = blocks;
    s.entangler = vertical.entangler;
    s.topology = vertical.topology;
    s.layout = Layout::HORIZONTAL;
    s.n_input_slots = vertical.n_input_slots;
    s.scale_inside_relu = vertical.scale_inside_relu;

    for (int r = 0; r < blocks; ++r) detail::emit_encoding(s, r * n, n);
    for (int r = 0; r < blocks; ++r) {
        detail::emit_rot_layer(s, r * n, n);
        detail::emit_entangler_layer(s, r * n, n);
    }
    // One coupling gate per register boundary.
    for (int r = 0; r + 1 < blocks; ++r) {
        const int last = r * n + n - 1;
        const int first = (r + 1) * n;
        const GateKind k = detail::entangler_gate(s.entangler, r);
        if (k == GateKind::CNOT) {
            s.ops.push_back(GateOp::two(k, last, first));
        } else {
            s.ops.push_back(GateOp::two(k, last, first, Param::slot(s.n_params)));
            ++s.n_params;
        }
    }
    return s;
}

struct SchemeSummary {
    int total_gates = 0;
    int n_params = 0;
    int n_blocks = 0;
    int depth = 0;
    int one_qubit_gates = 0;
    int one_qubit_parameterized = 0;
    int two_qubit_gates = 0;
};

// Exact integer counts; depth = longest dependency chain of gates sharing
// qubits (greedy layering).
inline SchemeSummary scheme_summary(const CircuitScheme& s) {
    SchemeSummary sum;
    sum.total_gates = static_cast<int>(s.ops.size());
    sum.n_params = s.n_params;
    sum.n_blocks = s.ops.empty() ? 0 : s.n_blocks;
    std::vector<int> qubit_depth(static_cast<std::size_t>(std::max(s.n_qubits, 1)), 0);
    for (const auto& g : s.ops) {
        const int arity = qubit_arity(g.kind);
        if (arity == 1) {
            ++sum.one_qubit_gates;
            bool trainable = false;
            for (const auto& p : g.params)
                if (p.source == Param::Source::Slot) trainable = true;
            if (trainable) ++sum.one_qubit_parameterized;
        } else {
            ++sum.two_qubit_gates;
        }
        int d = 0;
        for (int i = 0; i < arity; ++i)
            d = std::max(d, qubit_depth[static_cast<std::size_t>(g.qubits[static_cast<std::size_t>(i)])]);
        ++d;
        for (int i = 0; i < arity; ++i)
            qubit_depth[static_cast<std::size_t>(g.qubits[static_cast<std::size_t>(i)])] = d;
        sum.depth = std::max(sum.depth, d);
    }
    return sum;
}

} // namespace qmlp
