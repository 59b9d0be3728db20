#include <catch2/catch_amalgamated.hpp>

#include "qmlp/ansatz.hpp"
#include "qmlp/diff.hpp"

using namespace qmlp;
using Catch::Approx;

namespace {

struct ExpectedCounts {
    const char* name;
    int gates;
    int params;
    int blocks;
};

// Reference resource counts at 16 qubits / 16 inputs.
constexpr ExpectedCounts kTable[] = {
    {"RX-CNOT", 94, 96, 2},     {"DEEP-RX-CNOT", 188, 192, 4},
    {"RX-CRX", 96, 128, 2},     {"DEEP-RX-CRX", 192, 256, 4},
    {"RXY(Relu)-CRX", 96, 128, 2}, {"RXX(Relu)-CRX", 96, 128, 2},
    {"RXY-CRXY", 96, 128, 2},   {"RXY-CNOT", 94, 96, 2},
};

} // namespace

TEST_CASE("registered schemes match the reference gate and parameter counts") {
    const auto names = scheme_names();
    REQUIRE(names.size() == 8);
    for (const auto& row : kTable) {
        const auto s = build_scheme(row.name, 16, 16);
        const auto sum = scheme_summary(s);
        INFO(row.name);
        CHECK(sum.total_gates == row.gates);
        CHECK(sum.n_params == row.params);
        CHECK(sum.n_blocks == row.blocks);
    }
}

TEST_CASE("RX-CRX/16 splits into 64 one-qubit (32 trainable) and 32 two-qubit gates") {
    const auto sum = scheme_summary(build_scheme("RX-CRX", 16, 16));
    CHECK(sum.one_qubit_gates == 64);
    CHECK(sum.one_qubit_parameterized == 32);
    CHECK(sum.two_qubit_gates == 32);
    CHECK(sum.depth == 36);
}

TEST_CASE("build_scheme guards") {
    REQUIRE_THROWS_AS(build_scheme("NOT-A-SCHEME", 16, 16), ConfigError);
    REQUIRE_THROWS_AS(build_scheme("RX-CNOT", 16, 9), ConfigError);
    REQUIRE_THROWS_AS(build_scheme("RX-CNOT", 0, 0), ConfigError);
    REQUIRE_THROWS_AS(build_scheme("RX-CNOT", 25, 25), ConfigError);
}

// With all trainable angles at zero, an identity-RUU scheme on one qubit
// reduces to RX(x) applied once per block, so <Z> = cos(L x).
TEST_CASE("repeated uploading multiplies the encoded frequency") {
    const RuuSpec rx_ruu{GateKind::RX, Preproc::Identity, GateKind::RX, Preproc::Identity};
    for (int L : {2, 3, 4}) {
        const auto s = build_custom_scheme("freq", 1, L, Entangler::CNOT, rx_ruu);
        const std::vector<double> params(static_cast<std::size_t>(s.n_params), 0.0);
        for (double x : {-2.1, -0.4, 0.0, 0.3, 1.7}) {
            const double z = forward(s, params, {x})[0];
            REQUIRE(z == Approx(std::cos(L * x)).margin(1e-12));
        }
    }
}

TEST_CASE("input preprocessing") {
    SECTION("relu clamps negatives and passes positives") {
        REQUIRE(apply_preproc(Preproc::Relu, -0.5) == 0.0);
        REQUIRE(apply_preproc(Preproc::Relu, 0.7) == 0.7);
    }
    SECTION("scaled relu doubles inside by default") {
        REQUIRE(apply_preproc(Preproc::ScaledRelu, 0.3) == Approx(0.6));
        REQUIRE(apply_preproc(Preproc::ScaledRelu, -0.3) == 0.0);
        REQUIRE(apply_preproc(Preproc::ScaledRelu, 0.3, false) == Approx(0.6));
        REQUIRE(apply_preproc(Preproc::ScaledRelu, -0.3, false) == 0.0);
    }
    SECTION("relu is non-smooth at the origin") {
        const double h = 1e-3;
        const double right = (apply_preproc(Preproc::Relu, h) - apply_preproc(Preproc::Relu, 0.0)) / h;
        const double left = (apply_preproc(Preproc::Relu, 0.0) - apply_preproc(Preproc::Relu, -h)) / h;
        REQUIRE(right == Approx(1.0));
        REQUIRE(left == Approx(0.0));
    }
}

TEST_CASE("relu RUUs alternate by qubit parity") {
    const auto s = build_scheme("RXY(Relu)-CRX", 4, 4);
    // Ops: 4 encode, 4 ROT, 4 CRX, then the first RUU starts at index 12.
    REQUIRE(s.ops.size() >= 16);
    for (int q = 0; q < 4; ++q) {
        const auto& g = s.ops[static_cast<std::size_t>(12 + q)];
        REQUIRE(g.params.size() == 1);
        REQUIRE(g.params[0].source == Param::Source::Input);
        if (q % 2 == 0) {
            REQUIRE(g.kind == GateKind::RX);
            REQUIRE(g.params[0].preproc == Preproc::Identity);
        } else {
            REQUIRE(g.kind == GateKind::RY);
            REQUIRE(g.params[0].preproc == Preproc::ScaledRelu);
        }
    }
}

TEST_CASE("alternating CRX/CRY entangler") {
    const auto s = build_scheme("RXY-CRXY", 4, 4);
    std::vector<GateKind> ent;
    for (const auto& g : s.ops)
        if (qubit_arity(g.kind) == 2) ent.push_back(g.kind);
    REQUIRE(ent.size() == 8); // ring of 4, two blocks
    for (std::size_t i = 0; i < 4; ++i) {
        REQUIRE(ent[i] == (i % 2 == 0 ? GateKind::CRX : GateKind::CRY));
        REQUIRE(ent[4 + i] == ent[i]);
    }
}

TEST_CASE("horizontal layout") {
    SECTION("register structure and counts") {
        const auto v = build_scheme("RX-CRX", 4, 4);
        const auto h = build_horizontal(v);
        REQUIRE(h.n_qubits == 8);
        REQUIRE(h.layout == Layout::HORIZONTAL);
        const auto sum = scheme_summary(h);
        // 2x4 encodings, 2x4 ROTs, 2 rings of 4 CRX, 1 boundary CRX.
        CHECK(sum.total_gates == 25);
        CHECK(sum.n_params == 2 * 4 * 3 + 8 + 1);
        CHECK(sum.two_qubit_gates == 9);
    }
    SECTION("boundary gates of a CNOT scheme carry no parameters") {
        const auto h = build_horizontal(build_scheme("RX-CNOT", 4, 4));
        const auto sum = scheme_summary(h);
        CHECK(sum.total_gates == 8 + 8 + 2 * 3 + 1);
        CHECK(sum.n_params == 24);
    }
    SECTION("qubit budget guard") {
        REQUIRE_THROWS_AS(build_horizontal(build_scheme("RX-CRX", 16, 16)), ConfigError);
    }
    SECTION("rejects double expansion") {
        const auto h = build_horizontal(build_scheme("RX-CRX", 4, 4));
        REQUIRE_THROWS_AS(build_horizontal(h), ConfigError);
    }
    SECTION("both layouts evaluate to finite expectations") {
        const auto v = build_scheme("RX-CRX", 3, 3);
        const auto h = build_horizontal(v);
        rng::Stream s(3);
        std::vector<double> pv(static_cast<std::size_t>(v.n_params));
        std::vector<double> ph(static_cast<std::size_t>(h.n_params));
        for (auto& t : pv) t = s.next_uniform(0, 2 * kPi);
        for (auto& t : ph) t = s.next_uniform(0, 2 * kPi);
        const std::vector<double> x = {0.2, 1.1, 2.9};
        for (double z : forward(v, pv, x)) REQUIRE(std::isfinite(z));
        const auto zh = forward(h, ph, x);
        REQUIRE(zh.size() == 6);
        for (double z : zh) REQUIRE(std::isfinite(z));
    }
}

TEST_CASE("encode_input") {
    const auto ops = encode_input({0.1, 0.2});
    REQUIRE(ops.size() == 2);
    REQUIRE(ops[1].kind == GateKind::RX);
    REQUIRE(ops[1].qubits[0] == 1);
    REQUIRE(ops[1].params[0].source == Param::Source::Literal);
    REQUIRE(ops[1].params[0].value == 0.2);
    REQUIRE_THROWS_AS(encode_input({}), EncodingError);
    REQUIRE_THROWS_AS(encode_input({0.1, std::nan("")}), EncodingError);
}

TEST_CASE("scheme_summary of an empty scheme is all zeros") {
    const CircuitScheme empty;
    const auto sum = scheme_summary(empty);
    CHECK(sum.total_gates == 0);
    CHECK(sum.n_params == 0);
    CHECK(sum.n_blocks == 0);
    CHECK(sum.depth == 0);
}

TEST_CASE("resolve_angles reports unbound slots") {
    const auto s = build_scheme("RX-CRX", 4, 4);
    std::vector<double> short_params(3, 0.0);
    std::vector<double> angles;
    bool threw = false;
    for (const auto& g : s.ops) {
        try {
            resolve_angles(g, short_params, {0.0, 0.0, 0.0, 0.0}, true, angles);
        } catch (const ExecutionError&) {
            threw = true;
            break;
        }
    }
    REQUIRE(threw);
}
