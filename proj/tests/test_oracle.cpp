// Copyright 2026 The qnpusim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "qnpu/error.hpp"
#include "qnpu/oracle.hpp"
#include "test_util.hpp"

namespace {

using namespace qnpu;
using namespace qnpu::oracle;
using sim::ProtocolTrace;
using sim::QubitLabel;
using sim::TraceOp;
using Zone = QubitLabel::Zone;

const double kInvSqrt2 = 1 / std::sqrt(2.0);

QubitLabel data(std::size_t node, std::uint32_t i = 0) { return {node, Zone::Data, i}; }
QubitLabel comm(std::size_t node, std::uint32_t i = 0) { return {node, Zone::Comm, i}; }

StateVector bell() {
    StateVector s(2);
    s.apply_gate(dqasm::Gate::H, {}, {0});
    s.apply_gate(dqasm::Gate::CNOT, {}, {0, 1});
    return s;
}

dqasm::CircuitIR two_nodes(const char* body) {
    return qnpu::testing::parse_text(std::string("qreg qa[1] @alice;\nqreg qb[1] @bob;\n") + body);
}

// Runs `ir`'s recorded trace on `in` (one qubit per declared data qubit, node order)
// with every workspace qubit in |0>, and returns the branches together with the
// positions of the declared data qubits.
struct ProgramRun {
    TraceResult result;
    std::vector<std::size_t> keep;
};

ProgramRun run_program(const dqasm::CircuitIR& ir, compiler::Protocol proto, const StateVector& in,
                       const ProtocolTrace* override_trace = nullptr) {
    ProtocolTrace tr = override_trace ? *override_trace : record_trace(ir, proto);
    std::vector<QubitLabel> labels;
    std::vector<std::uint32_t> per_node(ir.nodes.size(), 0);
    for (const auto& r : ir.registers) {
        for (std::size_t i = 0; i < r.size; ++i) labels.push_back(data(r.node, per_node[r.node]++));
    }
    const std::vector<QubitLabel> declared = labels;
    for (const auto& q : workspace_labels(tr, labels)) labels.push_back(q);
    ProgramRun out;
    out.result = apply_trace(in.tensor(StateVector(labels.size() - declared.size())), labels, tr);
    for (const auto& q : declared) out.keep.push_back(out.result.position.at(q));
    return out;
}

double worst_fidelity(const ProgramRun& r, const StateVector& want) {
    double w = 1;
    for (const auto& b : r.result.branches) {
        if (b.probability < 1e-12) continue;
        w = std::min(w, fidelity(want, partial_trace(b.state, r.keep)));
    }
    return w;
}

double probability_sum(const TraceResult& r) {
    double s = 0;
    for (const auto& b : r.branches) s += b.probability;
    return s;
}

// ---- state vector ---------------------------------------------------------------

TEST(StateVector, QubitZeroIsMostSignificant) {
    StateVector s(2);
    s.apply_gate(dqasm::Gate::X, {}, {0});
    EXPECT_NEAR(std::abs(s.amplitudes()[2]), 1, 1e-15);
    s.apply_gate(dqasm::Gate::CNOT, {}, {0, 1});
    EXPECT_NEAR(std::abs(s.amplitudes()[3]), 1, 1e-15);
}

TEST(StateVector, BellAmplitudes) {
    StateVector s = bell();
    EXPECT_NEAR(s.amplitudes()[0].real(), kInvSqrt2, 1e-15);
    EXPECT_NEAR(s.amplitudes()[3].real(), kInvSqrt2, 1e-15);
    EXPECT_NEAR(std::abs(s.amplitudes()[1]), 0, 1e-15);
    EXPECT_NEAR(s.probability_one(1), 0.5, 1e-15);
    EXPECT_NEAR(purity(partial_trace(s, {0})), 0.5, 1e-15);
    EXPECT_NEAR(purity(partial_trace(s, {0, 1})), 1, 1e-15);
}

TEST(StateVector, ProjectionCollapsesPartner) {
    StateVector s = bell();
    EXPECT_NEAR(s.project(0, 1), 0.5, 1e-15);
    EXPECT_NEAR(s.probability_one(1), 1, 1e-15);
    EXPECT_NEAR(s.norm(), 1, 1e-15);
}

TEST(StateVector, RotationsMatchClosedForm) {
    for (double th : {0.3, -1.2, 2.9}) {
        StateVector s(1);
        s.apply_gate(dqasm::Gate::RX, {th}, {0});
        EXPECT_NEAR(s.probability_one(0), std::pow(std::sin(th / 2), 2), 1e-14);
        StateVector t(1);
        t.apply_gate(dqasm::Gate::RY, {th}, {0});
        EXPECT_NEAR(t.probability_one(0), std::pow(std::sin(th / 2), 2), 1e-14);
    }
    StateVector p(2);
    p.apply_gate(dqasm::Gate::X, {}, {0});
    p.apply_gate(dqasm::Gate::X, {}, {1});
    p.apply_gate(dqasm::Gate::CP, {0.7}, {0, 1});
    EXPECT_NEAR(std::arg(p.amplitudes()[3]), 0.7, 1e-14);
}

TEST(StateVector, RandomStatesAreNormalized) {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 50; ++i) EXPECT_NEAR(random_state(3, rng).norm(), 1, kNormTolerance);
}

TEST(StateVector, RejectsBadAmplitudes) {
    EXPECT_THROW(StateVector::from_amplitudes({1, 1}), OracleError);
    EXPECT_THROW(StateVector::from_amplitudes({1, 0, 0}), OracleError);
    EXPECT_NO_THROW(StateVector::from_amplitudes({0, 1}));
}

TEST(StateVector, FidelityIgnoresGlobalPhase) {
    StateVector a = bell();
    std::vector<Amp> amps = a.amplitudes();
    for (auto& x : amps) x *= std::polar(1.0, 1.1);
    EXPECT_NEAR(fidelity(a, StateVector::from_amplitudes(amps)), 1, 1e-14);
}

// ---- trace execution ------------------------------------------------------------

TEST(ApplyTrace, EprPreparationMakesBellPair) {
    ProtocolTrace tr;
    TraceOp op;
    op.kind = TraceOp::Kind::EprPrepare;
    op.qubits = {comm(0), comm(1)};
    tr.ops.push_back(op);
    TraceResult r = apply_trace(StateVector(0), {}, tr);
    ASSERT_EQ(r.branches.size(), 1u);
    EXPECT_EQ(r.qubits, 2u);
    EXPECT_NEAR(fidelity(bell(), r.branches[0].state), 1, 1e-14);
}

TEST(ApplyTrace, EmptyTraceIsIdentity) {
    std::mt19937_64 rng(9);
    StateVector in = random_state(2, rng);
    TraceResult r = apply_trace(in, {data(0), data(1)}, ProtocolTrace{});
    ASSERT_EQ(r.branches.size(), 1u);
    EXPECT_NEAR(fidelity(in, r.branches[0].state), 1, 1e-14);
}

TEST(ApplyTrace, MeasurementBranchesSumToOne) {
    ProtocolTrace tr;
    TraceOp m;
    m.kind = TraceOp::Kind::Measure;
    m.qubits = {data(0)};
    m.meas_id = 0;
    tr.ops.push_back(m);
    TraceOp x;
    x.kind = TraceOp::Kind::Gate;
    x.gate = dqasm::Gate::X;
    x.qubits = {data(1)};
    x.condition = 0;
    tr.ops.push_back(x);
    tr.measurements = 1;
    TraceResult r = apply_trace(bell(), {data(0), data(1)}, tr);
    ASSERT_EQ(r.branches.size(), 2u);
    EXPECT_NEAR(probability_sum(r), 1, 1e-14);
    // The conditional X undoes the correlation: qubit 1 always ends in |0>.
    for (const auto& b : r.branches) EXPECT_NEAR(b.state.probability_one(1), 0, 1e-14);
}

TEST(ApplyTrace, Errors) {
    ProtocolTrace tr;
    TraceOp g;
    g.kind = TraceOp::Kind::Gate;
    g.gate = dqasm::Gate::H;
    g.qubits = {data(3)};
    tr.ops.push_back(g);
    EXPECT_THROW(apply_trace(StateVector(1), {data(0)}, tr), OracleError);  // unallocated label
    EXPECT_THROW(apply_trace(StateVector(2), {data(0), data(0)}, ProtocolTrace{}), OracleError);
    EXPECT_THROW(apply_trace(StateVector(kMaxQubits + 1), {}, ProtocolTrace{}), OracleError);

    ProtocolTrace cond;
    g.qubits = {data(0)};
    g.condition = 5;
    cond.ops.push_back(g);
    EXPECT_THROW(apply_trace(StateVector(1), {data(0)}, cond), OracleError);

    ProtocolTrace big;
    TraceOp e;
    e.kind = TraceOp::Kind::EprPrepare;
    for (std::uint32_t i = 0; i < kMaxQubits / 2 + 1; ++i) {
        e.qubits = {comm(0, i), comm(1, i)};
        big.ops.push_back(e);
    }
    EXPECT_THROW(apply_trace(StateVector(0), {}, big), OracleError);
}

// ---- compiled protocols ---------------------------------------------------------

TEST(Protocols, TeleportHasFourEqualBranches) {
    auto ir = two_nodes("teleport qa[0], qb[0];\n");
    std::mt19937_64 rng(2);
    StateVector in = random_state(1, rng).tensor(StateVector(1));
    ProgramRun r = run_program(ir, compiler::Protocol::Tp, in);
    ASSERT_EQ(r.result.branches.size(), 4u);
    for (const auto& b : r.result.branches) EXPECT_NEAR(b.probability, 0.25, 1e-12);
}

TEST(Protocols, TeleportMovesRandomStates) {
    auto ir = two_nodes("teleport qa[0], qb[0];\n");
    std::mt19937_64 rng(6);
    for (int i = 0; i < 20; ++i) {
        StateVector psi = random_state(1, rng);
        ProgramRun r = run_program(ir, compiler::Protocol::Tp, psi.tensor(StateVector(1)));
        ProgramRun moved{r.result, {r.keep[1]}};
        EXPECT_GE(worst_fidelity(moved, psi), kFidelityBound);
        EXPECT_NEAR(probability_sum(r.result), 1, 1e-9);
    }
}

TEST(Protocols, RemoteCnotFlipsTargetOnOne) {
    auto ir = two_nodes("cnot qa[0], qb[0];\n");
    StateVector in(2);
    in.apply_gate(dqasm::Gate::X, {}, {0});
    StateVector want(2);
    want.apply_gate(dqasm::Gate::X, {}, {0});
    want.apply_gate(dqasm::Gate::X, {}, {1});
    for (auto proto : {compiler::Protocol::Tp, compiler::Protocol::Cat}) {
        EXPECT_GE(worst_fidelity(run_program(ir, proto, in), want), kFidelityBound) << compiler::protocol_name(proto);
    }
}

TEST(Protocols, RemoteCnotEntanglesPlusState) {
    auto ir = two_nodes("cnot qa[0], qb[0];\n");
    StateVector in(2);
    in.apply_gate(dqasm::Gate::H, {}, {0});
    for (auto proto : {compiler::Protocol::Tp, compiler::Protocol::Cat}) {
        ProgramRun r = run_program(ir, proto, in);
        EXPECT_GE(worst_fidelity(r, bell()), kFidelityBound) << compiler::protocol_name(proto);
        for (const auto& b : r.result.branches) {
            if (b.probability > 1e-12) {
                EXPECT_NEAR(purity(partial_trace(b.state, r.keep)), 1, 1e-10);
            }
        }
    }
}

TEST(Protocols, GhzProgramsYieldGhzStates) {
    StateVector ghz3(3);
    ghz3.apply_gate(dqasm::Gate::H, {}, {0});
    for (std::size_t q = 1; q < 3; ++q) ghz3.apply_gate(dqasm::Gate::CNOT, {}, {0, q});

    // Cat version: r[0] carries the cat and is disentangled again, leaving the GHZ
    // state on q[0], q[1], r[1].
    auto cat = qnpu::testing::parse_data("ghz_cat.dqasm");
    ProgramRun c = run_program(cat, compiler::Protocol::Cat, StateVector(4));
    EXPECT_GE(worst_fidelity(ProgramRun{c.result, {c.keep[0], c.keep[1], c.keep[3]}}, ghz3), kFidelityBound);

    // Teleport version: q[1] is consumed, the GHZ state lives on q[0], r[0], r[1].
    auto tp = qnpu::testing::parse_data("ghz_tp.dqasm");
    ProgramRun t = run_program(tp, compiler::Protocol::Tp, StateVector(4));
    EXPECT_GE(worst_fidelity(ProgramRun{t.result, {t.keep[0], t.keep[2], t.keep[3]}}, ghz3), kFidelityBound);
}

TEST(Protocols, DroppedCorrectionIsCaught) {
    auto ir = two_nodes("teleport qa[0], qb[0];\n");
    ProtocolTrace tr = record_trace(ir, compiler::Protocol::Tp);
    auto it = std::find_if(tr.ops.begin(), tr.ops.end(), [](const TraceOp& o) { return o.condition.has_value(); });
    ASSERT_NE(it, tr.ops.end());
    tr.ops.erase(it);
    StateVector plus(1);
    plus.apply_gate(dqasm::Gate::H, {}, {0});
    plus.apply_gate(dqasm::Gate::RZ, {0.4}, {0});
    ProgramRun r = run_program(ir, compiler::Protocol::Tp, plus.tensor(StateVector(1)), &tr);
    ProgramRun moved{r.result, {r.keep[1]}};
    EXPECT_LT(worst_fidelity(moved, plus), 0.99);
}

TEST(Protocols, VerifiersPass) {
    VerifyReport tp = verify_teleport(100, 1);
    EXPECT_TRUE(tp.pass) << tp.text();
    EXPECT_EQ(tp.inputs, 101u);
    for (auto proto : {compiler::Protocol::Tp, compiler::Protocol::Cat}) {
        VerifyReport r = verify_remote_cnot(proto, 100, 1);
        EXPECT_TRUE(r.pass) << r.text();
        EXPECT_TRUE(r.ancillas_clean);
        EXPECT_NEAR(r.worst_probability_sum, 1, 1e-9);
    }
}

TEST(Protocols, SampledOutcomeIsOneOfTheBranches) {
    auto ir = two_nodes("cnot qa[0], qb[0];\n");
    ProtocolTrace tr = record_trace(ir, compiler::Protocol::Cat);
    std::vector<QubitLabel> labels = {data(0), data(1)};
    for (const auto& q : workspace_labels(tr, labels)) labels.push_back(q);
    StateVector in(labels.size());
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        TraceResult r = apply_trace(in, labels, tr, OutcomePolicy::Sample, seed);
        ASSERT_EQ(r.branches.size(), 1u);
        EXPECT_NEAR(r.branches[0].state.norm(), 1, 1e-12);
    }
}

}  // namespace
