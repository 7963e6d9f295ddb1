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

#include "qnpu/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "qnpu/error.hpp"

namespace qnpu::oracle {

namespace {

using sim::QubitLabel;
using sim::TraceOp;

constexpr double kZeroBranch = 1e-300;

std::size_t bit_of(std::size_t n, std::size_t q) { return std::size_t{1} << (n - 1 - q); }

std::array<Amp, 4> single_matrix(dqasm::Gate g, const std::vector<double>& p) {
    const double r = 1 / std::sqrt(2.0);
    const Amp i(0, 1);
    auto theta = [&] {
        if (p.empty()) throw OracleError("rotation gate without an angle");
        return p[0];
    };
    switch (g) {
        case dqasm::Gate::H: return {r, r, r, -r};
        case dqasm::Gate::X: return {0, 1, 1, 0};
        case dqasm::Gate::Y: return {0, -i, i, 0};
        case dqasm::Gate::Z: return {1, 0, 0, -1};
        case dqasm::Gate::RX: {
            double t = theta() / 2;
            return {std::cos(t), -i * std::sin(t), -i * std::sin(t), std::cos(t)};
        }
        case dqasm::Gate::RY: {
            double t = theta() / 2;
            return {std::cos(t), -std::sin(t), std::sin(t), std::cos(t)};
        }
        case dqasm::Gate::RZ: {
            double t = theta() / 2;
            return {std::exp(-i * t), 0, 0, std::exp(i * t)};
        }
        default: throw OracleError("not a single-qubit gate");
    }
}

std::array<Amp, 16> two_matrix(dqasm::Gate g, const std::vector<double>& p) {
    std::array<Amp, 16> m{};
    switch (g) {
        case dqasm::Gate::CNOT:
            m[0] = m[5] = m[11] = m[14] = 1;
            return m;
        case dqasm::Gate::CP:
            if (p.empty()) throw OracleError("cp gate without an angle");
            m[0] = m[5] = m[10] = 1;
            m[15] = std::exp(Amp(0, p[0]));
            return m;
        case dqasm::Gate::SWAP:
            m[0] = m[6] = m[9] = m[15] = 1;
            return m;
        default: throw OracleError("not a two-qubit gate");
    }
}

}  // namespace

StateVector::StateVector(std::size_t qubits) : n_(qubits) {
    if (qubits > kMaxQubits) throw OracleError("state exceeds " + std::to_string(kMaxQubits) + " qubits");
    a_.assign(std::size_t{1} << qubits, Amp(0));
    a_[0] = 1;
}

StateVector StateVector::from_amplitudes(std::vector<Amp> amps) {
    std::size_t n = 0;
    while ((std::size_t{1} << n) < amps.size()) ++n;
    if (amps.empty() || (std::size_t{1} << n) != amps.size()) throw OracleError("amplitude count is not a power of two");
    if (n > kMaxQubits) throw OracleError("state exceeds " + std::to_string(kMaxQubits) + " qubits");
    StateVector s;
    s.n_ = n;
    s.a_ = std::move(amps);
    if (std::abs(s.norm() - 1) > kNormTolerance) throw OracleError("input state is not normalized");
    return s;
}

double StateVector::norm() const {
    double s = 0;
    for (const Amp& x : a_) s += std::norm(x);
    return s;
}

void StateVector::apply1(std::size_t q, const std::array<Amp, 4>& m) {
    if (q >= n_) throw OracleError("qubit index out of range");
    const std::size_t b = bit_of(n_, q);
    for (std::size_t i = 0; i < a_.size(); ++i) {
        if (i & b) continue;
        Amp x = a_[i], y = a_[i | b];
        a_[i] = m[0] * x + m[1] * y;
        a_[i | b] = m[2] * x + m[3] * y;
    }
}

void StateVector::apply2(std::size_t a, std::size_t b, const std::array<Amp, 16>& m) {
    if (a >= n_ || b >= n_ || a == b) throw OracleError("bad two-qubit operands");
    const std::size_t ba = bit_of(n_, a), bb = bit_of(n_, b);
    for (std::size_t i = 0; i < a_.size(); ++i) {
        if (i & (ba | bb)) continue;
        const std::size_t idx[4] = {i, i | bb, i | ba, i | ba | bb};
        Amp v[4];
        for (int k = 0; k < 4; ++k) v[k] = a_[idx[k]];
        for (int r = 0; r < 4; ++r) {
            Amp s = 0;
            for (int c = 0; c < 4; ++c) s += m[r * 4 + c] * v[c];
            a_[idx[r]] = s;
        }
    }
}

void StateVector::apply_gate(dqasm::Gate g, const std::vector<double>& params, const std::vector<std::size_t>& qs) {
    if (qs.size() != dqasm::gate_arity(g)) throw OracleError("gate arity mismatch");
    if (qs.size() == 1) {
        apply1(qs[0], single_matrix(g, params));
    } else {
        apply2(qs[0], qs[1], two_matrix(g, params));
    }
}

double StateVector::probability_one(std::size_t q) const {
    if (q >= n_) throw OracleError("qubit index out of range");
    const std::size_t b = bit_of(n_, q);
    double p = 0;
    for (std::size_t i = 0; i < a_.size(); ++i) {
        if (i & b) p += std::norm(a_[i]);
    }
    return p;
}

double StateVector::project(std::size_t q, int bit) {
    if (q >= n_) throw OracleError("qubit index out of range");
    const std::size_t b = bit_of(n_, q);
    double p = 0;
    for (std::size_t i = 0; i < a_.size(); ++i) {
        if (((i & b) != 0) != (bit != 0)) {
            a_[i] = 0;
        } else {
            p += std::norm(a_[i]);
        }
    }
    if (p > kZeroBranch) {
        const double s = 1 / std::sqrt(p);
        for (Amp& x : a_) x *= s;
    } else {
        std::fill(a_.begin(), a_.end(), Amp(0));
        p = 0;
    }
    return p;
}

StateVector StateVector::tensor(const StateVector& o) const {
    if (n_ + o.n_ > kMaxQubits) throw OracleError("state exceeds " + std::to_string(kMaxQubits) + " qubits");
    StateVector s;
    s.n_ = n_ + o.n_;
    s.a_.assign(a_.size() * o.a_.size(), Amp(0));
    for (std::size_t i = 0; i < a_.size(); ++i) {
        for (std::size_t j = 0; j < o.a_.size(); ++j) s.a_[i * o.a_.size() + j] = a_[i] * o.a_[j];
    }
    return s;
}

StateVector random_state(std::size_t qubits, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0, 1);
    std::vector<Amp> v(std::size_t{1} << qubits);
    double s = 0;
    for (Amp& x : v) {
        x = Amp(g(rng), g(rng));
        s += std::norm(x);
    }
    for (Amp& x : v) x /= std::sqrt(s);
    return StateVector::from_amplitudes(std::move(v));
}

DensityMatrix partial_trace(const StateVector& psi, const std::vector<std::size_t>& keep) {
    const std::size_t n = psi.qubits();
    std::set<std::size_t> uniq(keep.begin(), keep.end());
    if (uniq.size() != keep.size()) throw OracleError("duplicate qubit in partial trace");
    for (auto q : keep) {
        if (q >= n) throw OracleError("qubit index out of range");
    }
    DensityMatrix rho;
    rho.dim = std::size_t{1} << keep.size();
    rho.m.assign(rho.dim * rho.dim, Amp(0));
    std::vector<std::size_t> rest;
    for (std::size_t q = 0; q < n; ++q) {
        if (!uniq.count(q)) rest.push_back(q);
    }
    const auto& a = psi.amplitudes();
    std::vector<Amp> v(rho.dim);
    for (std::size_t o = 0; o < (std::size_t{1} << rest.size()); ++o) {
        std::size_t base = 0;
        for (std::size_t k = 0; k < rest.size(); ++k) {
            if (o & bit_of(rest.size(), k)) base |= bit_of(n, rest[k]);
        }
        for (std::size_t r = 0; r < rho.dim; ++r) {
            std::size_t idx = base;
            for (std::size_t k = 0; k < keep.size(); ++k) {
                if (r & bit_of(keep.size(), k)) idx |= bit_of(n, keep[k]);
            }
            v[r] = a[idx];
        }
        for (std::size_t r = 0; r < rho.dim; ++r) {
            for (std::size_t c = 0; c < rho.dim; ++c) rho.m[r * rho.dim + c] += v[r] * std::conj(v[c]);
        }
    }
    return rho;
}

double purity(const DensityMatrix& rho) {
    double s = 0;
    for (const Amp& x : rho.m) s += std::norm(x);  // tr(rho^2) for Hermitian rho
    return s;
}

double fidelity(const StateVector& ref, const DensityMatrix& rho) {
    const auto& v = ref.amplitudes();
    if (v.size() != rho.dim) throw OracleError("dimension mismatch in fidelity");
    Amp s = 0;
    for (std::size_t r = 0; r < rho.dim; ++r) {
        for (std::size_t c = 0; c < rho.dim; ++c) s += std::conj(v[r]) * rho.at(r, c) * v[c];
    }
    return s.real();
}

double fidelity(const StateVector& a, const StateVector& b) {
    if (a.amplitudes().size() != b.amplitudes().size()) throw OracleError("dimension mismatch in fidelity");
    Amp s = 0;
    for (std::size_t i = 0; i < a.amplitudes().size(); ++i) s += std::conj(a.amplitudes()[i]) * b.amplitudes()[i];
    return std::norm(s);
}

TraceResult apply_trace(const StateVector& psi, const std::vector<QubitLabel>& inputs, const sim::ProtocolTrace& tr,
                        OutcomePolicy policy, std::uint64_t seed) {
    if (psi.amplitudes().size() != (std::size_t{1} << psi.qubits()) || std::abs(psi.norm() - 1) > kNormTolerance) {
        throw OracleError("input state is not normalized");
    }
    if (inputs.size() != psi.qubits()) throw OracleError("one label per input qubit required");
    TraceResult res;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (!res.position.emplace(inputs[i], i).second) throw OracleError("duplicate input label " + sim::label_text(inputs[i]));
    }
    res.qubits = psi.qubits();
    std::int64_t meas_slots = std::max<std::int64_t>(tr.measurements, 0);
    for (const TraceOp& op : tr.ops) meas_slots = std::max(meas_slots, op.meas_id + 1);
    res.branches.push_back(Branch{1.0, std::vector<int>(static_cast<std::size_t>(meas_slots), -1), psi});
    std::mt19937_64 rng(seed);

    auto grow = [&](std::size_t k) {
        if (res.qubits + k > kMaxQubits) throw OracleError("trace needs more than " + std::to_string(kMaxQubits) + " qubits");
        StateVector zero(k);
        for (Branch& b : res.branches) b.state = b.state.tensor(zero);
        res.qubits += k;
    };
    auto pos = [&](const QubitLabel& q) -> std::size_t {
        auto it = res.position.find(q);
        if (it == res.position.end()) throw OracleError("trace references unallocated qubit " + sim::label_text(q));
        return it->second;
    };

    for (const TraceOp& op : tr.ops) {
        switch (op.kind) {
            case TraceOp::Kind::EprPrepare: {
                if (op.qubits.size() != 2) throw OracleError("EPR preparation needs two qubits");
                grow(2);
                const std::size_t a = res.qubits - 2, b = res.qubits - 1;
                res.position[op.qubits[0]] = a;
                res.position[op.qubits[1]] = b;
                for (Branch& br : res.branches) {
                    br.state.apply_gate(dqasm::Gate::H, {}, {a});
                    br.state.apply_gate(dqasm::Gate::CNOT, {}, {a, b});
                }
                break;
            }
            case TraceOp::Kind::Swap: {
                if (op.qubits.size() != 2) throw OracleError("swap needs two qubits");
                std::size_t a = pos(op.qubits[0]);
                std::size_t b = pos(op.qubits[1]);
                res.position[op.qubits[0]] = b;
                res.position[op.qubits[1]] = a;
                break;
            }
            case TraceOp::Kind::Gate: {
                std::vector<std::size_t> qs;
                for (const auto& q : op.qubits) qs.push_back(pos(q));
                for (Branch& br : res.branches) {
                    if (op.condition) {
                        auto c = static_cast<std::size_t>(*op.condition);
                        if (*op.condition < 0 || c >= br.outcomes.size() || br.outcomes[c] < 0) {
                            throw OracleError("gate conditioned on an unknown measurement");
                        }
                        if (br.outcomes[c] != 1) continue;
                    }
                    br.state.apply_gate(op.gate, op.params, qs);
                }
                break;
            }
            case TraceOp::Kind::Measure: {
                if (op.qubits.size() != 1 || op.meas_id < 0) throw OracleError("malformed measurement");
                const std::size_t q = pos(op.qubits[0]);
                const auto id = static_cast<std::size_t>(op.meas_id);
                std::vector<Branch> next;
                for (Branch& br : res.branches) {
                    if (policy == OutcomePolicy::Sample) {
                        const double p1 = br.state.probability_one(q);
                        int bit = std::uniform_real_distribution<double>(0, 1)(rng) < p1 ? 1 : 0;
                        br.outcomes[id] = bit;
                        br.state.project(q, bit);
                        next.push_back(std::move(br));
                        continue;
                    }
                    for (int bit = 0; bit < 2; ++bit) {
                        Branch nb = br;
                        nb.probability = br.probability * nb.state.project(q, bit);
                        nb.outcomes[id] = bit;
                        next.push_back(std::move(nb));
                    }
                }
                res.branches = std::move(next);
                break;
            }
        }
    }
    return res;
}

std::vector<QubitLabel> workspace_labels(const sim::ProtocolTrace& tr, const std::vector<QubitLabel>& inputs) {
    std::set<QubitLabel> known(inputs.begin(), inputs.end());
    std::vector<QubitLabel> out;
    for (const TraceOp& op : tr.ops) {
        for (const QubitLabel& q : op.qubits) {
            if (known.insert(q).second && op.kind != TraceOp::Kind::EprPrepare) out.push_back(q);
        }
    }
    return out;
}

std::string VerifyReport::text() const {
    std::ostringstream os;
    os.precision(15);
    os << name << ": " << (pass ? "PASS" : "FAIL") << " inputs=" << inputs << " branches=" << branches
       << " worst_fidelity=" << worst_fidelity << " probability_sum=" << worst_probability_sum
       << " ancillas_clean=" << (ancillas_clean ? "yes" : "no");
    return os.str();
}

sim::ProtocolTrace record_trace(const dqasm::CircuitIR& ir, compiler::Protocol protocol) {
    sim::ArchConfig cfg;
    cfg.mode = sim::Mode::Decoupled;
    cfg.qnpu_width = 1;
    cfg.protocol = protocol;
    sim::EngineOptions o;
    o.record_trace = true;
    return sim::simulate_circuit(ir, cfg, o).trace;
}

namespace {

constexpr double kBranchFloor = 1e-12;
constexpr double kBasisTolerance = 1e-10;

dqasm::CircuitIR two_node_ir() {
    dqasm::CircuitIR ir;
    ir.nodes = {{"alice", 0}, {"bob", 1}};
    ir.registers = {{"qa", 1, 0}, {"qb", 1, 1}};
    return ir;
}

QubitLabel data_label(std::size_t node) { return {node, QubitLabel::Zone::Data, 0}; }

// Fidelity of `ref` against the reduced state of `keep`, plus the basis check on every
// other qubit. Updates the report; zero-probability branches are only counted.
void check_branches(const TraceResult& tr, const std::vector<std::size_t>& keep, const StateVector& ref, VerifyReport& rep) {
    double total = 0;
    for (const Branch& b : tr.branches) {
        total += b.probability;
        ++rep.branches;
        if (b.probability < kBranchFloor) continue;
        rep.worst_fidelity = std::min(rep.worst_fidelity, fidelity(ref, partial_trace(b.state, keep)));
        for (std::size_t q = 0; q < tr.qubits; ++q) {
            if (std::find(keep.begin(), keep.end(), q) != keep.end()) continue;
            double p = b.state.probability_one(q);
            if (p > kBasisTolerance && p < 1 - kBasisTolerance) rep.ancillas_clean = false;
        }
    }
    if (std::abs(total - 1) > std::abs(rep.worst_probability_sum - 1)) rep.worst_probability_sum = total;
}

}  // namespace

VerifyReport verify_teleport(std::size_t samples, std::uint64_t seed) {
    dqasm::CircuitIR ir = two_node_ir();
    ir.stmts.push_back({dqasm::Teleport{{"qa", 0, 0}, {"qb", 0, 1}}});
    const sim::ProtocolTrace trace = record_trace(ir, compiler::Protocol::Tp);

    VerifyReport rep;
    rep.name = "teleport";
    std::mt19937_64 rng(seed);
    const QubitLabel src = data_label(0), dst = data_label(1);
    std::vector<QubitLabel> labels = {src};
    for (const auto& q : workspace_labels(trace, labels)) labels.push_back(q);
    const StateVector zero(labels.size() - 1);
    for (std::size_t s = 0; s < samples; ++s) {
        StateVector in = random_state(1, rng);
        TraceResult r = apply_trace(in.tensor(zero), labels, trace);
        if (!r.position.count(dst)) throw OracleError("teleport trace never reaches the destination qubit");
        check_branches(r, {r.position.at(dst)}, in, rep);
        ++rep.inputs;
    }
    // Entanglement is carried too: teleport one half of a Bell pair whose partner sits
    // on a node the trace never touches.
    const QubitLabel outside{ir.nodes.size(), QubitLabel::Zone::Data, 0};
    StateVector bell(2);
    bell.apply_gate(dqasm::Gate::H, {}, {0});
    bell.apply_gate(dqasm::Gate::CNOT, {}, {0, 1});
    labels.insert(labels.begin(), outside);
    TraceResult r = apply_trace(bell.tensor(zero), labels, trace);
    check_branches(r, {r.position.at(outside), r.position.at(dst)}, bell, rep);
    ++rep.inputs;

    rep.pass = rep.worst_fidelity >= kFidelityBound && rep.ancillas_clean &&
               std::abs(rep.worst_probability_sum - 1) < 1e-9;
    return rep;
}

VerifyReport verify_remote_cnot(compiler::Protocol protocol, std::size_t samples, std::uint64_t seed) {
    dqasm::CircuitIR ir = two_node_ir();
    ir.stmts.push_back({dqasm::LocalGate{dqasm::Gate::CNOT, {}, {{"qa", 0, 0}, {"qb", 0, 1}}}});
    const sim::ProtocolTrace trace = record_trace(ir, protocol);

    VerifyReport rep;
    rep.name = std::string("remote_cnot_") + std::string(compiler::protocol_name(protocol));
    std::mt19937_64 rng(seed);
    const QubitLabel a = data_label(0), b = data_label(1);
    std::vector<QubitLabel> labels = {a, b};
    for (const auto& q : workspace_labels(trace, labels)) labels.push_back(q);
    const StateVector zero(labels.size() - 2);
    for (std::size_t s = 0; s < samples; ++s) {
        StateVector in = random_state(2, rng);
        StateVector want = in;
        want.apply_gate(dqasm::Gate::CNOT, {}, {0, 1});
        TraceResult r = apply_trace(in.tensor(zero), labels, trace);
        check_branches(r, {r.position.at(a), r.position.at(b)}, want, rep);
        ++rep.inputs;
    }
    rep.pass = rep.worst_fidelity >= kFidelityBound && rep.ancillas_clean &&
               std::abs(rep.worst_probability_sum - 1) < 1e-9;
    return rep;
}

}  // namespace qnpu::oracle
