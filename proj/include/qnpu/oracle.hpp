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

// Dense state-vector oracle for protocol traces. Small (<= 12 qubits) and exact:
// every measurement branch is enumerated.

#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "qnpu/compiler.hpp"
#include "qnpu/dqasm.hpp"
#include "qnpu/engine.hpp"

namespace qnpu::oracle {

using Amp = std::complex<double>;

inline constexpr std::size_t kMaxQubits = 12;
inline constexpr double kNormTolerance = 1e-12;

/// Qubit 0 is the most significant bit of the basis index.
class StateVector {
public:
    explicit StateVector(std::size_t qubits = 0);  // |0...0>
    /// Throws OracleError unless the length is a power of two and the norm is 1.
    static StateVector from_amplitudes(std::vector<Amp> amps);

    std::size_t qubits() const { return n_; }
    const std::vector<Amp>& amplitudes() const { return a_; }
    double norm() const;  // sum of squared magnitudes

    void apply1(std::size_t q, const std::array<Amp, 4>& m);
    /// 4x4 row-major matrix on (a, b), `a` taking the high bit of the matrix index.
    void apply2(std::size_t a, std::size_t b, const std::array<Amp, 16>& m);
    void apply_gate(dqasm::Gate g, const std::vector<double>& params, const std::vector<std::size_t>& qs);

    double probability_one(std::size_t q) const;
    /// Projects qubit `q` onto `bit` and renormalizes. Returns the branch probability.
    double project(std::size_t q, int bit);

    /// this (x) other, other's qubits appended after ours.
    StateVector tensor(const StateVector& other) const;

private:
    std::size_t n_ = 0;
    std::vector<Amp> a_;
};

/// Haar-random state on `qubits` qubits.
StateVector random_state(std::size_t qubits, std::mt19937_64& rng);

struct DensityMatrix {
    std::size_t dim = 0;
    std::vector<Amp> m;  // row-major

    Amp at(std::size_t r, std::size_t c) const { return m[r * dim + c]; }
};

/// Reduced state of the qubits in `keep`, in that order.
DensityMatrix partial_trace(const StateVector& psi, const std::vector<std::size_t>& keep);
double purity(const DensityMatrix& rho);
/// <ref|rho|ref>.
double fidelity(const StateVector& ref, const DensityMatrix& rho);
/// |<a|b>|^2, insensitive to global phase.
double fidelity(const StateVector& a, const StateVector& b);

enum class OutcomePolicy { EnumerateAll, Sample };

struct Branch {
    double probability = 0;
    std::vector<int> outcomes;  // indexed by measurement id
    StateVector state;          // normalized; zero vector when probability is 0
};

struct TraceResult {
    std::vector<Branch> branches;
    /// Final position of every label seen, inputs included.
    std::map<sim::QubitLabel, std::size_t> position;
    std::size_t qubits = 0;
};

/// Runs `tr` on `psi`, whose qubit i carries label `inputs[i]`. An EPR preparation
/// always takes two fresh qubits and rebinds its labels; every other label must be an
/// input or an EPR half. Throws OracleError on an unnormalized input, a duplicate input
/// label, an unallocated qubit, a condition on an unknown measurement or more than
/// kMaxQubits qubits.
TraceResult apply_trace(const StateVector& psi, const std::vector<sim::QubitLabel>& inputs,
                        const sim::ProtocolTrace& tr, OutcomePolicy policy = OutcomePolicy::EnumerateAll,
                        std::uint64_t seed = 0);

/// Labels the trace uses before any EPR preparation binds them and that are not in
/// `inputs`, in first-use order: compiler-allocated proxies and the like. Callers
/// start them in |0>.
std::vector<sim::QubitLabel> workspace_labels(const sim::ProtocolTrace& tr, const std::vector<sim::QubitLabel>& inputs);

struct VerifyReport {
    std::string name;
    std::size_t inputs = 0;
    std::size_t branches = 0;         // branches checked, summed over inputs
    double worst_fidelity = 1;
    double worst_probability_sum = 1;  // farthest from one
    bool ancillas_clean = true;       // every other qubit left in a computational basis state
    bool pass = false;

    std::string text() const;
};

/// Protocol trace of `ir` recorded by the engine (decoupled scalar, default latencies).
sim::ProtocolTrace record_trace(const dqasm::CircuitIR& ir, compiler::Protocol protocol);

/// Teleports one qubit between two nodes for `samples` random inputs, plus one half of
/// a Bell pair whose partner stays out of the trace.
VerifyReport verify_teleport(std::size_t samples = 100, std::uint64_t seed = 1);

/// Remote CNOT between two nodes through the full compiled expansion.
VerifyReport verify_remote_cnot(compiler::Protocol protocol, std::size_t samples = 100, std::uint64_t seed = 1);

inline constexpr double kFidelityBound = 1 - 1e-10;

}  // namespace qnpu::oracle
