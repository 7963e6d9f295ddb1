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

// DistQASM front end: an OpenQASM-2 statement subset extended with
// node-annotated registers, explicit communication statements and
// remote-block pragmas.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace qnpu::dqasm {

inline constexpr std::size_t kUnresolved = static_cast<std::size_t>(-1);

struct SourceProgram {
    std::string text;
    std::string origin = "<inline>";
};

struct NodeId {
    std::string name;
    std::size_t index = 0;

    bool operator==(const NodeId&) const = default;
};

struct QuantumRegister {
    std::string name;
    std::size_t size = 0;
    std::size_t node = 0;  // index into CircuitIR::nodes

    bool operator==(const QuantumRegister&) const = default;
};

struct ClassicalRegister {
    std::string name;
    std::size_t size = 0;

    bool operator==(const ClassicalRegister&) const = default;
};

struct QubitRef {
    std::string reg;
    std::size_t offset = 0;
    std::size_t node = kUnresolved;  // home node, resolved from the register declaration

    bool operator==(const QubitRef&) const = default;
};

struct BitRef {
    std::string reg;
    std::size_t offset = 0;

    bool operator==(const BitRef&) const = default;
};

enum class Gate : std::uint8_t { H, X, Y, Z, RX, RY, RZ, CNOT, CP, SWAP };

std::string_view gate_name(Gate g);
std::optional<Gate> gate_from_name(std::string_view name);
std::size_t gate_arity(Gate g);
std::size_t gate_param_count(Gate g);

struct LocalGate {
    Gate gate = Gate::H;
    std::vector<double> params;  // radians
    std::vector<QubitRef> qubits;

    bool operator==(const LocalGate&) const = default;
};

struct Teleport {
    QubitRef src;
    QubitRef dst;

    bool operator==(const Teleport&) const = default;
};

struct CatEnt {
    QubitRef src;
    QubitRef dst;

    bool operator==(const CatEnt&) const = default;
};

struct CatDisent {
    QubitRef remote;
    QubitRef home;

    bool operator==(const CatDisent&) const = default;
};

struct Measure {
    QubitRef qubit;
    BitRef bit;

    bool operator==(const Measure&) const = default;
};

struct Stmt;

struct RemoteBlock {
    std::size_t node = 0;
    std::vector<Stmt> body;

    bool operator==(const RemoteBlock&) const;
};

struct Stmt {
    std::variant<LocalGate, Teleport, CatEnt, CatDisent, RemoteBlock, Measure> value;

    bool operator==(const Stmt&) const = default;
};

inline bool RemoteBlock::operator==(const RemoteBlock& o) const {
    return node == o.node && body == o.body;
}

struct CircuitIR {
    std::vector<NodeId> nodes;
    std::vector<QuantumRegister> registers;
    std::vector<ClassicalRegister> cregs;
    std::vector<Stmt> stmts;

    bool operator==(const CircuitIR&) const = default;

    const QuantumRegister* find_register(std::string_view name) const;
    /// Number of data qubits declared on `node`.
    std::size_t node_qubit_count(std::size_t node) const;
    /// Dense per-node index of a qubit: registers of the node in declaration order, then offset.
    std::size_t local_index(const QubitRef& q) const;
};

enum class ParseMode { Strict, Relaxed };

/// Parses DistQASM text. Throws ParseError.
CircuitIR parse(const SourceProgram& src);

struct ValidationReport {
    std::size_t node_count = 0;
    std::vector<std::size_t> qubits_per_node;
    /// LocalGate statements whose operands live on different nodes.
    std::size_t cross_node_gates = 0;
};

/// Checks residency and declaration invariants. Throws ValidationError.
/// In strict mode any cross-node LocalGate is an error.
ValidationReport validate(const CircuitIR& ir, ParseMode mode = ParseMode::Relaxed);

/// Canonical text: one statement per line, single spaces, lowercase keywords.
SourceProgram emit(const CircuitIR& ir);

/// Shortest text that parses back to exactly `v`.
std::string format_angle(double v);

}  // namespace qnpu::dqasm
