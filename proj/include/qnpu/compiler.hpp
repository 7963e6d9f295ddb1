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

// Lowering of a validated circuit into per-node QPU streams with
// delegated QNPU protocol instructions.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qnpu/dqasm.hpp"
#include "qnpu/isa.hpp"

namespace qnpu::compiler {

using core::TransferId;

enum class Protocol { Tp, Cat };

std::string_view protocol_name(Protocol p);
Protocol protocol_from_name(std::string_view s);  // throws ConfigError

struct Apply {
    dqasm::Gate gate = dqasm::Gate::H;
    std::vector<std::uint32_t> qubits;  // local indices
    std::vector<double> params;

    bool operator==(const Apply&) const = default;
};

struct ZoneMoveToComm {
    std::uint32_t qubit = 0;

    bool operator==(const ZoneMoveToComm&) const = default;
};

/// `from` names the transfer whose received state is moved in from the
/// communication zone; absent for a plain return of a local qubit.
struct ZoneMoveToComp {
    std::uint32_t qubit = 0;
    std::optional<TransferId> from;

    bool operator==(const ZoneMoveToComp&) const = default;
};

struct Delegate {
    core::ProtocolInstruction p;

    bool operator==(const Delegate&) const = default;
};

struct WaitNotify {
    TransferId transfer = 0;

    bool operator==(const WaitNotify&) const = default;
};

struct MeasureQ {
    std::uint32_t qubit = 0;
    dqasm::BitRef bit;

    bool operator==(const MeasureQ&) const = default;
};

using QpuInstr = std::variant<Apply, ZoneMoveToComm, ZoneMoveToComp, Delegate, WaitNotify, MeasureQ>;

struct NodeProgram {
    std::size_t node = 0;
    std::string name;
    std::uint32_t data_qubits = 0;   // declared qubits: local indices [0, data_qubits)
    std::uint32_t local_qubits = 0;  // data qubits plus compiler-allocated proxies
    std::vector<QpuInstr> qpu_stream;
    /// (earlier, later) stream indices; filled by dependency_analysis.
    std::vector<std::pair<std::size_t, std::size_t>> dep_edges;

    /// Predecessor lists indexed by stream position.
    std::vector<std::vector<std::size_t>> predecessors() const;
};

enum class ProxyPolicy {
    Fresh,      // a new proxy index for every remote gate
    Fixed,      // cycle through `proxy_pool` proxies per node
    DataSized,  // cycle through as many proxies as the node has data qubits
    Operand,    // one proxy per data qubit, paired with the gate's local operand
};

std::string_view proxy_policy_name(ProxyPolicy p);
ProxyPolicy proxy_policy_from_name(std::string_view s);  // throws ConfigError

/// Order in which a flat gate list is emitted into the node streams.
enum class Schedule {
    ProgramOrder,  // as written
    Layered,       // stable sort by as-soon-as-possible depth
};

/// How dependency_analysis orders instructions that share a qubit.
enum class DependencyModel {
    Serial,           // every touch is a write
    CommuteDiagonal,  // touches diagonal in the computational basis commute with each other
};

struct LowerOptions {
    Protocol protocol = Protocol::Cat;
    dqasm::ParseMode mode = dqasm::ParseMode::Relaxed;
    /// Proxy qubits that receive the remote operand of an expanded gate.
    ProxyPolicy proxy_policy = ProxyPolicy::DataSized;
    /// Pool size for ProxyPolicy::Fixed.
    std::uint32_t proxy_pool = 1;
    Schedule schedule = Schedule::Layered;
    DependencyModel dependencies = DependencyModel::CommuteDiagonal;
    /// Let repeated remote gates on one (control, target) pair share a single cat.
    bool group_cats = true;
};

/// One NodeProgram per node, in node order, with dependency edges already computed.
/// Throws CompileError for a residual cross-node gate in strict mode or an unpaired
/// cat_ent / cat_disent.
std::vector<NodeProgram> lower(const dqasm::CircuitIR& ir, const LowerOptions& opts = {});

struct RemoteCounts {
    std::size_t total = 0;
    std::size_t max_per_node = 0;
    std::vector<std::size_t> per_node;

    bool operator==(const RemoteCounts&) const = default;
};

/// Two-qubit gates with operands on different nodes.
RemoteCounts count_remote_gates(const dqasm::CircuitIR& ir);

/// Qubits an instruction reads or writes (every touch is treated as a write).
std::vector<std::uint32_t> touched_qubits(const QpuInstr& in);

/// Qubits an instruction touches, each flagged true when the action on that qubit is
/// diagonal in the computational basis (CP operands, CNOT control, RZ, Z, the source
/// of a cat-entangler and the home qubit of a cat-disentangler).
std::vector<std::pair<std::uint32_t, bool>> qubit_touches(const QpuInstr& in);

/// Recomputes dep_edges. Under Serial an instruction depends on the previous toucher of
/// each shared qubit; under CommuteDiagonal diagonal touches depend only on the last
/// non-diagonal one, and a non-diagonal touch depends on everything since. Transfers add
/// Delegate(t) -> WaitNotify(t) -> ZoneMoveToComp(from t).
NodeProgram dependency_analysis(NodeProgram p, DependencyModel model = DependencyModel::CommuteDiagonal);

/// True when `later` is reachable from `earlier` through dep_edges.
bool depends_on(const NodeProgram& p, std::size_t earlier, std::size_t later);

std::string instr_text(const QpuInstr& in, const std::vector<std::string>& node_names);

/// One instruction per line followed by its predecessor list in brackets.
std::string dump(const NodeProgram& p, const std::vector<std::string>& node_names);

}  // namespace qnpu::compiler
