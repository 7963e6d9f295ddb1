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

// Cycle-level multi-node simulation of the monolithic, scalar-QNPU and
// superscalar-QNPU architectures.

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qnpu/compiler.hpp"
#include "qnpu/config.hpp"
#include "qnpu/dqasm.hpp"
#include "qnpu/resources.hpp"

namespace qnpu::sim {

/// Physical qubit label used by protocol traces.
struct QubitLabel {
    enum class Zone : std::uint8_t { Data, Comm };
    std::size_t node = 0;
    Zone zone = Zone::Data;
    std::uint32_t index = 0;

    bool operator==(const QubitLabel&) const = default;
    auto operator<=>(const QubitLabel&) const = default;
};

std::string label_text(const QubitLabel& q);

struct TraceOp {
    enum class Kind : std::uint8_t {
        EprPrepare,  // fresh pair (|00> + |11>)/sqrt2 on qubits[0], qubits[1]
        Gate,        // unitary, optionally conditioned on a measurement
        Measure,     // Z-basis measurement of qubits[0] producing meas_id
        Swap,        // state exchange of qubits[0] and qubits[1] (zone transition)
    };
    Kind kind = Kind::Gate;
    std::uint64_t cycle = 0;
    dqasm::Gate gate = dqasm::Gate::H;
    std::vector<double> params;
    std::vector<QubitLabel> qubits;
    std::int64_t meas_id = -1;
    std::optional<std::int64_t> condition;  // apply iff measurement `condition` read 1
};

struct ProtocolTrace {
    std::vector<TraceOp> ops;
    std::int64_t measurements = 0;
};

struct NodeStats {
    std::uint64_t finish_cycle = 0;
    std::uint64_t instructions = 0;
    std::uint64_t delegates = 0;
    std::uint64_t uops = 0;
    std::uint64_t lane_busy_cycles = 0;  // summed over lanes
};

struct SimResult {
    std::uint64_t total_cycles = 0;
    std::vector<NodeStats> nodes;
    compiler::RemoteCounts counts;
    ArchConfig config;
    std::uint64_t messages = 0;
    std::uint64_t epr_pairs = 0;
    ProtocolTrace trace;  // filled only when EngineOptions::record_trace is set
};

struct EngineOptions {
    bool record_trace = false;
    std::ostream* log = nullptr;  // per-cycle event log, one line per event
    /// Node display names for the log; defaults to program names.
    std::vector<std::string> node_names;
};

class Engine {
public:
    /// `programs` must come from compiler::lower (dependency edges present).
    Engine(std::vector<compiler::NodeProgram> programs, ArchConfig cfg, EngineOptions opts = {});
    ~Engine();
    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    /// Fires every event of the current cycle, issues, then advances the clock by one.
    /// Returns the number of events fired. Throws SimulationError on deadlock.
    std::size_t step();

    /// Runs to completion, skipping idle cycles.
    SimResult run();

    bool done() const;
    std::uint64_t now() const;
    std::size_t node_count() const;
    const core::EprResourceTable& epr_table(std::size_t node) const;
    const core::NetworkBuffers& network() const;
    /// Number of decoder lanes (or the monolithic unit) currently holding an instruction.
    std::size_t busy_lanes(std::size_t node) const;
    std::uint64_t uops_issued() const;
    std::uint64_t uops_completed() const;
    SimResult result() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

SimResult simulate(std::vector<compiler::NodeProgram> programs, const ArchConfig& cfg, const EngineOptions& opts = {});

/// Lowers `ir` with the config's protocol, attaches remote-gate counts and simulates.
SimResult simulate_circuit(const dqasm::CircuitIR& ir, const ArchConfig& cfg, const EngineOptions& opts = {});

}  // namespace qnpu::sim
