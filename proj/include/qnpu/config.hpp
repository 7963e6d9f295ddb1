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

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "qnpu/compiler.hpp"

namespace qnpu::sim {

struct LatencyModel {
    std::uint32_t single_qubit_gate = 1;
    std::uint32_t two_qubit_gate = 2;
    std::uint32_t measurement = 4;
    std::uint32_t conditional_gate = 1;
    std::uint32_t zone_move = 2;
    std::uint32_t classical_link_hop = 4;
    std::uint32_t qpu_qnpu_signal = 1;
    std::uint32_t decode = 1;
    std::uint32_t uop_issue = 1;
    std::uint32_t epr_reserve_lookup = 1;

    bool operator==(const LatencyModel&) const = default;
};

inline constexpr std::array<std::string_view, 10> kLatencyKeys{
    "single_qubit_gate", "two_qubit_gate",  "measurement", "conditional_gate", "zone_move",
    "classical_link_hop", "qpu_qnpu_signal", "decode",      "uop_issue",        "epr_reserve_lookup",
};

std::uint32_t& latency_field(LatencyModel& m, std::string_view key);  // throws ConfigError
std::uint32_t latency_field(const LatencyModel& m, std::string_view key);

/// "key=value;key=value..." in kLatencyKeys order.
std::string latency_text(const LatencyModel& m);

enum class Mode { Monolithic, Decoupled };

std::string_view mode_name(Mode m);
Mode mode_from_name(std::string_view s);  // throws ConfigError

enum class EprMode { PerfectPrefetch, Finite };

struct ArchConfig {
    Mode mode = Mode::Decoupled;
    std::uint32_t qnpu_width = 1;
    LatencyModel latency;
    compiler::Protocol protocol = compiler::Protocol::Cat;
    compiler::ProxyPolicy proxy_policy = compiler::ProxyPolicy::DataSized;
    std::uint32_t proxy_pool = 1;
    EprMode epr_mode = EprMode::PerfectPrefetch;
    std::uint32_t epr_capacity = 4;     // pairs per ordered node pair in finite mode
    std::uint32_t network_capacity = 0;  // messages per link, 0 = unbounded
    /// Communication qubits per node. Every protocol instruction in flight holds
    /// one. 0 sizes the zone like the node's computation zone.
    std::uint32_t comm_zone_size = 0;

    bool operator==(const ArchConfig&) const = default;

    /// Throws ConfigError: width must be positive, and exactly 1 in monolithic mode.
    void check() const;
    compiler::LowerOptions lower_options() const;
};

/// JSON (de)serialization. In strict mode every latency key plus mode, width
/// and protocol must be present and no unknown key may appear.
ArchConfig config_from_json(std::string_view text, bool strict = true);
std::string config_to_json(const ArchConfig& cfg);
ArchConfig load_config(const std::string& path, bool strict = true);
void save_config(const ArchConfig& cfg, const std::string& path);

}  // namespace qnpu::sim
