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

// Benchmark generators and experiment runners.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qnpu/config.hpp"
#include "qnpu/dqasm.hpp"
#include "qnpu/engine.hpp"

namespace qnpu::bench {

enum class Family { HamsimTfim, Ghz, Bv, Qft, VqeLinear, VqeFull, QaoaMaxcut };

std::string_view family_name(Family f);        // "hamsim_tfim", ...
std::string_view family_label(Family f);       // "Hamsim", "GHZ", ...
Family family_from_name(std::string_view s);   // throws ConfigError

/// QAOA graph density. Half: floor(E_max/2) seeded random edges. Full: every pair.
/// TwoRegular: a seeded Hamiltonian cycle.
enum class Density { Half, Full, TwoRegular };

std::string_view density_name(Density d);
Density density_from_name(std::string_view s);  // throws ConfigError

inline constexpr double kRotationAngle = 0.7853981633974483;  // pi/4

struct BenchSpec {
    Family family = Family::Ghz;
    std::size_t qubits = 0;
    std::size_t nodes = 1;
    std::uint64_t seed = 0;
    std::size_t trotter_steps = 1;
    Density density = Density::Full;
    /// BV secret, one char per data qubit; empty means all ones.
    std::string bv_secret;

    /// "GHZ-150-5" style name.
    std::string name() const;
};

/// Deterministic circuit for `spec`. Qubits are split into contiguous equal
/// blocks, one register per node. Throws ValidationError when qubits < 2,
/// qubits < nodes or qubits is not divisible by nodes.
dqasm::CircuitIR generate(const BenchSpec& spec);

/// Small seeded random circuit for property checks: `nodes` nodes with
/// `qubits_per_node` qubits each and `gates` gates drawn from single-qubit
/// rotations, local and cross-node CNOT/CP and the occasional SWAP.
struct RandomSpec {
    std::size_t nodes = 2;
    std::size_t qubits_per_node = 2;
    std::size_t gates = 16;
    std::uint64_t seed = 0;
    bool swaps = true;
};

dqasm::CircuitIR random_circuit(const RandomSpec& spec);

inline constexpr std::string_view kCsvSchema = "qnpusim-sweep/1";
inline constexpr std::string_view kCsvHeader =
    "benchmark,qubits,nodes,total_remote,max_remote_per_node,mode,width,cycles,improvement_vs_monolithic_pct";

struct ReportRow {
    std::string benchmark;
    std::size_t qubits = 0;
    std::size_t nodes = 0;
    std::size_t total_remote = 0;
    std::size_t max_remote_per_node = 0;
    sim::Mode mode = sim::Mode::Monolithic;
    std::uint32_t width = 1;
    std::uint64_t cycles = 0;
    std::uint64_t baseline_cycles = 0;  // monolithic cycles of the same benchmark
    std::string error;                  // non-empty when the run failed

    /// (baseline - cycles) / baseline in percent.
    double improvement_pct() const;
};

/// Percent with two decimals, e.g. "73.63".
std::string pct_text(double v);

/// Cartesian product of specs x configs. A failing run is recorded in
/// ReportRow::error and the sweep continues. Rows keep input order.
std::vector<ReportRow> sweep(const std::vector<BenchSpec>& specs, const std::vector<sim::ArchConfig>& cfgs);

/// CSV with a schema comment and the latency model in a second comment line.
std::string to_csv(const std::vector<ReportRow>& rows, const sim::LatencyModel& lat);

/// One experiment group of the replica: (group title, benchmark specs).
struct Group {
    std::string title;
    std::vector<BenchSpec> specs;
};

/// Circuit-size scaling (50/100/150 qubits on 5 nodes) then node-count scaling
/// (150 qubits on 2/5/10 nodes), seven families each: 42 rows. Full-density QAOA
/// graphs reproduce the reference remote-gate counts.
std::vector<Group> table2_groups(Density qaoa = Density::Full);

/// Monolithic, decoupled scalar and decoupled 4-way variants of `base`.
std::vector<sim::ArchConfig> table2_configs(const sim::ArchConfig& base);

struct Table2Report {
    std::vector<ReportRow> rows;  // 42 x 3, grouped per benchmark in config order
    std::string csv;
    std::string markdown;
};

Table2Report run_table2_replica(const sim::ArchConfig& base, Density qaoa = Density::Full);

inline constexpr std::uint32_t kSweepWidths[] = {1, 2, 4, 6, 8, 10, 12, 14, 16};

struct WidthSeries {
    std::string name;     // file stem, e.g. "qft-30-5"
    BenchSpec spec;
    std::vector<std::pair<std::uint32_t, std::uint64_t>> points;  // width -> cycles
};

/// Circuit-size grouping: 30/60/90 qubits on 5 nodes. Node-count grouping:
/// 30 qubits on 2/5/10/15/30 nodes. QAOA uses 2-regular graphs here.
std::vector<WidthSeries> run_width_sweep(const std::vector<Family>& families, const std::string& grouping,
                                         const sim::ArchConfig& base,
                                         const std::vector<std::uint32_t>& widths = {std::begin(kSweepWidths),
                                                                                     std::end(kSweepWidths)},
                                         Density qaoa = Density::TwoRegular);

/// "width,cycles" data file text for one series.
std::string series_text(const WidthSeries& s);

/// Coordinate descent over the latency model against reference cycle counts
/// of GHZ and BV rows.
struct CalibrationTarget {
    BenchSpec spec;
    sim::Mode mode = sim::Mode::Monolithic;
    std::uint32_t width = 1;
    std::uint64_t cycles = 0;
};

std::vector<CalibrationTarget> table2_calibration_targets();

struct CalibrationOptions {
    std::size_t max_rounds = 4;
    std::uint32_t max_latency = 12;
    /// Weight of the improvement-shape term relative to the cycle term.
    double shape_weight = 5.0;
    /// Keys pinned to a value and left out of the search. The GHZ and BV rows
    /// cannot separate link latency from local work: left free, the hop
    /// collapses to zero and the protocol degenerates into a local gate.
    std::map<std::string, std::uint32_t> held = {{"classical_link_hop", 5}};
};

struct CalibrationResult {
    sim::ArchConfig config;
    double error = 0;  // objective at the optimum
    double cycle_error = 0;  // mean relative cycle error at the optimum
    std::size_t evaluations = 0;
};

CalibrationResult calibrate(const sim::ArchConfig& start, const std::vector<CalibrationTarget>& targets,
                            const CalibrationOptions& opts = {});

}  // namespace qnpu::bench
