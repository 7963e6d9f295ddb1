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

#include <set>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "qnpu/bench.hpp"
#include "qnpu/compiler.hpp"
#include "qnpu/error.hpp"
#include "reference_rows.hpp"

namespace {

using namespace qnpu;
using namespace qnpu::bench;

BenchSpec spec(Family f, std::size_t q, std::size_t n) {
    BenchSpec s;
    s.family = f;
    s.qubits = q;
    s.nodes = n;
    return s;
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string l;
    while (std::getline(in, l)) out.push_back(l);
    return out;
}

TEST(Generators, RemoteCountExamples) {
    struct Case {
        Family f;
        std::size_t q, n, total, max;
    };
    for (const Case& c : {Case{Family::Ghz, 150, 5, 4, 2}, Case{Family::Bv, 150, 10, 135, 135},
                          Case{Family::VqeFull, 50, 5, 1000, 400}, Case{Family::HamsimTfim, 150, 2, 2, 2}}) {
        auto counts = compiler::count_remote_gates(generate(spec(c.f, c.q, c.n)));
        EXPECT_EQ(counts.total, c.total) << family_name(c.f);
        EXPECT_EQ(counts.max_per_node, c.max) << family_name(c.f);
    }
}

TEST(Generators, RejectBadPartitions) {
    EXPECT_THROW(generate(spec(Family::Ghz, 10, 3)), ValidationError);
    EXPECT_THROW(generate(spec(Family::Ghz, 1, 1)), ValidationError);
    EXPECT_THROW(generate(spec(Family::Ghz, 4, 8)), ValidationError);
    EXPECT_NO_THROW(generate(spec(Family::Ghz, 2, 2)));
}

TEST(Generators, OneRegisterPerNodeInContiguousBlocks) {
    auto ir = generate(spec(Family::Qft, 12, 4));
    ASSERT_EQ(ir.nodes.size(), 4u);
    ASSERT_EQ(ir.registers.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(ir.registers[i].node, i);
        EXPECT_EQ(ir.registers[i].size, 3u);
    }
}

TEST(Generators, Deterministic) {
    for (Family f : {Family::HamsimTfim, Family::Ghz, Family::Bv, Family::Qft, Family::VqeLinear, Family::VqeFull,
                     Family::QaoaMaxcut}) {
        BenchSpec s = spec(f, 20, 4);
        s.seed = 7;
        s.density = Density::Half;
        EXPECT_EQ(generate(s), generate(s)) << family_name(f);
    }
    RandomSpec r;
    r.seed = 3;
    EXPECT_EQ(random_circuit(r), random_circuit(r));
}

TEST(Generators, QaoaDensities) {
    BenchSpec s = spec(Family::QaoaMaxcut, 10, 2);
    auto edges = [&](Density d) {
        s.density = d;
        std::size_t n = 0;
        for (const auto& st : generate(s).stmts) {
            if (const auto* g = std::get_if<dqasm::LocalGate>(&st.value); g && g->qubits.size() == 2) ++n;
        }
        return n;
    };
    // Each edge costs two CNOTs around a phase rotation.
    EXPECT_EQ(edges(Density::Full), 2u * 45);
    EXPECT_EQ(edges(Density::Half), 2u * 22);
    EXPECT_EQ(edges(Density::TwoRegular), 2u * 10);
}

TEST(Generators, SpecNames) {
    EXPECT_EQ(spec(Family::Ghz, 150, 5).name(), "GHZ-150-5");
    for (Family f : {Family::HamsimTfim, Family::Ghz, Family::Bv, Family::Qft, Family::VqeLinear, Family::VqeFull,
                     Family::QaoaMaxcut}) {
        EXPECT_EQ(family_from_name(family_name(f)), f);
    }
    EXPECT_THROW(family_from_name("shor"), ConfigError);
}

TEST(Report, PercentText) {
    EXPECT_EQ(pct_text(73.625), "73.63");
    EXPECT_EQ(pct_text(-0.001), "0.00");
    EXPECT_EQ(pct_text(0), "0.00");
    ReportRow r;
    r.baseline_cycles = 200;
    r.cycles = 50;
    EXPECT_DOUBLE_EQ(r.improvement_pct(), 75.0);
}

TEST(Report, SweepKeepsGoingPastErrors) {
    sim::ArchConfig good;
    sim::ArchConfig bad;
    bad.mode = sim::Mode::Monolithic;
    bad.qnpu_width = 3;
    auto rows = sweep({spec(Family::Ghz, 10, 2), spec(Family::Bv, 10, 2)}, {good, bad});
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_TRUE(rows[0].error.empty());
    EXPECT_FALSE(rows[1].error.empty());
    EXPECT_TRUE(rows[2].error.empty());
    EXPECT_EQ(rows[2].benchmark, "BV-10-2");
    std::string csv = to_csv(rows, good.latency);
    EXPECT_NE(csv.find(",ERROR,\n"), std::string::npos);
}

TEST(Report, CsvShape) {
    sim::ArchConfig base;
    auto rows = sweep({spec(Family::Qft, 12, 3)}, table2_configs(base));
    auto ls = lines(to_csv(rows, base.latency));
    ASSERT_EQ(ls.size(), 6u);
    EXPECT_EQ(ls[0], "# schema " + std::string(kCsvSchema));
    EXPECT_EQ(ls[1], "# latency " + sim::latency_text(base.latency));
    EXPECT_EQ(ls[2], kCsvHeader);
    for (std::size_t i = 3; i < ls.size(); ++i) {
        EXPECT_EQ(std::count(ls[i].begin(), ls[i].end(), ','), 8) << ls[i];
    }
    EXPECT_NE(ls[3].find(",monolithic,1,"), std::string::npos);
    EXPECT_NE(ls[3].find(",0.00"), std::string::npos);
    EXPECT_NE(ls[5].find(",decoupled,4,"), std::string::npos);
}

TEST(Replica, GroupsMatchReferenceLayout) {
    auto groups = table2_groups();
    ASSERT_EQ(groups.size(), 2u);
    std::size_t i = 0;
    for (const auto& g : groups) {
        for (const auto& s : g.specs) {
            ASSERT_LT(i, std::size(qnpu::testing::kReferenceRows));
            EXPECT_EQ(s.qubits, qnpu::testing::kReferenceRows[i].qubits);
            EXPECT_EQ(s.nodes, qnpu::testing::kReferenceRows[i].nodes);
            ++i;
        }
    }
    EXPECT_EQ(i, 42u);
    auto cfgs = table2_configs(sim::ArchConfig{});
    ASSERT_EQ(cfgs.size(), 3u);
    EXPECT_EQ(cfgs[0].mode, sim::Mode::Monolithic);
    EXPECT_EQ(cfgs[1].qnpu_width, 1u);
    EXPECT_EQ(cfgs[2].qnpu_width, 4u);
}

TEST(Replica, FullRunIsCompleteAndByteIdentical) {
    Table2Report a = run_table2_replica(sim::ArchConfig{});
    ASSERT_EQ(a.rows.size(), 42u * 3);
    for (const auto& r : a.rows) EXPECT_TRUE(r.error.empty()) << r.benchmark << ": " << r.error;
    EXPECT_EQ(lines(a.csv).size(), 3u + 42 * 3);
    Table2Report b = run_table2_replica(sim::ArchConfig{});
    EXPECT_EQ(a.csv, b.csv);
    EXPECT_EQ(a.markdown, b.markdown);
}

TEST(WidthSweep, SeriesText) {
    auto series = run_width_sweep({Family::Ghz}, "nodes", sim::ArchConfig{}, {1, 2});
    ASSERT_EQ(series.size(), 5u);  // 2/5/10/15/30 nodes
    EXPECT_EQ(series[0].name, "ghz-30-2");
    auto ls = lines(series_text(series[0]));
    ASSERT_GE(ls.size(), 3u);
    EXPECT_EQ(ls[1], "width,cycles");
    EXPECT_THROW(run_width_sweep({Family::Ghz}, "diagonal", sim::ArchConfig{}), ConfigError);
}

TEST(Calibration, NeverWorsensTheStart) {
    auto targets = table2_calibration_targets();
    ASSERT_FALSE(targets.empty());
    targets.resize(std::min<std::size_t>(targets.size(), 3));
    CalibrationOptions o;
    o.max_rounds = 1;
    o.max_latency = 4;
    sim::ArchConfig start;
    CalibrationResult once = calibrate(start, targets, o);
    CalibrationResult zero = calibrate(start, targets, CalibrationOptions{0, 4, o.shape_weight, o.held});
    EXPECT_LE(once.error, zero.error);
    EXPECT_EQ(once.config.latency.classical_link_hop, 5u);  // held key is pinned
    EXPECT_GT(once.evaluations, zero.evaluations);
}

}  // namespace
