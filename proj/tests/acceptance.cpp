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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "property_checks.hpp"
#include "qnpu/bench.hpp"
#include "qnpu/compiler.hpp"
#include "qnpu/config.hpp"
#include "qnpu/error.hpp"
#include "qnpu/oracle.hpp"
#include "reference_rows.hpp"

namespace {

using namespace qnpu;
using bench::Family;
using qnpu::testing::kReferenceRows;

struct Outcome {
    bool pass = true;
    std::string detail;

    void fail(const std::string& why) {
        if (pass) detail = why;  // keep the first failure
        pass = false;
    }
};

struct Criterion {
    std::string id;
    std::string title;
    double budget_s;  // 0 = no runtime bound
    std::function<Outcome()> run;
};

sim::ArchConfig calibrated_config() {
    const std::string path = std::string(QNPU_CONFIG_DIR) + "/calibrated.json";
    if (std::filesystem::exists(path)) return sim::load_config(path);
    std::cerr << "no " << path << ", calibrating from defaults\n";
    return bench::calibrate(sim::ArchConfig{}, bench::table2_calibration_targets()).config;
}

// One replica row: the spec plus its three simulated variants.
struct Row {
    bench::BenchSpec spec;
    const bench::ReportRow* mono;
    const bench::ReportRow* scalar;
    const bench::ReportRow* four;
};

std::vector<Row> rows_of(const bench::Table2Report& rep) {
    std::vector<Row> out;
    std::size_t k = 0;
    for (const auto& g : bench::table2_groups()) {
        for (const auto& s : g.specs) {
            out.push_back({s, &rep.rows[k], &rep.rows[k + 1], &rep.rows[k + 2]});
            k += 3;
        }
    }
    return out;
}

bool serial_family(Family f) { return f == Family::HamsimTfim || f == Family::Ghz || f == Family::VqeLinear; }

std::string fmt(double v) {
    std::ostringstream o;
    o.precision(2);
    o << std::fixed << v;
    return o.str();
}

}  // namespace

int main() {
    const sim::ArchConfig cal = calibrated_config();
    const sim::ArchConfig def{};
    bench::Table2Report cal_report;  // shared by the cycle criteria and the determinism check
    bool have_cal_report = false;
    auto cal_rows = [&]() -> std::vector<Row> {
        if (!have_cal_report) {
            cal_report = bench::run_table2_replica(cal);
            have_cal_report = true;
        }
        return rows_of(cal_report);
    };

    std::vector<Criterion> criteria = {
        {"C1", "remote-gate counts reproduce the reference columns", 10, [] {
             Outcome o;
             std::size_t i = 0;
             for (const auto& g : bench::table2_groups()) {
                 for (const auto& s : g.specs) {
                     const auto& ref = kReferenceRows[i++];
                     auto c = compiler::count_remote_gates(bench::generate(s));
                     if (c.total != ref.total_remote) {
                         o.fail(s.name() + " total " + std::to_string(c.total) + " != " + std::to_string(ref.total_remote));
                     }
                     if (s.family != Family::Qft && c.max_per_node != ref.max_remote_per_node) {
                         o.fail(s.name() + " max " + std::to_string(c.max_per_node) +
                                " != " + std::to_string(ref.max_remote_per_node));
                     }
                 }
             }
             if (o.pass) o.detail = "42 rows; QFT max-per-node reported only";
             return o;
         }},
        {"C2", "teleport and remote CNOT (tp, cat) match the ideal gates", 30, [] {
             Outcome o;
             double worst = 1;
             for (auto rep : {oracle::verify_teleport(100, 1), oracle::verify_remote_cnot(compiler::Protocol::Tp, 100, 1),
                              oracle::verify_remote_cnot(compiler::Protocol::Cat, 100, 1)}) {
                 worst = std::min(worst, rep.worst_fidelity);
                 if (!rep.pass || rep.inputs < 100) o.fail(rep.text());
             }
             if (o.pass) {
                 std::ostringstream d;
                 d << "worst fidelity 1-" << std::scientific << std::max(0.0, 1 - worst);
                 o.detail = d.str();
             }
             return o;
         }},
        {"C3", "serial families: 4-way cycles equal scalar cycles", 0, [&] {
             Outcome o;
             std::size_t n = 0;
             for (const auto& r : cal_rows()) {
                 if (!serial_family(r.spec.family)) continue;
                 ++n;
                 if (r.four->cycles != r.scalar->cycles) {
                     o.fail(r.spec.name() + " 4-way " + std::to_string(r.four->cycles) + " vs scalar " +
                            std::to_string(r.scalar->cycles));
                 }
             }
             if (o.pass) o.detail = std::to_string(n) + " rows equal";
             return o;
         }},
        {"C4", "decoupled scalar never slower than monolithic; gain <= 7% when calibrated", 0, [&] {
             Outcome o;
             for (const auto& r : rows_of(bench::run_table2_replica(def))) {
                 if (r.scalar->cycles > r.mono->cycles) o.fail("default: " + r.spec.name() + " scalar slower");
             }
             double worst = 0;
             std::string at;
             for (const auto& r : cal_rows()) {
                 if (r.scalar->cycles > r.mono->cycles) o.fail("calibrated: " + r.spec.name() + " scalar slower");
                 double g = r.scalar->improvement_pct();
                 if (g > worst) {
                     worst = g;
                     at = r.spec.name();
                 }
                 if (g > 7.0) o.fail(r.spec.name() + " scalar gain " + fmt(g) + "%");
             }
             if (o.pass) o.detail = "max scalar gain " + fmt(worst) + "% (" + at + ")";
             return o;
         }},
        {"C5", "4-way gain in [65%, 80%] for parallel families, < 5% for serial ones", 0, [&] {
             Outcome o;
             double lo = 100, hi = -100, serial_hi = -100;
             for (const auto& r : cal_rows()) {
                 double g = r.four->improvement_pct();
                 if (serial_family(r.spec.family)) {
                     serial_hi = std::max(serial_hi, g);
                     if (!(g < 5.0)) o.fail(r.spec.name() + " 4-way gain " + fmt(g) + "%");
                 } else {
                     lo = std::min(lo, g);
                     hi = std::max(hi, g);
                     if (g < 65.0 || g > 80.0) o.fail(r.spec.name() + " 4-way gain " + fmt(g) + "%");
                 }
             }
             if (o.pass) o.detail = "parallel " + fmt(lo) + "%.." + fmt(hi) + "%, serial max " + fmt(serial_hi) + "%";
             return o;
         }},
        {"C6", "QFT-30 width saturation across 30, 15 and 5 nodes (1% tolerance)", 120, [&] {
             Outcome o;
             auto series = bench::run_width_sweep({Family::Qft}, "nodes", cal);
             auto flat_from = [&](std::size_t nodes, std::uint32_t from) {
                 for (const auto& s : series) {
                     if (s.spec.nodes != nodes) continue;
                     std::uint64_t ref = 0;
                     for (auto [w, c] : s.points) {
                         if (w == from) ref = c;
                     }
                     for (auto [w, c] : s.points) {
                         if (w < from) continue;
                         double dev = std::abs(static_cast<double>(c) - static_cast<double>(ref)) / static_cast<double>(ref);
                         if (dev > 0.01) {
                             o.fail(s.name + " width " + std::to_string(w) + " is " + std::to_string(c) + " vs " +
                                    std::to_string(ref) + " at width " + std::to_string(from));
                         }
                     }
                     return;
                 }
                 o.fail("no series for " + std::to_string(nodes) + " nodes");
             };
             flat_from(30, 1);
             flat_from(15, 2);
             flat_from(5, 6);
             if (o.pass) o.detail = "flat from widths 1, 2 and 6";
             return o;
         }},
        {"C7", "monolithic cycles vs node count at 150 qubits", 0, [&] {
             Outcome o;
             auto mono_at = [&](Family f, std::size_t nodes) {
                 for (const auto& r : cal_rows()) {
                     if (r.spec.family == f && r.spec.qubits == 150 && r.spec.nodes == nodes) return r.mono->cycles;
                 }
                 throw Error("missing replica row");
             };
             std::ostringstream d;
             for (Family f : {Family::HamsimTfim, Family::Qft, Family::VqeFull, Family::QaoaMaxcut}) {
                 auto a = mono_at(f, 2), b = mono_at(f, 5), c = mono_at(f, 10);
                 bool ok = f == Family::HamsimTfim ? (a < b && b < c) : (a > b && b > c);
                 d << bench::family_label(f) << " " << a << "/" << b << "/" << c << " ";
                 if (!ok) o.fail(std::string(bench::family_label(f)) + " ordering " + std::to_string(a) + "/" +
                                 std::to_string(b) + "/" + std::to_string(c));
             }
             if (o.pass) o.detail = d.str();
             return o;
         }},
        {"C8", "byte-identical replica CSV and invariants over 1000 random programs", 300, [&] {
             Outcome o;
             cal_rows();
             if (bench::run_table2_replica(cal).csv != cal_report.csv) o.fail("replica CSV differs between runs");
             std::size_t width_bad = 0, step_bad = 0, decode_bad = 0;
             for (std::uint64_t i = 0; i < qnpu::testing::kPropertyPrograms; ++i) {
                 if (auto v = qnpu::testing::width_violation(i); !v.empty()) {
                     ++width_bad;
                     o.fail("width monotonicity: " + v);
                 }
                 if (auto v = qnpu::testing::stepwise_violation(i); !v.empty()) {
                     ++step_bad;
                     o.fail("conservation/table safety: " + v);
                 }
                 if (auto v = qnpu::testing::decoder_violation(i); !v.empty()) {
                     ++decode_bad;
                     o.fail("decoder purity: " + v);
                 }
             }
             std::string counts = " (width " + std::to_string(width_bad) + ", stepwise " + std::to_string(step_bad) +
                                  ", decoder " + std::to_string(decode_bad) + " of " +
                                  std::to_string(qnpu::testing::kPropertyPrograms) + " programs)";
             o.detail += counts;
             return o;
         }},
    };

    bool all = true;
    for (const auto& c : criteria) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget_s > 0 && secs > c.budget_s) o.fail("took " + fmt(secs) + " s, budget " + fmt(c.budget_s) + " s");
        all = all && o.pass;
        std::printf("%s %s: %s [%.1f s] %s\n", o.pass ? "PASS" : "FAIL", c.id.c_str(), c.title.c_str(), secs,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    return all ? 0 : 1;
}
