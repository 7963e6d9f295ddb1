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

// qnpusim command-line driver.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qnpu/bench.hpp"
#include "qnpu/compiler.hpp"
#include "qnpu/config.hpp"
#include "qnpu/dqasm.hpp"
#include "qnpu/engine.hpp"
#include "qnpu/error.hpp"
#include "qnpu/oracle.hpp"

namespace {

using namespace qnpu;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << text;
}

dqasm::CircuitIR load_program(const std::string& path) {
    return dqasm::parse(dqasm::SourceProgram{read_file(path), path});
}

// --config wins over QNPU_SIM_CONFIG; with neither, built-in defaults.
sim::ArchConfig resolve_config(const std::string& path) {
    if (!path.empty()) return sim::load_config(path);
    if (const char* env = std::getenv("QNPU_SIM_CONFIG"); env != nullptr && *env != '\0') return sim::load_config(env);
    return sim::ArchConfig{};
}

struct SimulateArgs {
    std::string file;
    std::string config;
    std::string mode;
    std::optional<std::uint32_t> width;
    std::string protocol;
    std::string trace;
};

int run_parse(const std::string& file, bool strict, bool emit) {
    dqasm::CircuitIR ir = load_program(file);
    auto rep = dqasm::validate(ir, strict ? dqasm::ParseMode::Strict : dqasm::ParseMode::Relaxed);
    if (emit) {
        std::cout << dqasm::emit(ir).text;
        return 0;
    }
    std::cout << file << ": " << rep.node_count << " nodes, qubits per node";
    for (auto q : rep.qubits_per_node) std::cout << ' ' << q;
    std::cout << ", " << ir.stmts.size() << " statements, " << rep.cross_node_gates << " cross-node gates\n";
    return 0;
}

int run_compile(const std::string& file, const std::string& protocol, bool strict, bool counts_only) {
    dqasm::CircuitIR ir = load_program(file);
    compiler::LowerOptions o;
    o.protocol = compiler::protocol_from_name(protocol);
    o.mode = strict ? dqasm::ParseMode::Strict : dqasm::ParseMode::Relaxed;
    dqasm::validate(ir, o.mode);
    auto c = compiler::count_remote_gates(ir);
    std::cout << "# remote gates: total " << c.total << ", max per node " << c.max_per_node << '\n';
    if (counts_only) return 0;
    auto progs = compiler::lower(ir, o);
    std::vector<std::string> names;
    for (const auto& n : ir.nodes) names.push_back(n.name);
    for (std::size_t n = 0; n < progs.size(); ++n) {
        std::cout << "# node " << names[n] << '\n' << compiler::dump(progs[n], names);
    }
    return 0;
}

int run_simulate(const SimulateArgs& a) {
    sim::ArchConfig cfg = resolve_config(a.config);
    if (!a.mode.empty()) cfg.mode = sim::mode_from_name(a.mode);
    if (a.width) cfg.qnpu_width = *a.width;
    if (!a.protocol.empty()) cfg.protocol = compiler::protocol_from_name(a.protocol);
    cfg.check();
    dqasm::CircuitIR ir = load_program(a.file);

    std::ofstream trace;
    sim::EngineOptions opts;
    if (!a.trace.empty()) {
        trace.open(a.trace);
        if (!trace) throw Error("cannot write '" + a.trace + "'");
        opts.log = &trace;
    }
    sim::SimResult r = sim::simulate_circuit(ir, cfg, opts);

    bench::ReportRow row;
    row.benchmark = std::filesystem::path(a.file).stem().string();
    for (const auto& reg : ir.registers) row.qubits += reg.size;
    row.nodes = ir.nodes.size();
    row.total_remote = r.counts.total;
    row.max_remote_per_node = r.counts.max_per_node;
    row.mode = cfg.mode;
    row.width = cfg.qnpu_width;
    row.cycles = r.total_cycles;
    row.baseline_cycles = r.total_cycles;
    if (cfg.mode != sim::Mode::Monolithic) {
        sim::ArchConfig mono = cfg;
        mono.mode = sim::Mode::Monolithic;
        mono.qnpu_width = 1;
        row.baseline_cycles = sim::simulate_circuit(ir, mono).total_cycles;
    }
    std::cout << bench::to_csv({row}, cfg.latency);
    return 0;
}

int run_table2(const std::string& config, const std::string& csv, const std::string& markdown,
               const std::string& density) {
    bench::Table2Report rep = bench::run_table2_replica(resolve_config(config), bench::density_from_name(density));
    if (!csv.empty()) write_file(csv, rep.csv);
    if (!markdown.empty()) write_file(markdown, rep.markdown);
    if (csv.empty() && markdown.empty()) std::cout << rep.markdown;
    int failed = 0;
    for (const auto& r : rep.rows) {
        if (!r.error.empty()) {
            std::cerr << r.benchmark << " " << sim::mode_name(r.mode) << " x" << r.width << ": " << r.error << '\n';
            ++failed;
        }
    }
    return failed == 0 ? 0 : 1;
}

int run_widths(const std::string& config, const std::vector<std::string>& families, const std::string& grouping,
               const std::vector<std::uint32_t>& widths, const std::string& out, const std::string& density) {
    std::vector<bench::Family> fams;
    for (const auto& f : families) fams.push_back(bench::family_from_name(f));
    auto series = bench::run_width_sweep(fams, grouping, resolve_config(config), widths,
                                         bench::density_from_name(density));
    if (!out.empty()) std::filesystem::create_directories(out);
    for (const auto& s : series) {
        if (out.empty()) {
            std::cout << bench::series_text(s);
        } else {
            write_file((std::filesystem::path(out) / (s.name + ".dat")).string(), bench::series_text(s));
        }
    }
    return 0;
}

int run_verify(const std::string& which, std::size_t samples, std::uint64_t seed) {
    std::vector<oracle::VerifyReport> reps;
    if (which == "tp" || which == "all") {
        reps.push_back(oracle::verify_teleport(samples, seed));
        reps.push_back(oracle::verify_remote_cnot(compiler::Protocol::Tp, samples, seed));
    }
    if (which == "cat" || which == "all") reps.push_back(oracle::verify_remote_cnot(compiler::Protocol::Cat, samples, seed));
    if (reps.empty()) throw Error("verify expects tp, cat or all");
    bool ok = true;
    for (const auto& r : reps) {
        std::cout << r.text() << '\n';
        ok = ok && r.pass;
    }
    return ok ? 0 : 1;
}

int run_calibrate(const std::string& target, const std::string& config, const std::string& out) {
    if (target != "table2") throw Error("unknown calibration target '" + target + "'");
    sim::ArchConfig start = resolve_config(config);
    auto res = bench::calibrate(start, bench::table2_calibration_targets());
    std::cerr << "objective " << res.error << ", mean cycle error " << res.cycle_error << ", " << res.evaluations
              << " evaluations\n";
    if (out.empty()) {
        std::cout << sim::config_to_json(res.config);
    } else {
        sim::save_config(res.config, out);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cycle-level simulator for distributed quantum programs with a network processing unit"};
    app.require_subcommand(1);

    std::string file, protocol = "cat", config, out, csv, markdown;
    bool strict = false, emit = false, counts_only = false;

    auto* parse = app.add_subcommand("parse", "Parse and validate a DistQASM file");
    parse->add_option("file", file, "Program")->required()->check(CLI::ExistingFile);
    parse->add_flag("--strict", strict, "Reject cross-node gates");
    parse->add_flag("--emit", emit, "Print the canonical form");

    auto* compile = app.add_subcommand("compile", "Lower a program to per-node instruction streams");
    compile->add_option("file", file, "Program")->required()->check(CLI::ExistingFile);
    compile->add_option("--protocol", protocol, "Remote gate protocol")->check(CLI::IsMember({"tp", "cat"}));
    compile->add_flag("--strict", strict, "Reject cross-node gates");
    compile->add_flag("--counts", counts_only, "Only print remote-gate counts");

    SimulateArgs sa;
    auto* simulate = app.add_subcommand("simulate", "Simulate a program and print a CSV row");
    simulate->add_option("file", sa.file, "Program")->required()->check(CLI::ExistingFile);
    simulate->add_option("--config", sa.config, "Architecture config (JSON)");
    simulate->add_option("--mode", sa.mode, "monolithic or decoupled");
    simulate->add_option("--width", sa.width, "Decoder lanes per node");
    simulate->add_option("--protocol", sa.protocol, "Remote gate protocol");
    simulate->add_option("--trace", sa.trace, "Write the per-cycle event log here");

    auto* bench_cmd = app.add_subcommand("bench", "Benchmark sweeps");
    bench_cmd->require_subcommand(1);
    auto* table2 = bench_cmd->add_subcommand("table2", "Circuit-size and node-count scaling over three architectures");
    table2->add_option("--config", config, "Base config (JSON)");
    table2->add_option("--csv", csv, "Write the CSV here");
    table2->add_option("--markdown", markdown, "Write the markdown table here");
    std::string table_density = "full";
    table2->add_option("--density", table_density, "QAOA graph density")
        ->check(CLI::IsMember({"half", "full", "2regular"}));

    std::vector<std::string> families = {"qft", "vqe_full", "qaoa_maxcut"};
    std::string grouping = "nodes";
    std::vector<std::uint32_t> widths(std::begin(bench::kSweepWidths), std::end(bench::kSweepWidths));
    auto* widths_cmd = bench_cmd->add_subcommand("widths", "Cycles against decoder width");
    widths_cmd->add_option("--config", config, "Base config (JSON)");
    widths_cmd->add_option("--families", families, "Families")->delimiter(',');
    widths_cmd->add_option("--grouping", grouping, "size or nodes")
        ->check(CLI::IsMember({"size", "nodes"}));
    widths_cmd->add_option("--widths", widths, "Widths")->delimiter(',');
    widths_cmd->add_option("--out", out, "Directory for one data file per series");
    std::string sweep_density = "2regular";
    widths_cmd->add_option("--density", sweep_density, "QAOA graph density")
        ->check(CLI::IsMember({"half", "full", "2regular"}));

    std::string which = "all";
    std::size_t samples = 100;
    std::uint64_t seed = 1;
    auto* verify = app.add_subcommand("verify", "Check protocol microcode against a state-vector oracle");
    verify->add_option("protocol", which, "tp, cat or all")->check(CLI::IsMember({"tp", "cat", "all"}));
    verify->add_option("--samples", samples, "Random inputs per check");
    verify->add_option("--seed", seed, "Seed");

    std::string target;
    auto* calibrate = app.add_subcommand("calibrate", "Fit the latency model to reference cycle counts");
    calibrate->add_option("--target", target, "Reference set")->required()->check(CLI::IsMember({"table2"}));
    calibrate->add_option("--config", config, "Starting config (JSON)");
    calibrate->add_option("--out", out, "Write the fitted config here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*parse) return run_parse(file, strict, emit);
        if (*compile) return run_compile(file, protocol, strict, counts_only);
        if (*simulate) return run_simulate(sa);
        if (*table2) return run_table2(config, csv, markdown, table_density);
        if (*widths_cmd) return run_widths(config, families, grouping, widths, out, sweep_density);
        if (*verify) return run_verify(which, samples, seed);
        if (*calibrate) return run_calibrate(target, config, out);
    } catch (const qnpu::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
