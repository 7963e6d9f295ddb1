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

#include "qnpu/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "qnpu/error.hpp"

namespace qnpu::bench {

namespace {

using dqasm::CircuitIR;
using dqasm::Gate;
using dqasm::LocalGate;
using dqasm::QubitRef;
using dqasm::Stmt;

BenchSpec make_spec(Family f, std::size_t qubits, std::size_t nodes) {
    BenchSpec s;
    s.family = f;
    s.qubits = qubits;
    s.nodes = nodes;
    return s;
}

struct Builder {
    CircuitIR ir;
    std::size_t block = 0;

    Builder(std::size_t qubits, std::size_t nodes) : block(qubits / nodes) {
        for (std::size_t n = 0; n < nodes; ++n) {
            ir.nodes.push_back({"node" + std::to_string(n), n});
            ir.registers.push_back({"q" + std::to_string(n), block, n});
        }
    }

    QubitRef ref(std::size_t q) const {
        std::size_t n = q / block;
        return QubitRef{"q" + std::to_string(n), q % block, n};
    }

    void g1(Gate g, std::size_t q, std::vector<double> params = {}) {
        ir.stmts.push_back(Stmt{LocalGate{g, std::move(params), {ref(q)}}});
    }

    void g2(Gate g, std::size_t a, std::size_t b, std::vector<double> params = {}) {
        ir.stmts.push_back(Stmt{LocalGate{g, std::move(params), {ref(a), ref(b)}}});
    }

    void zz(std::size_t a, std::size_t b, double theta) {
        g2(Gate::CNOT, a, b);
        g1(Gate::RZ, b, {theta});
        g2(Gate::CNOT, a, b);
    }
};

std::vector<std::pair<std::size_t, std::size_t>> qaoa_edges(std::size_t n, Density d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::pair<std::size_t, std::size_t>> all;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) all.emplace_back(i, j);
    }
    switch (d) {
        case Density::Full:
            std::shuffle(all.begin(), all.end(), rng);
            return all;
        case Density::Half: {
            std::shuffle(all.begin(), all.end(), rng);
            all.resize(all.size() / 2);
            return all;
        }
        case Density::TwoRegular: {
            std::vector<std::size_t> perm(n);
            for (std::size_t i = 0; i < n; ++i) perm[i] = i;
            std::shuffle(perm.begin(), perm.end(), rng);
            std::vector<std::pair<std::size_t, std::size_t>> cyc;
            for (std::size_t i = 0; i < n; ++i) {
                std::size_t a = perm[i], b = perm[(i + 1) % n];
                cyc.emplace_back(std::min(a, b), std::max(a, b));
            }
            if (n == 2) cyc.resize(1);
            return cyc;
        }
    }
    return all;
}

void two_local_rotations(Builder& b, std::size_t n) {
    for (std::size_t q = 0; q < n; ++q) b.g1(Gate::RY, q, {kRotationAngle});
    for (std::size_t q = 0; q < n; ++q) b.g1(Gate::RZ, q, {kRotationAngle});
}

}  // namespace

dqasm::CircuitIR random_circuit(const RandomSpec& spec) {
    if (spec.nodes == 0 || spec.qubits_per_node == 0) throw ValidationError("random circuit needs nodes and qubits");
    std::size_t n = spec.nodes * spec.qubits_per_node;
    Builder b(n, spec.nodes);
    std::mt19937_64 rng(spec.seed);
    auto pick = [&](std::size_t k) { return static_cast<std::size_t>(rng() % k); };
    for (std::size_t i = 0; i < spec.gates; ++i) {
        std::size_t kind = pick(10);
        std::size_t a = pick(n);
        if (kind < 4 || n < 2) {
            static constexpr Gate one[] = {Gate::H, Gate::X, Gate::RZ, Gate::RY};
            Gate g = one[pick(4)];
            if (g == Gate::RZ || g == Gate::RY) {
                b.g1(g, a, {kRotationAngle * static_cast<double>(1 + pick(7))});
            } else {
                b.g1(g, a);
            }
            continue;
        }
        std::size_t c = pick(n - 1);
        if (c >= a) ++c;
        if (kind == 9 && spec.swaps) {
            b.g2(Gate::SWAP, a, c);
        } else if (kind >= 7) {
            b.g2(Gate::CP, a, c, {kRotationAngle * static_cast<double>(1 + pick(3))});
        } else {
            b.g2(Gate::CNOT, a, c);
        }
    }
    return b.ir;
}

std::string_view family_name(Family f) {
    switch (f) {
        case Family::HamsimTfim: return "hamsim_tfim";
        case Family::Ghz: return "ghz";
        case Family::Bv: return "bv";
        case Family::Qft: return "qft";
        case Family::VqeLinear: return "vqe_linear";
        case Family::VqeFull: return "vqe_full";
        case Family::QaoaMaxcut: return "qaoa_maxcut";
    }
    return "?";
}

std::string_view family_label(Family f) {
    switch (f) {
        case Family::HamsimTfim: return "Hamsim";
        case Family::Ghz: return "GHZ";
        case Family::Bv: return "BV";
        case Family::Qft: return "QFT";
        case Family::VqeLinear: return "VQE-linear";
        case Family::VqeFull: return "VQE-full";
        case Family::QaoaMaxcut: return "QAOA";
    }
    return "?";
}

Family family_from_name(std::string_view s) {
    for (Family f : {Family::HamsimTfim, Family::Ghz, Family::Bv, Family::Qft, Family::VqeLinear, Family::VqeFull,
                     Family::QaoaMaxcut}) {
        if (s == family_name(f)) return f;
    }
    if (s == "hamsim") return Family::HamsimTfim;
    if (s == "qaoa") return Family::QaoaMaxcut;
    throw ConfigError("unknown benchmark family '" + std::string(s) + "'");
}

std::string_view density_name(Density d) {
    switch (d) {
        case Density::Half: return "half";
        case Density::Full: return "full";
        case Density::TwoRegular: return "2regular";
    }
    return "?";
}

Density density_from_name(std::string_view s) {
    if (s == "half") return Density::Half;
    if (s == "full") return Density::Full;
    if (s == "2regular") return Density::TwoRegular;
    throw ConfigError("unknown density '" + std::string(s) + "' (expected half, full or 2regular)");
}

std::string BenchSpec::name() const {
    return std::string(family_label(family)) + "-" + std::to_string(qubits) + "-" + std::to_string(nodes);
}

CircuitIR generate(const BenchSpec& spec) {
    const std::size_t n = spec.qubits;
    if (n < 2) throw ValidationError("benchmark needs at least 2 qubits");
    if (spec.nodes == 0 || n < spec.nodes) throw ValidationError("benchmark needs at least one qubit per node");
    if (n % spec.nodes != 0) {
        throw ValidationError(std::to_string(n) + " qubits cannot be split evenly over " + std::to_string(spec.nodes) +
                              " nodes");
    }
    Builder b(n, spec.nodes);
    switch (spec.family) {
        case Family::Ghz:
            b.g1(Gate::H, 0);
            for (std::size_t q = 0; q + 1 < n; ++q) b.g2(Gate::CNOT, q, q + 1);
            break;
        case Family::Bv: {
            // Ancilla is the last qubit of the last node.
            const std::size_t anc = n - 1;
            std::string secret = spec.bv_secret.empty() ? std::string(n - 1, '1') : spec.bv_secret;
            if (secret.size() != n - 1) throw ValidationError("BV secret must have one bit per data qubit");
            b.g1(Gate::X, anc);
            for (std::size_t q = 0; q < n; ++q) b.g1(Gate::H, q);
            for (std::size_t q = 0; q < anc; ++q) {
                if (secret[q] == '1') b.g2(Gate::CNOT, q, anc);
            }
            for (std::size_t q = 0; q < anc; ++q) b.g1(Gate::H, q);
            break;
        }
        case Family::HamsimTfim:
            if (spec.trotter_steps == 0) throw ValidationError("trotter_steps must be positive");
            for (std::size_t s = 0; s < spec.trotter_steps; ++s) {
                for (std::size_t q = 0; q < n; ++q) b.g1(Gate::RX, q, {kRotationAngle});
                for (std::size_t q = 0; q + 1 < n; ++q) b.zz(q, q + 1, kRotationAngle);
            }
            break;
        case Family::Qft:
            for (std::size_t i = 0; i < n; ++i) {
                b.g1(Gate::H, i);
                for (std::size_t j = i + 1; j < n; ++j) {
                    b.g2(Gate::CP, j, i, {std::numbers::pi / std::ldexp(1.0, static_cast<int>(j - i))});
                }
            }
            for (std::size_t i = 0; i < n / 2; ++i) b.g2(Gate::SWAP, i, n - 1 - i);
            break;
        case Family::VqeLinear:
        case Family::VqeFull:
            two_local_rotations(b, n);
            if (spec.family == Family::VqeLinear) {
                for (std::size_t q = 0; q + 1 < n; ++q) b.g2(Gate::CNOT, q, q + 1);
            } else {
                for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t j = i + 1; j < n; ++j) b.g2(Gate::CNOT, i, j);
                }
            }
            two_local_rotations(b, n);
            break;
        case Family::QaoaMaxcut:
            for (std::size_t q = 0; q < n; ++q) b.g1(Gate::H, q);
            for (auto [i, j] : qaoa_edges(n, spec.density, spec.seed)) b.zz(i, j, kRotationAngle);
            for (std::size_t q = 0; q < n; ++q) b.g1(Gate::RX, q, {kRotationAngle});
            break;
    }
    return std::move(b.ir);
}

// ---- reporting ---------------------------------------------------------------

double ReportRow::improvement_pct() const {
    if (baseline_cycles == 0) return 0.0;
    return 100.0 * (static_cast<double>(baseline_cycles) - static_cast<double>(cycles)) /
           static_cast<double>(baseline_cycles);
}

std::string pct_text(double v) {
    char buf[64];
    double r = std::round(v * 100.0) / 100.0;
    if (r == 0.0) r = 0.0;  // no "-0.00"
    auto res = std::to_chars(buf, buf + sizeof buf, r, std::chars_format::fixed, 2);
    return std::string(buf, res.ptr);
}

std::vector<ReportRow> sweep(const std::vector<BenchSpec>& specs, const std::vector<sim::ArchConfig>& cfgs) {
    std::vector<ReportRow> rows;
    for (const auto& spec : specs) {
        std::optional<CircuitIR> ir;
        std::string gen_error;
        try {
            ir = generate(spec);
        } catch (const Error& e) {
            gen_error = e.what();
        }
        compiler::RemoteCounts counts;
        if (ir) counts = compiler::count_remote_gates(*ir);
        std::uint64_t baseline = 0;
        std::vector<ReportRow> block;
        for (const auto& cfg : cfgs) {
            ReportRow r;
            r.benchmark = spec.name();
            r.qubits = spec.qubits;
            r.nodes = spec.nodes;
            r.total_remote = counts.total;
            r.max_remote_per_node = counts.max_per_node;
            r.mode = cfg.mode;
            r.width = cfg.qnpu_width;
            r.error = gen_error;
            if (ir) {
                try {
                    r.cycles = sim::simulate_circuit(*ir, cfg).total_cycles;
                } catch (const Error& e) {
                    r.error = e.what();
                }
            }
            if (cfg.mode == sim::Mode::Monolithic && r.error.empty() && baseline == 0) baseline = r.cycles;
            block.push_back(std::move(r));
        }
        if (baseline == 0) {
            // no monolithic config in the list: simulate the baseline separately
            if (ir && !cfgs.empty()) {
                sim::ArchConfig mono = cfgs.front();
                mono.mode = sim::Mode::Monolithic;
                mono.qnpu_width = 1;
                try {
                    baseline = sim::simulate_circuit(*ir, mono).total_cycles;
                } catch (const Error&) {
                    baseline = 0;
                }
            }
        }
        for (auto& r : block) r.baseline_cycles = baseline;
        for (auto& r : block) rows.push_back(std::move(r));
    }
    return rows;
}

std::string to_csv(const std::vector<ReportRow>& rows, const sim::LatencyModel& lat) {
    std::string out = "# schema " + std::string(kCsvSchema) + "\n";
    out += "# latency " + sim::latency_text(lat) + "\n";
    out += std::string(kCsvHeader) + "\n";
    for (const auto& r : rows) {
        out += r.benchmark + "," + std::to_string(r.qubits) + "," + std::to_string(r.nodes) + "," +
               std::to_string(r.total_remote) + "," + std::to_string(r.max_remote_per_node) + "," +
               std::string(sim::mode_name(r.mode)) + "," + std::to_string(r.width) + ",";
        if (r.error.empty()) {
            out += std::to_string(r.cycles) + "," + pct_text(r.improvement_pct());
        } else {
            out += "ERROR,";
        }
        out += "\n";
    }
    return out;
}

std::vector<Group> table2_groups(Density qaoa) {
    const Family order[] = {Family::HamsimTfim, Family::Ghz,     Family::Bv,        Family::Qft,
                            Family::VqeLinear,  Family::VqeFull, Family::QaoaMaxcut};
    std::vector<Group> groups(2);
    groups[0].title = "Circuit-size scaling";
    groups[1].title = "Node-count scaling";
    for (Family f : order) {
        for (std::size_t q : {50, 100, 150}) groups[0].specs.push_back(make_spec(f, q, 5));
        for (std::size_t n : {2, 5, 10}) groups[1].specs.push_back(make_spec(f, 150, n));
    }
    for (auto& g : groups) {
        for (auto& s : g.specs) s.density = qaoa;
    }
    return groups;
}

std::vector<sim::ArchConfig> table2_configs(const sim::ArchConfig& base) {
    sim::ArchConfig mono = base, scalar = base, wide = base;
    mono.mode = sim::Mode::Monolithic;
    mono.qnpu_width = 1;
    scalar.mode = sim::Mode::Decoupled;
    scalar.qnpu_width = 1;
    wide.mode = sim::Mode::Decoupled;
    wide.qnpu_width = 4;
    return {mono, scalar, wide};
}

Table2Report run_table2_replica(const sim::ArchConfig& base, Density qaoa) {
    Table2Report rep;
    auto cfgs = table2_configs(base);
    std::map<std::string, std::vector<ReportRow>> cache;  // 150-5 rows appear in both groups
    std::ostringstream md;
    md << "| Group | Benchmark | Tot. remote | Max remote/node | Monolithic | Scalar QNPU | Imprv. | 4-way QNPU | Imprv. |\n";
    md << "|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& g : table2_groups(qaoa)) {
        for (const auto& spec : g.specs) {
            auto it = cache.find(spec.name());
            if (it == cache.end()) it = cache.emplace(spec.name(), sweep({spec}, cfgs)).first;
            const auto& rows = it->second;
            md << "| " << g.title << " | " << spec.name() << " | " << rows[0].total_remote << " | "
               << rows[0].max_remote_per_node;
            for (std::size_t k = 0; k < rows.size(); ++k) {
                const auto& r = rows[k];
                md << " | " << (r.error.empty() ? std::to_string(r.cycles) : "error");
                if (k > 0) md << " | " << pct_text(r.improvement_pct()) << "%";
            }
            md << " |\n";
            rep.rows.insert(rep.rows.end(), rows.begin(), rows.end());
        }
    }
    rep.csv = to_csv(rep.rows, base.latency);
    rep.markdown = md.str();
    return rep;
}

std::vector<WidthSeries> run_width_sweep(const std::vector<Family>& families, const std::string& grouping,
                                         const sim::ArchConfig& base, const std::vector<std::uint32_t>& widths,
                                         Density qaoa) {
    for (auto w : widths) {
        if (w == 0 || w > 16 || (w != 1 && w % 2 != 0)) throw ConfigError("sweep widths must be taken from 1,2,4,...,16");
    }
    std::vector<std::pair<std::size_t, std::size_t>> shapes;
    if (grouping == "size") {
        shapes = {{30, 5}, {60, 5}, {90, 5}};
    } else if (grouping == "nodes") {
        shapes = {{30, 2}, {30, 5}, {30, 10}, {30, 15}, {30, 30}};
    } else {
        throw ConfigError("unknown grouping '" + grouping + "' (expected size or nodes)");
    }
    std::vector<WidthSeries> out;
    for (Family f : families) {
        for (auto [q, n] : shapes) {
            WidthSeries s;
            s.spec = make_spec(f, q, n);
            s.spec.density = qaoa;
            std::string stem = std::string(family_name(f)) + "-" + std::to_string(q) + "-" + std::to_string(n);
            std::replace(stem.begin(), stem.end(), '_', '-');
            s.name = stem;
            auto ir = generate(s.spec);
            for (auto w : widths) {
                sim::ArchConfig cfg = base;
                cfg.mode = sim::Mode::Decoupled;
                cfg.qnpu_width = w;
                s.points.emplace_back(w, sim::simulate_circuit(ir, cfg).total_cycles);
            }
            out.push_back(std::move(s));
        }
    }
    return out;
}

std::string series_text(const WidthSeries& s) {
    std::string out = "# " + s.spec.name() + "\nwidth,cycles\n";
    for (auto [w, c] : s.points) out += std::to_string(w) + "," + std::to_string(c) + "\n";
    return out;
}

// ---- calibration -------------------------------------------------------------

std::vector<CalibrationTarget> table2_calibration_targets() {
    struct Ref {
        Family f;
        std::size_t q, n;
        std::uint64_t mono, scalar, wide;
    };
    // Reference cycle counts for the GHZ and BV rows.
    const Ref refs[] = {
        {Family::Ghz, 50, 5, 188, 184, 184},      {Family::Ghz, 100, 5, 288, 284, 284},
        {Family::Ghz, 150, 5, 388, 384, 384},     {Family::Ghz, 150, 2, 325, 324, 324},
        {Family::Ghz, 150, 10, 493, 484, 484},    {Family::Bv, 50, 5, 546, 528, 144},
        {Family::Bv, 100, 5, 1072, 1051, 271},    {Family::Bv, 150, 5, 1615, 1573, 410},
        {Family::Bv, 150, 2, 1791, 1675, 444},    {Family::Bv, 150, 10, 1380, 1371, 364},
    };
    std::vector<CalibrationTarget> out;
    for (const auto& r : refs) {
        BenchSpec s = make_spec(r.f, r.q, r.n);
        out.push_back({s, sim::Mode::Monolithic, 1, r.mono});
        out.push_back({s, sim::Mode::Decoupled, 1, r.scalar});
        out.push_back({s, sim::Mode::Decoupled, 4, r.wide});
    }
    return out;
}

CalibrationResult calibrate(const sim::ArchConfig& start, const std::vector<CalibrationTarget>& targets,
                            const CalibrationOptions& opts) {
    std::map<std::string, CircuitIR> circuits;
    for (const auto& t : targets) {
        if (!circuits.count(t.spec.name())) circuits.emplace(t.spec.name(), generate(t.spec));
    }
    CalibrationResult res;
    // Objective: mean relative cycle error plus the weighted mean absolute error
    // of each decoupled row's improvement over the monolithic row of the same
    // benchmark. The second term keeps the fit from trading the speedup shape
    // for absolute cycle counts.
    auto score = [&](const sim::ArchConfig& base, double* cycle_err) {
        ++res.evaluations;
        double err = 0;
        std::map<std::string, std::pair<double, double>> mono;  // name -> (reference, simulated)
        std::vector<std::pair<const CalibrationTarget*, double>> got;
        for (const auto& t : targets) {
            sim::ArchConfig cfg = base;
            cfg.mode = t.mode;
            cfg.qnpu_width = t.width;
            try {
                cfg.check();
                double c = static_cast<double>(sim::simulate_circuit(circuits.at(t.spec.name()), cfg).total_cycles);
                err += std::abs(c - static_cast<double>(t.cycles)) / static_cast<double>(t.cycles);
                got.emplace_back(&t, c);
                if (t.mode == sim::Mode::Monolithic) mono[t.spec.name()] = {static_cast<double>(t.cycles), c};
            } catch (const Error&) {
                return std::numeric_limits<double>::infinity();
            }
        }
        if (targets.empty()) return 0.0;
        err /= static_cast<double>(targets.size());
        if (cycle_err != nullptr) *cycle_err = err;
        double shape = 0;
        std::size_t n = 0;
        for (const auto& [t, c] : got) {
            auto it = mono.find(t->spec.name());
            if (t->mode == sim::Mode::Monolithic || it == mono.end()) continue;
            const auto [ref_base, sim_base] = it->second;
            shape += std::abs((sim_base - c) / sim_base - (ref_base - static_cast<double>(t->cycles)) / ref_base);
            ++n;
        }
        return n == 0 ? err : err + opts.shape_weight * shape / static_cast<double>(n);
    };
    sim::ArchConfig best = start;
    for (const auto& [key, v] : opts.held) sim::latency_field(best.latency, key) = v;
    double best_err = score(best, &res.cycle_error);
    for (std::size_t round = 0; round < opts.max_rounds; ++round) {
        bool improved = false;
        for (auto key : sim::kLatencyKeys) {
            if (opts.held.count(std::string(key))) continue;
            const std::uint32_t lo = (key == "single_qubit_gate" || key == "two_qubit_gate" || key == "measurement") ? 1 : 0;
            for (std::uint32_t v = lo; v <= opts.max_latency; ++v) {
                sim::ArchConfig cand = best;
                if (sim::latency_field(cand.latency, key) == v) continue;
                sim::latency_field(cand.latency, key) = v;
                double ce = 0;
                double e = score(cand, &ce);
                if (e + 1e-12 < best_err) {
                    best_err = e;
                    res.cycle_error = ce;
                    best = cand;
                    improved = true;
                }
            }
        }
        if (!improved) break;
    }
    res.config = best;
    res.error = best_err;
    return res;
}

}  // namespace qnpu::bench
