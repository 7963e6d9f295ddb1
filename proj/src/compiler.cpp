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

#include "qnpu/compiler.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "qnpu/error.hpp"

namespace qnpu::compiler {

namespace {

using core::Opcode;
using core::ProtocolInstruction;
using dqasm::CircuitIR;
using dqasm::Gate;
using dqasm::QubitRef;
using dqasm::Stmt;

enum class Zone : std::uint8_t { Comp, Comm };

class Lowering {
public:
    Lowering(const CircuitIR& ir, const LowerOptions& opts) : ir_(ir), opts_(opts) {
        for (std::size_t n = 0; n < ir.nodes.size(); ++n) {
            NodeProgram p;
            p.node = n;
            p.name = ir.nodes[n].name;
            p.data_qubits = static_cast<std::uint32_t>(ir.node_qubit_count(n));
            p.local_qubits = p.data_qubits;
            progs_.push_back(std::move(p));
            zones_.emplace_back(progs_.back().data_qubits, Zone::Comp);
            next_proxy_.push_back(0);
        }
    }

    std::vector<NodeProgram> run() {
        if (opts_.schedule == Schedule::Layered) {
            lower_stmts(layered(ir_.stmts));
        } else {
            lower_stmts(ir_.stmts);
        }
        if (!open_cats_.empty()) {
            const auto& [key, t] = *open_cats_.begin();
            throw CompileError("cat_ent on node " + ir_.nodes[key.first].name + " qubit " + std::to_string(key.second) +
                               " has no matching cat_disent");
        }
        for (auto& p : progs_) p = dependency_analysis(std::move(p), opts_.dependencies);
        return std::move(progs_);
    }

private:
    struct Local {
        std::size_t node;
        std::uint32_t idx;
    };

    // Stable reorder of a flat gate list by as-soon-as-possible depth. Lists holding
    // explicit protocol statements or blocks are kept as written.
    std::vector<Stmt> layered(const std::vector<Stmt>& stmts) const {
        std::map<std::pair<std::size_t, std::uint32_t>, std::size_t> depth;
        std::vector<std::pair<std::size_t, std::size_t>> keyed;  // (layer, position)
        for (std::size_t i = 0; i < stmts.size(); ++i) {
            std::vector<QubitRef> qs;
            if (const auto* g = std::get_if<dqasm::LocalGate>(&stmts[i].value)) {
                qs = g->qubits;
            } else if (const auto* m = std::get_if<dqasm::Measure>(&stmts[i].value)) {
                qs = {m->qubit};
            } else {
                return stmts;
            }
            std::size_t layer = 0;
            for (const auto& q : qs) layer = std::max(layer, depth[{q.node, loc(q).idx}]);
            for (const auto& q : qs) depth[{q.node, loc(q).idx}] = layer + 1;
            keyed.emplace_back(layer, i);
        }
        std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<Stmt> out;
        out.reserve(stmts.size());
        for (const auto& [layer, i] : keyed) out.push_back(stmts[i]);
        return out;
    }

    Local loc(const QubitRef& q) const { return {q.node, static_cast<std::uint32_t>(ir_.local_index(q))}; }

    void push(std::size_t node, QpuInstr in) { progs_[node].qpu_stream.push_back(std::move(in)); }

    Zone& zone(Local l) { return zones_[l.node][l.idx]; }

    void to_comp(Local l) {
        if (zone(l) == Zone::Comm) {
            push(l.node, ZoneMoveToComp{l.idx, std::nullopt});
            zone(l) = Zone::Comp;
        }
    }

    void to_comm(Local l) {
        if (zone(l) == Zone::Comp) {
            push(l.node, ZoneMoveToComm{l.idx});
            zone(l) = Zone::Comm;
        }
    }

    TransferId fresh_transfer() { return ++transfer_counter_; }

    // Proxy that receives the remote operand of a gate acting on local qubit `t`.
    Local proxy(Local t) {
        const std::size_t node = t.node;
        NodeProgram& p = progs_[node];
        std::uint32_t idx;
        if (opts_.proxy_policy == ProxyPolicy::Fresh) {
            idx = p.local_qubits++;
        } else if (opts_.proxy_policy != ProxyPolicy::Operand) {
            std::uint32_t pool = opts_.proxy_policy == ProxyPolicy::Fixed ? opts_.proxy_pool : std::max<std::uint32_t>(p.data_qubits, 1);
            idx = p.data_qubits + next_proxy_[node] % pool;
            ++next_proxy_[node];
            p.local_qubits = std::max(p.local_qubits, idx + 1);
        } else {
            idx = p.data_qubits + t.idx;
            p.local_qubits = std::max(p.local_qubits, idx + 1);
        }
        if (zones_[node].size() <= idx) zones_[node].resize(idx + 1, Zone::Comp);
        zones_[node][idx] = Zone::Comp;
        return {node, idx};
    }

    // SEND half: state leaves `src` from the communication zone.
    TransferId send(Opcode op, Local src, std::size_t peer) {
        to_comm(src);
        TransferId t = fresh_transfer();
        push(src.node, Delegate{ProtocolInstruction{op, src.idx, peer, t}});
        return t;
    }

    // GET half: wait for the QNPU, then bring the received state into the computation zone.
    void get(Opcode op, Local dst, TransferId t, bool from_transfer) {
        push(dst.node, Delegate{ProtocolInstruction{op, dst.idx, std::nullopt, t}});
        push(dst.node, WaitNotify{t});
        if (!from_transfer && opts_.dependencies == DependencyModel::CommuteDiagonal) {
            // the home qubit stays in the communication zone until a later operation needs it
            return;
        }
        push(dst.node, ZoneMoveToComp{dst.idx, from_transfer ? std::optional<TransferId>(t) : std::nullopt});
        zone(dst) = Zone::Comp;
    }

    void teleport(Local src, Local dst) {
        TransferId t = send(Opcode::SendTpQubit, src, dst.node);
        get(Opcode::GetTpQubit, dst, t, true);
    }

    void cat_ent(Local src, Local dst) {
        TransferId t = send(Opcode::SendCatEntQubit, src, dst.node);
        get(Opcode::GetCatEntQubit, dst, t, true);
    }

    void cat_disent(Local remote, Local home) {
        TransferId t = send(Opcode::SendCatDisentQubit, remote, home.node);
        get(Opcode::GetCatDisentQubit, home, t, false);
    }

    void apply(Gate g, const std::vector<Local>& qs, const std::vector<double>& params) {
        Apply a{g, {}, params};
        for (const auto& l : qs) {
            to_comp(l);
            a.qubits.push_back(l.idx);
        }
        push(qs.front().node, std::move(a));
    }

    static bool same_qubit(const QubitRef& a, const QubitRef& b) { return a.reg == b.reg && a.offset == b.offset; }

    static bool touches(const Stmt& s, const QubitRef& q) {
        const auto* g = std::get_if<dqasm::LocalGate>(&s.value);
        if (g == nullptr) return true;  // be conservative with anything but plain gates
        for (const auto& x : g->qubits) {
            if (same_qubit(x, q)) return true;
        }
        return false;
    }

    // Statements after `k` that can share the cat of remote gate `k`: further remote
    // gates of the same kind on the same (control, target) pair, and single-qubit gates
    // on the target between them. Statements on other qubits are stepped over; they
    // commute with the whole group.
    std::vector<std::size_t> cat_group(const std::vector<Stmt>& stmts, const std::vector<char>& consumed, std::size_t k) const {
        const auto& g = std::get<dqasm::LocalGate>(stmts[k].value);
        const QubitRef& c = g.qubits[0];
        const QubitRef& t = g.qubits[1];
        std::vector<std::size_t> group, pending;
        for (std::size_t j = k + 1; j < stmts.size(); ++j) {
            if (consumed[j]) continue;
            const Stmt& s = stmts[j];
            if (!touches(s, c) && !touches(s, t)) continue;
            const auto* h = std::get_if<dqasm::LocalGate>(&s.value);
            if (h == nullptr) break;
            if (h->qubits.size() == 1 && same_qubit(h->qubits[0], t)) {
                pending.push_back(j);
                continue;
            }
            if (h->gate == g.gate && h->qubits.size() == 2 && same_qubit(h->qubits[0], c) && same_qubit(h->qubits[1], t)) {
                group.insert(group.end(), pending.begin(), pending.end());
                pending.clear();
                group.push_back(j);
                continue;
            }
            break;
        }
        return group;
    }

    void remote_gate(const dqasm::LocalGate& g, const std::vector<const dqasm::LocalGate*>& tail = {}) {
        Local c = loc(g.qubits[0]);
        Local t = loc(g.qubits[1]);
        Local p = proxy(t);
        if (opts_.protocol == Protocol::Cat && g.gate != Gate::SWAP) {
            cat_ent(c, p);
            apply(g.gate, {p, t}, g.params);
            for (const auto* h : tail) {
                if (h->qubits.size() == 2) {
                    apply(h->gate, {p, t}, h->params);
                } else {
                    apply(h->gate, {t}, h->params);
                }
            }
            cat_disent(p, c);
        } else {
            teleport(c, p);
            apply(g.gate, {p, t}, g.params);
            teleport(p, c);
        }
    }

    void lower_stmts(const std::vector<Stmt>& stmts) {
        std::vector<char> consumed(stmts.size(), 0);
        for (std::size_t k = 0; k < stmts.size(); ++k) {
            if (consumed[k]) continue;
            const Stmt& s = stmts[k];
            std::visit(
                [&](const auto& st) {
                    using T = std::decay_t<decltype(st)>;
                    if constexpr (std::is_same_v<T, dqasm::LocalGate>) {
                        if (st.qubits.size() == 2 && st.qubits[0].node != st.qubits[1].node) {
                            if (opts_.mode == dqasm::ParseMode::Strict) {
                                throw CompileError("residual cross-node gate " + std::string(dqasm::gate_name(st.gate)) +
                                                   " in strict mode");
                            }
                            std::vector<const dqasm::LocalGate*> tail;
                            if (opts_.group_cats && opts_.protocol == Protocol::Cat && st.gate != Gate::SWAP) {
                                for (auto j : cat_group(stmts, consumed, k)) {
                                    consumed[j] = 1;
                                    tail.push_back(&std::get<dqasm::LocalGate>(stmts[j].value));
                                }
                            }
                            remote_gate(st, tail);
                        } else {
                            std::vector<Local> qs;
                            for (const auto& q : st.qubits) qs.push_back(loc(q));
                            apply(st.gate, qs, st.params);
                        }
                    } else if constexpr (std::is_same_v<T, dqasm::Teleport>) {
                        teleport(loc(st.src), loc(st.dst));
                    } else if constexpr (std::is_same_v<T, dqasm::CatEnt>) {
                        Local src = loc(st.src);
                        Local dst = loc(st.dst);
                        auto key = std::make_pair(dst.node, dst.idx);
                        if (open_cats_.count(key)) throw CompileError("cat_ent onto a qubit that already holds an open cat");
                        open_cats_[key] = std::make_pair(src.node, src.idx);
                        cat_ent(src, dst);
                    } else if constexpr (std::is_same_v<T, dqasm::CatDisent>) {
                        Local remote = loc(st.remote);
                        Local home = loc(st.home);
                        auto it = open_cats_.find({remote.node, remote.idx});
                        if (it == open_cats_.end() || it->second != std::make_pair(home.node, home.idx)) {
                            throw CompileError("cat_disent without a matching cat_ent");
                        }
                        open_cats_.erase(it);
                        cat_disent(remote, home);
                    } else if constexpr (std::is_same_v<T, dqasm::Measure>) {
                        Local l = loc(st.qubit);
                        to_comp(l);
                        push(l.node, MeasureQ{l.idx, st.bit});
                    } else if constexpr (std::is_same_v<T, dqasm::RemoteBlock>) {
                        lower_stmts(st.body);
                    }
                },
                s.value);
        }
    }

    const CircuitIR& ir_;
    LowerOptions opts_;
    std::vector<NodeProgram> progs_;
    std::vector<std::vector<Zone>> zones_;
    std::vector<std::uint32_t> next_proxy_;
    TransferId transfer_counter_ = 0;
    std::map<std::pair<std::size_t, std::uint32_t>, std::pair<std::size_t, std::uint32_t>> open_cats_;
};

std::string bit_text(const dqasm::BitRef& b) { return b.reg + "[" + std::to_string(b.offset) + "]"; }

}  // namespace

std::string_view protocol_name(Protocol p) { return p == Protocol::Tp ? "tp" : "cat"; }

Protocol protocol_from_name(std::string_view s) {
    if (s == "tp") return Protocol::Tp;
    if (s == "cat") return Protocol::Cat;
    throw ConfigError("unknown protocol '" + std::string(s) + "' (expected tp or cat)");
}

std::string_view proxy_policy_name(ProxyPolicy p) {
    switch (p) {
        case ProxyPolicy::Fresh: return "fresh";
        case ProxyPolicy::Fixed: return "fixed";
        case ProxyPolicy::DataSized: return "data";
        case ProxyPolicy::Operand: return "operand";
    }
    return "data";
}

ProxyPolicy proxy_policy_from_name(std::string_view s) {
    if (s == "fresh") return ProxyPolicy::Fresh;
    if (s == "fixed") return ProxyPolicy::Fixed;
    if (s == "data") return ProxyPolicy::DataSized;
    if (s == "operand") return ProxyPolicy::Operand;
    throw ConfigError("unknown proxy policy '" + std::string(s) + "' (expected fresh, fixed, data or operand)");
}

std::vector<std::vector<std::size_t>> NodeProgram::predecessors() const {
    std::vector<std::vector<std::size_t>> out(qpu_stream.size());
    for (const auto& [a, b] : dep_edges) out[b].push_back(a);
    return out;
}

std::vector<NodeProgram> lower(const CircuitIR& ir, const LowerOptions& opts) {
    if (opts.proxy_policy == ProxyPolicy::Fixed && opts.proxy_pool == 0) throw ConfigError("proxy pool size must be positive");
    dqasm::validate(ir, opts.mode);
    return Lowering(ir, opts).run();
}

RemoteCounts count_remote_gates(const CircuitIR& ir) {
    RemoteCounts rc;
    rc.per_node.assign(ir.nodes.size(), 0);
    auto walk = [&](const auto& self, const std::vector<Stmt>& stmts) -> void {
        for (const auto& s : stmts) {
            if (const auto* g = std::get_if<dqasm::LocalGate>(&s.value)) {
                if (g->qubits.size() == 2 && g->qubits[0].node != g->qubits[1].node) {
                    ++rc.total;
                    ++rc.per_node.at(g->qubits[0].node);
                    ++rc.per_node.at(g->qubits[1].node);
                }
            } else if (const auto* b = std::get_if<dqasm::RemoteBlock>(&s.value)) {
                self(self, b->body);
            }
        }
    };
    walk(walk, ir.stmts);
    for (auto n : rc.per_node) rc.max_per_node = std::max(rc.max_per_node, n);
    return rc;
}

std::vector<std::uint32_t> touched_qubits(const QpuInstr& in) {
    return std::visit(
        [](const auto& i) -> std::vector<std::uint32_t> {
            using T = std::decay_t<decltype(i)>;
            if constexpr (std::is_same_v<T, Apply>) {
                return i.qubits;
            } else if constexpr (std::is_same_v<T, Delegate>) {
                return {i.p.qubit_reg};
            } else if constexpr (std::is_same_v<T, WaitNotify>) {
                return {};
            } else {
                return {i.qubit};
            }
        },
        in);
}

std::vector<std::pair<std::uint32_t, bool>> qubit_touches(const QpuInstr& in) {
    std::vector<std::pair<std::uint32_t, bool>> out;
    if (const auto* a = std::get_if<Apply>(&in)) {
        for (std::size_t k = 0; k < a->qubits.size(); ++k) {
            bool diag = false;
            switch (a->gate) {
                case Gate::CP:
                case Gate::RZ:
                case Gate::Z: diag = true; break;
                case Gate::CNOT: diag = k == 0; break;
                default: break;
            }
            out.emplace_back(a->qubits[k], diag);
        }
        return out;
    }
    if (const auto* d = std::get_if<Delegate>(&in)) {
        // cat-entangler source acts as a control; the disentangler applies a Z correction
        bool diag = d->p.opcode == Opcode::SendCatEntQubit || d->p.opcode == Opcode::GetCatDisentQubit;
        out.emplace_back(d->p.qubit_reg, diag);
        return out;
    }
    for (auto q : touched_qubits(in)) out.emplace_back(q, false);
    return out;
}

NodeProgram dependency_analysis(NodeProgram p, DependencyModel model) {
    p.dep_edges.clear();
    struct Hist {
        std::optional<std::size_t> last_write;
        std::vector<std::size_t> diag;  // diagonal touches since last_write
    };
    std::unordered_map<std::uint32_t, Hist> hist;
    std::unordered_map<TransferId, std::size_t> chain;  // last instruction on each transfer chain
    for (std::size_t i = 0; i < p.qpu_stream.size(); ++i) {
        std::vector<std::size_t> preds;
        const QpuInstr& in = p.qpu_stream[i];
        for (auto [q, diag] : qubit_touches(in)) {
            Hist& h = hist[q];
            if (h.last_write) preds.push_back(*h.last_write);
            if (diag && model == DependencyModel::CommuteDiagonal) {
                h.diag.push_back(i);
            } else {
                preds.insert(preds.end(), h.diag.begin(), h.diag.end());
                h.diag.clear();
                h.last_write = i;
            }
        }
        std::optional<TransferId> t;
        if (const auto* d = std::get_if<Delegate>(&in)) t = d->p.transfer_id;
        if (const auto* w = std::get_if<WaitNotify>(&in)) t = w->transfer;
        if (const auto* m = std::get_if<ZoneMoveToComp>(&in)) t = m->from;
        if (t) {
            auto it = chain.find(*t);
            if (it != chain.end()) preds.push_back(it->second);
            chain[*t] = i;
        }
        std::sort(preds.begin(), preds.end());
        preds.erase(std::unique(preds.begin(), preds.end()), preds.end());
        for (auto a : preds) p.dep_edges.emplace_back(a, i);
    }
    return p;
}

bool depends_on(const NodeProgram& p, std::size_t earlier, std::size_t later) {
    if (earlier >= later) return false;
    auto preds = p.predecessors();
    std::vector<char> seen(p.qpu_stream.size(), 0);
    std::vector<std::size_t> stack{later};
    while (!stack.empty()) {
        std::size_t x = stack.back();
        stack.pop_back();
        for (auto y : preds[x]) {
            if (y == earlier) return true;
            if (y > earlier && !seen[y]) {
                seen[y] = 1;
                stack.push_back(y);
            }
        }
    }
    return false;
}

std::string instr_text(const QpuInstr& in, const std::vector<std::string>& node_names) {
    return std::visit(
        [&](const auto& i) -> std::string {
            using T = std::decay_t<decltype(i)>;
            if constexpr (std::is_same_v<T, Apply>) {
                std::string s(dqasm::gate_name(i.gate));
                if (!i.params.empty()) {
                    s += '(';
                    for (std::size_t k = 0; k < i.params.size(); ++k) {
                        if (k) s += ", ";
                        s += dqasm::format_angle(i.params[k]);
                    }
                    s += ')';
                }
                for (std::size_t k = 0; k < i.qubits.size(); ++k) s += (k ? ", $" : " $") + std::to_string(i.qubits[k]);
                return s;
            } else if constexpr (std::is_same_v<T, ZoneMoveToComm>) {
                return "ZONE_MOVE_TO_COMM $" + std::to_string(i.qubit);
            } else if constexpr (std::is_same_v<T, ZoneMoveToComp>) {
                std::string s = "ZONE_MOVE_TO_COMP $" + std::to_string(i.qubit);
                if (i.from) s += ", TransferID_" + std::to_string(*i.from);
                return s;
            } else if constexpr (std::is_same_v<T, Delegate>) {
                std::string s(core::opcode_name(i.p.opcode));
                s += " $" + std::to_string(i.p.qubit_reg);
                if (i.p.peer) {
                    s += ", ";
                    s += *i.p.peer < node_names.size() ? node_names[*i.p.peer] : "node" + std::to_string(*i.p.peer);
                }
                return s + ", TransferID_" + std::to_string(i.p.transfer_id);
            } else if constexpr (std::is_same_v<T, WaitNotify>) {
                return "WAIT_NOTIFY TransferID_" + std::to_string(i.transfer);
            } else {
                return "MEASURE $" + std::to_string(i.qubit) + " -> " + bit_text(i.bit);
            }
        },
        in);
}

std::string dump(const NodeProgram& p, const std::vector<std::string>& node_names) {
    auto preds = p.predecessors();
    std::string out = "// " + p.name + ": " + std::to_string(p.data_qubits) + " data qubits, " +
                      std::to_string(p.local_qubits - p.data_qubits) + " proxies\n";
    for (std::size_t i = 0; i < p.qpu_stream.size(); ++i) {
        out += std::to_string(i) + ": " + instr_text(p.qpu_stream[i], node_names) + " [";
        for (std::size_t k = 0; k < preds[i].size(); ++k) {
            if (k) out += ", ";
            out += std::to_string(preds[i][k]);
        }
        out += "]\n";
    }
    return out;
}

}  // namespace qnpu::compiler
