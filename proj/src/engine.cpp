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

#include "qnpu/engine.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "qnpu/error.hpp"

namespace qnpu::sim {

namespace {

using compiler::Apply;
using compiler::Delegate;
using compiler::MeasureQ;
using compiler::NodeProgram;
using compiler::QpuInstr;
using compiler::WaitNotify;
using compiler::ZoneMoveToComm;
using compiler::ZoneMoveToComp;
using core::MicroOp;
using core::Opcode;
using core::PayloadKind;
using core::Reg;
using core::TransferId;
using core::UopKind;

constexpr std::uint64_t kNever = std::numeric_limits<std::uint64_t>::max();

enum class St : std::uint8_t { Waiting, Ready, Issued, Done };

enum class Block : std::uint8_t { None, Recv, Release, Epr };

struct Event {
    enum class Type : std::uint8_t { InstrDone, LaneWake, MessageSend };
    std::uint64_t time = 0;
    std::uint64_t seq = 0;
    Type type = Type::InstrDone;
    std::size_t node = 0;
    std::size_t a = 0;     // instruction index or lane index or message slot
    std::uint64_t gen = 0;  // lane wake generation

    bool operator>(const Event& o) const { return time != o.time ? time > o.time : seq > o.seq; }
};

struct Lane {
    bool busy = false;
    std::size_t instr = 0;
    TransferId transfer = 0;
    Opcode op = Opcode::SendTpQubit;
    std::vector<MicroOp> uops;
    std::size_t pc = 0;
    std::uint64_t uop_start = 0;
    std::uint64_t started = 0;
    core::RegisterFile regs;
    std::optional<std::size_t> peer;
    Block block = Block::None;
    std::uint64_t gen = 0;
};

struct NodeState {
    NodeProgram prog;
    std::vector<std::vector<std::size_t>> succs;
    std::vector<std::uint32_t> pending;
    std::vector<St> st;
    std::set<std::size_t> ready_local;
    std::set<std::size_t> ready_deleg;
    std::uint64_t last_issue = kNever;
    std::vector<Lane> lanes;
    std::size_t rr = 0;
    core::EprResourceTable epr;
    std::unordered_map<TransferId, std::size_t> lane_of;
    std::unordered_map<TransferId, std::uint32_t> slot_of;
    std::unordered_set<TransferId> moved;
    std::set<TransferId> open;  // transfers with an unfinished half on this node
    std::size_t comm_free = 0;               // communication qubits not held by a lane
    std::size_t done_count = 0;
    NodeStats stats;
};

bool is_get_with_tail(Opcode op) { return op == Opcode::GetTpQubit || op == Opcode::GetCatEntQubit; }

std::uint64_t apply_latency(const LatencyModel& l, dqasm::Gate g) {
    if (g == dqasm::Gate::SWAP) return 3ULL * l.two_qubit_gate;
    return dqasm::gate_arity(g) == 2 ? l.two_qubit_gate : l.single_qubit_gate;
}

}  // namespace

std::string label_text(const QubitLabel& q) {
    return "n" + std::to_string(q.node) + (q.zone == QubitLabel::Zone::Data ? ".d" : ".c") + std::to_string(q.index);
}

struct Engine::Impl {
    ArchConfig cfg;
    EngineOptions opts;
    std::vector<NodeState> nodes;
    std::vector<std::string> names;
    // transfer -> (node, index) of its SEND and GET halves
    std::unordered_map<TransferId, std::pair<std::size_t, std::size_t>> send_of, get_of;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> pq;
    std::uint64_t seq = 0;
    std::uint64_t now = 0;
    bool retry = false;
    core::NetworkBuffers net;
    std::vector<core::ClassicalMessage> outbox;  // messages waiting for their send time
    std::vector<std::size_t> outbox_free;
    std::uint64_t pair_counter = 0;
    std::map<std::pair<std::size_t, std::size_t>, std::deque<core::PairId>> pools;
    std::unordered_map<core::PairId, std::pair<std::size_t, std::size_t>> pair_nodes;
    std::unordered_map<core::PairId, int> released_halves;
    std::int64_t meas_counter = 0;
    std::uint64_t uops_issued = 0;
    std::uint64_t uops_completed = 0;
    std::uint64_t finish = 0;
    ProtocolTrace trace;
    std::set<TransferId> pairable;  // both halves Ready, not yet issued

    Impl(std::vector<NodeProgram> programs, ArchConfig c, EngineOptions o)
        : cfg(std::move(c)), opts(std::move(o)), net(cfg.network_capacity) {
        cfg.check();
        std::size_t lanes = cfg.mode == Mode::Monolithic ? 1 : cfg.qnpu_width;
        for (std::size_t n = 0; n < programs.size(); ++n) {
            if (programs[n].node != n) throw SimulationError("node programs must be given in node order");
            NodeState ns;
            ns.prog = std::move(programs[n]);
            std::size_t sz = ns.prog.qpu_stream.size();
            ns.succs.resize(sz);
            ns.pending.assign(sz, 0);
            ns.st.assign(sz, St::Waiting);
            for (const auto& [a, b] : ns.prog.dep_edges) {
                if (a >= b || b >= sz) throw SimulationError("dependency edge out of program order");
                ns.succs[a].push_back(b);
                ++ns.pending[b];
            }
            ns.lanes.resize(lanes);
            ns.comm_free = cfg.comm_zone_size != 0 ? cfg.comm_zone_size : std::max<std::uint32_t>(1, ns.prog.data_qubits);
            ns.stats.instructions = sz;
            for (std::size_t i = 0; i < sz; ++i) {
                if (const auto* d = std::get_if<Delegate>(&ns.prog.qpu_stream[i])) {
                    ++ns.stats.delegates;
                    ns.open.insert(d->p.transfer_id);
                    auto& m = core::is_send(d->p.opcode) ? send_of : get_of;
                    if (!m.emplace(d->p.transfer_id, std::make_pair(n, i)).second) {
                        throw SimulationError("transfer " + std::to_string(d->p.transfer_id) + " has two halves of one kind");
                    }
                }
            }
            nodes.push_back(std::move(ns));
        }
        for (const auto& [t, s] : send_of) {
            auto g = get_of.find(t);
            if (g == get_of.end()) throw SimulationError("transfer " + std::to_string(t) + " has no GET half");
            const auto& sd = std::get<Delegate>(nodes[s.first].prog.qpu_stream[s.second]).p;
            const auto& gd = std::get<Delegate>(nodes[g->second.first].prog.qpu_stream[g->second.second]).p;
            if (core::complement(sd.opcode) != gd.opcode || sd.peer != g->second.first) {
                throw SimulationError("transfer " + std::to_string(t) + " halves do not match");
            }
        }
        if (get_of.size() != send_of.size()) throw SimulationError("GET half without a SEND half");
        names = opts.node_names;
        for (std::size_t n = names.size(); n < nodes.size(); ++n) names.push_back(nodes[n].prog.name);
        for (std::size_t n = 0; n < nodes.size(); ++n) {
            for (std::size_t i = 0; i < nodes[n].st.size(); ++i) {
                if (nodes[n].pending[i] == 0) make_ready(n, i);
            }
        }
    }

    // ---- helpers -----------------------------------------------------------------

    void push(Event e) {
        e.seq = seq++;
        pq.push(e);
    }

    void log(std::size_t node, const std::string& unit, const std::string& what) {
        if (opts.log == nullptr) return;
        *opts.log << now << ' ' << names[node] << ' ' << unit << ' ' << what << '\n';
    }

    void complete_at(std::size_t n, std::size_t idx, std::uint64_t t) { push({t, 0, Event::Type::InstrDone, n, idx, 0}); }

    void wake(std::size_t n, std::size_t l, std::uint64_t t) {
        Lane& lane = nodes[n].lanes[l];
        ++lane.gen;
        push({t, 0, Event::Type::LaneWake, n, l, lane.gen});
    }

    void make_ready(std::size_t n, std::size_t idx) {
        NodeState& ns = nodes[n];
        const QpuInstr& in = ns.prog.qpu_stream[idx];
        if (std::holds_alternative<WaitNotify>(in)) {
            ns.st[idx] = St::Issued;
            complete_at(n, idx, now);
            return;
        }
        ns.st[idx] = St::Ready;
        if (const auto* d = std::get_if<Delegate>(&in)) {
            ns.ready_deleg.insert(idx);
            TransferId t = d->p.transfer_id;
            const auto& other = core::is_send(d->p.opcode) ? get_of.at(t) : send_of.at(t);
            if (nodes[other.first].st[other.second] == St::Ready) pairable.insert(t);
        } else {
            ns.ready_local.insert(idx);
        }
    }

    void instr_done(std::size_t n, std::size_t idx) {
        NodeState& ns = nodes[n];
        ns.st[idx] = St::Done;
        ++ns.done_count;
        if (const auto* d = std::get_if<Delegate>(&ns.prog.qpu_stream[idx])) ns.open.erase(d->p.transfer_id);
        ns.stats.finish_cycle = std::max(ns.stats.finish_cycle, now);
        finish = std::max(finish, now);
        for (auto s : ns.succs[idx]) {
            if (--ns.pending[s] == 0) make_ready(n, s);
        }
        if (const auto* m = std::get_if<ZoneMoveToComp>(&ns.prog.qpu_stream[idx]); m && m->from) {
            ns.moved.insert(*m->from);
            auto it = ns.lane_of.find(*m->from);
            if (it != ns.lane_of.end() && ns.lanes[it->second].block == Block::Release) wake(n, it->second, now);
        }
    }

    bool lane_free(std::size_t n) const {
        for (const auto& l : nodes[n].lanes) {
            if (!l.busy) return true;
        }
        return false;
    }

    QubitLabel data(std::size_t n, std::uint32_t q) const { return {n, QubitLabel::Zone::Data, q}; }
    QubitLabel comm(std::size_t n, std::uint32_t q) const { return {n, QubitLabel::Zone::Comm, q}; }

    void record(TraceOp op) {
        if (!opts.record_trace) return;
        op.cycle = now;
        trace.ops.push_back(std::move(op));
    }

    // ---- issue -------------------------------------------------------------------

    void issue_local(std::size_t n, std::size_t idx) {
        NodeState& ns = nodes[n];
        ns.ready_local.erase(idx);
        ns.st[idx] = St::Issued;
        ns.last_issue = now;
        const LatencyModel& L = cfg.latency;
        const QpuInstr& in = ns.prog.qpu_stream[idx];
        std::uint64_t d = 0;
        if (const auto* a = std::get_if<Apply>(&in)) {
            d = apply_latency(L, a->gate);
            TraceOp op;
            op.kind = TraceOp::Kind::Gate;
            op.gate = a->gate;
            op.params = a->params;
            for (auto q : a->qubits) op.qubits.push_back(data(n, q));
            record(std::move(op));
        } else if (std::holds_alternative<ZoneMoveToComm>(in)) {
            d = L.zone_move;
        } else if (const auto* m = std::get_if<ZoneMoveToComp>(&in)) {
            d = L.zone_move;
            if (m->from) {
                auto it = ns.slot_of.find(*m->from);
                if (it == ns.slot_of.end()) throw SimulationError("zone move from a transfer that holds no EPR qubit");
                TraceOp op;
                op.kind = TraceOp::Kind::Swap;
                op.qubits = {comm(n, it->second), data(n, m->qubit)};
                record(std::move(op));
            }
        } else if (const auto* m = std::get_if<MeasureQ>(&in)) {
            d = L.measurement;
            TraceOp op;
            op.kind = TraceOp::Kind::Measure;
            op.qubits = {data(n, m->qubit)};
            op.meas_id = meas_counter++;
            record(std::move(op));
        }
        log(n, "qpu", compiler::instr_text(in, names));
        complete_at(n, idx, now + d);
    }

    void issue_delegate(std::size_t n, std::size_t idx) {
        NodeState& ns = nodes[n];
        ns.ready_deleg.erase(idx);
        ns.st[idx] = St::Issued;
        if (cfg.mode == Mode::Monolithic) ns.last_issue = now;
        const auto& p = std::get<Delegate>(ns.prog.qpu_stream[idx]).p;
        std::size_t l = ns.lanes.size();
        for (std::size_t k = 0; k < ns.lanes.size(); ++k) {
            std::size_t c = (ns.rr + k) % ns.lanes.size();
            if (!ns.lanes[c].busy) {
                l = c;
                break;
            }
        }
        if (l == ns.lanes.size()) throw SimulationError("delegate issued without a free lane");
        ns.rr = (l + 1) % ns.lanes.size();
        Lane& lane = ns.lanes[l];
        lane.busy = true;
        lane.instr = idx;
        lane.transfer = p.transfer_id;
        lane.op = p.opcode;
        lane.uops = core::decode(p);
        lane.pc = 0;
        lane.regs.clear();
        lane.regs.write(Reg::CommQubReg, p.qubit_reg);
        lane.peer = p.peer;
        --ns.comm_free;
        lane.block = Block::None;
        lane.uop_start = now + cfg.latency.decode;
        lane.started = now;
        ns.lane_of[p.transfer_id] = l;
        log(n, unit_name(l), compiler::instr_text(ns.prog.qpu_stream[idx], names));
        wake(n, l, lane.uop_start);
    }

    std::string unit_name(std::size_t l) const { return cfg.mode == Mode::Monolithic ? "unit" : "lane" + std::to_string(l); }

    std::optional<std::size_t> best_local(std::size_t n) const {
        if (nodes[n].ready_local.empty()) return std::nullopt;
        return *nodes[n].ready_local.begin();
    }

    // Pairs whose halves are both ready are arbitrated globally, oldest transfer first.
    // A pair issues when both nodes have a free lane and a free communication qubit;
    // a half never waits in a lane for an unissued partner, so lanes cannot form
    // wait-for cycles. Decoupled QPUs forward any number of delegates per cycle. The
    // monolithic unit spends its single issue slot on the pair, and only when no
    // older local is ready. Local instructions issue one per cycle in stream order.
    bool issue_phase() {
        bool any = false;
        std::vector<std::optional<std::size_t>> local(nodes.size());
        for (std::size_t n = 0; n < nodes.size(); ++n) {
            if (nodes[n].last_issue != now) local[n] = best_local(n);
        }
        for (auto it = pairable.begin(); it != pairable.end();) {
            auto [sn, si] = send_of.at(*it);
            auto [gn, gi] = get_of.at(*it);
            NodeState& s = nodes[sn];
            NodeState& g = nodes[gn];
            bool mono = cfg.mode == Mode::Monolithic;
            bool slots = !mono || (s.last_issue != now && g.last_issue != now);
            if (!slots) retry = true;
            if (slots && s.comm_free > 0 && g.comm_free > 0 && lane_free(sn) && lane_free(gn) &&
                (!mono || (!(local[sn] && *local[sn] < si) && !(local[gn] && *local[gn] < gi)))) {
                it = pairable.erase(it);
                issue_delegate(sn, si);
                issue_delegate(gn, gi);
                any = true;
            } else {
                ++it;
            }
        }
        for (std::size_t n = 0; n < nodes.size(); ++n) {
            NodeState& ns = nodes[n];
            if (ns.last_issue != now && local[n]) {
                issue_local(n, *local[n]);
                any = true;
            }
            if (ns.last_issue == now && (!ns.ready_local.empty() || !ns.ready_deleg.empty())) retry = true;
        }
        return any;
    }

    // ---- QNPU lanes ----------------------------------------------------------------

    std::uint32_t qubit_reg_target(const Lane& lane, Reg r) const {
        return static_cast<std::uint32_t>(lane.regs.read(r));
    }

    QubitLabel reg_label(std::size_t n, const Lane& lane, Reg r) const {
        if (r == Reg::CommQubReg) return data(n, qubit_reg_target(lane, r));
        return comm(n, qubit_reg_target(lane, r));
    }

    void send_message(std::size_t n, const Lane& lane, std::uint64_t at, core::Payload payload) {
        if (!lane.peer) throw SimulationError("classical send without a peer node");
        core::ClassicalMessage m;
        m.src_node = n;
        m.dst_node = *lane.peer;
        m.transfer_id = lane.transfer;
        m.payload = std::move(payload);
        m.sent_at = at;
        m.visible_at = at + cfg.latency.classical_link_hop;
        std::size_t slot;
        if (!outbox_free.empty()) {
            slot = outbox_free.back();
            outbox_free.pop_back();
            outbox[slot] = std::move(m);
        } else {
            slot = outbox.size();
            outbox.push_back(std::move(m));
        }
        push({at, 0, Event::Type::MessageSend, n, slot, 0});
    }

    void deliver(std::size_t slot) {
        core::ClassicalMessage m = std::move(outbox[slot]);
        outbox_free.push_back(slot);
        std::size_t dst = m.dst_node;
        TransferId t = m.transfer_id;
        net.send(std::move(m));
        NodeState& ds = nodes[dst];
        auto it = ds.lane_of.find(t);
        if (it == ds.lane_of.end()) return;
        Lane& lane = ds.lanes[it->second];
        if (lane.block != Block::Recv) return;
        if (auto vis = net.peek(dst, t, recv_kind(lane.uops[lane.pc].kind))) wake(dst, it->second, *vis);
    }

    static PayloadKind recv_kind(UopKind k) {
        return k == UopKind::RecvEprId ? PayloadKind::EprId : k == UopKind::AckWait ? PayloadKind::Ack : PayloadKind::MeasBits;
    }

    // Pairs are pooled per (sender, receiver) direction so a pair announced by one
    // side can never be grabbed by the other side's own reservation.
    core::PairId synthesize_pair(std::size_t a, std::size_t b) {
        core::PairId id = ++pair_counter;
        std::uint32_t sa = nodes[a].epr.free_qubit_index();
        std::uint32_t sb = nodes[b].epr.free_qubit_index();
        nodes[a].epr.prefetch(id, b, sa);
        nodes[b].epr.prefetch(id, a, sb);
        pair_nodes[id] = {a, b};
        TraceOp op;
        op.kind = TraceOp::Kind::EprPrepare;
        op.qubits = {comm(a, sa), comm(b, sb)};
        record(std::move(op));
        return id;
    }

    std::optional<core::PairId> reserve(std::size_t n, std::size_t peer) {
        core::PairId id = 0;
        if (cfg.epr_mode == EprMode::Finite) {
            auto key = std::make_pair(n, peer);
            auto [it, fresh] = pools.try_emplace(key);
            if (fresh) {
                for (std::uint32_t k = 0; k < cfg.epr_capacity; ++k) it->second.push_back(synthesize_pair(n, peer));
            }
            if (it->second.empty()) return std::nullopt;
            id = it->second.front();
            it->second.pop_front();
        } else {
            id = synthesize_pair(n, peer);
        }
        nodes[n].epr.reserve_sync(id);
        return id;
    }

    void release(std::size_t n, std::uint32_t slot) {
        core::PairId id = 0;
        for (const auto& e : nodes[n].epr.entries()) {
            if (e.state == core::EprState::Occupied && e.epr_qubit_index == slot) id = *e.pair_id;
        }
        nodes[n].epr.release(slot);
        if (++released_halves[id] == 2) {
            released_halves.erase(id);
            auto [a, b] = pair_nodes.at(id);
            pair_nodes.erase(id);
            if (cfg.epr_mode == EprMode::Finite) {
                pools[{a, b}].push_back(synthesize_pair(a, b));
                for (std::size_t l = 0; l < nodes[a].lanes.size(); ++l) {
                    if (nodes[a].lanes[l].block == Block::Epr) wake(a, l, now);
                }
            }
        }
    }

    std::uint64_t uop_cost(const MicroOp& u) const {
        const LatencyModel& L = cfg.latency;
        switch (u.kind) {
            case UopKind::EprReserve:
            case UopKind::EprReserveSync:
            case UopKind::GetEprQubit:
            case UopKind::EprRelease:
                return L.epr_reserve_lookup;
            case UopKind::SendEprId:
            case UopKind::AckSend:
            case UopKind::TpSendBits:
            case UopKind::RecvEprId:
            case UopKind::AckWait:
            case UopKind::TpRecvBits:
                return L.uop_issue;
            case UopKind::TransferSuccessNotify:
                return L.qpu_qnpu_signal;
            case UopKind::Cnot:
                return u.condition ? L.conditional_gate : L.two_qubit_gate;
            case UopKind::H:
            case UopKind::X:
            case UopKind::Z:
                return u.condition ? L.conditional_gate : L.single_qubit_gate;
            case UopKind::Meas:
                return L.measurement;
        }
        return 0;
    }

    // Executes µops of one lane starting at `now` until it blocks or must wait for time to pass.
    void advance(std::size_t n, std::size_t l) {
        NodeState& ns = nodes[n];
        Lane& lane = ns.lanes[l];
        const LatencyModel& L = cfg.latency;
        while (lane.busy) {
            if (lane.uop_start > now) {
                wake(n, l, lane.uop_start);
                return;
            }
            if (lane.pc == lane.uops.size()) {
                finish_lane(n, l);
                return;
            }
            const MicroOp& u = lane.uops[lane.pc];
            // The monolithic pipeline issues one instruction per cycle: a µop that
            // takes time competes with local gates for the node's issue slot.
            const bool slot = cfg.mode == Mode::Monolithic && uop_cost(u) > 0;
            if (slot && ns.last_issue == now) {
                wake(n, l, now + 1);
                return;
            }
            std::uint64_t c = now;
            switch (u.kind) {
                case UopKind::EprReserve: {
                    auto id = reserve(n, *lane.peer);
                    if (!id) {
                        lane.block = Block::Epr;
                        return;
                    }
                    lane.regs.write(u.regs[0], static_cast<std::int64_t>(*id));
                    c += L.epr_reserve_lookup;
                    break;
                }
                case UopKind::EprReserveSync:
                    ns.epr.reserve_sync(static_cast<core::PairId>(lane.regs.read(Reg::EPRIdReg)));
                    lane.regs.write(u.regs[0], 1);
                    c += L.epr_reserve_lookup;
                    break;
                case UopKind::GetEprQubit: {
                    std::uint32_t q = ns.epr.qubit_of(static_cast<core::PairId>(lane.regs.read(Reg::EPRIdReg)));
                    lane.regs.write(u.regs[0], q);
                    ns.slot_of[lane.transfer] = q;
                    c += L.epr_reserve_lookup;
                    break;
                }
                case UopKind::EprRelease:
                    if (is_get_with_tail(lane.op) && !ns.moved.count(lane.transfer)) {
                        lane.block = Block::Release;
                        return;
                    }
                    release(n, qubit_reg_target(lane, u.regs[0]));
                    c += L.epr_reserve_lookup;
                    break;
                case UopKind::SendEprId:
                    c += L.uop_issue;
                    send_message(n, lane, c, core::EprIdPayload{static_cast<core::PairId>(lane.regs.read(Reg::EPRIdReg))});
                    break;
                case UopKind::AckSend:
                    c += L.uop_issue;
                    send_message(n, lane, c, core::AckPayload{lane.regs.read(u.regs[0])});
                    break;
                case UopKind::TpSendBits: {
                    core::MeasBitsPayload bits;
                    for (Reg r : u.regs) {
                        if (r == Reg::BitZReg) bits.z = lane.regs.read(r);
                        if (r == Reg::BitXReg) bits.x = lane.regs.read(r);
                    }
                    c += L.uop_issue;
                    send_message(n, lane, c, bits);
                    break;
                }
                case UopKind::RecvEprId:
                case UopKind::AckWait:
                case UopKind::TpRecvBits: {
                    PayloadKind kind = recv_kind(u.kind);
                    auto msg = net.recv(n, lane.transfer, kind, now);
                    if (!msg) {
                        lane.block = Block::Recv;
                        if (auto vis = net.peek(n, lane.transfer, kind)) wake(n, l, *vis);
                        return;
                    }
                    if (const auto* e = std::get_if<core::EprIdPayload>(&msg->payload)) {
                        lane.regs.write(u.regs[0], static_cast<std::int64_t>(e->pair_id));
                        lane.peer = msg->src_node;
                    } else if (const auto* a = std::get_if<core::AckPayload>(&msg->payload)) {
                        lane.regs.write(u.regs[0], a->status);
                    } else if (const auto* b = std::get_if<core::MeasBitsPayload>(&msg->payload)) {
                        for (Reg r : u.regs) {
                            const auto& v = r == Reg::BitXReg ? b->x : b->z;
                            if (!v) throw SimulationError("measurement message lacks a requested bit");
                            lane.regs.write(r, *v);
                        }
                        if (!lane.peer) lane.peer = msg->src_node;
                    }
                    c = std::max(lane.uop_start + L.uop_issue, now);
                    break;
                }
                case UopKind::TransferSuccessNotify:
                    c += L.qpu_qnpu_signal;
                    complete_at(n, lane.instr, c);
                    break;
                case UopKind::Cnot:
                case UopKind::H:
                case UopKind::X:
                case UopKind::Z: {
                    TraceOp op;
                    op.kind = TraceOp::Kind::Gate;
                    op.gate = u.kind == UopKind::Cnot ? dqasm::Gate::CNOT
                              : u.kind == UopKind::H  ? dqasm::Gate::H
                              : u.kind == UopKind::X  ? dqasm::Gate::X
                                                      : dqasm::Gate::Z;
                    for (Reg r : u.regs) op.qubits.push_back(reg_label(n, lane, r));
                    if (u.condition) {
                        op.condition = lane.regs.read(*u.condition);
                        c += L.conditional_gate;
                    } else {
                        c += u.kind == UopKind::Cnot ? L.two_qubit_gate : L.single_qubit_gate;
                    }
                    record(std::move(op));
                    break;
                }
                case UopKind::Meas: {
                    TraceOp op;
                    op.kind = TraceOp::Kind::Measure;
                    op.qubits = {reg_label(n, lane, u.regs[0])};
                    op.meas_id = meas_counter++;
                    lane.regs.write(u.regs[1], op.meas_id);
                    record(std::move(op));
                    c += L.measurement;
                    break;
                }
            }
            lane.block = Block::None;
            if (slot) ns.last_issue = now;
            log(n, unit_name(l), core::render(u, core::RenderContext{names[n], lane.peer ? names[*lane.peer] : "?", names}));
            ++uops_issued;
            ++uops_completed;  // completion is fixed at issue; the lane waits for it before moving on
            ++ns.stats.uops;
            ++lane.pc;
            lane.uop_start = c;
            ns.stats.finish_cycle = std::max(ns.stats.finish_cycle, c);
            finish = std::max(finish, c);
        }
    }

    void finish_lane(std::size_t n, std::size_t l) {
        NodeState& ns = nodes[n];
        Lane& lane = ns.lanes[l];
        if (core::is_send(lane.op)) complete_at(n, lane.instr, now);
        ns.stats.lane_busy_cycles += now - lane.started;
        ns.lane_of.erase(lane.transfer);
        ns.slot_of.erase(lane.transfer);
        ns.moved.erase(lane.transfer);
        ++ns.comm_free;
        lane.busy = false;
        lane.block = Block::None;
        lane.uops.clear();
        ++lane.gen;
        retry = true;
    }

    // ---- clock -------------------------------------------------------------------

    std::size_t fire_events() {
        std::size_t fired = 0;
        while (!pq.empty() && pq.top().time <= now) {
            Event e = pq.top();
            pq.pop();
            if (e.time < now) throw SimulationError("event scheduled in the past");
            switch (e.type) {
                case Event::Type::InstrDone:
                    ++fired;
                    instr_done(e.node, e.a);
                    break;
                case Event::Type::LaneWake:
                    if (e.gen != nodes[e.node].lanes[e.a].gen) break;  // superseded
                    ++fired;
                    advance(e.node, e.a);
                    break;
                case Event::Type::MessageSend:
                    ++fired;
                    deliver(e.a);
                    break;
            }
        }
        return fired;
    }

    std::size_t cycle() {
        retry = false;
        std::size_t fired = fire_events();
        while (issue_phase()) fired += fire_events() + 1;
        fired += fire_events();
        return fired;
    }

    bool done() const {
        if (!pq.empty()) return false;
        for (const auto& ns : nodes) {
            if (ns.done_count != ns.st.size()) return false;
            for (const auto& l : ns.lanes) {
                if (l.busy) return false;
            }
        }
        return true;
    }

    [[noreturn]] void deadlock() const {
        std::string msg = "deadlock at cycle " + std::to_string(now) + ":";
        for (std::size_t n = 0; n < nodes.size(); ++n) {
            const NodeState& ns = nodes[n];
            for (std::size_t l = 0; l < ns.lanes.size(); ++l) {
                const Lane& lane = ns.lanes[l];
                if (!lane.busy) continue;
                msg += " [" + names[n] + " lane" + std::to_string(l) + " TransferID_" + std::to_string(lane.transfer) + " at ";
                msg += lane.pc < lane.uops.size() ? std::string(core::uop_name(lane.uops[lane.pc].kind)) : "end";
                msg += "]";
            }
            for (auto idx : ns.ready_deleg) msg += " [" + names[n] + " ready " + compiler::instr_text(ns.prog.qpu_stream[idx], names) + "]";
        }
        throw SimulationError(msg);
    }

    SimResult result() const {
        SimResult r;
        r.total_cycles = finish;
        r.config = cfg;
        for (const auto& ns : nodes) r.nodes.push_back(ns.stats);
        r.messages = net.total_sent();
        r.epr_pairs = pair_counter;
        r.trace = trace;
        r.trace.measurements = meas_counter;
        return r;
    }
};

Engine::Engine(std::vector<NodeProgram> programs, ArchConfig cfg, EngineOptions opts)
    : impl_(std::make_unique<Impl>(std::move(programs), std::move(cfg), std::move(opts))) {}

Engine::~Engine() = default;

std::size_t Engine::step() {
    std::size_t fired = impl_->cycle();
    if (!impl_->done() && impl_->pq.empty() && !impl_->retry && fired == 0) impl_->deadlock();
    ++impl_->now;
    return fired;
}

SimResult Engine::run() {
    Impl& s = *impl_;
    while (!s.done()) {
        s.cycle();
        if (s.done()) break;
        std::uint64_t next = s.retry ? s.now + 1 : kNever;
        if (!s.pq.empty()) next = std::min(next, s.pq.top().time);
        if (next == kNever) s.deadlock();
        s.now = std::max(next, s.now + 1);
    }
    return s.result();
}

bool Engine::done() const { return impl_->done(); }
std::uint64_t Engine::now() const { return impl_->now; }
std::size_t Engine::node_count() const { return impl_->nodes.size(); }
const core::EprResourceTable& Engine::epr_table(std::size_t node) const { return impl_->nodes.at(node).epr; }
const core::NetworkBuffers& Engine::network() const { return impl_->net; }

std::size_t Engine::busy_lanes(std::size_t node) const {
    std::size_t n = 0;
    for (const auto& l : impl_->nodes.at(node).lanes) n += l.busy;
    return n;
}

std::uint64_t Engine::uops_issued() const { return impl_->uops_issued; }
std::uint64_t Engine::uops_completed() const { return impl_->uops_completed; }
SimResult Engine::result() const { return impl_->result(); }

SimResult simulate(std::vector<NodeProgram> programs, const ArchConfig& cfg, const EngineOptions& opts) {
    Engine e(std::move(programs), cfg, opts);
    return e.run();
}

SimResult simulate_circuit(const dqasm::CircuitIR& ir, const ArchConfig& cfg, const EngineOptions& opts) {
    cfg.check();
    auto progs = compiler::lower(ir, cfg.lower_options());
    SimResult r = simulate(std::move(progs), cfg, opts);
    r.counts = compiler::count_remote_gates(ir);
    return r;
}

}  // namespace qnpu::sim
