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

#include "qnpu/resources.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "qnpu/error.hpp"

namespace qnpu::core {

void EprResourceTable::prefetch(PairId id, std::size_t remote_node, std::uint32_t qubit_index) {
    for (const auto& e : entries_) {
        if (e.state != EprState::Empty && (e.pair_id == id || e.epr_qubit_index == qubit_index)) {
            throw SimulationError("EPR prefetch collides with a live entry (pair " + std::to_string(id) + ")");
        }
    }
    EprEntry fresh{id, remote_node, EprState::Available, qubit_index};
    for (auto& e : entries_) {
        if (e.state == EprState::Empty) {
            e = fresh;
            return;
        }
    }
    entries_.push_back(fresh);
}

std::optional<PairId> EprResourceTable::reserve(std::size_t remote_node) {
    EprEntry* best = nullptr;
    for (auto& e : entries_) {
        if (e.state == EprState::Available && e.remote_node == remote_node && (best == nullptr || *e.pair_id < *best->pair_id)) {
            best = &e;
        }
    }
    if (best == nullptr) return std::nullopt;
    best->state = EprState::Occupied;
    return best->pair_id;
}

void EprResourceTable::reserve_sync(PairId id) {
    for (auto& e : entries_) {
        if (e.state != EprState::Empty && e.pair_id == id) {
            if (e.state != EprState::Available) throw SimulationError("EPR pair " + std::to_string(id) + " already occupied");
            e.state = EprState::Occupied;
            return;
        }
    }
    throw SimulationError("EPR pair " + std::to_string(id) + " unknown to the remote table");
}

std::uint32_t EprResourceTable::qubit_of(PairId id) const {
    for (const auto& e : entries_) {
        if (e.state == EprState::Occupied && e.pair_id == id) return *e.epr_qubit_index;
    }
    throw SimulationError("EPR pair " + std::to_string(id) + " is not occupied");
}

void EprResourceTable::release(std::uint32_t qubit_index) {
    for (auto& e : entries_) {
        if (e.state != EprState::Empty && e.epr_qubit_index == qubit_index) {
            if (e.state != EprState::Occupied) throw SimulationError("release of an EPR entry that is not occupied");
            e = EprEntry{};
            return;
        }
    }
    throw SimulationError("release of unknown EPR qubit " + std::to_string(qubit_index));
}

std::uint32_t EprResourceTable::free_qubit_index() const {
    std::set<std::uint32_t> used;
    for (const auto& e : entries_) {
        if (e.state != EprState::Empty) used.insert(*e.epr_qubit_index);
    }
    std::uint32_t i = 0;
    while (used.count(i)) ++i;
    return i;
}

std::size_t EprResourceTable::count(EprState s) const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.state == s;
    return n;
}

bool EprResourceTable::invariants_hold() const {
    std::set<std::uint32_t> qubits;
    std::set<PairId> ids;
    for (const auto& e : entries_) {
        bool empty = e.state == EprState::Empty;
        if (empty != !e.pair_id.has_value() || empty != !e.epr_qubit_index.has_value()) return false;
        if (empty) continue;
        if (!qubits.insert(*e.epr_qubit_index).second) return false;
        if (!ids.insert(*e.pair_id).second) return false;
    }
    return true;
}

std::int64_t RegisterFile::read(Reg r) const {
    const auto& s = regs_[static_cast<std::size_t>(r)];
    if (!s.ready) throw SimulationError("read of register " + std::string(reg_name(r)) + " before its ready bit is set");
    return s.value;
}

PayloadKind kind_of(const Payload& p) { return static_cast<PayloadKind>(p.index()); }

void NetworkBuffers::send(ClassicalMessage msg) {
    Link& l = links_[{msg.src_node, msg.dst_node}];
    if (capacity_ != 0 && l.fifo.size() >= capacity_) {
        throw SimulationError("network buffer overflow on link " + std::to_string(msg.src_node) + "->" + std::to_string(msg.dst_node));
    }
    l.fifo.push_back(std::move(msg));
    ++l.sent;
}

std::optional<ClassicalMessage> NetworkBuffers::recv(std::size_t dst, TransferId transfer, PayloadKind kind, std::uint64_t now) {
    for (auto& [key, l] : links_) {
        if (key.second != dst) continue;
        for (auto it = l.fifo.begin(); it != l.fifo.end(); ++it) {
            if (it->visible_at > now) break;  // FIFO: later messages on this link are not visible yet either
            if (it->transfer_id == transfer && kind_of(it->payload) == kind) {
                ClassicalMessage m = std::move(*it);
                l.fifo.erase(it);
                ++l.received;
                return m;
            }
        }
    }
    return std::nullopt;
}

std::optional<std::uint64_t> NetworkBuffers::peek(std::size_t dst, TransferId transfer, PayloadKind kind) const {
    std::optional<std::uint64_t> best;
    for (const auto& [key, l] : links_) {
        if (key.second != dst) continue;
        std::uint64_t gate = 0;  // a message is not visible before the ones queued ahead of it
        for (const auto& m : l.fifo) {
            gate = std::max(gate, m.visible_at);
            if (m.transfer_id == transfer && kind_of(m.payload) == kind) {
                if (!best || gate < *best) best = gate;
                break;
            }
        }
    }
    return best;
}

std::uint64_t NetworkBuffers::total_sent() const {
    std::uint64_t n = 0;
    for (const auto& [key, l] : links_) n += l.sent;
    return n;
}

std::size_t NetworkBuffers::in_flight() const {
    std::size_t n = 0;
    for (const auto& [key, l] : links_) n += l.fifo.size();
    return n;
}

std::uint64_t NetworkBuffers::sent(std::size_t src, std::size_t dst) const {
    auto it = links_.find({src, dst});
    return it == links_.end() ? 0 : it->second.sent;
}

std::uint64_t NetworkBuffers::received(std::size_t src, std::size_t dst) const {
    auto it = links_.find({src, dst});
    return it == links_.end() ? 0 : it->second.received;
}

std::size_t NetworkBuffers::in_flight(std::size_t src, std::size_t dst) const {
    auto it = links_.find({src, dst});
    return it == links_.end() ? 0 : it->second.fifo.size();
}

bool NetworkBuffers::conserved() const {
    for (const auto& [key, l] : links_) {
        if (l.sent != l.received + l.fifo.size()) return false;
    }
    return true;
}

}  // namespace qnpu::core
