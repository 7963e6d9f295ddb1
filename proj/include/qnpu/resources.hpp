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

// Per-node QNPU state: EPR resource table, register file, network buffers.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "qnpu/isa.hpp"

namespace qnpu::core {

using PairId = std::uint64_t;

enum class EprState : std::uint8_t { Available, Occupied, Empty };

struct EprEntry {
    std::optional<PairId> pair_id;
    std::optional<std::size_t> remote_node;
    EprState state = EprState::Empty;
    std::optional<std::uint32_t> epr_qubit_index;
};

/// Tracks the EPR pairs held by one node. Pair ids are chosen by the caller
/// (the engine allocates them globally so both halves share one id).
class EprResourceTable {
public:
    /// Appends (or refills an Empty slot with) an Available entry.
    void prefetch(PairId id, std::size_t remote_node, std::uint32_t qubit_index);

    /// Lowest pair id Available for `remote_node`, now Occupied; nullopt means stall.
    std::optional<PairId> reserve(std::size_t remote_node);

    /// Marks a specific pair Occupied (remote side of a reservation). Throws SimulationError
    /// unless the entry exists and is Available.
    void reserve_sync(PairId id);

    /// Local qubit of an Occupied pair. Throws SimulationError otherwise.
    std::uint32_t qubit_of(PairId id) const;

    /// Empties the Occupied entry holding `qubit_index`. Releasing anything else is a fault.
    void release(std::uint32_t qubit_index);

    /// Lowest communication-zone qubit index not held by a non-Empty entry.
    std::uint32_t free_qubit_index() const;

    const std::vector<EprEntry>& entries() const noexcept { return entries_; }
    std::size_t count(EprState s) const;
    /// Every qubit index appears in at most one non-Empty entry and pair ids are unique.
    bool invariants_hold() const;

private:
    std::vector<EprEntry> entries_;
};

/// Register value with a ready bit. Qubit registers hold local qubit indices,
/// bit registers hold measurement ids, EPRIdReg holds a pair id.
struct RegisterSlot {
    std::int64_t value = 0;
    bool ready = false;
};

class RegisterFile {
public:
    void write(Reg r, std::int64_t v) { regs_[static_cast<std::size_t>(r)] = {v, true}; }
    bool ready(Reg r) const { return regs_[static_cast<std::size_t>(r)].ready; }
    /// Throws SimulationError when the ready bit is clear.
    std::int64_t read(Reg r) const;
    void clear() { regs_ = {}; }

private:
    std::array<RegisterSlot, kRegisterCount> regs_{};
};

struct EprIdPayload {
    PairId pair_id;
    bool operator==(const EprIdPayload&) const = default;
};
struct AckPayload {
    std::int64_t status;
    bool operator==(const AckPayload&) const = default;
};
/// Measurement ids travel instead of values; the oracle resolves them per branch.
struct MeasBitsPayload {
    std::optional<std::int64_t> z;
    std::optional<std::int64_t> x;
    bool operator==(const MeasBitsPayload&) const = default;
};
struct SuccessNotifyPayload {
    bool operator==(const SuccessNotifyPayload&) const = default;
};

using Payload = std::variant<EprIdPayload, AckPayload, MeasBitsPayload, SuccessNotifyPayload>;

enum class PayloadKind : std::uint8_t { EprId, Ack, MeasBits, SuccessNotify };

PayloadKind kind_of(const Payload& p);

struct ClassicalMessage {
    std::size_t src_node = 0;
    std::size_t dst_node = 0;
    TransferId transfer_id = 0;
    Payload payload;
    std::uint64_t sent_at = 0;
    std::uint64_t visible_at = 0;
};

/// Inter-node classical buffers: one FIFO per ordered node pair.
class NetworkBuffers {
public:
    /// capacity 0 means unbounded.
    explicit NetworkBuffers(std::size_t capacity = 0) : capacity_(capacity) {}

    /// Throws SimulationError on overflow in finite-capacity mode.
    void send(ClassicalMessage msg);

    /// First message on any link into `dst` matching (transfer, kind) and visible at `now`.
    /// Removes and returns it; nullopt means Pending.
    std::optional<ClassicalMessage> recv(std::size_t dst, TransferId transfer, PayloadKind kind, std::uint64_t now);

    /// Earliest visible_at among messages into `dst` matching (transfer, kind).
    std::optional<std::uint64_t> peek(std::size_t dst, TransferId transfer, PayloadKind kind) const;

    std::size_t in_flight() const;
    std::uint64_t total_sent() const;
    std::uint64_t sent(std::size_t src, std::size_t dst) const;
    std::uint64_t received(std::size_t src, std::size_t dst) const;
    std::size_t in_flight(std::size_t src, std::size_t dst) const;
    /// sent == received + in-flight on every ordered pair.
    bool conserved() const;

private:
    struct Link {
        std::deque<ClassicalMessage> fifo;
        std::uint64_t sent = 0;
        std::uint64_t received = 0;
    };
    std::size_t capacity_;
    std::map<std::pair<std::size_t, std::size_t>, Link> links_;
};

}  // namespace qnpu::core
