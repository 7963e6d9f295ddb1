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

// QNPU instruction set: protocol instructions issued by the QPU and the
// micro-operations the QNPU decoder expands them into.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qnpu::core {

using TransferId = std::uint64_t;

enum class Opcode : std::uint8_t {
    SendTpQubit,
    GetTpQubit,
    SendCatEntQubit,
    GetCatEntQubit,
    SendCatDisentQubit,
    GetCatDisentQubit,
};

std::string_view opcode_name(Opcode op);
std::optional<Opcode> opcode_from_name(std::string_view name);

/// SEND_* forms execute on the node that initiates the transfer.
constexpr bool is_send(Opcode op) {
    return op == Opcode::SendTpQubit || op == Opcode::SendCatEntQubit || op == Opcode::SendCatDisentQubit;
}

/// The opcode executed by the peer node for the same transfer.
Opcode complement(Opcode op);

struct ProtocolInstruction {
    Opcode opcode = Opcode::SendTpQubit;
    std::uint32_t qubit_reg = 0;          // local qubit operand
    std::optional<std::size_t> peer;      // destination node; absent for GET_* forms
    TransferId transfer_id = 0;

    bool operator==(const ProtocolInstruction&) const = default;
};

enum class UopKind : std::uint8_t {
    // EPR resource management
    EprReserve,
    EprReserveSync,
    GetEprQubit,
    EprRelease,
    // classical communication
    SendEprId,
    RecvEprId,
    AckWait,
    AckSend,
    TpSendBits,
    TpRecvBits,
    TransferSuccessNotify,
    // quantum
    Cnot,
    H,
    X,
    Z,
    Meas,
};

enum class UopClass : std::uint8_t { EprManagement, ClassicalComm, Quantum };

std::string_view uop_name(UopKind k);
UopClass uop_class(UopKind k);

enum class Reg : std::uint8_t {
    EPRIdReg,
    EPRQubReg,
    CommQubReg,
    TeleportQubReg,
    BitXReg,
    BitZReg,
    StatusReg,
};

inline constexpr std::size_t kRegisterCount = 7;

std::string_view reg_name(Reg r);

struct MicroOp {
    UopKind kind = UopKind::H;
    /// Register operands in assembly order.
    std::vector<Reg> regs;
    /// Peer node for classical sends/waits; absent means "the node this transfer is paired with".
    std::optional<std::size_t> node;
    bool uses_node = false;
    std::optional<TransferId> transfer;
    /// Quantum µops only: execute iff the register holds 1.
    std::optional<Reg> condition;

    bool operator==(const MicroOp&) const = default;
};

/// Pure microcode lookup. Throws SimulationError for an out-of-range opcode.
std::vector<MicroOp> decode(const ProtocolInstruction& p);

/// Node names used when rendering µops as text.
struct RenderContext {
    std::string self = "NodeA";
    std::string peer = "NodeB";
    std::vector<std::string> node_names;  // optional; indexes MicroOp::node
};

/// One µop in assembly syntax, e.g. "SEND_EPR_ID NodeB, TransferID_1, [EPRIdReg]".
std::string render(const MicroOp& u, const RenderContext& ctx);

/// Text form of the whole microcode table. Each opcode is rendered for a
/// transfer with id 1 between NodeA (sender) and NodeB (receiver):
///
///   SEND_TP_QUBIT
///     EPR_RESERVE EPRIdReg, NodeB
///     ...
///
/// Blocks are separated by a blank line.
std::string microcode_table_text();

}  // namespace qnpu::core
