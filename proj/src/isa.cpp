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

#include "qnpu/isa.hpp"

#include <array>

#include "qnpu/error.hpp"

namespace qnpu::core {

namespace {

constexpr std::array<std::string_view, 6> kOpcodeNames{
    "SEND_TP_QUBIT",     "GET_TP_QUBIT",          "SEND_CAT_ENT_QUBIT",
    "GET_CAT_ENT_QUBIT", "SEND_CAT_DISENT_QUBIT", "GET_CAT_DISENT_QUBIT",
};

constexpr std::array<std::string_view, 16> kUopNames{
    "EPR_RESERVE", "EPR_RESERVE_SYNC", "GET_EPR_QUBIT", "EPR_RELEASE", "SEND_EPR_ID", "RECV_EPR_ID",
    "ACK_WAIT",    "ACK_SEND",         "TP_SEND_BITS",  "TP_RECV_BITS", "TRANSFER_SUCCESS_NOTIFY",
    "CNOT",        "H",                "X",             "Z",            "MEAS",
};

constexpr std::array<std::string_view, kRegisterCount> kRegNames{
    "EPRIdReg", "EPRQubReg", "CommQubReg", "TeleportQubReg", "BitXReg", "BitZReg", "StatusReg",
};

// Builders for one microcode row. `peer` is filled in from the instruction at decode time.
MicroOp uop(UopKind k, std::vector<Reg> regs = {}) { return MicroOp{k, std::move(regs), std::nullopt, false, std::nullopt, std::nullopt}; }

MicroOp with_node(MicroOp u) {
    u.uses_node = true;
    return u;
}

MicroOp with_transfer(MicroOp u) {
    u.transfer = 0;
    return u;
}

MicroOp conditional(Reg cond, MicroOp u) {
    u.condition = cond;
    return u;
}

using R = Reg;
using K = UopKind;

// Microcode in execution order. Transfer ids and node operands are placeholders.
std::vector<MicroOp> table_row(Opcode op) {
    switch (op) {
        case Opcode::SendTpQubit:
            return {
                with_node(uop(K::EprReserve, {R::EPRIdReg})),
                with_transfer(with_node(uop(K::SendEprId, {R::EPRIdReg}))),
                with_transfer(with_node(uop(K::AckWait, {R::StatusReg}))),
                uop(K::GetEprQubit, {R::EPRQubReg}),
                uop(K::Cnot, {R::CommQubReg, R::EPRQubReg}),
                uop(K::H, {R::CommQubReg}),
                uop(K::Meas, {R::EPRQubReg, R::BitXReg}),
                uop(K::Meas, {R::CommQubReg, R::BitZReg}),
                uop(K::EprRelease, {R::EPRQubReg}),
                with_transfer(with_node(uop(K::TpSendBits, {R::BitZReg, R::BitXReg}))),
            };
        case Opcode::GetTpQubit:
            return {
                with_transfer(uop(K::RecvEprId, {R::EPRIdReg})),
                uop(K::EprReserveSync, {R::StatusReg}),
                with_transfer(with_node(uop(K::AckSend, {R::StatusReg}))),
                uop(K::GetEprQubit, {R::TeleportQubReg}),
                with_transfer(uop(K::TpRecvBits, {R::BitXReg, R::BitZReg})),
                conditional(R::BitXReg, uop(K::X, {R::TeleportQubReg})),
                conditional(R::BitZReg, uop(K::Z, {R::TeleportQubReg})),
                with_transfer(uop(K::TransferSuccessNotify)),
                uop(K::EprRelease, {R::TeleportQubReg}),
            };
        case Opcode::SendCatEntQubit:
            // cat-entangler, local half: parity of data and EPR half, measured and forwarded.
            return {
                with_node(uop(K::EprReserve, {R::EPRIdReg})),
                with_transfer(with_node(uop(K::SendEprId, {R::EPRIdReg}))),
                with_transfer(with_node(uop(K::AckWait, {R::StatusReg}))),
                uop(K::GetEprQubit, {R::EPRQubReg}),
                uop(K::Cnot, {R::CommQubReg, R::EPRQubReg}),
                uop(K::Meas, {R::EPRQubReg, R::BitXReg}),
                uop(K::EprRelease, {R::EPRQubReg}),
                with_transfer(with_node(uop(K::TpSendBits, {R::BitXReg}))),
            };
        case Opcode::GetCatEntQubit:
            // cat-entangler, remote half: the corrected EPR half becomes the cat qubit.
            return {
                with_transfer(uop(K::RecvEprId, {R::EPRIdReg})),
                uop(K::EprReserveSync, {R::StatusReg}),
                with_transfer(with_node(uop(K::AckSend, {R::StatusReg}))),
                uop(K::GetEprQubit, {R::TeleportQubReg}),
                with_transfer(uop(K::TpRecvBits, {R::BitXReg})),
                conditional(R::BitXReg, uop(K::X, {R::TeleportQubReg})),
                with_transfer(uop(K::TransferSuccessNotify)),
                uop(K::EprRelease, {R::TeleportQubReg}),
            };
        case Opcode::SendCatDisentQubit:
            // cat-disentangler: X-basis measurement of the cat qubit.
            return {
                uop(K::H, {R::CommQubReg}),
                uop(K::Meas, {R::CommQubReg, R::BitZReg}),
                with_transfer(with_node(uop(K::TpSendBits, {R::BitZReg}))),
            };
        case Opcode::GetCatDisentQubit:
            return {
                with_transfer(uop(K::TpRecvBits, {R::BitZReg})),
                conditional(R::BitZReg, uop(K::Z, {R::CommQubReg})),
                with_transfer(uop(K::TransferSuccessNotify)),
            };
    }
    throw SimulationError("unknown opcode");
}

std::string strip_reg_suffix(std::string_view r) {
    if (r.size() > 3 && r.substr(r.size() - 3) == "Reg") r.remove_suffix(3);
    return std::string(r);
}

}  // namespace

std::string_view opcode_name(Opcode op) { return kOpcodeNames.at(static_cast<std::size_t>(op)); }

std::optional<Opcode> opcode_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kOpcodeNames.size(); ++i) {
        if (kOpcodeNames[i] == name) return static_cast<Opcode>(i);
    }
    return std::nullopt;
}

Opcode complement(Opcode op) {
    switch (op) {
        case Opcode::SendTpQubit: return Opcode::GetTpQubit;
        case Opcode::GetTpQubit: return Opcode::SendTpQubit;
        case Opcode::SendCatEntQubit: return Opcode::GetCatEntQubit;
        case Opcode::GetCatEntQubit: return Opcode::SendCatEntQubit;
        case Opcode::SendCatDisentQubit: return Opcode::GetCatDisentQubit;
        case Opcode::GetCatDisentQubit: return Opcode::SendCatDisentQubit;
    }
    throw SimulationError("unknown opcode");
}

std::string_view uop_name(UopKind k) { return kUopNames.at(static_cast<std::size_t>(k)); }

UopClass uop_class(UopKind k) {
    switch (k) {
        case K::EprReserve:
        case K::EprReserveSync:
        case K::GetEprQubit:
        case K::EprRelease:
            return UopClass::EprManagement;
        case K::SendEprId:
        case K::RecvEprId:
        case K::AckWait:
        case K::AckSend:
        case K::TpSendBits:
        case K::TpRecvBits:
        case K::TransferSuccessNotify:
            return UopClass::ClassicalComm;
        default:
            return UopClass::Quantum;
    }
}

std::string_view reg_name(Reg r) { return kRegNames.at(static_cast<std::size_t>(r)); }

std::vector<MicroOp> decode(const ProtocolInstruction& p) {
    if (static_cast<std::size_t>(p.opcode) >= kOpcodeNames.size()) throw SimulationError("unknown opcode");
    std::vector<MicroOp> out = table_row(p.opcode);
    for (auto& u : out) {
        if (u.uses_node) u.node = p.peer;
        if (u.transfer) u.transfer = p.transfer_id;
    }
    return out;
}

std::string render(const MicroOp& u, const RenderContext& ctx) {
    auto node = [&]() -> std::string {
        if (u.node && *u.node < ctx.node_names.size()) return ctx.node_names[*u.node];
        return ctx.peer;
    };
    auto transfer = [&]() { return "TransferID_" + std::to_string(u.transfer.value_or(0)); };
    std::vector<std::string> ops;
    switch (u.kind) {
        case K::SendEprId:
            ops = {node(), transfer(), "[" + std::string(reg_name(u.regs.at(0))) + "]"};
            break;
        case K::AckWait:
        case K::AckSend:
            ops = {node(), transfer(), std::string(reg_name(u.regs.at(0)))};
            break;
        case K::TpSendBits:
            ops = {node(), transfer()};
            for (Reg r : u.regs) ops.push_back(strip_reg_suffix(reg_name(r)));
            break;
        case K::RecvEprId:
        case K::TpRecvBits:
            for (Reg r : u.regs) ops.emplace_back(reg_name(r));
            ops.push_back(transfer());
            break;
        case K::TransferSuccessNotify:
            ops = {transfer()};
            break;
        default:
            for (Reg r : u.regs) ops.emplace_back(reg_name(r));
            if (u.uses_node) ops.push_back(node());
            break;
    }
    std::string out;
    if (u.condition) out += "(" + std::string(reg_name(*u.condition)) + ") ";
    out += uop_name(u.kind);
    for (std::size_t i = 0; i < ops.size(); ++i) {
        out += i == 0 ? " " : ", ";
        out += ops[i];
    }
    return out;
}

std::string microcode_table_text() {
    std::string out;
    for (std::size_t i = 0; i < kOpcodeNames.size(); ++i) {
        auto op = static_cast<Opcode>(i);
        ProtocolInstruction p{op, 0, std::nullopt, 1};
        RenderContext ctx;
        if (!is_send(op)) std::swap(ctx.self, ctx.peer);
        if (i) out += '\n';
        out += opcode_name(op);
        out += '\n';
        for (const auto& u : decode(p)) out += "  " + render(u, ctx) + "\n";
    }
    return out;
}

}  // namespace qnpu::core
