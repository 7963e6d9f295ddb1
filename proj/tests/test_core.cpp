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

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "qnpu/error.hpp"
#include "qnpu/isa.hpp"
#include "qnpu/resources.hpp"

namespace {

using namespace qnpu;
using namespace qnpu::core;

std::vector<std::string> rendered(Opcode op) {
    ProtocolInstruction p{op, 0, is_send(op) ? std::optional<std::size_t>(1) : std::nullopt, 1};
    // The receiver renders its peer, the sender, as NodeA.
    RenderContext ctx = is_send(op) ? RenderContext{"NodeA", "NodeB", {}} : RenderContext{"NodeB", "NodeA", {}};
    std::vector<std::string> out;
    for (const auto& u : decode(p)) out.push_back(render(u, ctx));
    return out;
}

// Expected µop lines of the teleport sender and receiver sequences, operands as written.
const std::vector<std::string> kSendTp = {
    "EPR_RESERVE EPRIdReg, NodeB",
    "SEND_EPR_ID NodeB, TransferID_1, [EPRIdReg]",
    "ACK_WAIT NodeB, TransferID_1, StatusReg",
    "GET_EPR_QUBIT EPRQubReg",
    "CNOT CommQubReg, EPRQubReg",
    "H CommQubReg",
    "MEAS EPRQubReg, BitXReg",
    "MEAS CommQubReg, BitZReg",
    "EPR_RELEASE EPRQubReg",
    "TP_SEND_BITS NodeB, TransferID_1, BitZ, BitX",
};

const std::vector<std::string> kGetTp = {
    "RECV_EPR_ID EPRIdReg, TransferID_1",
    "EPR_RESERVE_SYNC StatusReg",
    "ACK_SEND NodeA, TransferID_1, StatusReg",
    "GET_EPR_QUBIT TeleportQubReg",
    "TP_RECV_BITS BitXReg, BitZReg, TransferID_1",
    "(BitXReg) X TeleportQubReg",
    "(BitZReg) Z TeleportQubReg",
    "TRANSFER_SUCCESS_NOTIFY TransferID_1",
    "EPR_RELEASE TeleportQubReg",
};

TEST(Decoder, SendTpMatchesReferenceSequence) { EXPECT_EQ(rendered(Opcode::SendTpQubit), kSendTp); }

TEST(Decoder, GetTpMatchesReferenceSequence) { EXPECT_EQ(rendered(Opcode::GetTpQubit), kGetTp); }

TEST(Decoder, TeleportReceiverCorrectsXThenZ) {
    auto u = decode({Opcode::GetTpQubit, 0, std::nullopt, 7});
    ASSERT_EQ(u.size(), 9u);
    EXPECT_EQ(u[5].kind, UopKind::X);
    EXPECT_EQ(u[5].condition, Reg::BitXReg);
    EXPECT_EQ(u[6].kind, UopKind::Z);
    EXPECT_EQ(u[6].condition, Reg::BitZReg);
    EXPECT_EQ(u[5].regs, std::vector<Reg>{Reg::TeleportQubReg});
}

TEST(Decoder, CatEntanglerShape) {
    auto s = decode({Opcode::SendCatEntQubit, 0, 1, 1});
    EXPECT_EQ(s.front().kind, UopKind::EprReserve);
    EXPECT_EQ(s.back().kind, UopKind::TpSendBits);
    std::size_t meas = std::count_if(s.begin(), s.end(), [](const MicroOp& u) { return u.kind == UopKind::Meas; });
    EXPECT_EQ(meas, 1u);
    auto g = decode({Opcode::GetCatEntQubit, 0, std::nullopt, 1});
    std::size_t cond = std::count_if(g.begin(), g.end(), [](const MicroOp& u) { return u.condition.has_value(); });
    EXPECT_EQ(cond, 1u);
}

TEST(Decoder, CatDisentanglerMeasuresInXBasis) {
    auto s = decode({Opcode::SendCatDisentQubit, 0, 1, 1});
    ASSERT_GE(s.size(), 2u);
    EXPECT_EQ(s[0].kind, UopKind::H);
    EXPECT_EQ(s[1].kind, UopKind::Meas);
    auto g = decode({Opcode::GetCatDisentQubit, 0, std::nullopt, 1});
    auto z = std::find_if(g.begin(), g.end(), [](const MicroOp& u) { return u.kind == UopKind::Z; });
    ASSERT_NE(z, g.end());
    EXPECT_EQ(z->condition, Reg::BitZReg);
}

TEST(Decoder, ConditionsOnlyOnQuantumUops) {
    for (Opcode op : {Opcode::SendTpQubit, Opcode::GetTpQubit, Opcode::SendCatEntQubit, Opcode::GetCatEntQubit,
                      Opcode::SendCatDisentQubit, Opcode::GetCatDisentQubit}) {
        for (const auto& u : decode({op, 3, is_send(op) ? std::optional<std::size_t>(2) : std::nullopt, 9})) {
            if (u.condition) {
                EXPECT_EQ(uop_class(u.kind), UopClass::Quantum) << uop_name(u.kind);
            }
            if (u.transfer) {
                EXPECT_EQ(*u.transfer, 9u);
            }
        }
    }
}

TEST(Decoder, ComplementPairs) {
    EXPECT_EQ(complement(Opcode::SendTpQubit), Opcode::GetTpQubit);
    EXPECT_EQ(complement(Opcode::GetCatEntQubit), Opcode::SendCatEntQubit);
    for (Opcode op : {Opcode::SendTpQubit, Opcode::GetTpQubit, Opcode::SendCatEntQubit, Opcode::GetCatEntQubit,
                      Opcode::SendCatDisentQubit, Opcode::GetCatDisentQubit}) {
        EXPECT_EQ(complement(complement(op)), op);
        EXPECT_NE(is_send(op), is_send(complement(op)));
        EXPECT_EQ(opcode_from_name(opcode_name(op)), op);
    }
    EXPECT_FALSE(opcode_from_name("SEND_QUBIT").has_value());
}

TEST(Decoder, UnknownOpcodeIsAnError) {
    EXPECT_THROW(decode({static_cast<Opcode>(42), 0, std::nullopt, 1}), SimulationError);
}

TEST(Decoder, TableTextListsEveryOpcode) {
    std::string t = microcode_table_text();
    std::string tp_block = "SEND_TP_QUBIT\n";
    for (const auto& l : kSendTp) tp_block += "  " + l + "\n";
    EXPECT_NE(t.find(tp_block), std::string::npos);
    for (const char* op : {"GET_TP_QUBIT\n", "SEND_CAT_ENT_QUBIT\n", "GET_CAT_ENT_QUBIT\n", "SEND_CAT_DISENT_QUBIT\n",
                           "GET_CAT_DISENT_QUBIT\n"}) {
        EXPECT_NE(t.find(op), std::string::npos) << op;
    }
    EXPECT_EQ(t, microcode_table_text());
}

// ---- EPR resource table ---------------------------------------------------------

TEST(EprTable, ReserveMarksOccupied) {
    EprResourceTable t;
    t.prefetch(1, 1, 0);
    auto id = t.reserve(1);
    ASSERT_TRUE(id.has_value());
    EXPECT_EQ(*id, 1u);
    EXPECT_EQ(t.entries()[0].state, EprState::Occupied);
    EXPECT_EQ(t.qubit_of(1), 0u);
}

TEST(EprTable, ReserveExhaustsAndPicksLowestId) {
    EprResourceTable t;
    t.prefetch(5, 1, 0);
    t.prefetch(3, 1, 1);
    t.prefetch(4, 2, 2);
    EXPECT_EQ(t.reserve(1), 3u);
    EXPECT_EQ(t.reserve(1), 5u);
    EXPECT_FALSE(t.reserve(1).has_value());
    EXPECT_EQ(t.reserve(2), 4u);
}

TEST(EprTable, ReleaseEmptiesAndFreesTheQubit) {
    EprResourceTable t;
    t.prefetch(2, 1, 0);
    t.reserve(1);
    EXPECT_EQ(t.free_qubit_index(), 1u);
    t.release(0);
    EXPECT_EQ(t.entries()[0].state, EprState::Empty);
    EXPECT_FALSE(t.entries()[0].pair_id.has_value());
    EXPECT_FALSE(t.entries()[0].epr_qubit_index.has_value());
    EXPECT_EQ(t.free_qubit_index(), 0u);
}

TEST(EprTable, ReleaseOfAvailableEntryFaults) {
    EprResourceTable t;
    t.prefetch(2, 1, 0);
    EXPECT_THROW(t.release(0), SimulationError);
    EXPECT_THROW(t.release(9), SimulationError);
}

TEST(EprTable, SyncRequiresAvailableEntry) {
    EprResourceTable t;
    t.prefetch(2, 0, 0);
    t.reserve_sync(2);
    EXPECT_EQ(t.count(EprState::Occupied), 1u);
    EXPECT_THROW(t.reserve_sync(2), SimulationError);
    EXPECT_THROW(t.reserve_sync(3), SimulationError);
    EXPECT_THROW(t.qubit_of(3), SimulationError);
}

// Counting oracle: random prefetch/reserve/release sequences tracked against a
// plain map of pair id -> state.
TEST(EprTable, RandomSequencesMatchCountingOracle) {
    std::mt19937_64 rng(17);
    for (int run = 0; run < 200; ++run) {
        EprResourceTable t;
        std::map<PairId, std::pair<std::size_t, int>> model;  // id -> (remote, 0 available / 1 occupied)
        std::map<PairId, std::uint32_t> qubit;
        PairId next = 1;
        for (int step = 0; step < 60; ++step) {
            std::size_t remote = rng() % 3;
            switch (rng() % 3) {
                case 0: {
                    std::uint32_t q = t.free_qubit_index();
                    t.prefetch(next, remote, q);
                    model[next] = {remote, 0};
                    qubit[next] = q;
                    ++next;
                    break;
                }
                case 1: {
                    std::optional<PairId> want;
                    for (auto& [id, v] : model) {
                        if (v.first == remote && v.second == 0) {
                            want = id;
                            break;
                        }
                    }
                    auto got = t.reserve(remote);
                    ASSERT_EQ(got, want);
                    if (want) model[*want].second = 1;
                    break;
                }
                default: {
                    std::vector<PairId> occ;
                    for (auto& [id, v] : model) {
                        if (v.second == 1) occ.push_back(id);
                    }
                    if (occ.empty()) break;
                    PairId id = occ[rng() % occ.size()];
                    t.release(qubit[id]);
                    model.erase(id);
                    break;
                }
            }
            std::size_t avail = 0, occ = 0;
            for (auto& [id, v] : model) (v.second ? occ : avail)++;
            ASSERT_EQ(t.count(EprState::Available), avail);
            ASSERT_EQ(t.count(EprState::Occupied), occ);
            ASSERT_TRUE(t.invariants_hold());
        }
    }
}

TEST(Registers, ReadRequiresReadyBit) {
    RegisterFile rf;
    EXPECT_FALSE(rf.ready(Reg::BitXReg));
    EXPECT_THROW(rf.read(Reg::BitXReg), SimulationError);
    rf.write(Reg::BitXReg, 1);
    EXPECT_EQ(rf.read(Reg::BitXReg), 1);
    rf.clear();
    EXPECT_FALSE(rf.ready(Reg::BitXReg));
}

// ---- network buffers -------------------------------------------------------------

ClassicalMessage msg(std::size_t src, std::size_t dst, TransferId t, Payload p, std::uint64_t sent, std::uint64_t vis) {
    return ClassicalMessage{src, dst, t, std::move(p), sent, vis};
}

TEST(Network, DeliveredAfterLinkLatency) {
    NetworkBuffers net;
    net.send(msg(0, 1, 1, EprIdPayload{7}, 3, 7));
    EXPECT_FALSE(net.recv(1, 1, PayloadKind::EprId, 6).has_value());
    EXPECT_EQ(net.peek(1, 1, PayloadKind::EprId), 7u);
    auto m = net.recv(1, 1, PayloadKind::EprId, 7);
    ASSERT_TRUE(m.has_value());
    EXPECT_EQ(std::get<EprIdPayload>(m->payload).pair_id, 7u);
    EXPECT_TRUE(net.conserved());
    EXPECT_EQ(net.in_flight(), 0u);
}

TEST(Network, EmptyBufferIsPending) {
    NetworkBuffers net;
    EXPECT_FALSE(net.recv(0, 1, PayloadKind::Ack, 100).has_value());
    EXPECT_FALSE(net.peek(0, 1, PayloadKind::Ack).has_value());
}

TEST(Network, FiniteCapacityOverflows) {
    NetworkBuffers net(1);
    net.send(msg(0, 1, 1, AckPayload{1}, 0, 1));
    EXPECT_THROW(net.send(msg(0, 1, 2, AckPayload{1}, 0, 1)), SimulationError);
    net.send(msg(1, 0, 2, AckPayload{1}, 0, 1));  // other direction has its own buffer
}

// Every interleaving of two transfers' messages on one link: each receive picks
// its own transfer and the link stays conserved at every point.
TEST(Network, InterleavedTransfersMatchById) {
    std::vector<int> order = {0, 0, 1, 1};  // two messages per transfer
    do {
        NetworkBuffers net;
        int seen[2] = {0, 0};
        std::uint64_t t = 0;
        for (int who : order) {
            Payload p = seen[who] == 0 ? Payload{EprIdPayload{static_cast<PairId>(10 + who)}}
                                       : Payload{MeasBitsPayload{who, std::nullopt}};
            net.send(msg(0, 1, static_cast<TransferId>(who + 1), p, t, t + 2));
            ++seen[who];
            ++t;
            ASSERT_TRUE(net.conserved());
        }
        for (int who : {1, 0}) {
            auto e = net.recv(1, static_cast<TransferId>(who + 1), PayloadKind::EprId, 100);
            ASSERT_TRUE(e.has_value());
            EXPECT_EQ(std::get<EprIdPayload>(e->payload).pair_id, static_cast<PairId>(10 + who));
            auto b = net.recv(1, static_cast<TransferId>(who + 1), PayloadKind::MeasBits, 100);
            ASSERT_TRUE(b.has_value());
            EXPECT_EQ(std::get<MeasBitsPayload>(b->payload).z, who);
            ASSERT_TRUE(net.conserved());
        }
        EXPECT_EQ(net.sent(0, 1), 4u);
        EXPECT_EQ(net.received(0, 1), 4u);
        EXPECT_EQ(net.in_flight(), 0u);
    } while (std::next_permutation(order.begin(), order.end()));
}

TEST(Network, PayloadKinds) {
    EXPECT_EQ(kind_of(EprIdPayload{1}), PayloadKind::EprId);
    EXPECT_EQ(kind_of(AckPayload{1}), PayloadKind::Ack);
    EXPECT_EQ(kind_of(MeasBitsPayload{}), PayloadKind::MeasBits);
    EXPECT_EQ(kind_of(SuccessNotifyPayload{}), PayloadKind::SuccessNotify);
}

}  // namespace
