#include "hh412/circuit.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>
#include <sstream>

using namespace hh412;

TEST_CASE("measurement bit census") {
    CodeDefinition code = code_412(CodeVariant::ZXZ);

    // -L, r=0: two prep Z checks plus the transversal final readout.
    Circuit r0 = build_circuit(code, LogicalState::MinusL, 0);
    CHECK(r0.n_bits() == 6);
    int xbits = 0;
    for (const auto& l : r0.bit_labels)
        if (l.role == MeasRole::XCheckSyndrome || l.role == MeasRole::FlagL ||
            l.role == MeasRole::FlagR)
            ++xbits;
    CHECK(xbits == 0);

    // -L, r=1: prep checks + (syndrome + two flags + two Z checks) + finals.
    Circuit r1 = build_circuit(code, LogicalState::MinusL, 1);
    CHECK(r1.n_bits() == 11);

    // 0L, r=1: prep measures S_X (3 bits), round is Z check then X check,
    // final is Z basis (no Hadamards after the last round).
    Circuit z1 = build_circuit(code, LogicalState::ZeroL, 1);
    CHECK(z1.n_bits() == 3 + 5 + 4);
    CHECK(z1.find_bit(MeasRole::XCheckSyndrome, 0) >= 0);
    CHECK(z1.find_bit(MeasRole::FlagL, 0) >= 0);
    CHECK(z1.find_bit(MeasRole::ZCheckL, 0) < 0);
    CHECK(z1.find_bit(MeasRole::ZCheckL, 1) < z1.find_bit(MeasRole::XCheckSyndrome, 1));
    int final_h = 0;
    int last_xsynd_slot = 0;
    for (const auto& ins : z1.instructions)
        if (ins.kind == InstrKind::MeasureZ &&
            z1.bit_labels[ins.bit_index].role == MeasRole::XCheckSyndrome)
            last_xsynd_slot = std::max(last_xsynd_slot, ins.time_slot);
    for (const auto& ins : z1.instructions)
        if (ins.kind == InstrKind::H && ins.time_slot > last_xsynd_slot && ins.q0 <= 3) ++final_h;
    CHECK(final_h == 0);

    // Labels are unique per (role, round, qubit).
    std::set<std::tuple<int, int, int>> seen;
    for (const auto& l : r1.bit_labels)
        CHECK(seen.insert({int(l.role), l.round, l.qubit}).second);
}

TEST_CASE("structural invariants") {
    CodeDefinition code = code_412(CodeVariant::ZXZ);
    for (LogicalState st : {LogicalState::MinusL, LogicalState::ZeroL}) {
        Circuit c = build_circuit(code, st, 3);
        int prev_slot = 0;
        std::map<int, std::set<int>> qubits_in_slot;
        for (const auto& ins : c.instructions) {
            CHECK(ins.time_slot >= prev_slot);
            prev_slot = ins.time_slot;
            if (ins.kind == InstrKind::Cnot) {
                CHECK(ins.q0 >= 0);
                CHECK(ins.q1 >= 0);
                CHECK(ins.q0 != ins.q1);
            }
            for (int q : {ins.q0, ins.q1}) {
                if (q < 0) continue;
                CHECK(qubits_in_slot[ins.time_slot].insert(q).second);
            }
        }
        // every gate-bearing slot schedules all seven qubits (idles fill in)
        for (const auto& [slot, qs] : qubits_in_slot) CHECK(qs.size() == 7);
    }
}

TEST_CASE("build is deterministic") {
    CodeDefinition code = code_412(CodeVariant::ZXZ);
    Circuit a = build_circuit(code, LogicalState::MinusL, 4);
    Circuit b = build_circuit(code, LogicalState::MinusL, 4);
    CHECK(serialize(a) == serialize(b));
    CHECK(circuit_hash(a) == circuit_hash(b));
    CHECK(circuit_hash(a) != circuit_hash(build_circuit(code, LogicalState::PlusL, 4)));
}

TEST_CASE("serialization round trip") {
    CodeDefinition code = code_412(CodeVariant::ZXZ);
    for (LogicalState st : {LogicalState::MinusL, LogicalState::OneL}) {
        Circuit c = build_circuit(code, st, 2, {true, true});
        std::string text = serialize(c);
        std::istringstream is(text);
        Circuit parsed = parse_circuit(is);
        CHECK(serialize(parsed) == text);
        CHECK(parsed.rounds == c.rounds);
        CHECK(parsed.deflagging == c.deflagging);
        CHECK(parsed.bit_labels.size() == c.bit_labels.size());
    }
}

TEST_CASE("schedules") {
    CodeDefinition code = code_412(CodeVariant::ZXZ);
    auto x = xcheck_schedule(code);
    int cnots = 0, meas = 0;
    for (const auto& ins : x) {
        if (ins.kind == InstrKind::Cnot) ++cnots;
        if (ins.kind == InstrKind::MeasureZ) ++meas;
    }
    CHECK(cnots == 8);
    CHECK(meas == 3);

    for (int side : {0, 1}) {
        auto z = zcheck_schedule(code, side);
        REQUIRE(z.size() == 4);
        CHECK(z[0].kind == InstrKind::Cnot);
        CHECK(z[1].kind == InstrKind::Cnot);
        CHECK(z[2].kind == InstrKind::MeasureZ);
        CHECK(z[3].kind == InstrKind::ConditionalReset);
        const int anc = side == 0 ? qubit::w02 : qubit::w13;
        CHECK(z[0].q1 == anc);
        CHECK(z[2].q0 == anc);
    }
}

TEST_CASE("equalized rounds pad the Z check") {
    CodeDefinition code = code_412(CodeVariant::ZXZ);
    Circuit plain = build_circuit(code, LogicalState::MinusL, 2);
    Circuit padded = build_circuit(code, LogicalState::MinusL, 2, {false, true});
    int slots_plain = 0, slots_padded = 0;
    for (const auto& i : plain.instructions) slots_plain = std::max(slots_plain, i.time_slot);
    for (const auto& i : padded.instructions) slots_padded = std::max(slots_padded, i.time_slot);
    CHECK(slots_padded > slots_plain);
    CHECK(padded.n_bits() == plain.n_bits());
}

TEST_CASE("XZX variant is the conjugate circuit") {
    CodeDefinition code = code_412(CodeVariant::XZX);
    Circuit c = build_circuit(code, LogicalState::MinusL, 1);
    CHECK(c.variant == CodeVariant::XZX);
    CHECK(c.n_bits() == 11);
    // data prep swaps basis relative to ZXZ
    bool prep_z_data = false;
    for (const auto& ins : c.instructions)
        if (ins.kind == InstrKind::PrepZ && ins.q0 <= 3 && ins.time_slot == 0) prep_z_data = true;
    CHECK(prep_z_data);
    std::string text = serialize(c);
    std::istringstream is(text);
    CHECK(serialize(parse_circuit(is)) == text);
}
