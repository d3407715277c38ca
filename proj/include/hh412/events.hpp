#pragma once

#include "hh412/circuit.hpp"

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hh412 {

enum class EventKind { FirstCheck, StabDiff, Flag, FinalDiff };

enum class StabOp { SX, Z02, Z13 };

struct EventId {
    EventKind kind;
    StabOp op;   // for Flag: Z02 = left flag, Z13 = right flag
    int round;   // for StabDiff the earlier round of the compared pair
    int index;   // position in the event bit order

    bool operator==(const EventId&) const = default;
};

inline std::string to_string(const EventId& e) {
    const char* op = e.op == StabOp::SX ? "SX" : e.op == StabOp::Z02 ? "Z02" : "Z13";
    switch (e.kind) {
        case EventKind::FirstCheck: return std::string("first(") + op + ")";
        case EventKind::StabDiff:
            return std::string("diff(") + op + "," + std::to_string(e.round) + ")";
        case EventKind::Flag:
            return std::string("flag(") + (e.op == StabOp::Z02 ? "L" : "R") + "," +
                   std::to_string(e.round) + ")";
        case EventKind::FinalDiff: return std::string("final(") + op + ")";
    }
    return "?";
}

// Error-sensitive events as parities of raw measurement flips (packed into a
// 64-bit word, bit = bit_index). Every event is zero in a fault-free run;
// event bit order follows EventId.index.
struct EventTable {
    std::vector<EventId> ids;
    std::vector<std::uint64_t> raw_masks;  // raw bits XORed per event
    std::uint64_t logical_mask = 0;        // final-data bits whose parity flips the measured logical
    bool deflagged = false;

    int n_events() const { return static_cast<int>(ids.size()); }

    std::uint64_t compute(std::uint64_t raw_flips) const {
        std::uint64_t mask = 0;
        for (std::size_t e = 0; e < raw_masks.size(); ++e)
            mask |= std::uint64_t(std::popcount(raw_flips & raw_masks[e]) & 1) << e;
        return mask;
    }

    std::uint8_t logical_flip(std::uint64_t raw_flips) const {
        return static_cast<std::uint8_t>(std::popcount(raw_flips & logical_mask) & 1);
    }
};

inline EventTable build_event_table(const Circuit& circ, bool deflagged = false) {
    if (circ.n_bits() > 64)
        throw std::invalid_argument("event table: circuits beyond 64 measurement bits unsupported");
    EventTable table;
    table.deflagged = deflagged;
    const int r = circ.rounds;
    const bool x_basis = is_x_basis_state(circ.initial_state);

    auto bit = [&](MeasRole role, int round, int qubit = -1) {
        int b = circ.find_bit(role, round, qubit);
        if (b < 0) throw std::logic_error("event table: missing measurement bit");
        return b;
    };
    auto add = [&](EventKind kind, StabOp op, int round, const std::vector<int>& raw) {
        EventId id{kind, op, round, static_cast<int>(table.ids.size())};
        table.ids.push_back(id);
        std::uint64_t mask = 0;
        for (int b : raw) mask ^= 1ull << b;
        table.raw_masks.push_back(mask);
    };
    auto add_flags = [&](int k) {
        if (deflagged) return;
        add(EventKind::Flag, StabOp::Z02, k, {bit(MeasRole::FlagL, k)});
        add(EventKind::Flag, StabOp::Z13, k, {bit(MeasRole::FlagR, k)});
    };

    if (x_basis) {
        // Prep projects the Z checks; rounds are X check then Z check; the
        // final X-basis readout re-infers S_X.
        for (int k = 1; k <= r; ++k) {
            add_flags(k);
            if (k == 1)
                add(EventKind::FirstCheck, StabOp::SX, 1, {bit(MeasRole::XCheckSyndrome, 1)});
            else
                add(EventKind::StabDiff, StabOp::SX, k - 1,
                    {bit(MeasRole::XCheckSyndrome, k - 1), bit(MeasRole::XCheckSyndrome, k)});
            add(EventKind::StabDiff, StabOp::Z02, k - 1,
                {bit(MeasRole::ZCheckL, k - 1), bit(MeasRole::ZCheckL, k)});
            add(EventKind::StabDiff, StabOp::Z13, k - 1,
                {bit(MeasRole::ZCheckR, k - 1), bit(MeasRole::ZCheckR, k)});
        }
        std::vector<int> fin;
        for (int q = 0; q < 4; ++q) fin.push_back(bit(MeasRole::FinalData, r, q));
        if (r >= 1) fin.push_back(bit(MeasRole::XCheckSyndrome, r));
        add(EventKind::FinalDiff, StabOp::SX, r, fin);
        table.logical_mask =
            (1ull << bit(MeasRole::FinalData, r, 0)) | (1ull << bit(MeasRole::FinalData, r, 2));
    } else {
        // Prep projects S_X; rounds are Z check then X check; the final
        // Z-basis readout re-infers both Z checks.
        add_flags(0);
        for (int k = 1; k <= r; ++k) {
            if (k == 1) {
                add(EventKind::FirstCheck, StabOp::Z02, 1, {bit(MeasRole::ZCheckL, 1)});
                add(EventKind::FirstCheck, StabOp::Z13, 1, {bit(MeasRole::ZCheckR, 1)});
            } else {
                add(EventKind::StabDiff, StabOp::Z02, k - 1,
                    {bit(MeasRole::ZCheckL, k - 1), bit(MeasRole::ZCheckL, k)});
                add(EventKind::StabDiff, StabOp::Z13, k - 1,
                    {bit(MeasRole::ZCheckR, k - 1), bit(MeasRole::ZCheckR, k)});
            }
            add_flags(k);
            add(EventKind::StabDiff, StabOp::SX, k - 1,
                {bit(MeasRole::XCheckSyndrome, k - 1), bit(MeasRole::XCheckSyndrome, k)});
        }
        std::vector<int> finL = {bit(MeasRole::FinalData, r, 0), bit(MeasRole::FinalData, r, 2)};
        std::vector<int> finR = {bit(MeasRole::FinalData, r, 1), bit(MeasRole::FinalData, r, 3)};
        if (r >= 1) {
            finL.push_back(bit(MeasRole::ZCheckL, r));
            finR.push_back(bit(MeasRole::ZCheckR, r));
        }
        add(EventKind::FinalDiff, StabOp::Z02, r, finL);
        add(EventKind::FinalDiff, StabOp::Z13, r, finR);
        table.logical_mask =
            (1ull << bit(MeasRole::FinalData, r, 0)) | (1ull << bit(MeasRole::FinalData, r, 1));
    }
    return table;
}

// Feed-forward interpretation of the flag outcomes (one software X per
// X-check round, applied to d0 or d3). Expressed as raw-bit toggles so the
// same transform serves the sampler and the tracer.
struct DeflagRules {
    struct Rule {
        int flag_l_bit;
        int flag_r_bit;
        std::uint64_t left_toggles = 0;
        std::uint64_t right_toggles = 0;
    };
    std::vector<Rule> rules;

    void apply(std::uint64_t& raw_flips) const {
        for (const auto& rule : rules) {
            const bool fl = (raw_flips >> rule.flag_l_bit) & 1;
            const bool fr = (raw_flips >> rule.flag_r_bit) & 1;
            if (fl == fr) continue;  // both raised (or neither): no software Pauli
            raw_flips ^= fl ? rule.left_toggles : rule.right_toggles;
        }
    }
};

inline DeflagRules build_deflag_rules(const Circuit& circ) {
    DeflagRules out;
    const int r = circ.rounds;
    const bool x_basis = is_x_basis_state(circ.initial_state);
    const int first_xcheck = x_basis ? 1 : 0;
    for (int k = first_xcheck; k <= r; ++k) {
        DeflagRules::Rule rule;
        rule.flag_l_bit = circ.find_bit(MeasRole::FlagL, k);
        rule.flag_r_bit = circ.find_bit(MeasRole::FlagR, k);
        // A software X on d0 (d3) flips every later measurement comparison it
        // anticommutes with: the side's remaining Z checks, and the final
        // data readout when it is Z-basis.
        const int first_z = x_basis ? k : k + 1;
        for (int j = first_z; j <= r; ++j) {
            rule.left_toggles ^= 1ull << circ.find_bit(MeasRole::ZCheckL, j);
            rule.right_toggles ^= 1ull << circ.find_bit(MeasRole::ZCheckR, j);
        }
        if (!x_basis) {
            rule.left_toggles ^= 1ull << circ.find_bit(MeasRole::FinalData, r, 0);
            rule.right_toggles ^= 1ull << circ.find_bit(MeasRole::FinalData, r, 3);
        }
        out.rules.push_back(rule);
    }
    return out;
}

}  // namespace hh412
