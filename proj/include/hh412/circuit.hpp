#pragma once

#include "hh412/pauli.hpp"

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hh412 {

enum class InstrKind { PrepZ, PrepX, H, Cnot, Idle, MeasureZ, ConditionalReset, Barrier };

enum class LogicalState { ZeroL, OneL, PlusL, MinusL };

enum class MeasRole { XCheckSyndrome, FlagL, FlagR, ZCheckL, ZCheckR, FinalData };

// One timed circuit instruction. Cnot stores control in q0, target in q1;
// every other qubit-bearing kind uses q0 alone. MeasureZ rows point into
// Circuit::bit_labels via bit_index.
struct Instruction {
    InstrKind kind = InstrKind::Idle;
    int time_slot = 0;
    int q0 = -1;
    int q1 = -1;
    int bit_index = -1;

    int n_qubits() const {
        if (kind == InstrKind::Barrier) return 0;
        return kind == InstrKind::Cnot ? 2 : 1;
    }
};

struct MeasurementLabel {
    MeasRole role;
    int round = 0;  // 0 = preparation
    int qubit = -1;

    bool operator==(const MeasurementLabel&) const = default;
};

struct BuildOptions {
    bool deflagging = false;
    bool equalize_round_duration = false;
};

struct Circuit {
    std::vector<Instruction> instructions;
    int n_qubits = 7;
    std::vector<MeasurementLabel> bit_labels;
    LogicalState initial_state = LogicalState::MinusL;
    int rounds = 0;
    bool deflagging = false;
    CodeVariant variant = CodeVariant::ZXZ;

    int n_bits() const { return static_cast<int>(bit_labels.size()); }
    int find_bit(MeasRole role, int round, int qubit = -1) const {
        for (int i = 0; i < n_bits(); ++i) {
            const auto& l = bit_labels[i];
            if (l.role == role && l.round == round && (qubit < 0 || l.qubit == qubit)) return i;
        }
        return -1;
    }
};

// Whether the state's prep projects the Z checks (|+/-)_L) or the X check.
inline bool is_x_basis_state(LogicalState s) {
    return s == LogicalState::PlusL || s == LogicalState::MinusL;
}

inline const char* to_string(LogicalState s) {
    switch (s) {
        case LogicalState::ZeroL: return "0L";
        case LogicalState::OneL: return "1L";
        case LogicalState::PlusL: return "+L";
        case LogicalState::MinusL: return "-L";
    }
    return "?";
}

inline LogicalState parse_logical_state(const std::string& text) {
    if (text == "0L") return LogicalState::ZeroL;
    if (text == "1L") return LogicalState::OneL;
    if (text == "+L") return LogicalState::PlusL;
    if (text == "-L") return LogicalState::MinusL;
    throw std::invalid_argument("unknown logical state: " + text);
}

namespace qubit {
// Canonical physical indices on the 7-qubit patch.
inline constexpr int d0 = 0, d1 = 1, d2 = 2, d3 = 3, w02 = 4, w4 = 5, w13 = 6;
}  // namespace qubit

// Flagged measurement of the weight-4 check. The center syndrome qubit w4
// couples only to the two flags; each flag's data CNOTs are bracketed by its
// two flag-entangling CNOTs, so a single X on w4 either spreads to a full
// side (invisible, it cancels against the stabilizer) or raises a flag.
// The data order within each bridge (d2 before d0, d1 before d3) puts the
// most likely flagged residual on d0 / d3, matching the feed-forward rule.
inline std::vector<Instruction> xcheck_schedule(const CodeDefinition&) {
    using namespace qubit;
    std::vector<Instruction> v;
    auto gate = [&](InstrKind k, int slot, int a, int b = -1) {
        v.push_back({k, slot, a, b, -1});
    };
    gate(InstrKind::H, 0, w4);
    gate(InstrKind::Cnot, 1, w4, w02);
    gate(InstrKind::Cnot, 2, w4, w13);
    gate(InstrKind::Cnot, 2, w02, d2);
    gate(InstrKind::Cnot, 3, w02, d0);
    gate(InstrKind::Cnot, 3, w13, d1);
    gate(InstrKind::Cnot, 4, w4, w02);
    gate(InstrKind::Cnot, 4, w13, d3);
    gate(InstrKind::Cnot, 5, w4, w13);
    gate(InstrKind::H, 6, w4);
    gate(InstrKind::MeasureZ, 7, w02);
    gate(InstrKind::MeasureZ, 7, w4);
    gate(InstrKind::MeasureZ, 7, w13);
    gate(InstrKind::ConditionalReset, 8, w02);
    gate(InstrKind::ConditionalReset, 8, w4);
    gate(InstrKind::ConditionalReset, 8, w13);
    return v;
}

// Direct weight-2 Z check through the side's flag qubit as ancilla.
inline std::vector<Instruction> zcheck_schedule(const CodeDefinition&, int side) {
    using namespace qubit;
    const int anc = side == 0 ? w02 : w13;
    const int da = side == 0 ? d0 : d1;
    const int db = side == 0 ? d2 : d3;
    std::vector<Instruction> v;
    v.push_back({InstrKind::Cnot, 0, da, anc, -1});
    v.push_back({InstrKind::Cnot, 1, db, anc, -1});
    v.push_back({InstrKind::MeasureZ, 2, anc, -1, -1});
    v.push_back({InstrKind::ConditionalReset, 3, anc, -1, -1});
    return v;
}

namespace detail {

inline int block_len(const std::vector<Instruction>& block) {
    int len = 0;
    for (const auto& i : block) len = std::max(len, i.time_slot + 1);
    return len;
}

struct CircuitBuilder {
    Circuit circ;
    int offset = 0;

    void append(const std::vector<Instruction>& block,
                const std::vector<std::pair<MeasRole, int>>& roles, int round) {
        std::size_t next_role = 0;
        for (Instruction ins : block) {
            ins.time_slot += offset;
            if (ins.kind == InstrKind::MeasureZ) {
                if (next_role >= roles.size()) throw std::logic_error("missing bit role");
                ins.bit_index = static_cast<int>(circ.bit_labels.size());
                circ.bit_labels.push_back({roles[next_role].first, round, roles[next_role].second});
                ++next_role;
            }
            circ.instructions.push_back(ins);
        }
        offset += block_len(block);
    }

    void barrier() {
        circ.instructions.push_back({InstrKind::Barrier, offset, -1, -1, -1});
        ++offset;
    }

    void pad_to(int len, int start) {
        offset = std::max(offset, start + len);
    }
};

// Merge two parallel blocks (disjoint qubits) into one slot range.
inline std::vector<Instruction> parallel(const std::vector<Instruction>& a,
                                         const std::vector<Instruction>& b) {
    std::vector<Instruction> out = a;
    out.insert(out.end(), b.begin(), b.end());
    std::stable_sort(out.begin(), out.end(),
                     [](const Instruction& x, const Instruction& y) { return x.time_slot < y.time_slot; });
    return out;
}

// Hadamard-conjugate every instruction: prep/measure/reset bases swap and
// CNOTs reverse. Slots are doubled to make room for the basis-change H gates
// next to measurements and resets; compact_slots() squeezes them back.
inline void conjugate_instructions(std::vector<Instruction>& instrs) {
    std::vector<Instruction> out;
    for (Instruction ins : instrs) {
        const int s = 2 * ins.time_slot + 1;
        switch (ins.kind) {
            case InstrKind::PrepZ: ins.kind = InstrKind::PrepX; break;
            case InstrKind::PrepX: ins.kind = InstrKind::PrepZ; break;
            case InstrKind::Cnot: std::swap(ins.q0, ins.q1); break;
            case InstrKind::MeasureZ:
                out.push_back({InstrKind::H, s - 1, ins.q0, -1, -1});
                break;
            case InstrKind::ConditionalReset: break;
            case InstrKind::Idle: continue;  // refilled after compaction
            default: break;
        }
        ins.time_slot = s;
        out.push_back(ins);
        if (ins.kind == InstrKind::ConditionalReset)
            out.push_back({InstrKind::H, s + 1, ins.q0, -1, -1});
    }
    instrs = std::move(out);
}

// Cancel adjacent H-H pairs on the same qubit (nothing else on that qubit in
// between). Recovers the natural dual circuit after conjugation.
inline void cancel_double_h(std::vector<Instruction>& instrs) {
    std::stable_sort(instrs.begin(), instrs.end(),
                     [](const Instruction& a, const Instruction& b) { return a.time_slot < b.time_slot; });
    std::vector<char> drop(instrs.size(), 0);
    std::vector<int> last_h(32, -1);
    for (std::size_t i = 0; i < instrs.size(); ++i) {
        const Instruction& ins = instrs[i];
        if (ins.n_qubits() == 0) continue;
        for (int q : {ins.q0, ins.q1}) {
            if (q < 0) continue;
            if (ins.kind == InstrKind::H) {
                if (last_h[q] >= 0) {
                    drop[last_h[q]] = drop[i] = 1;
                    last_h[q] = -1;
                } else {
                    last_h[q] = static_cast<int>(i);
                }
            } else {
                last_h[q] = -1;
            }
        }
    }
    std::vector<Instruction> kept;
    for (std::size_t i = 0; i < instrs.size(); ++i)
        if (!drop[i]) kept.push_back(instrs[i]);
    instrs = std::move(kept);
}

inline void compact_slots(std::vector<Instruction>& instrs) {
    std::map<int, int> remap;
    for (const auto& ins : instrs)
        if (ins.n_qubits() > 0) remap[ins.time_slot] = 0;
    int next = 0;
    for (auto& [slot, to] : remap) to = next++;
    for (auto& ins : instrs) {
        if (ins.n_qubits() > 0) {
            ins.time_slot = remap[ins.time_slot];
        } else {
            auto it = remap.lower_bound(ins.time_slot);
            ins.time_slot = it == remap.end() ? next : it->second;
        }
    }
}

inline void fill_idles(Circuit& circ) {
    int max_slot = 0;
    for (const auto& ins : circ.instructions) max_slot = std::max(max_slot, ins.time_slot);
    std::vector<std::uint32_t> used(max_slot + 1, 0);
    std::vector<char> has_gate(max_slot + 1, 0);
    for (const auto& ins : circ.instructions) {
        if (ins.n_qubits() == 0) continue;
        has_gate[ins.time_slot] = 1;
        used[ins.time_slot] |= 1u << ins.q0;
        if (ins.q1 >= 0) used[ins.time_slot] |= 1u << ins.q1;
    }
    for (int s = 0; s <= max_slot; ++s) {
        if (!has_gate[s]) continue;
        for (int q = 0; q < circ.n_qubits; ++q)
            if (!(used[s] & (1u << q)))
                circ.instructions.push_back({InstrKind::Idle, s, q, -1, -1});
    }
    std::stable_sort(circ.instructions.begin(), circ.instructions.end(),
                     [](const Instruction& a, const Instruction& b) {
                         if (a.time_slot != b.time_slot) return a.time_slot < b.time_slot;
                         return a.q0 < b.q0;
                     });
}

}  // namespace detail

// Canonical prep / repeated-round / final-measurement circuit. For |+/-)_L
// the prep projects both Z checks and a round is X check then Z check; for
// |0/1)_L the prep projects the X check and the order reverses. The final
// transversal measurement uses the basis of the prepared logical.
inline Circuit build_circuit(const CodeDefinition& code, LogicalState state, int rounds,
                             BuildOptions options = {}) {
    if (rounds < 0) throw std::invalid_argument("build_circuit: rounds must be >= 0");
    using namespace qubit;
    detail::CircuitBuilder b;
    b.circ.initial_state = state;
    b.circ.rounds = rounds;
    b.circ.deflagging = options.deflagging;
    b.circ.variant = code.variant;

    const bool x_basis = is_x_basis_state(state);

    // Product-state prep. The Pauli layer that selects |1)_L / |-)_L from the
    // +1-eigenstate partner is a frame no-op and carries no instructions.
    std::vector<Instruction> prep;
    for (int q : {d0, d1, d2, d3})
        prep.push_back({x_basis ? InstrKind::PrepX : InstrKind::PrepZ, 0, q, -1, -1});
    for (int q : {w02, w4, w13}) prep.push_back({InstrKind::PrepZ, 0, q, -1, -1});
    b.append(prep, {}, 0);
    b.barrier();

    auto zblock = detail::parallel(zcheck_schedule(code, 0), zcheck_schedule(code, 1));
    const std::vector<std::pair<MeasRole, int>> zroles = {{MeasRole::ZCheckL, w02},
                                                          {MeasRole::ZCheckR, w13}};
    auto xblock = xcheck_schedule(code);
    const std::vector<std::pair<MeasRole, int>> xroles = {{MeasRole::FlagL, w02},
                                                          {MeasRole::XCheckSyndrome, w4},
                                                          {MeasRole::FlagR, w13}};
    const int xlen = detail::block_len(xblock);

    auto append_z = [&](int round) {
        const int start = b.offset;
        b.append(zblock, zroles, round);
        if (options.equalize_round_duration) b.pad_to(xlen, start);
    };

    // Projective prep measurement.
    if (x_basis)
        append_z(0);
    else
        b.append(xblock, xroles, 0);
    b.barrier();

    for (int k = 1; k <= rounds; ++k) {
        if (x_basis) {
            b.append(xblock, xroles, k);
            append_z(k);
        } else {
            append_z(k);
            b.append(xblock, xroles, k);
        }
        b.barrier();
    }

    // Final transversal data measurement in the prepared logical's basis.
    if (x_basis) {
        std::vector<Instruction> hs;
        for (int q : {d0, d1, d2, d3}) hs.push_back({InstrKind::H, 0, q, -1, -1});
        b.append(hs, {}, rounds);
    }
    std::vector<Instruction> fin;
    std::vector<std::pair<MeasRole, int>> froles;
    for (int q : {d0, d1, d2, d3}) {
        fin.push_back({InstrKind::MeasureZ, 0, q, -1, -1});
        froles.emplace_back(MeasRole::FinalData, q);
    }
    b.append(fin, froles, rounds);

    Circuit circ = std::move(b.circ);
    if (code.variant == CodeVariant::XZX) {
        detail::conjugate_instructions(circ.instructions);
        detail::cancel_double_h(circ.instructions);
    }
    detail::compact_slots(circ.instructions);
    detail::fill_idles(circ);
    return circ;
}

// ---- serialization ---------------------------------------------------------

inline const char* to_string(InstrKind k) {
    switch (k) {
        case InstrKind::PrepZ: return "prep_z";
        case InstrKind::PrepX: return "prep_x";
        case InstrKind::H: return "h";
        case InstrKind::Cnot: return "cnot";
        case InstrKind::Idle: return "idle";
        case InstrKind::MeasureZ: return "measure_z";
        case InstrKind::ConditionalReset: return "reset";
        case InstrKind::Barrier: return "barrier";
    }
    return "?";
}

inline const char* to_string(MeasRole r) {
    switch (r) {
        case MeasRole::XCheckSyndrome: return "x_syndrome";
        case MeasRole::FlagL: return "flag_l";
        case MeasRole::FlagR: return "flag_r";
        case MeasRole::ZCheckL: return "z_check_l";
        case MeasRole::ZCheckR: return "z_check_r";
        case MeasRole::FinalData: return "final_data";
    }
    return "?";
}

inline void serialize(const Circuit& circ, std::ostream& os) {
    os << "# hh412 circuit v1\n";
    os << "state " << to_string(circ.initial_state) << "\n";
    os << "variant " << (circ.variant == CodeVariant::ZXZ ? "ZXZ" : "XZX") << "\n";
    os << "rounds " << circ.rounds << "\n";
    os << "deflagging " << (circ.deflagging ? 1 : 0) << "\n";
    os << "qubits " << circ.n_qubits << "\n";
    for (const auto& ins : circ.instructions) {
        os << ins.time_slot << " " << to_string(ins.kind);
        if (ins.n_qubits() >= 1) os << " " << ins.q0;
        if (ins.n_qubits() == 2) os << " " << ins.q1;
        if (ins.kind == InstrKind::MeasureZ) {
            const auto& l = circ.bit_labels[ins.bit_index];
            os << " " << to_string(l.role) << " " << l.round;
            if (l.role == MeasRole::FinalData) os << " " << l.qubit;
        }
        os << "\n";
    }
}

inline std::string serialize(const Circuit& circ) {
    std::ostringstream os;
    serialize(circ, os);
    return os.str();
}

inline InstrKind parse_instr_kind(const std::string& s) {
    if (s == "prep_z") return InstrKind::PrepZ;
    if (s == "prep_x") return InstrKind::PrepX;
    if (s == "h") return InstrKind::H;
    if (s == "cnot") return InstrKind::Cnot;
    if (s == "idle") return InstrKind::Idle;
    if (s == "measure_z") return InstrKind::MeasureZ;
    if (s == "reset") return InstrKind::ConditionalReset;
    if (s == "barrier") return InstrKind::Barrier;
    throw std::invalid_argument("unknown instruction kind: " + s);
}

inline MeasRole parse_meas_role(const std::string& s) {
    if (s == "x_syndrome") return MeasRole::XCheckSyndrome;
    if (s == "flag_l") return MeasRole::FlagL;
    if (s == "flag_r") return MeasRole::FlagR;
    if (s == "z_check_l") return MeasRole::ZCheckL;
    if (s == "z_check_r") return MeasRole::ZCheckR;
    if (s == "final_data") return MeasRole::FinalData;
    throw std::invalid_argument("unknown measurement role: " + s);
}

inline Circuit parse_circuit(std::istream& is) {
    Circuit circ;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string first;
        ls >> first;
        if (first == "state") {
            std::string v;
            ls >> v;
            circ.initial_state = parse_logical_state(v);
        } else if (first == "variant") {
            std::string v;
            ls >> v;
            circ.variant = v == "XZX" ? CodeVariant::XZX : CodeVariant::ZXZ;
        } else if (first == "rounds") {
            ls >> circ.rounds;
        } else if (first == "deflagging") {
            int v;
            ls >> v;
            circ.deflagging = v != 0;
        } else if (first == "qubits") {
            ls >> circ.n_qubits;
        } else {
            Instruction ins;
            ins.time_slot = std::stoi(first);
            std::string kind;
            ls >> kind;
            ins.kind = parse_instr_kind(kind);
            if (ins.n_qubits() >= 1) ls >> ins.q0;
            if (ins.n_qubits() == 2) ls >> ins.q1;
            if (ins.kind == InstrKind::MeasureZ) {
                std::string role;
                int round = 0;
                ls >> role >> round;
                MeasurementLabel l{parse_meas_role(role), round, -1};
                if (l.role == MeasRole::FinalData)
                    ls >> l.qubit;
                else
                    l.qubit = ins.q0;
                ins.bit_index = static_cast<int>(circ.bit_labels.size());
                circ.bit_labels.push_back(l);
            }
            circ.instructions.push_back(ins);
        }
    }
    return circ;
}

inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string circuit_hash(const Circuit& circ) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(serialize(circ))));
    return buf;
}

}  // namespace hh412
