#pragma once

#include "hh412/circuit.hpp"

#include <cstdint>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hh412 {

enum class Channel { Depolarize1, Depolarize2, BitFlipInit, MeasFlip, ResetFlip, IdleDepolarize };

// Six-parameter Pauli noise model. Per-qubit overrides (keyed by qubit and
// channel, with the control qubit standing in for a CNOT) take precedence
// over the globals when present.
struct NoiseParams {
    double p1 = 0, pw = 0, pi = 0, pm = 0, pr = 0, p2 = 0;
    std::map<std::pair<int, Channel>, double> overrides;

    double base(Channel c) const {
        switch (c) {
            case Channel::Depolarize1: return p1;
            case Channel::Depolarize2: return p2;
            case Channel::BitFlipInit: return pi;
            case Channel::MeasFlip: return pm;
            case Channel::ResetFlip: return pr;
            case Channel::IdleDepolarize: return pw;
        }
        return 0;
    }

    double rate(Channel c, int qubit) const {
        auto it = overrides.find({qubit, c});
        return it != overrides.end() ? it->second : base(c);
    }

    void validate() const {
        for (double p : {p1, pw, pi, pm, pr, p2})
            if (p < 0 || p >= 0.5) throw std::invalid_argument("noise parameter outside [0, 1/2)");
        for (const auto& [k, p] : overrides)
            if (p < 0 || p >= 0.5) throw std::invalid_argument("noise override outside [0, 1/2)");
    }
};

// Table "noiseSix", Fit column.
inline NoiseParams fit_noise_params() {
    return {7.30e-4, 1.80e-3, 3.00e-3, 4.30e-3, 1.10e-2, 8.60e-3, {}};
}

// Table "noiseSix", Randomized Benchmarking (Simultaneous) column.
inline NoiseParams rb_noise_params() {
    return {2.20e-4, 6.00e-3, 7.00e-3, 7.70e-3, 1.00e-2, 9.00e-3, {}};
}

// EPC -> EPG conversion from the noiseSix caption: (2^n - 1) / 2^n.
inline double epc_to_epg(double epc, int n_gate_qubits) {
    const double d = double(1u << n_gate_qubits);
    return epc * (d - 1.0) / d;
}

// Flat key=value format, e.g. "p1=7.3e-4". Unknown keys are rejected.
inline NoiseParams parse_noise_params(std::istream& is) {
    NoiseParams np;
    std::string token;
    while (is >> token) {
        auto eq = token.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("noise file: expected key=value, got " + token);
        const std::string key = token.substr(0, eq);
        const double value = std::stod(token.substr(eq + 1));
        if (key == "p1") np.p1 = value;
        else if (key == "pw") np.pw = value;
        else if (key == "pi") np.pi = value;
        else if (key == "pm") np.pm = value;
        else if (key == "pr") np.pr = value;
        else if (key == "p2") np.p2 = value;
        else throw std::invalid_argument("noise file: unknown key " + key);
    }
    np.validate();
    return np;
}

inline std::string format_noise_params(const NoiseParams& np) {
    std::ostringstream os;
    os << "p1=" << np.p1 << " pw=" << np.pw << " pi=" << np.pi << " pm=" << np.pm
       << " pr=" << np.pr << " p2=" << np.p2;
    return os.str();
}

// One Pauli fault alternative: frame masks over the circuit's qubits. For a
// measurement the X flip lands just before the readout; everywhere else the
// fault follows its instruction.
struct Fault {
    std::uint32_t x_bits = 0;
    std::uint32_t z_bits = 0;
    double probability = 0;
};

struct FaultLocation {
    int instruction_index = -1;
    Channel channel = Channel::Depolarize1;
    std::vector<Fault> faults;

    double total_probability() const {
        double t = 0;
        for (const auto& f : faults) t += f.probability;
        return t;
    }
};

inline std::vector<FaultLocation> enumerate_faults(const Circuit& circ, const NoiseParams& params) {
    params.validate();
    std::vector<FaultLocation> locs;
    for (int idx = 0; idx < static_cast<int>(circ.instructions.size()); ++idx) {
        const Instruction& ins = circ.instructions[idx];
        FaultLocation loc;
        loc.instruction_index = idx;
        const std::uint32_t m0 = ins.q0 >= 0 ? 1u << ins.q0 : 0;
        const std::uint32_t m1 = ins.q1 >= 0 ? 1u << ins.q1 : 0;
        switch (ins.kind) {
            case InstrKind::Barrier:
                continue;
            case InstrKind::PrepZ:
                loc.channel = Channel::BitFlipInit;
                loc.faults.push_back({m0, 0, params.rate(loc.channel, ins.q0)});
                break;
            case InstrKind::PrepX:
                loc.channel = Channel::BitFlipInit;
                loc.faults.push_back({0, m0, params.rate(loc.channel, ins.q0)});
                break;
            case InstrKind::MeasureZ:
                loc.channel = Channel::MeasFlip;
                loc.faults.push_back({m0, 0, params.rate(loc.channel, ins.q0)});
                break;
            case InstrKind::ConditionalReset:
                loc.channel = Channel::ResetFlip;
                loc.faults.push_back({m0, 0, params.rate(loc.channel, ins.q0)});
                break;
            case InstrKind::H:
            case InstrKind::Idle: {
                loc.channel = ins.kind == InstrKind::H ? Channel::Depolarize1 : Channel::IdleDepolarize;
                const double p = params.rate(loc.channel, ins.q0) / 3.0;
                loc.faults.push_back({m0, 0, p});   // X
                loc.faults.push_back({m0, m0, p});  // Y
                loc.faults.push_back({0, m0, p});   // Z
                break;
            }
            case InstrKind::Cnot: {
                loc.channel = Channel::Depolarize2;
                const double p = params.rate(loc.channel, ins.q0) / 15.0;
                for (int a = 0; a < 4; ++a) {
                    for (int b = 0; b < 4; ++b) {
                        if (a == 0 && b == 0) continue;
                        std::uint32_t x = 0, z = 0;
                        if (a & 1) x |= m0;
                        if (a & 2) z |= m0;
                        if (b & 1) x |= m1;
                        if (b & 2) z |= m1;
                        loc.faults.push_back({x, z, p});
                    }
                }
                break;
            }
        }
        locs.push_back(std::move(loc));
    }
    return locs;
}

}  // namespace hh412
