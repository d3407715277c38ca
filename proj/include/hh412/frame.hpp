#pragma once

#include "hh412/circuit.hpp"

#include <cstdint>

namespace hh412 {

// Pauli frame over the circuit's qubits: the accumulated difference between
// the noisy run and the fault-free reference. Measurement records the X
// component as a flip of the readout bit (raw bit = bit_index) and destroys
// the Z component; prep and reset clear both.
struct PauliFrame {
    std::uint32_t x = 0;
    std::uint32_t z = 0;

    void apply(std::uint32_t fx, std::uint32_t fz) {
        x ^= fx;
        z ^= fz;
    }

    void step(const Instruction& ins, std::uint64_t& raw_flips) {
        const std::uint32_t m0 = ins.q0 >= 0 ? 1u << ins.q0 : 0;
        const std::uint32_t m1 = ins.q1 >= 0 ? 1u << ins.q1 : 0;
        switch (ins.kind) {
            case InstrKind::PrepZ:
            case InstrKind::PrepX:
            case InstrKind::ConditionalReset:
                x &= ~m0;
                z &= ~m0;
                break;
            case InstrKind::H: {
                const bool xb = x & m0, zb = z & m0;
                x = (x & ~m0) | (zb ? m0 : 0);
                z = (z & ~m0) | (xb ? m0 : 0);
                break;
            }
            case InstrKind::Cnot:
                if (x & m0) x ^= m1;
                if (z & m1) z ^= m0;
                break;
            case InstrKind::MeasureZ:
                if (x & m0) raw_flips ^= 1ull << ins.bit_index;
                z &= ~m0;
                break;
            case InstrKind::Idle:
            case InstrKind::Barrier:
                break;
        }
    }
};

}  // namespace hh412
