#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace hh412 {

// n-qubit Pauli operator in symplectic form. Bit q of x_bits/z_bits carries
// the X/Z component on qubit q; both set means Y (with the i folded into the
// symbol). Signs are tracked modulo {+1,-1}: products that would pick up a
// residual +-i fold it to the real sign of i^k, which preserves the
// commutation parity between P*Q and Q*P.
struct PauliString {
    int n = 0;
    std::uint32_t x_bits = 0;
    std::uint32_t z_bits = 0;
    bool negative = false;

    bool operator==(const PauliString&) const = default;

    bool is_identity() const { return x_bits == 0 && z_bits == 0; }

    int weight() const {
        std::uint32_t support = x_bits | z_bits;
        int w = 0;
        for (; support; support &= support - 1) ++w;
        return w;
    }
};

inline PauliString pauli_identity(int n) { return PauliString{n, 0, 0, false}; }

// 0 if commuting, 1 if anticommuting.
inline int commutes(const PauliString& a, const PauliString& b) {
    if (a.n != b.n) throw std::invalid_argument("commutes: qubit count mismatch");
    std::uint32_t overlap = (a.x_bits & b.z_bits) ^ (a.z_bits & b.x_bits);
    int parity = 0;
    for (; overlap; overlap &= overlap - 1) parity ^= 1;
    return parity;
}

inline PauliString multiply(const PauliString& a, const PauliString& b) {
    if (a.n != b.n) throw std::invalid_argument("multiply: qubit count mismatch");
    PauliString out{a.n, a.x_bits ^ b.x_bits, a.z_bits ^ b.z_bits, false};
    // Phase of the product in powers of i, with Y == iXZ normalization:
    // per qubit, i^{za*xb - xa*zb + ...}; accumulating the exponent mod 4 and
    // folding i^k to a real sign as (k mod 4) in {2,3} -> negative.
    int k = 0;
    for (int q = 0; q < a.n; ++q) {
        int xa = (a.x_bits >> q) & 1, za = (a.z_bits >> q) & 1;
        int xb = (b.x_bits >> q) & 1, zb = (b.z_bits >> q) & 1;
        // i-exponent of (i^{xa*za} X^xa Z^za)(i^{xb*zb} X^xb Z^zb) relative to
        // the normalized result i^{(xa^xb)(za^zb)} X^.. Z^..
        k += xa * za + xb * zb - (xa ^ xb) * (za ^ zb) + 2 * (za * xb);
    }
    k = ((k % 4) + 4) % 4;
    out.negative = (a.negative != b.negative) != (k == 2 || k == 3);
    return out;
}

inline char pauli_char(int x, int z) {
    if (x && z) return 'Y';
    if (x) return 'X';
    if (z) return 'Z';
    return 'I';
}

inline std::string to_string(const PauliString& p) {
    std::string s;
    if (p.negative) s += '-';
    for (int q = 0; q < p.n; ++q)
        s += pauli_char((p.x_bits >> q) & 1, (p.z_bits >> q) & 1);
    return s;
}

// Accepts the same grammar as to_string: optional leading '+'/'-', then one
// of I,X,Y,Z per qubit (leftmost character = qubit 0).
inline PauliString parse_pauli(const std::string& text) {
    PauliString p;
    std::size_t i = 0;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
        p.negative = text[i] == '-';
        ++i;
    }
    if (i == text.size()) throw std::invalid_argument("parse_pauli: empty operator");
    for (; i < text.size(); ++i) {
        int q = p.n++;
        if (q >= 32) throw std::invalid_argument("parse_pauli: too many qubits");
        switch (text[i]) {
            case 'I': break;
            case 'X': p.x_bits |= 1u << q; break;
            case 'Y': p.x_bits |= 1u << q; p.z_bits |= 1u << q; break;
            case 'Z': p.z_bits |= 1u << q; break;
            default: throw std::invalid_argument("parse_pauli: bad character");
        }
    }
    return p;
}

enum class CodeVariant { ZXZ, XZX };

// The [[4,1,2]] code on the 7-qubit heavy-hex patch. Data qubits d0..d3 take
// indices 0..3; the ancillas follow in layout order: w02 (left flag / left
// Z-check ancilla), w4 (center syndrome qubit), w13 (right flag / right
// Z-check ancilla). Connectivity: d0-w02-d2, w02-w4-w13, d1-w13-d3.
struct CodeDefinition {
    int n_data = 4;
    CodeVariant variant = CodeVariant::ZXZ;
    std::vector<PauliString> stabilizers;
    PauliString logical_x;
    PauliString logical_z;
    std::map<std::string, int> layout;
};

inline CodeDefinition code_412(CodeVariant variant) {
    CodeDefinition code;
    code.variant = variant;
    if (variant == CodeVariant::ZXZ) {
        code.stabilizers = {parse_pauli("ZIZI"), parse_pauli("XXXX"), parse_pauli("IZIZ")};
        code.logical_x = parse_pauli("XIXI");
        code.logical_z = parse_pauli("ZZII");
    } else {
        code.stabilizers = {parse_pauli("XIXI"), parse_pauli("ZZZZ"), parse_pauli("IXIX")};
        code.logical_x = parse_pauli("ZIZI");
        code.logical_z = parse_pauli("XXII");
    }
    code.layout = {{"d0", 0}, {"d1", 1}, {"d2", 2}, {"d3", 3},
                   {"w02", 4}, {"w4", 5}, {"w13", 6}};
    return code;
}

}  // namespace hh412
