#include "qpb/statevector.hpp"

#include <cmath>

#include "qpb/errors.hpp"

namespace qpb {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

Mat2 matmul2(const Mat2& a, const Mat2& b) {
    Mat2 out{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            out[2 * i + j] = a[2 * i] * b[j] + a[2 * i + 1] * b[2 + j];
    return out;
}

const Mat2 kIdentity{1, 0, 0, 1};
const Mat2 kHadamard{kInvSqrt2, kInvSqrt2, kInvSqrt2, -kInvSqrt2};
const Mat2 kPauliX{0, 1, 1, 0};
const Mat2 kPauliY{0, Complex(0, -1), Complex(0, 1), 0};
const Mat2 kPauliZ{1, 0, 0, -1};
const Mat2 kSGate{1, 0, 0, Complex(0, 1)};
const Mat2 kSInverse{1, 0, 0, Complex(0, -1)};

}  // namespace

Mat2 gate_unitary_1q(const Gate& g) {
    switch (g.kind) {
        case GateKind::Hadamard: return kHadamard;
        case GateKind::SGate: return kSGate;
        case GateKind::SInverse: return kSInverse;
        case GateKind::PrepAxial: {
            // Maps |0> onto the requested axial eigenstate.
            Mat2 u = g.positive ? kIdentity : kPauliX;
            if (g.axis == Axis::X) u = matmul2(kHadamard, u);
            if (g.axis == Axis::Y) u = matmul2(kSGate, matmul2(kHadamard, u));
            return u;
        }
        case GateKind::BasisChange: {
            // Maps the measured axis eigenbasis onto the computational one.
            switch (g.basis) {
                case BasisKind::Z: return kIdentity;
                case BasisKind::X: return kHadamard;
                case BasisKind::Y: return matmul2(kHadamard, kSInverse);
                case BasisKind::ParityPhase: {
                    const Mat2 phase{1, 0, 0, std::polar(1.0, -g.phase)};
                    return matmul2(kHadamard, phase);
                }
            }
            break;
        }
        default: break;
    }
    throw InvalidArgument("gate has no single-qubit unitary");
}

Mat4 gate_unitary_2q(const Gate& g) {
    Mat4 u{};
    switch (g.kind) {
        case GateKind::CX:
            // q0 = control (high bit), q1 = target.
            u[0 * 4 + 0] = 1;
            u[1 * 4 + 1] = 1;
            u[2 * 4 + 3] = 1;
            u[3 * 4 + 2] = 1;
            return u;
        case GateKind::Swap:
            u[0 * 4 + 0] = 1;
            u[1 * 4 + 2] = 1;
            u[2 * 4 + 1] = 1;
            u[3 * 4 + 3] = 1;
            return u;
        default: break;
    }
    throw InvalidArgument("gate has no two-qubit unitary");
}

StateVector::StateVector(int num_qubits) : n_(num_qubits), amps_(std::size_t{1} << num_qubits) {
    amps_[0] = 1.0;
}

void StateVector::reset() {
    std::fill(amps_.begin(), amps_.end(), Complex{});
    amps_[0] = 1.0;
}

void StateVector::apply_1q(const Mat2& u, int q) {
    const std::size_t stride = std::size_t{1} << q;
    const std::size_t size = amps_.size();
    for (std::size_t base = 0; base < size; base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; ++i) {
            const Complex a0 = amps_[i];
            const Complex a1 = amps_[i + stride];
            amps_[i] = u[0] * a0 + u[1] * a1;
            amps_[i + stride] = u[2] * a0 + u[3] * a1;
        }
    }
}

void StateVector::apply_2q(const Mat4& u, int a, int b) {
    const std::size_t ma = std::size_t{1} << a;
    const std::size_t mb = std::size_t{1} << b;
    const std::size_t size = amps_.size();
    for (std::size_t i = 0; i < size; ++i) {
        if (i & (ma | mb)) continue;  // visit each 4-group once
        const std::size_t i00 = i;
        const std::size_t i01 = i | mb;
        const std::size_t i10 = i | ma;
        const std::size_t i11 = i | ma | mb;
        const Complex a00 = amps_[i00];
        const Complex a01 = amps_[i01];
        const Complex a10 = amps_[i10];
        const Complex a11 = amps_[i11];
        amps_[i00] = u[0] * a00 + u[1] * a01 + u[2] * a10 + u[3] * a11;
        amps_[i01] = u[4] * a00 + u[5] * a01 + u[6] * a10 + u[7] * a11;
        amps_[i10] = u[8] * a00 + u[9] * a01 + u[10] * a10 + u[11] * a11;
        amps_[i11] = u[12] * a00 + u[13] * a01 + u[14] * a10 + u[15] * a11;
    }
}

void StateVector::apply_gate(const Gate& g) {
    if (g.is_two_qubit()) {
        apply_2q(gate_unitary_2q(g), static_cast<int>(g.q0), static_cast<int>(g.q1));
    } else {
        apply_1q(gate_unitary_1q(g), static_cast<int>(g.q0));
    }
}

void StateVector::apply_pauli(int pauli, int q) {
    switch (pauli) {
        case 1: apply_1q(kPauliX, q); break;
        case 2: apply_1q(kPauliY, q); break;
        case 3: apply_1q(kPauliZ, q); break;
        default: throw InvalidArgument("pauli index must be 1..3");
    }
}

double StateVector::norm_sq() const {
    double total = 0.0;
    for (const Complex& a : amps_) total += std::norm(a);
    return total;
}

std::vector<double> StateVector::measure_distribution(const std::vector<QubitId>& measured) const {
    std::vector<double> probs(std::size_t{1} << measured.size(), 0.0);
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        const double p = std::norm(amps_[i]);
        if (p == 0.0) continue;
        std::size_t outcome = 0;
        for (std::size_t j = 0; j < measured.size(); ++j) {
            outcome |= ((i >> measured[j]) & 1u) << j;
        }
        probs[outcome] += p;
    }
    return probs;
}

std::uint64_t RandomStream::next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double RandomStream::next_double() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::uint64_t RandomStream::next_below(std::uint64_t n) {
    const std::uint64_t limit = n * (UINT64_MAX / n);
    std::uint64_t v = next();
    while (v >= limit) v = next();
    return v % n;
}

std::uint64_t RandomStream::derive(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
    RandomStream mix(master);
    const std::uint64_t h1 = mix.next() ^ (a * 0xBF58476D1CE4E5B9ULL);
    RandomStream mix2(h1);
    return mix2.next() ^ (b * 0x94D049BB133111EBULL);
}

std::size_t sample_index(const std::vector<double>& probs, double u) {
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return i;
    }
    return probs.size() - 1;  // guards against rounding at the top end
}

}  // namespace qpb
