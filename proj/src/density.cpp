#include "qpb/density.hpp"

#include <algorithm>

#include "qpb/errors.hpp"

namespace qpb {

namespace {

Mat2 conj2(const Mat2& u) {
    Mat2 out;
    for (int i = 0; i < 4; ++i) out[i] = std::conj(u[i]);
    return out;
}

Mat4 conj4(const Mat4& u) {
    Mat4 out;
    for (int i = 0; i < 16; ++i) out[i] = std::conj(u[i]);
    return out;
}

}  // namespace

DensityMatrix::DensityMatrix(int num_qubits) : n_(num_qubits), state_(2 * num_qubits) {
    if (num_qubits < 1 || num_qubits > 10) {
        throw InvalidArgument("density matrix supports 1..10 qubits, got " +
                              std::to_string(num_qubits));
    }
}

void DensityMatrix::apply_gate(const Gate& g) {
    if (g.is_two_qubit()) {
        const Mat4 u = gate_unitary_2q(g);
        state_.apply_2q(u, static_cast<int>(g.q0), static_cast<int>(g.q1));
        state_.apply_2q(conj4(u), static_cast<int>(g.q0) + n_, static_cast<int>(g.q1) + n_);
    } else {
        const Mat2 u = gate_unitary_1q(g);
        state_.apply_1q(u, static_cast<int>(g.q0));
        state_.apply_1q(conj2(u), static_cast<int>(g.q0) + n_);
    }
}

void DensityMatrix::conjugate_pauli(int pauli, int q) {
    state_.apply_pauli(pauli, q);
    // The bra side takes the complex conjugate, which for Y flips the sign;
    // the sign cancels between ket and bra, so plain application is exact up
    // to that global pair of signs.
    state_.apply_pauli(pauli, q + n_);
    if (pauli == 2) {
        for (Complex& a : state_.mutable_amps()) a = -a;
        // applying Y to both sides contributes (-i)(+i) factors already; the
        // preceding flip compensates for using Y instead of conj(Y) = -Y.
    }
}

void DensityMatrix::depolarize_1q(int q, double p) {
    if (p == 0.0) return;
    const auto& amps = state_.amps();
    std::vector<Complex> acc(amps.size());
    const double keep = 1.0 - p + p / 4.0;
    for (std::size_t i = 0; i < amps.size(); ++i) acc[i] = keep * amps[i];
    const std::vector<Complex> original(amps);
    for (int pauli = 1; pauli <= 3; ++pauli) {
        std::copy(original.begin(), original.end(), state_.mutable_amps().begin());
        conjugate_pauli(pauli, q);
        const auto& rotated = state_.amps();
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += (p / 4.0) * rotated[i];
    }
    std::copy(acc.begin(), acc.end(), state_.mutable_amps().begin());
}

void DensityMatrix::depolarize_2q(int a, int b, double p) {
    if (p == 0.0) return;
    const auto& amps = state_.amps();
    std::vector<Complex> acc(amps.size());
    const double keep = 1.0 - p + p / 16.0;
    for (std::size_t i = 0; i < amps.size(); ++i) acc[i] = keep * amps[i];
    const std::vector<Complex> original(amps);
    for (int code = 1; code < 16; ++code) {
        std::copy(original.begin(), original.end(), state_.mutable_amps().begin());
        const int pa = code >> 2;
        const int pb = code & 3;
        if (pa) conjugate_pauli(pa, a);
        if (pb) conjugate_pauli(pb, b);
        const auto& rotated = state_.amps();
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += (p / 16.0) * rotated[i];
    }
    std::copy(acc.begin(), acc.end(), state_.mutable_amps().begin());
}

void DensityMatrix::dephase_z(int q) {
    const std::vector<Complex> original(state_.amps());
    conjugate_pauli(3, q);
    auto& amps = state_.mutable_amps();
    for (std::size_t i = 0; i < amps.size(); ++i) {
        amps[i] = 0.5 * (original[i] + amps[i]);
    }
}

double DensityMatrix::trace() const {
    const auto& amps = state_.amps();
    double tr = 0.0;
    for (std::size_t i = 0; i < (std::size_t{1} << n_); ++i) {
        tr += amps[i + (i << n_)].real();
    }
    return tr;
}

std::vector<double> DensityMatrix::measure_distribution(
    const std::vector<QubitId>& measured) const {
    const auto& amps = state_.amps();
    std::vector<double> probs(std::size_t{1} << measured.size(), 0.0);
    for (std::size_t i = 0; i < (std::size_t{1} << n_); ++i) {
        const double p = amps[i + (i << n_)].real();
        if (p == 0.0) continue;
        std::size_t outcome = 0;
        for (std::size_t j = 0; j < measured.size(); ++j) {
            outcome |= ((i >> measured[j]) & 1u) << j;
        }
        probs[outcome] += p;
    }
    return probs;
}

void apply_readout_to_distribution(std::vector<double>& probs,
                                   const std::vector<double>& readout) {
    for (std::size_t bit = 0; bit < readout.size(); ++bit) {
        const double r = readout[bit];
        if (r == 0.0) continue;
        const std::size_t mask = std::size_t{1} << bit;
        std::vector<double> next(probs.size());
        for (std::size_t o = 0; o < probs.size(); ++o) {
            next[o] = (1.0 - r) * probs[o] + r * probs[o ^ mask];
        }
        probs.swap(next);
    }
}

}  // namespace qpb
