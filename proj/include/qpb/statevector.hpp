#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include "qpb/circuit.hpp"

namespace qpb {

using Complex = std::complex<double>;
using Mat2 = std::array<Complex, 4>;    // row-major 2x2
using Mat4 = std::array<Complex, 16>;   // row-major 4x4, basis index = 2*bit(a) + bit(b)

/// Unitary of a single IR gate. Two-qubit gates use the (q0, q1) operand
/// order with q0 as the high basis bit.
Mat2 gate_unitary_1q(const Gate& g);
Mat4 gate_unitary_2q(const Gate& g);

/// Dense amplitude vector over little-endian qubit indices: bit q of an
/// amplitude index is the state of qubit q.
class StateVector {
public:
    explicit StateVector(int num_qubits);

    int num_qubits() const { return n_; }
    const std::vector<Complex>& amps() const { return amps_; }
    std::vector<Complex>& mutable_amps() { return amps_; }

    void reset();  // back to |0...0>
    void apply_1q(const Mat2& u, int q);
    void apply_2q(const Mat4& u, int a, int b);
    void apply_gate(const Gate& g);
    void apply_pauli(int pauli, int q);  // 1 = X, 2 = Y, 3 = Z

    double norm_sq() const;

    /// Outcome distribution over the listed qubits, marginalizing the rest.
    /// Bit j of the outcome index is the state of measured[j].
    std::vector<double> measure_distribution(const std::vector<QubitId>& measured) const;

private:
    int n_;
    std::vector<Complex> amps_;
};

/// Deterministic 64-bit stream (splitmix64). One instance per (circuit,
/// shot) keeps results independent of execution order.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next();
    double next_double();                 // uniform in [0, 1)
    std::uint64_t next_below(std::uint64_t n);

    static std::uint64_t derive(std::uint64_t master, std::uint64_t a, std::uint64_t b);

private:
    std::uint64_t state_;
};

/// Draws an index from a cumulative walk over `probs` using one uniform.
std::size_t sample_index(const std::vector<double>& probs, double u);

}  // namespace qpb
