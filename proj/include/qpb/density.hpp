#pragma once

#include <vector>

#include "qpb/circuit.hpp"
#include "qpb/statevector.hpp"

namespace qpb {

/// Exact density-matrix evolution for small registers. Stored as a flattened
/// 2n-qubit amplitude vector: ket bits occupy qubits 0..n-1, bra bits n..2n-1.
class DensityMatrix {
public:
    explicit DensityMatrix(int num_qubits);

    int num_qubits() const { return n_; }

    void apply_gate(const Gate& g);
    /// Standard depolarizing channel of strength p on one qubit.
    void depolarize_1q(int q, double p);
    /// Two-qubit depolarizing channel of strength p on the pair.
    void depolarize_2q(int a, int b, double p);
    /// Complete Z-basis dephasing (measure-and-reprepare in Z).
    void dephase_z(int q);

    double trace() const;

    /// Exact outcome distribution over the listed qubits.
    std::vector<double> measure_distribution(const std::vector<QubitId>& measured) const;

private:
    void conjugate_pauli(int pauli, int q);  // P rho P^dagger into the state

    int n_;
    StateVector state_;  // 2n-qubit flattening
};

/// Applies independent symmetric bit flips to an outcome distribution;
/// readout[j] is the flip probability of bit j.
void apply_readout_to_distribution(std::vector<double>& probs,
                                   const std::vector<double>& readout);

}  // namespace qpb
