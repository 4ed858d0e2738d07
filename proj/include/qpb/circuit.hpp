#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace qpb {

using QubitId = std::uint32_t;

enum class Axis { X, Y, Z };

enum class GateKind {
    PrepAxial,    // prepare |0>-qubit in an axial eigenstate (axis, sign)
    Hadamard,
    SGate,
    SInverse,
    CX,           // q0 = control, q1 = target
    Swap,
    BasisChange,  // rotate a measurement basis onto Z (axis or parity phase)
};

enum class BasisKind { X, Y, Z, ParityPhase };

/// One gate of the IR. Field usage depends on kind:
///   PrepAxial:   q0, axis, positive
///   BasisChange: q0, basis, phase (phase only for ParityPhase)
///   CX/Swap:     q0, q1
///   others:      q0
struct Gate {
    GateKind kind = GateKind::Hadamard;
    QubitId q0 = 0;
    QubitId q1 = 0;
    Axis axis = Axis::Z;
    bool positive = true;
    BasisKind basis = BasisKind::Z;
    double phase = 0.0;

    bool operator==(const Gate&) const = default;

    bool is_two_qubit() const { return kind == GateKind::CX || kind == GateKind::Swap; }
};

Gate prep_axial(QubitId q, Axis axis, bool positive);
Gate hadamard(QubitId q);
Gate s_gate(QubitId q);
Gate s_inverse(QubitId q);
Gate cx(QubitId control, QubitId target);
Gate swap_gate(QubitId a, QubitId b);
Gate basis_change(QubitId q, BasisKind basis);
Gate parity_phase(QubitId q, double phase);

/// Free-form labels carried through execution into the results log.
struct CircuitMeta {
    std::string protocol;
    std::string path_id;
    std::string setting;

    bool operator==(const CircuitMeta&) const = default;
};

/// Immutable-by-convention gate list. All mutating operations return a new
/// value; equality is structural.
struct Circuit {
    std::vector<Gate> gates;
    std::vector<QubitId> measured;
    CircuitMeta meta;
    // When set, gate operands are validated against this qubit count.
    std::optional<std::uint32_t> device_qubits;

    bool operator==(const Circuit& other) const {
        return gates == other.gates && measured == other.measured && meta == other.meta;
    }

    std::size_t num_two_qubit_gates() const;
    std::size_t num_swaps() const;
    /// Distinct qubits referenced by gates or the measurement list, ascending.
    std::vector<QubitId> touched_qubits() const;
};

/// Returns `circuit` with `gate` appended; the input is left untouched.
/// Throws InvalidArgument on out-of-range or duplicate operands.
Circuit append_gate(const Circuit& circuit, const Gate& gate);

struct CompactCircuit {
    Circuit circuit;                                   // indices 0..k-1
    std::vector<QubitId> dense_to_device;              // dense index -> original id
    std::unordered_map<QubitId, QubitId> device_to_dense;
};

/// Relabels the touched qubits onto 0..k-1 preserving ascending id order.
CompactCircuit remap_to_compact(const Circuit& circuit);

/// Replaces every SWAP(a,b) with CX(a,b) CX(b,a) CX(a,b); unitary-preserving.
Circuit swap_decompose(const Circuit& circuit);

}  // namespace qpb
