#include "qpb/circuit.hpp"

#include <algorithm>
#include <set>

#include "qpb/errors.hpp"

namespace qpb {

Gate prep_axial(QubitId q, Axis axis, bool positive) {
    Gate g;
    g.kind = GateKind::PrepAxial;
    g.q0 = q;
    g.axis = axis;
    g.positive = positive;
    return g;
}

Gate hadamard(QubitId q) {
    Gate g;
    g.kind = GateKind::Hadamard;
    g.q0 = q;
    return g;
}

Gate s_gate(QubitId q) {
    Gate g;
    g.kind = GateKind::SGate;
    g.q0 = q;
    return g;
}

Gate s_inverse(QubitId q) {
    Gate g;
    g.kind = GateKind::SInverse;
    g.q0 = q;
    return g;
}

Gate cx(QubitId control, QubitId target) {
    Gate g;
    g.kind = GateKind::CX;
    g.q0 = control;
    g.q1 = target;
    return g;
}

Gate swap_gate(QubitId a, QubitId b) {
    Gate g;
    g.kind = GateKind::Swap;
    g.q0 = a;
    g.q1 = b;
    return g;
}

Gate basis_change(QubitId q, BasisKind basis) {
    Gate g;
    g.kind = GateKind::BasisChange;
    g.q0 = q;
    g.basis = basis;
    return g;
}

Gate parity_phase(QubitId q, double phase) {
    Gate g;
    g.kind = GateKind::BasisChange;
    g.q0 = q;
    g.basis = BasisKind::ParityPhase;
    g.phase = phase;
    return g;
}

std::size_t Circuit::num_two_qubit_gates() const {
    return static_cast<std::size_t>(
        std::count_if(gates.begin(), gates.end(), [](const Gate& g) { return g.is_two_qubit(); }));
}

std::size_t Circuit::num_swaps() const {
    return static_cast<std::size_t>(std::count_if(
        gates.begin(), gates.end(), [](const Gate& g) { return g.kind == GateKind::Swap; }));
}

std::vector<QubitId> Circuit::touched_qubits() const {
    std::set<QubitId> touched;
    for (const Gate& g : gates) {
        touched.insert(g.q0);
        if (g.is_two_qubit()) touched.insert(g.q1);
    }
    for (QubitId q : measured) touched.insert(q);
    return {touched.begin(), touched.end()};
}

Circuit append_gate(const Circuit& circuit, const Gate& gate) {
    if (gate.is_two_qubit() && gate.q0 == gate.q1) {
        throw InvalidArgument("duplicate operands on two-qubit gate: qubit " +
                              std::to_string(gate.q0));
    }
    if (circuit.device_qubits) {
        const std::uint32_t n = *circuit.device_qubits;
        if (gate.q0 >= n || (gate.is_two_qubit() && gate.q1 >= n)) {
            throw InvalidArgument("gate operand out of range for device with " +
                                  std::to_string(n) + " qubits");
        }
    }
    Circuit out = circuit;
    out.gates.push_back(gate);
    return out;
}

CompactCircuit remap_to_compact(const Circuit& circuit) {
    CompactCircuit out;
    out.dense_to_device = circuit.touched_qubits();
    for (QubitId dense = 0; dense < out.dense_to_device.size(); ++dense) {
        out.device_to_dense[out.dense_to_device[dense]] = dense;
    }
    out.circuit.meta = circuit.meta;
    out.circuit.device_qubits = static_cast<std::uint32_t>(out.dense_to_device.size());
    out.circuit.gates.reserve(circuit.gates.size());
    for (Gate g : circuit.gates) {
        g.q0 = out.device_to_dense.at(g.q0);
        if (g.is_two_qubit()) g.q1 = out.device_to_dense.at(g.q1);
        out.circuit.gates.push_back(g);
    }
    out.circuit.measured.reserve(circuit.measured.size());
    for (QubitId q : circuit.measured) {
        out.circuit.measured.push_back(out.device_to_dense.at(q));
    }
    return out;
}

Circuit swap_decompose(const Circuit& circuit) {
    Circuit out;
    out.meta = circuit.meta;
    out.measured = circuit.measured;
    out.device_qubits = circuit.device_qubits;
    out.gates.reserve(circuit.gates.size());
    for (const Gate& g : circuit.gates) {
        if (g.kind == GateKind::Swap) {
            out.gates.push_back(cx(g.q0, g.q1));
            out.gates.push_back(cx(g.q1, g.q0));
            out.gates.push_back(cx(g.q0, g.q1));
        } else {
            out.gates.push_back(g);
        }
    }
    return out;
}

}  // namespace qpb
