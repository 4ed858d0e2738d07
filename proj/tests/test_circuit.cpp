#include "qpb/circuit.hpp"

#include <gtest/gtest.h>

#include <complex>

#include "qpb/errors.hpp"
#include "qpb/density.hpp"
#include "qpb/results_log.hpp"
#include "qpb/statevector.hpp"
#include "support/test_oracles.hpp"

using namespace qpb;

TEST(Circuit, AppendReturnsNewValue) {
    Circuit empty;
    Circuit one = append_gate(empty, swap_gate(0, 1));
    EXPECT_EQ(empty.gates.size(), 0u);
    ASSERT_EQ(one.gates.size(), 1u);
    EXPECT_EQ(one.gates[0].kind, GateKind::Swap);
}

TEST(Circuit, DuplicateOperandsRejected) {
    Circuit c;
    EXPECT_THROW(append_gate(c, cx(2, 2)), InvalidArgument);
    EXPECT_THROW(append_gate(c, swap_gate(5, 5)), InvalidArgument);
}

TEST(Circuit, BoundDeviceRangeChecked) {
    Circuit c;
    c.device_qubits = 3;
    EXPECT_NO_THROW(append_gate(c, cx(0, 2)));
    EXPECT_THROW(append_gate(c, hadamard(3)), InvalidArgument);
    EXPECT_THROW(append_gate(c, cx(0, 7)), InvalidArgument);
}

TEST(Circuit, SwapChainAlongSevenQubitPath) {
    Circuit c;
    for (QubitId q = 0; q + 1 < 7; ++q) c = append_gate(c, swap_gate(q, q + 1));
    EXPECT_EQ(c.gates.size(), 6u);
    EXPECT_EQ(c.num_swaps(), 6u);
}

TEST(Circuit, StructuralEquality) {
    Circuit a = append_gate({}, hadamard(0));
    Circuit b = append_gate({}, hadamard(0));
    EXPECT_EQ(a, b);
    b = append_gate(b, s_gate(0));
    EXPECT_FALSE(a == b);
}

TEST(RemapToCompact, RelabelsPreservingOrder) {
    Circuit c;
    c = append_gate(c, hadamard(3));
    c = append_gate(c, cx(3, 23));
    c = append_gate(c, swap_gate(23, 27));
    c.measured = {27};
    const CompactCircuit compact = remap_to_compact(c);
    EXPECT_EQ(compact.dense_to_device, (std::vector<QubitId>{3, 23, 27}));
    EXPECT_EQ(compact.device_to_dense.at(3), 0u);
    EXPECT_EQ(compact.device_to_dense.at(23), 1u);
    EXPECT_EQ(compact.device_to_dense.at(27), 2u);
    EXPECT_EQ(compact.circuit.gates[1].q0, 0u);
    EXPECT_EQ(compact.circuit.gates[1].q1, 1u);
    EXPECT_EQ(compact.circuit.measured, (std::vector<QubitId>{2}));
}

TEST(RemapToCompact, AlreadyCompactIsIdentity) {
    Circuit c;
    c = append_gate(c, cx(0, 1));
    c.measured = {0, 1};
    const CompactCircuit compact = remap_to_compact(c);
    EXPECT_EQ(compact.circuit.gates, c.gates);
    EXPECT_EQ(compact.dense_to_device, (std::vector<QubitId>{0, 1}));
}

TEST(SwapDecompose, ExpandsToThreeCx) {
    Circuit c = append_gate({}, swap_gate(0, 1));
    const Circuit lowered = swap_decompose(c);
    ASSERT_EQ(lowered.gates.size(), 3u);
    EXPECT_EQ(lowered.gates[0], cx(0, 1));
    EXPECT_EQ(lowered.gates[1], cx(1, 0));
    EXPECT_EQ(lowered.gates[2], cx(0, 1));
}

TEST(SwapDecompose, NoSwapsUnchanged) {
    Circuit c = append_gate({}, hadamard(0));
    c = append_gate(c, cx(0, 1));
    EXPECT_EQ(swap_decompose(c).gates, c.gates);
}

TEST(SwapDecompose, SixSwapsBecomeEighteenCx) {
    Circuit c;
    for (QubitId q = 0; q + 1 < 7; ++q) c = append_gate(c, swap_gate(q, q + 1));
    EXPECT_EQ(swap_decompose(c).gates.size(), 18u);
}

TEST(SwapDecompose, PreservesUnitaryAction) {
    // Several small circuits with assorted prep prefixes: amplitudes must
    // agree exactly between the swap form and the CX decomposition.
    std::vector<Circuit> corpus;
    {
        Circuit c;
        c = append_gate(c, hadamard(0));
        c = append_gate(c, cx(0, 1));
        c = append_gate(c, swap_gate(1, 2));
        c = append_gate(c, swap_gate(2, 3));
        corpus.push_back(c);
    }
    {
        Circuit c;
        c = append_gate(c, prep_axial(0, Axis::Y, false));
        c = append_gate(c, swap_gate(0, 1));
        c = append_gate(c, s_gate(1));
        c = append_gate(c, swap_gate(1, 0));
        corpus.push_back(c);
    }
    for (const Circuit& c : corpus) {
        for (Axis axis : {Axis::X, Axis::Y, Axis::Z}) {
            Circuit with_prep;
            with_prep = append_gate(with_prep, prep_axial(3, axis, true));
            for (const Gate& g : c.gates) with_prep = append_gate(with_prep, g);
            const auto a = qpb::testing::evolve(with_prep, 4).amps();
            const auto b = qpb::testing::evolve(swap_decompose(with_prep), 4).amps();
            for (std::size_t i = 0; i < a.size(); ++i) {
                EXPECT_NEAR(std::abs(a[i] - b[i]), 0.0, 1e-12);
            }
        }
    }
}

TEST(RemapToCompact, SimulateThenMarginalizeCommutes) {
    // Evolving the compact register must give the same measured-qubit
    // distribution as evolving the whole device and tracing out the rest.
    Circuit c;
    c = append_gate(c, prep_axial(1, Axis::X, true));
    c = append_gate(c, hadamard(3));
    c = append_gate(c, cx(3, 1));
    c = append_gate(c, swap_gate(1, 3));
    c.measured = {3, 1};

    qpb::DensityMatrix full(4);
    for (const Gate& g : c.gates) full.apply_gate(g);
    const auto direct = full.measure_distribution(c.measured);

    const CompactCircuit compact = remap_to_compact(c);
    qpb::DensityMatrix small(static_cast<int>(compact.dense_to_device.size()));
    for (const Gate& g : compact.circuit.gates) small.apply_gate(g);
    const auto remapped = small.measure_distribution(compact.circuit.measured);

    ASSERT_EQ(direct.size(), remapped.size());
    for (std::size_t o = 0; o < direct.size(); ++o) {
        EXPECT_NEAR(direct[o], remapped[o], 1e-12);
    }
}

TEST(CircuitJson, RoundTrip) {
    Circuit c;
    c = append_gate(c, prep_axial(2, Axis::X, false));
    c = append_gate(c, swap_gate(2, 5));
    c = append_gate(c, parity_phase(5, 1.0471975511965976));
    c.measured = {5};
    c.meta = {"transmit@al#1", "2-5", "x-"};
    const Circuit back = circuit_from_json(circuit_to_json(c));
    EXPECT_EQ(back, c);
}
