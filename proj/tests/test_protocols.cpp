#include "qpb/protocols.hpp"

#include <gtest/gtest.h>

#include <map>
#include <set>

#include "qpb/backend.hpp"
#include "qpb/errors.hpp"
#include "qpb/fidelity.hpp"
#include "qpb/topology.hpp"

using namespace qpb;

namespace {

std::string device_path(const std::string& name) {
    return std::string(QPB_SOURCE_DIR) + "/devices/" + name;
}

DeviceTopology ion_device() {
    return load_device_file(device_path("ibex-like.json"));
}

// Composite estimate of one instance from exact oracle distributions.
double oracle_fidelity(const ProtocolInstance& inst, const DeviceTopology& dev,
                       const NoiseModel& noise) {
    std::map<std::string, CountsTable> by_setting;
    for (const Circuit& c : circuits_for_instance(inst)) {
        const auto probs = oracle_distribution(c, dev, noise);
        CountsTable table;
        table.num_bits = c.measured.size();
        for (std::size_t o = 0; o < probs.size(); ++o) {
            std::string bits(table.num_bits, '0');
            for (std::size_t b = 0; b < table.num_bits; ++b) {
                if ((o >> b) & 1u) bits[b] = '1';
            }
            const auto n = static_cast<std::uint64_t>(probs[o] * 1e12 + 0.5);
            if (n) table.add(bits, n);
        }
        by_setting[c.meta.setting] = table;
    }
    return estimate_instance_fidelity(inst.id, by_setting).value;
}

}  // namespace

TEST(Thresholds, ClassicalLimits) {
    EXPECT_EQ(threshold_for({ProtocolKind::Transmit, {}}), 2.0 / 3.0);
    EXPECT_EQ(threshold_for({ProtocolKind::DoNothing, {}}), 2.0 / 3.0);
    EXPECT_EQ(threshold_for({ProtocolKind::BellTransfer, {}}), 0.5);
    EXPECT_EQ(threshold_for({ProtocolKind::GenTransmit, {2, 0}}), 4.0 / 9.0);
    EXPECT_EQ(threshold_for({ProtocolKind::GenTransmit, {3, 0}}), 8.0 / 27.0);
    EXPECT_EQ(threshold_for({ProtocolKind::GenDoNothing, {2, 0}}), 4.0 / 9.0);
    EXPECT_EQ(threshold_for({ProtocolKind::GenDoNothing, {3, 0}}), 8.0 / 27.0);
    EXPECT_EQ(threshold_for({ProtocolKind::CatState, {3, 2}}), 0.5);
}

TEST(Protocols, NamesRoundTrip) {
    for (const char* name : {"transmit", "do_nothing", "bell_transfer", "gen_transmit_m2",
                             "gen_transmit_m3", "gen_do_nothing_m2", "gen_do_nothing_m3",
                             "cat_state_m3_j2", "cat_state_m4_j2"}) {
        EXPECT_EQ(protocol_name(protocol_from_name(name)), name);
    }
    EXPECT_THROW(protocol_from_name("gen_transmit_m5"), ConfigError);
    EXPECT_THROW(protocol_from_name("cat_state_m3_j1"), ConfigError);
    EXPECT_THROW(protocol_from_name("teleport"), ConfigError);
}

TEST(Protocols, SettingCounts) {
    EXPECT_EQ(settings_for({ProtocolKind::Transmit, {}}).size(), 6u);
    EXPECT_EQ(settings_for({ProtocolKind::GenTransmit, {3, 0}}).size(), 6u);
    EXPECT_EQ(settings_for({ProtocolKind::BellTransfer, {}}).size(), 3u);
    EXPECT_EQ(settings_for({ProtocolKind::CatState, {3, 2}}).size(), 4u);
    EXPECT_EQ(settings_for({ProtocolKind::CatState, {4, 2}}).size(), 5u);
}

TEST(BuildTransmit, AdjacentPairStructure) {
    const Circuit c = build_transmit(QubitPath{{0, 1}, PathStage::AL}, {Axis::Z, true});
    ASSERT_EQ(c.gates.size(), 3u);
    EXPECT_EQ(c.gates[0].kind, GateKind::PrepAxial);
    EXPECT_EQ(c.gates[1], swap_gate(0, 1));
    EXPECT_EQ(c.gates[2].kind, GateKind::BasisChange);
    EXPECT_EQ(c.measured, (std::vector<QubitId>{1}));
}

TEST(BuildTransmit, CornerPathUsesSixSwaps) {
    const QubitPath path{{2, 3, 4, 5, 6, 17, 26}, PathStage::C2C};
    const Circuit c = build_transmit(path, {Axis::X, false});
    EXPECT_EQ(c.num_swaps(), 6u);
    EXPECT_EQ(c.measured, (std::vector<QubitId>{26}));
}

TEST(BuildTransmit, RejectsDegeneratePath) {
    EXPECT_THROW(build_transmit(QubitPath{{3}, PathStage::AL}, {Axis::Z, true}),
                 InvalidArgument);
    EXPECT_THROW(build_transmit(QubitPath{{}, PathStage::AL}, {Axis::Z, true}),
                 InvalidArgument);
}

TEST(BuildDoNothing, ThereAndBack) {
    const Circuit c = build_do_nothing(QubitPath{{0, 1}, PathStage::AL}, {Axis::Z, true});
    EXPECT_EQ(c.num_swaps(), 2u);
    EXPECT_EQ(c.measured, (std::vector<QubitId>{0}));
    const QubitPath c2c{{2, 3, 4, 5, 6, 17, 26}, PathStage::C2C};
    EXPECT_EQ(build_do_nothing(c2c, {Axis::Y, true}).num_swaps(), 12u);
}

TEST(Builders, SwapCountMatchesSwapDistance) {
    const DeviceTopology dev = load_device_file(device_path("heron-like.json"));
    const auto rects = partition_rectangles(dev);
    for (const QubitPath& p : enumerate_paths(rects[0], PathStage::AL)) {
        const int d = swap_distance(dev, p.qubits.front(), p.qubits.back(), &p);
        EXPECT_EQ(build_transmit(p, {Axis::Z, true}).num_swaps(), static_cast<std::size_t>(d));
        EXPECT_EQ(build_do_nothing(p, {Axis::Z, true}).num_swaps(),
                  static_cast<std::size_t>(2 * d));
    }
}

TEST(Builders, PureFunctions) {
    const QubitPath p{{0, 1, 2}, PathStage::AL};
    EXPECT_EQ(build_transmit(p, {Axis::Y, false}), build_transmit(p, {Axis::Y, false}));
    const auto inst = lattice_instance({ProtocolKind::CatState, {3, 2}},
                                       QubitPath{{0, 1, 2, 3, 4, 5, 6}, PathStage::ML}, 1);
    ASSERT_TRUE(inst);
    EXPECT_EQ(circuits_for_instance(*inst), circuits_for_instance(*inst));
}

TEST(BuildBell, NoiselessPerfectCorrelations) {
    const DeviceTopology dev = ion_device();
    const auto inst = ion_instance_from_flat({ProtocolKind::BellTransfer, {}}, {0, 1, 2, 3});
    EXPECT_NEAR(oracle_fidelity(inst, dev, NoiseModel{}), 1.0, 1e-12);
}

TEST(BuildBell, UniformCountsGiveQuarter) {
    std::map<std::string, CountsTable> uniform;
    for (const char* s : {"xx", "yy", "zz"}) {
        CountsTable t;
        t.num_bits = 2;
        for (const char* bits : {"00", "01", "10", "11"}) t.add(bits, 250);
        uniform[s] = t;
    }
    EXPECT_DOUBLE_EQ(estimate_bell_fidelity(uniform).value, 0.25);
}

TEST(BuildBell, RejectsBadCamps) {
    EXPECT_THROW(build_bell_transfer({0, 0}, {2, 3}, {{{0, 2}}, {{0, 3}}}, BellSetting::ZZ),
                 InvalidArgument);
    // routes must end at Bob's camp
    EXPECT_THROW(build_bell_transfer({0, 1}, {2, 3}, {{{1, 4}}, {{0, 2}}}, BellSetting::ZZ),
                 InvalidArgument);
}

TEST(GenTransmit, NoiselessJointSuccess) {
    const DeviceTopology dev = ion_device();
    const auto inst = ion_instance_from_flat({ProtocolKind::GenTransmit, {2, 0}}, {0, 1, 2, 3});
    EXPECT_NEAR(oracle_fidelity(inst, dev, NoiseModel{}), 1.0, 1e-12);
}

TEST(GenTransmit, DepolarizedRouteFactorizes) {
    const DeviceTopology dev = ion_device();
    NoiseModel kill_one;
    kill_one.p2_overrides[{0, 2}] = 1.0;  // the 0 -> 2 route is fully mixed

    const auto joint = ion_instance_from_flat({ProtocolKind::GenTransmit, {2, 0}},
                                              {0, 1, 2, 3});
    const double f_joint = oracle_fidelity(joint, dev, kill_one);

    const auto other = ion_instance_from_flat({ProtocolKind::Transmit, {}}, {1, 3});
    const double f_other = oracle_fidelity(other, dev, kill_one);
    EXPECT_NEAR(f_joint, 0.5 * f_other, 1e-9);
}

TEST(GenTransmit, AllToAllUsesOneSwapPerWorkQubit) {
    const auto inst = ion_instance_from_flat({ProtocolKind::GenTransmit, {3, 0}},
                                             {0, 1, 2, 3, 4, 5});
    const auto circuits = circuits_for_instance(inst);
    EXPECT_EQ(circuits[0].num_swaps(), 3u);
}

TEST(GenDoNothing, TwiceTheSwaps) {
    const auto inst = ion_instance_from_flat({ProtocolKind::GenDoNothing, {3, 0}},
                                             {0, 1, 2, 3, 4, 5});
    EXPECT_EQ(circuits_for_instance(inst)[0].num_swaps(), 6u);
    const DeviceTopology dev = ion_device();
    EXPECT_NEAR(oracle_fidelity(inst, dev, NoiseModel{}), 1.0, 1e-12);
}

TEST(CatState, NoiselessPopulationsAndFidelity) {
    const DeviceTopology dev = ion_device();
    const auto inst = ion_instance_from_flat({ProtocolKind::CatState, {3, 2}},
                                             {0, 1, 2, 3, 4});
    const auto circuits = circuits_for_instance(inst);
    ASSERT_EQ(circuits.size(), 4u);
    const auto pop = oracle_distribution(circuits[0], dev, NoiseModel{});
    EXPECT_NEAR(pop.front() + pop.back(), 1.0, 1e-12);
    EXPECT_NEAR(oracle_fidelity(inst, dev, NoiseModel{}), 1.0, 1e-12);
}

TEST(CatState, FourQubitNoiselessFidelity) {
    const DeviceTopology dev = ion_device();
    const auto inst = ion_instance_from_flat({ProtocolKind::CatState, {4, 2}},
                                             {0, 1, 2, 3, 4, 5});
    EXPECT_NEAR(oracle_fidelity(inst, dev, NoiseModel{}), 1.0, 1e-12);
}

TEST(CatState, FullyMixedGivesEighth) {
    std::map<std::string, CountsTable> uniform;
    for (const std::string s : {"pop", "par0", "par1", "par2"}) {
        CountsTable t;
        t.num_bits = 3;
        for (int o = 0; o < 8; ++o) {
            std::string bits(3, '0');
            for (int b = 0; b < 3; ++b)
                if ((o >> b) & 1) bits[b] = '1';
            t.add(bits, 125);
        }
        uniform[s] = t;
    }
    EXPECT_DOUBLE_EQ(estimate_ghz_fidelity(uniform, 3).value, 0.125);
}

TEST(LatticeInstances, UsablePathCountsPerStage) {
    const DeviceTopology dev = load_device_file(device_path("heron-like.json"));
    const auto rects = partition_rectangles(dev);
    const auto al = enumerate_paths(rects[0], PathStage::AL);

    auto usable = [&](ProtocolId id) {
        int n = 0;
        for (const QubitPath& p : al) {
            if (lattice_instance(id, p, 1)) ++n;
        }
        return n;
    };
    EXPECT_EQ(usable({ProtocolKind::Transmit, {}}), 144);
    EXPECT_EQ(usable({ProtocolKind::DoNothing, {}}), 144);
    EXPECT_EQ(usable({ProtocolKind::BellTransfer, {}}), 96);     // needs 4 qubits
    EXPECT_EQ(usable({ProtocolKind::GenTransmit, {2, 0}}), 96);  // needs 4
    EXPECT_EQ(usable({ProtocolKind::GenTransmit, {3, 0}}), 48);  // needs 6
    EXPECT_EQ(usable({ProtocolKind::GenDoNothing, {2, 0}}), 120);  // needs 3
    EXPECT_EQ(usable({ProtocolKind::GenDoNothing, {3, 0}}), 96);   // needs 4
    EXPECT_EQ(usable({ProtocolKind::CatState, {3, 2}}), 72);     // needs 5
    EXPECT_EQ(usable({ProtocolKind::CatState, {4, 2}}), 48);     // needs 6
}

TEST(LatticeInstances, EveryStagePathBuildsCleanCircuits) {
    const DeviceTopology dev = load_device_file(device_path("eagle-like.json"));
    const auto rects = partition_rectangles(dev);
    const std::vector<ProtocolId> ids = {
        {ProtocolKind::Transmit, {}},          {ProtocolKind::DoNothing, {}},
        {ProtocolKind::BellTransfer, {}},      {ProtocolKind::GenTransmit, {2, 0}},
        {ProtocolKind::GenTransmit, {3, 0}},   {ProtocolKind::GenDoNothing, {2, 0}},
        {ProtocolKind::GenDoNothing, {3, 0}},  {ProtocolKind::CatState, {3, 2}},
        {ProtocolKind::CatState, {4, 2}},
    };
    for (PathStage stage : {PathStage::C2C, PathStage::ML, PathStage::AL}) {
        for (const QubitPath& p : enumerate_paths(rects[3], stage)) {
            for (const ProtocolId& id : ids) {
                const auto inst = lattice_instance(id, p, rects[3].index);
                if (!inst) continue;
                // circuits build without collisions and touch only path qubits
                for (const Circuit& c : circuits_for_instance(*inst)) {
                    for (QubitId q : c.touched_qubits()) {
                        EXPECT_NE(std::find(p.qubits.begin(), p.qubits.end(), q),
                                  p.qubits.end());
                    }
                    EXPECT_EQ(c.measured.size(),
                              static_cast<std::size_t>(id.work_qubits()));
                }
            }
        }
    }
}

TEST(IonInstances, PairAndCampEnumeration) {
    std::vector<QubitId> all12;
    for (QubitId q = 0; q < 12; ++q) all12.push_back(q);
    EXPECT_EQ(ion_pair_instances({ProtocolKind::Transmit, {}}, all12).size(), 132u);
    EXPECT_EQ(ion_pair_instances({ProtocolKind::DoNothing, {}}, all12).size(), 132u);

    std::vector<QubitId> eight = {1, 2, 3, 4, 6, 7, 9, 10};
    EXPECT_EQ(ion_camp_instances({ProtocolKind::BellTransfer, {}}, eight, 0).size(),
              28u * 15u);
    EXPECT_EQ(ion_camp_instances({ProtocolKind::BellTransfer, {}}, eight, 1).size(), 28u);
    EXPECT_EQ(ion_camp_instances({ProtocolKind::GenTransmit, {3, 0}}, eight, 0).size(),
              56u * 10u);
    EXPECT_EQ(ion_camp_instances({ProtocolKind::GenDoNothing, {2, 0}}, eight, 2).size(),
              28u * 2u);
}

TEST(IonInstances, CampsAreDisjointAndSorted) {
    std::vector<QubitId> qubits = {0, 1, 2, 3, 4, 5};
    for (const auto& inst :
         ion_camp_instances({ProtocolKind::GenTransmit, {2, 0}}, qubits, 0)) {
        std::set<QubitId> seen;
        for (const auto& r : inst.routes) {
            for (QubitId q : r) EXPECT_TRUE(seen.insert(q).second);
        }
        EXPECT_TRUE(std::is_sorted(inst.measured_camp.begin(), inst.measured_camp.end()));
    }
}

TEST(Instances, PathIdRoundTripsThroughFlatLayout) {
    const auto inst = ion_instance_from_flat({ProtocolKind::CatState, {3, 2}},
                                             {1, 4, 7, 2, 9});
    EXPECT_EQ(inst.path_id, "1-4-7>2-9");
    EXPECT_EQ(path_id_from_flat(inst.id, inst.flat_path), inst.path_id);

    const auto bell = ion_instance_from_flat({ProtocolKind::BellTransfer, {}}, {0, 1, 2, 3});
    EXPECT_EQ(bell.path_id, "0-1>2-3");
}
