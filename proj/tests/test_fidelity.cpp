#include "qpb/fidelity.hpp"

#include <gtest/gtest.h>

#include <random>

#include "qpb/backend.hpp"
#include "qpb/errors.hpp"
#include "qpb/topology.hpp"
#include "support/test_oracles.hpp"

using namespace qpb;

namespace {

CountsTable single_bit_counts(std::uint64_t zeros, std::uint64_t ones) {
    CountsTable t;
    t.num_bits = 1;
    if (zeros) t.add("0", zeros);
    if (ones) t.add("1", ones);
    return t;
}

FidelityRecord make_record(ProtocolId id, std::vector<QubitId> camp,
                           std::vector<QubitId> touched, double fidelity, int rectangle = 0) {
    FidelityRecord r;
    r.id = id;
    r.stage = "test";
    r.camp = std::move(camp);
    r.touched = std::move(touched);
    r.rectangle = rectangle;
    r.fidelity = fidelity;
    r.stderr_ = 0.01;
    r.shots = 100;
    return r;
}

}  // namespace

TEST(StateFidelity, MatchFractions) {
    EXPECT_DOUBLE_EQ(estimate_state_fidelity(single_bit_counts(1000, 0), {Axis::Z, true}),
                     1.0);
    EXPECT_DOUBLE_EQ(estimate_state_fidelity(single_bit_counts(500, 500), {Axis::Z, true}),
                     0.5);
    EXPECT_DOUBLE_EQ(estimate_state_fidelity(single_bit_counts(100, 900), {Axis::X, false}),
                     0.9);
    EXPECT_THROW(estimate_state_fidelity(CountsTable{}, {Axis::Z, true}), InvalidArgument);
}

TEST(StateFidelity, InterceptResendAveragesToTwoThirds) {
    EXPECT_NEAR(qpb::testing::intercept_resend_average_fidelity(), 2.0 / 3.0, 1e-9);
}

TEST(BellFidelity, IdealAndDegenerate) {
    std::map<std::string, CountsTable> ideal;
    CountsTable even, odd;
    even.num_bits = odd.num_bits = 2;
    even.add("00", 500);
    even.add("11", 500);
    odd.add("01", 500);
    odd.add("10", 500);
    ideal["xx"] = even;
    ideal["yy"] = odd;
    ideal["zz"] = even;
    EXPECT_DOUBLE_EQ(estimate_bell_fidelity(ideal).value, 1.0);

    ideal.erase("yy");
    EXPECT_THROW(estimate_bell_fidelity(ideal), InvalidArgument);
}

TEST(BellFidelity, ClampsAndFlags) {
    std::map<std::string, CountsTable> weird;
    CountsTable even, odd;
    even.num_bits = odd.num_bits = 2;
    even.add("00", 1000);
    odd.add("01", 1000);
    // xx = +1, yy = +1, zz = -1 -> raw (1 + 1 - 1 - 1)/4 = 0, in range
    weird["xx"] = even;
    weird["yy"] = even;
    weird["zz"] = odd;
    const FidelityValue v = estimate_bell_fidelity(weird);
    EXPECT_DOUBLE_EQ(v.value, 0.0);
    EXPECT_FALSE(v.clamped);
}

TEST(GhzFidelity, IdealThreeQubitStatistics) {
    std::map<std::string, CountsTable> ideal;
    CountsTable pop;
    pop.num_bits = 3;
    pop.add("000", 500);
    pop.add("111", 500);
    ideal["pop"] = pop;
    // <parity(phi_k)> = cos(3 phi_k) = +1, -1, +1 for k = 0, 1, 2
    CountsTable plus, minus;
    plus.num_bits = minus.num_bits = 3;
    plus.add("000", 1000);
    minus.add("100", 1000);
    ideal["par0"] = plus;
    ideal["par1"] = minus;
    ideal["par2"] = plus;
    EXPECT_DOUBLE_EQ(estimate_ghz_fidelity(ideal, 3).value, 1.0);

    ideal.erase("par2");
    EXPECT_THROW(estimate_ghz_fidelity(ideal, 3), InvalidArgument);
}

TEST(GhzFidelity, IdealFourQubitOracle) {
    const DeviceTopology dev =
        load_device(R"({"name":"t","num_qubits":6,"connectivity":"all_to_all"})");
    const auto inst = ion_instance_from_flat({ProtocolKind::CatState, {4, 2}},
                                             {0, 1, 2, 3, 4, 5});
    std::map<std::string, CountsTable> by_setting;
    for (const Circuit& c : circuits_for_instance(inst)) {
        const auto probs = oracle_distribution(c, dev, NoiseModel{});
        CountsTable t;
        t.num_bits = c.measured.size();
        for (std::size_t o = 0; o < probs.size(); ++o) {
            const auto n = static_cast<std::uint64_t>(probs[o] * 1e12 + 0.5);
            if (!n) continue;
            std::string bits(t.num_bits, '0');
            for (std::size_t b = 0; b < t.num_bits; ++b)
                if ((o >> b) & 1u) bits[b] = '1';
            t.add(bits, n);
        }
        by_setting[c.meta.setting] = t;
    }
    EXPECT_EQ(by_setting.size(), 5u);
    EXPECT_NEAR(estimate_ghz_fidelity(by_setting, 4).value, 1.0, 1e-9);
}

TEST(Aggregate, GroupsByKeyKinds) {
    const ProtocolId transmit{ProtocolKind::Transmit, {}};
    std::vector<FidelityRecord> records;
    for (QubitId sender = 0; sender < 12; ++sender) {
        if (sender == 3) continue;
        records.push_back(make_record(transmit, {3}, {sender, 3}, 0.9 - sender * 0.01));
    }
    const auto estimates = aggregate(records, AggregationKey::Kind::Qubit);
    ASSERT_EQ(estimates.size(), 1u);
    EXPECT_EQ(estimates[0].key.text(), "q3");
    EXPECT_EQ(estimates[0].n_circuits, 11u);
    EXPECT_DOUBLE_EQ(estimates[0].max, 0.9);
    EXPECT_DOUBLE_EQ(estimates[0].min, 0.9 - 11 * 0.01);
}

TEST(Aggregate, CampKeysAreCanonical) {
    const ProtocolId bell{ProtocolKind::BellTransfer, {}};
    std::vector<FidelityRecord> records;
    records.push_back(make_record(bell, {1, 2}, {0, 1, 2, 3}, 0.8));
    records.push_back(make_record(bell, {2, 1}, {4, 5, 1, 2}, 0.6));
    const auto estimates = aggregate(records, AggregationKey::Kind::Camp);
    ASSERT_EQ(estimates.size(), 1u);
    EXPECT_EQ(estimates[0].key.text(), "{1,2}");
    EXPECT_EQ(estimates[0].n_circuits, 2u);
}

TEST(Aggregate, RectangleGrouping) {
    const ProtocolId transmit{ProtocolKind::Transmit, {}};
    std::vector<FidelityRecord> records;
    for (int i = 0; i < 144; ++i) {
        records.push_back(make_record(transmit, {1}, {1, 2}, 0.7 + (i % 5) * 0.001, 7));
    }
    const auto estimates = aggregate(records, AggregationKey::Kind::Rectangle);
    ASSERT_EQ(estimates.size(), 1u);
    EXPECT_EQ(estimates[0].key.text(), "r7");
    EXPECT_EQ(estimates[0].n_circuits, 144u);
}

TEST(Aggregate, PermutationInvariant) {
    const ProtocolId transmit{ProtocolKind::Transmit, {}};
    std::vector<FidelityRecord> records;
    std::mt19937 rng(3);
    for (int i = 0; i < 50; ++i) {
        records.push_back(make_record(transmit, {static_cast<QubitId>(i % 5)},
                                      {static_cast<QubitId>(i % 5)},
                                      0.5 + (i % 17) * 0.02));
    }
    auto shuffled = records;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto a = aggregate(records, AggregationKey::Kind::Qubit);
    const auto b = aggregate(shuffled, AggregationKey::Kind::Qubit);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].key.text(), b[i].key.text());
        EXPECT_DOUBLE_EQ(a[i].mean, b[i].mean);
        EXPECT_DOUBLE_EQ(a[i].min, b[i].min);
    }
    EXPECT_THROW(aggregate({}, AggregationKey::Kind::Qubit), InvalidArgument);
}

TEST(StagePass, InclusiveBoundary) {
    FidelityEstimate e;
    e.key = AggregationKey::per_qubit(0);
    e.min = 0.75;
    EXPECT_TRUE(stage_pass({e}, 2.0 / 3.0)[0].second);
    e.min = 0.5;
    EXPECT_TRUE(stage_pass({e}, 0.5)[0].second);  // exactly at threshold passes
    e.min = 0.6660;
    EXPECT_FALSE(stage_pass({e}, 2.0 / 3.0)[0].second);
}

TEST(StagePass, MonotoneInThreshold) {
    std::vector<FidelityEstimate> estimates;
    for (int i = 0; i < 20; ++i) {
        FidelityEstimate e;
        e.key = AggregationKey::per_qubit(i);
        e.min = 0.3 + i * 0.03;
        estimates.push_back(e);
    }
    int previous_passes = 1 << 30;
    for (double t = 0.0; t <= 1.0; t += 0.05) {
        const auto result = stage_pass(estimates, t);
        int passes = 0;
        for (const auto& [k, ok] : result) passes += ok;
        EXPECT_LE(passes, previous_passes);
        previous_passes = passes;
    }
}

// The estimator's mean should sit within 3 standard errors of the exact
// oracle value in nearly every seeded trial.
TEST(Estimators, WithinThreeSigmaOfOracle) {
    const DeviceTopology dev =
        load_device(R"({"name":"t","num_qubits":2,"connectivity":"all_to_all"})");
    NoiseModel noise;
    noise.p1_default = 0.01;
    noise.p2_default = 0.06;
    noise.readout_default = 0.02;

    const ProtocolId transmit{ProtocolKind::Transmit, {}};
    const auto inst = ion_instance_from_flat(transmit, {0, 1});

    // exact composite fidelity
    std::map<std::string, CountsTable> exact;
    std::vector<Circuit> circuits = circuits_for_instance(inst);
    for (const Circuit& c : circuits) {
        const auto probs = oracle_distribution(c, dev, noise);
        CountsTable t;
        t.num_bits = 1;
        t.add("0", static_cast<std::uint64_t>(probs[0] * 1e12 + 0.5));
        t.add("1", static_cast<std::uint64_t>(probs[1] * 1e12 + 0.5));
        exact[c.meta.setting] = t;
    }
    const double truth = estimate_instance_fidelity(transmit, exact).value;

    SimulatorBackend backend;
    int within = 0;
    const int trials = 200;
    for (int trial = 0; trial < trials; ++trial) {
        ExecutionRequest req;
        req.device = &dev;
        req.circuits = circuits;
        req.shots = 1024;
        req.master_seed = 1000 + trial;
        req.noise = noise;
        const auto counts = backend.execute(req);
        std::map<std::string, CountsTable> by_setting;
        for (std::size_t i = 0; i < counts.size(); ++i) {
            by_setting[circuits[i].meta.setting] = counts[i];
        }
        const FidelityValue v = estimate_instance_fidelity(transmit, by_setting);
        if (std::abs(v.value - truth) <= 3.0 * v.stderr_) ++within;
    }
    EXPECT_GE(within, trials * 99 / 100);
}
