#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qpb/counts.hpp"
#include "qpb/protocols.hpp"

namespace qpb {

struct FidelityValue {
    double value = 0.0;
    double stderr_ = 0.0;
    bool clamped = false;  // raw estimate fell outside [0, 1]
};

/// Fraction of shots whose every measured bit matches the prepared axial
/// eigenstate; equals state fidelity for product-basis measurement.
double estimate_state_fidelity(const CountsTable& counts, const AxialSetting& setting);

/// F = (1 + <XX> - <YY> + <ZZ>) / 4 from the three correlator settings,
/// clamped into [0, 1]. Keys of `by_setting` are "xx", "yy", "zz".
FidelityValue estimate_bell_fidelity(const std::map<std::string, CountsTable>& by_setting);

/// GHZ fidelity from populations and parity oscillations:
/// F = (P(0^M) + P(1^M)) / 2 + C / 2 with
/// C = (1/M) |sum_k (-1)^k <parity at phi_k = k pi / M>|.
FidelityValue estimate_ghz_fidelity(const std::map<std::string, CountsTable>& by_setting, int m);

/// Composite per-instance estimate across the protocol's setting group
/// (6-state average, Bell correlators, or GHZ estimator).
FidelityValue estimate_instance_fidelity(const ProtocolId& id,
                                         const std::map<std::string, CountsTable>& by_setting);

// ---------------------------------------------------------------------------

/// One estimated protocol layout: the aggregation camp, every qubit the
/// layout touches (for digital filtering), and the composite fidelity.
struct FidelityRecord {
    ProtocolId id;
    std::string stage;
    int take = 1;
    std::vector<QubitId> camp;     // sorted measured camp
    std::vector<QubitId> touched;  // sorted participants incl. routing qubits
    int rectangle = 0;             // 0 when not tied to a lattice cell
    double fidelity = 0.0;
    double stderr_ = 0.0;
    std::uint64_t shots = 0;
};

struct AggregationKey {
    enum class Kind { Qubit, Camp, Rectangle };

    Kind kind = Kind::Qubit;
    QubitId qubit = 0;
    std::vector<QubitId> camp;
    int rectangle = 0;

    static AggregationKey per_qubit(QubitId q);
    static AggregationKey per_camp(std::vector<QubitId> camp);
    static AggregationKey per_rectangle(int index);

    std::string text() const;
    bool operator<(const AggregationKey& other) const;
    bool operator==(const AggregationKey& other) const;
};

struct FidelityEstimate {
    AggregationKey key;
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    double stderr_ = 0.0;  // standard error of the group mean
    std::size_t n_circuits = 0;
};

/// Groups records by qubit, camp, or rectangle and reports min/mean/max per
/// group. Under per-qubit keying a record contributes to every member of its
/// measured camp. Order-independent; throws on an empty record list.
std::vector<FidelityEstimate> aggregate(const std::vector<FidelityRecord>& records,
                                        AggregationKey::Kind keying);

/// Binary gate: a key passes iff its minimum fidelity reaches the threshold
/// (inclusive, so a Bell minimum of exactly 0.5 passes).
std::vector<std::pair<AggregationKey, bool>> stage_pass(
    const std::vector<FidelityEstimate>& estimates, double threshold);

}  // namespace qpb
