#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qpb/circuit.hpp"
#include "qpb/topology.hpp"

namespace qpb {

enum class ProtocolKind {
    Transmit,
    DoNothing,
    BellTransfer,
    GenTransmit,
    GenDoNothing,
    CatState,
};

struct ProtocolParams {
    int m = 1;  // work-qubit count (generalized / cat protocols)
    int j = 0;  // transferred-qubit count (cat state)

    bool operator==(const ProtocolParams&) const = default;
};

struct ProtocolId {
    ProtocolKind kind = ProtocolKind::Transmit;
    ProtocolParams params;

    bool operator==(const ProtocolId&) const = default;

    int work_qubits() const;
    /// Throws ConfigError when parameters are outside the supported ranges
    /// (M in 2..3 for generalized kinds, M in 3..4 with J = 2 for cat state).
    void validate() const;
};

/// Canonical id such as "transmit", "gen_transmit_m2", "cat_state_m3_j2".
std::string protocol_name(const ProtocolId& id);
ProtocolId protocol_from_name(const std::string& name);
/// Human-readable label used in comparison tables.
std::string protocol_label(const ProtocolId& id);

/// Classical-limit fidelity threshold: 2/3 for single-qubit transfer, 1/2
/// for entangled-state transfer, (2/3)^M for M-qubit generalized transfer.
double threshold_for(const ProtocolId& id);

// ---------------------------------------------------------------------------
// Estimation settings

struct AxialSetting {
    Axis axis = Axis::Z;
    bool positive = true;
};

enum class BellSetting { XX, YY, ZZ };

struct CatSetting {
    bool population = true;
    int k = 0;  // parity phase index, phi_k = k*pi/M
};

/// The six single-qubit axial states; averaging over them yields the average
/// fidelity whose classical limit is 2/3.
const std::vector<AxialSetting>& axial_settings();

std::string setting_id(const AxialSetting& s);
std::string setting_id(BellSetting s);
std::string setting_id(const CatSetting& s);

/// Setting ids of one protocol in estimator order: 6 axial ids for the
/// transmit/do-nothing families, xx/yy/zz for Bell, population plus M parity
/// phases for cat state.
std::vector<std::string> settings_for(const ProtocolId& id);

// ---------------------------------------------------------------------------
// Instances

/// A concrete protocol layout: which qubits participate and along which
/// routes work qubits move. Routes are listed in execution order; the
/// generators arrange them so no transfer chain crosses an occupied qubit.
struct ProtocolInstance {
    ProtocolId id;
    std::vector<std::vector<QubitId>> routes;
    std::vector<QubitId> ghz_camp;       // cat state: GHZ preparation chain
    std::vector<QubitId> measured_camp;  // sorted; the aggregation camp
    int rectangle = 0;                   // lattice instances: owning cell
    std::string path_id;
    std::vector<QubitId> flat_path;      // serialized layout for the log
    std::vector<QubitId> touched;        // sorted participants incl. routing
};

/// Rebuilds the canonical path id from a logged flat layout.
std::string path_id_from_flat(const ProtocolId& id, const std::vector<QubitId>& flat);

/// Maps one enumerated stage path onto a protocol layout. Returns nullopt
/// when the path is shorter than the protocol needs (short A-L paths).
std::optional<ProtocolInstance> lattice_instance(const ProtocolId& id, const QubitPath& master,
                                                 int rectangle);

/// Every ordered qubit pair of an all-to-all device (transmit, do-nothing).
std::vector<ProtocolInstance> ion_pair_instances(const ProtocolId& id,
                                                 const std::vector<QubitId>& qubits);

/// Camp enumeration on an all-to-all device: every unordered receiving camp
/// against the sending camps disjoint from it, in lexicographic order.
/// `partner_limit` > 0 caps the partners tried per receiving camp.
std::vector<ProtocolInstance> ion_camp_instances(const ProtocolId& id,
                                                 const std::vector<QubitId>& qubits,
                                                 std::size_t partner_limit);

/// One all-to-all instance from an explicit flat layout (senders then
/// receivers, camp then destinations for cat state).
ProtocolInstance ion_instance_from_flat(const ProtocolId& id,
                                        const std::vector<QubitId>& flat);

// ---------------------------------------------------------------------------
// Circuit builders (pure; identical inputs give structurally equal circuits)

Circuit build_transmit(const QubitPath& path, const AxialSetting& setting);
Circuit build_do_nothing(const QubitPath& path, const AxialSetting& setting);
Circuit build_bell_transfer(std::pair<QubitId, QubitId> alice, std::pair<QubitId, QubitId> bob,
                            const std::vector<std::vector<QubitId>>& routes, BellSetting setting);
Circuit build_gen_transmit(const std::vector<std::vector<QubitId>>& routes,
                           const AxialSetting& setting);
Circuit build_gen_do_nothing(const std::vector<std::vector<QubitId>>& routes,
                             const AxialSetting& setting);
Circuit build_cat_state(const std::vector<QubitId>& ghz_camp,
                        const std::vector<std::vector<QubitId>>& transfer_routes,
                        const CatSetting& setting);

/// One circuit per estimation setting of the instance, in settings_for
/// order. Metadata carries (protocol name, path id, setting id).
std::vector<Circuit> circuits_for_instance(const ProtocolInstance& instance);

}  // namespace qpb
