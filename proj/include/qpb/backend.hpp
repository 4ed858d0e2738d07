#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "qpb/circuit.hpp"
#include "qpb/counts.hpp"
#include "qpb/noise.hpp"
#include "qpb/topology.hpp"

namespace qpb {

struct ExecutionRequest {
    const DeviceTopology* device = nullptr;
    std::vector<Circuit> circuits;
    std::uint64_t shots = 0;
    std::uint64_t master_seed = 0;
    std::optional<NoiseModel> noise;  // overrides the device noise when set

    const NoiseModel& effective_noise() const { return noise ? *noise : device->noise; }
};

/// An executable form of a circuit: compacted onto its touched qubits, swaps
/// decomposed into CX triples on edge-list devices (kept whole on all-to-all
/// hardware, where a swap is one native two-qubit interaction), and noise
/// resolved per gate and per measured bit.
struct LoweredCircuit {
    Circuit compact;
    std::vector<double> gate_noise;       // depolarizing parameter per gate
    std::vector<double> readout;          // flip probability per measured bit
    std::vector<QubitId> dense_to_device;

    bool noiseless_gates() const;
};

LoweredCircuit lower_for_execution(const Circuit& circuit, const DeviceTopology& device,
                                   const NoiseModel& noise);

/// Exact outcome distribution of one circuit under the given noise, via
/// density-matrix evolution of the lowered form. Compact register limited to
/// 10 qubits.
std::vector<double> oracle_distribution(const LoweredCircuit& lowered);
std::vector<double> oracle_distribution(const Circuit& circuit, const DeviceTopology& device,
                                        const NoiseModel& noise);

/// Samples one circuit shot-by-shot. Stochastic Pauli insertion reproduces
/// the depolarizing channel exactly in expectation; every (circuit, shot)
/// pair draws from its own stream derived from the master seed, so results
/// do not depend on execution order.
CountsTable simulate_counts(const LoweredCircuit& lowered, std::uint64_t shots,
                            std::uint64_t master_seed, std::uint64_t circuit_index);

class Backend {
public:
    virtual ~Backend() = default;
    virtual std::vector<CountsTable> execute(const ExecutionRequest& request) = 0;
    virtual std::string kind() const = 0;
};

class SimulatorBackend : public Backend {
public:
    explicit SimulatorBackend(unsigned threads = 0) : threads_(threads) {}
    std::vector<CountsTable> execute(const ExecutionRequest& request) override;
    std::string kind() const override { return "simulator"; }

private:
    unsigned threads_;  // 0 = hardware concurrency
};

/// Serves previously recorded counts, keyed by circuit metadata
/// (protocol, path id, setting); never simulates.
class ReplayBackend : public Backend {
public:
    using Key = std::tuple<std::string, std::string, std::string>;

    void add_record(const std::string& protocol, const std::string& path_id,
                    const std::string& setting, CountsTable counts);
    std::vector<CountsTable> execute(const ExecutionRequest& request) override;
    std::string kind() const override { return "replay"; }

    std::size_t size() const { return records_.size(); }

private:
    std::map<Key, CountsTable> records_;
};

}  // namespace qpb
