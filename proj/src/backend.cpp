#include "qpb/backend.hpp"

#include <atomic>
#include <thread>

#include "qpb/density.hpp"
#include "qpb/errors.hpp"
#include "qpb/statevector.hpp"

namespace qpb {

bool LoweredCircuit::noiseless_gates() const {
    for (double p : gate_noise)
        if (p > 0.0) return false;
    return true;
}

LoweredCircuit lower_for_execution(const Circuit& circuit, const DeviceTopology& device,
                                   const NoiseModel& noise) {
    if (circuit.measured.empty()) {
        throw BackendError("circuit measures no qubits");
    }
    for (const Gate& g : circuit.gates) {
        if (g.q0 >= device.num_qubits || (g.is_two_qubit() && g.q1 >= device.num_qubits)) {
            throw BackendError("circuit references qubit outside device '" + device.name + "'");
        }
        if (g.is_two_qubit() && !device.has_edge(g.q0, g.q1)) {
            throw BackendError("two-qubit gate on non-coupled pair " + std::to_string(g.q0) +
                               "," + std::to_string(g.q1));
        }
    }
    for (QubitId q : circuit.measured) {
        if (q >= device.num_qubits) {
            throw BackendError("measured qubit outside device '" + device.name + "'");
        }
    }

    const Circuit lowered = device.all_to_all() ? circuit : swap_decompose(circuit);
    LoweredCircuit out;
    CompactCircuit compact = remap_to_compact(lowered);
    out.compact = std::move(compact.circuit);
    out.dense_to_device = std::move(compact.dense_to_device);

    out.gate_noise.reserve(out.compact.gates.size());
    for (const Gate& g : out.compact.gates) {
        if (g.is_two_qubit()) {
            out.gate_noise.push_back(
                noise.p2(out.dense_to_device[g.q0], out.dense_to_device[g.q1]));
        } else {
            out.gate_noise.push_back(noise.p1(out.dense_to_device[g.q0]));
        }
    }
    out.readout.reserve(out.compact.measured.size());
    for (QubitId q : out.compact.measured) {
        out.readout.push_back(noise.readout(out.dense_to_device[q]));
    }
    return out;
}

std::vector<double> oracle_distribution(const LoweredCircuit& lowered) {
    const int n = static_cast<int>(lowered.dense_to_device.size());
    if (n > 10) {
        throw InvalidArgument("oracle limited to 10 compact qubits, circuit touches " +
                              std::to_string(n));
    }
    DensityMatrix rho(n);
    for (std::size_t i = 0; i < lowered.compact.gates.size(); ++i) {
        const Gate& g = lowered.compact.gates[i];
        rho.apply_gate(g);
        const double p = lowered.gate_noise[i];
        if (p > 0.0) {
            if (g.is_two_qubit()) {
                rho.depolarize_2q(static_cast<int>(g.q0), static_cast<int>(g.q1), p);
            } else {
                rho.depolarize_1q(static_cast<int>(g.q0), p);
            }
        }
    }
    std::vector<double> probs = rho.measure_distribution(lowered.compact.measured);
    apply_readout_to_distribution(probs, lowered.readout);
    return probs;
}

std::vector<double> oracle_distribution(const Circuit& circuit, const DeviceTopology& device,
                                        const NoiseModel& noise) {
    return oracle_distribution(lower_for_execution(circuit, device, noise));
}

namespace {

std::string outcome_bitstring(std::size_t outcome, std::size_t num_bits) {
    std::string s(num_bits, '0');
    for (std::size_t j = 0; j < num_bits; ++j) {
        if ((outcome >> j) & 1u) s[j] = '1';
    }
    return s;
}

// Post-measurement classical flips; consumes one draw per noisy bit.
std::size_t apply_readout_flips(std::size_t outcome, const std::vector<double>& readout,
                                RandomStream& stream) {
    for (std::size_t j = 0; j < readout.size(); ++j) {
        if (readout[j] > 0.0 && stream.next_double() < readout[j]) {
            outcome ^= (std::size_t{1} << j);
        }
    }
    return outcome;
}

}  // namespace

CountsTable simulate_counts(const LoweredCircuit& lowered, std::uint64_t shots,
                            std::uint64_t master_seed, std::uint64_t circuit_index) {
    const int n = static_cast<int>(lowered.dense_to_device.size());
    CountsTable table;
    table.num_bits = lowered.compact.measured.size();

    if (lowered.noiseless_gates()) {
        // One evolution serves every shot; the per-shot streams still drive
        // outcome sampling so counts match the general path bit for bit.
        StateVector sv(n);
        for (const Gate& g : lowered.compact.gates) sv.apply_gate(g);
        const std::vector<double> probs = sv.measure_distribution(lowered.compact.measured);
        for (std::uint64_t shot = 0; shot < shots; ++shot) {
            RandomStream stream(RandomStream::derive(master_seed, circuit_index, shot));
            std::size_t outcome = sample_index(probs, stream.next_double());
            outcome = apply_readout_flips(outcome, lowered.readout, stream);
            table.add(outcome_bitstring(outcome, table.num_bits));
        }
        return table;
    }

    StateVector sv(n);
    for (std::uint64_t shot = 0; shot < shots; ++shot) {
        RandomStream stream(RandomStream::derive(master_seed, circuit_index, shot));
        sv.reset();
        for (std::size_t i = 0; i < lowered.compact.gates.size(); ++i) {
            const Gate& g = lowered.compact.gates[i];
            sv.apply_gate(g);
            const double p = lowered.gate_noise[i];
            if (p <= 0.0) continue;
            if (g.is_two_qubit()) {
                // With probability p*15/16 insert one of the 15 non-identity
                // two-qubit Paulis; this equals the depolarizing channel.
                if (stream.next_double() < p * (15.0 / 16.0)) {
                    const int code = static_cast<int>(stream.next_below(15)) + 1;
                    const int pa = code >> 2;
                    const int pb = code & 3;
                    if (pa) sv.apply_pauli(pa, static_cast<int>(g.q0));
                    if (pb) sv.apply_pauli(pb, static_cast<int>(g.q1));
                }
            } else {
                if (stream.next_double() < p * 0.75) {
                    sv.apply_pauli(static_cast<int>(stream.next_below(3)) + 1,
                                   static_cast<int>(g.q0));
                }
            }
        }
        const std::vector<double> probs = sv.measure_distribution(lowered.compact.measured);
        std::size_t outcome = sample_index(probs, stream.next_double());
        outcome = apply_readout_flips(outcome, lowered.readout, stream);
        table.add(outcome_bitstring(outcome, table.num_bits));
    }
    return table;
}

std::vector<CountsTable> SimulatorBackend::execute(const ExecutionRequest& request) {
    if (request.device == nullptr) throw BackendError("execution request carries no device");
    if (request.shots == 0) throw BackendError("shots must be at least 1");
    const NoiseModel& noise = request.effective_noise();

    std::vector<LoweredCircuit> lowered;
    lowered.reserve(request.circuits.size());
    for (const Circuit& c : request.circuits) {
        lowered.push_back(lower_for_execution(c, *request.device, noise));
    }

    std::vector<CountsTable> results(lowered.size());
    unsigned workers = threads_ ? threads_ : std::thread::hardware_concurrency();
    if (workers == 0) workers = 1;
    workers = static_cast<unsigned>(
        std::min<std::size_t>(workers, std::max<std::size_t>(lowered.size(), 1)));

    if (workers <= 1 || lowered.size() <= 1) {
        for (std::size_t i = 0; i < lowered.size(); ++i) {
            results[i] = simulate_counts(lowered[i], request.shots, request.master_seed, i);
        }
        return results;
    }

    std::atomic<std::size_t> cursor{0};
    auto work = [&]() {
        while (true) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= lowered.size()) break;
            results[i] = simulate_counts(lowered[i], request.shots, request.master_seed, i);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    return results;
}

void ReplayBackend::add_record(const std::string& protocol, const std::string& path_id,
                               const std::string& setting, CountsTable counts) {
    records_[{protocol, path_id, setting}] = std::move(counts);
}

std::vector<CountsTable> ReplayBackend::execute(const ExecutionRequest& request) {
    std::vector<CountsTable> results;
    results.reserve(request.circuits.size());
    for (const Circuit& c : request.circuits) {
        const Key key{c.meta.protocol, c.meta.path_id, c.meta.setting};
        auto it = records_.find(key);
        if (it == records_.end()) {
            throw BackendError("no recorded data for (protocol=" + c.meta.protocol +
                               ", path=" + c.meta.path_id + ", setting=" + c.meta.setting + ")");
        }
        results.push_back(it->second);
    }
    return results;
}

}  // namespace qpb
