#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qpb/backend.hpp"
#include "qpb/fidelity.hpp"
#include "qpb/results_log.hpp"
#include "qpb/topology.hpp"

namespace qpb {

struct RetakeSpec {
    ProtocolId protocol;
    std::string stage;
    int takes = 2;  // how many times the stage executes
    int use = 2;    // which take feeds downstream gating
};

struct WorkflowConfig {
    std::string device_path;
    DeviceTopology device;
    std::string backend_kind = "simulator";
    std::string replay_log;
    std::uint64_t shots = 256;
    std::uint64_t seed = 1;
    int k_exclude = 4;              // qubits dropped by the all-to-all filter
    std::size_t partner_limit = 0;  // sending camps tried per receiving camp; 0 = all
    int max_stages = 0;             // stop after N executed stages; 0 = unlimited
    bool log_circuits = false;
    std::string timestamp;          // fixed run timestamp; empty = wall clock
    std::string output_dir;  // empty = resolve via CLI flag / env / default
    std::vector<ProtocolId> protocols;
    std::map<std::string, double> threshold_overrides;  // by protocol name
    std::optional<NoiseModel> noise;
    std::vector<RetakeSpec> retakes;
    std::string config_hash;

    double threshold(const ProtocolId& id) const;
    bool has_protocol(const ProtocolId& id) const;
};

/// Parses and validates a run configuration. Relative paths resolve against
/// `base_dir`. Throws ConfigError on any violation.
WorkflowConfig load_workflow_config(const std::string& json_text, const std::string& base_dir);
WorkflowConfig load_workflow_config_file(const std::string& path);

// ---------------------------------------------------------------------------

struct StageResult {
    ProtocolId protocol;
    std::string stage;
    int take = 1;
    bool used_for_gating = true;
    double threshold = 0.0;
    AggregationKey::Kind keying = AggregationKey::Kind::Qubit;
    std::vector<FidelityEstimate> estimates;
    std::vector<std::pair<AggregationKey, bool>> passes;
    std::vector<int> entering_rectangles;
    std::vector<int> surviving_rectangles;
    std::vector<QubitId> entering_qubits;
    std::vector<QubitId> surviving_qubits;
    std::vector<FidelityRecord> records;
};

enum class RowStatus { Passed, Failed, NotRun };

std::string row_status_name(RowStatus s);
RowStatus row_status_from_name(const std::string& s);

/// One protocol-vector entry: the surviving sub-chip and its fidelity
/// metric (minimum fidelity on all-to-all devices, average of per-rectangle
/// minima on lattices).
struct ProtocolOutcome {
    ProtocolId id;
    RowStatus status = RowStatus::NotRun;
    std::vector<QubitId> subchip_qubits;
    std::vector<int> subchip_rectangles;
    double metric = 0.0;
};

struct WorkflowReport {
    std::string run_id;
    std::string device_name;
    std::string timestamp;
    bool lattice = false;
    std::uint64_t seed = 0;
    std::vector<QubitId> stage1_excluded;  // all-to-all first filter
    bool stage1_verified = true;           // filtered chip passed both filters
    std::vector<StageResult> stages;
    std::vector<ProtocolOutcome> rows;
    bool terminated_early = false;  // candidate pool emptied before assessments
    bool complete = true;           // false when max_stages stopped the run
};

std::string report_to_json(const WorkflowReport& report);
WorkflowReport report_from_json(const std::string& text);

// ---------------------------------------------------------------------------

/// Ranks per-qubit estimates by (min, then mean, then index) ascending and
/// returns the k lowest performers. Requires k < number of keys.
std::vector<QubitId> select_worst_qubits(const std::vector<FidelityEstimate>& estimates,
                                         std::size_t k);

/// Digital filtering: drops every record whose layout touches an excluded
/// qubit and re-aggregates the remainder, with no re-execution.
std::vector<FidelityEstimate> reduce_and_reaggregate(const std::vector<FidelityRecord>& records,
                                                     const std::set<QubitId>& excluded,
                                                     AggregationKey::Kind keying);

/// Runs the configured optimal-lookup workflow: the qubit-filter variant on
/// all-to-all devices, the rectangle variant on lattices. `resume_from`
/// reuses every stage the log marks complete.
WorkflowReport run_workflow(const WorkflowConfig& config, Backend& backend,
                            const ResultsLog* resume_from, ResultsLog& log_out);

/// Convenience wrapper choosing the backend from the config (including
/// replay-log loading) and producing the full artifact set in memory.
WorkflowReport run_workflow(const WorkflowConfig& config, ResultsLog& log_out,
                            const ResultsLog* resume_from = nullptr);

}  // namespace qpb
