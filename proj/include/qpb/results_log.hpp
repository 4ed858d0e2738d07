#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qpb/circuit.hpp"
#include "qpb/counts.hpp"
#include "qpb/protocols.hpp"

namespace qpb {

inline constexpr const char* kResultsSchema = "qpb.results.v1";

struct RunManifest {
    std::string schema = kResultsSchema;
    std::string run_id;
    std::string device;
    std::string backend;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::string created_at;
    std::map<std::string, std::string> conventions;

    bool operator==(const RunManifest&) const = default;
};

/// One executed circuit: layout, setting, and raw counts.
struct CountsRecord {
    std::string run_id;
    std::string device;
    std::string backend;
    ProtocolId protocol;
    std::string stage;
    int take = 1;
    std::vector<QubitId> path;  // flat layout (senders then receivers)
    std::string setting;
    std::uint64_t shots = 0;
    CountsTable counts;
    std::string timestamp;
    std::uint64_t seed = 0;
    std::optional<Circuit> circuit;

    bool operator==(const CountsRecord&) const = default;
};

/// Marks that every record of (protocol, stage, take) landed in the log;
/// resuming trusts only stages that carry their marker.
struct StageMarker {
    ProtocolId protocol;
    std::string stage;
    int take = 1;
    std::size_t n_records = 0;

    bool operator==(const StageMarker&) const = default;
};

struct ResultsLog {
    RunManifest manifest;
    std::vector<CountsRecord> records;
    std::vector<StageMarker> completed;

    bool stage_complete(const ProtocolId& id, const std::string& stage, int take) const;
};

/// JSONL serialization: first line is the manifest, then one line per record
/// with stage markers interleaved where each stage finished. Deterministic
/// byte output for identical content.
std::string results_to_jsonl(const ResultsLog& log);
/// Inverse of results_to_jsonl. Reports corrupt lines by number and rejects
/// unknown schema versions by name.
ResultsLog results_from_jsonl(const std::string& text);

void write_results(const ResultsLog& log, const std::string& path);
ResultsLog load_results(const std::string& path);

// Circuit wire format: {"gates": [...], "measured": [...], "metadata": {...}}.
std::string circuit_to_json(const Circuit& circuit);
Circuit circuit_from_json(const std::string& text);

/// Standalone manifest object (same fields as the log's first line).
std::string manifest_to_json_string(const RunManifest& manifest);

/// FNV-1a over the canonical dump; used for config hashes and run ids.
std::string stable_hash_hex(const std::string& text);
std::uint64_t stable_hash64(const std::string& text);

/// Replay/resume lookup key of a record: protocol@stage#take.
std::string stage_key(const ProtocolId& id, const std::string& stage, int take);

}  // namespace qpb
