#include "qpb/results_log.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qpb/errors.hpp"

namespace qpb {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

const char* axis_name(Axis a) {
    switch (a) {
        case Axis::X: return "x";
        case Axis::Y: return "y";
        case Axis::Z: return "z";
    }
    return "?";
}

Axis axis_from(const std::string& s) {
    if (s == "x") return Axis::X;
    if (s == "y") return Axis::Y;
    if (s == "z") return Axis::Z;
    throw ConfigError("unknown axis '" + s + "'");
}

const char* basis_name(BasisKind b) {
    switch (b) {
        case BasisKind::X: return "x";
        case BasisKind::Y: return "y";
        case BasisKind::Z: return "z";
        case BasisKind::ParityPhase: return "phase";
    }
    return "?";
}

ordered_json gate_to_json(const Gate& g) {
    ordered_json j;
    switch (g.kind) {
        case GateKind::PrepAxial:
            j["kind"] = "prep";
            j["qubits"] = {g.q0};
            j["axis"] = axis_name(g.axis);
            j["sign"] = g.positive ? "+" : "-";
            break;
        case GateKind::Hadamard:
            j["kind"] = "h";
            j["qubits"] = {g.q0};
            break;
        case GateKind::SGate:
            j["kind"] = "s";
            j["qubits"] = {g.q0};
            break;
        case GateKind::SInverse:
            j["kind"] = "sdg";
            j["qubits"] = {g.q0};
            break;
        case GateKind::CX:
            j["kind"] = "cx";
            j["qubits"] = {g.q0, g.q1};
            break;
        case GateKind::Swap:
            j["kind"] = "swap";
            j["qubits"] = {g.q0, g.q1};
            break;
        case GateKind::BasisChange:
            j["kind"] = "basis";
            j["qubits"] = {g.q0};
            j["basis"] = basis_name(g.basis);
            if (g.basis == BasisKind::ParityPhase) j["phi"] = g.phase;
            break;
    }
    return j;
}

Gate gate_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    const auto qubits = j.at("qubits").get<std::vector<QubitId>>();
    if (kind == "prep") {
        return prep_axial(qubits.at(0), axis_from(j.at("axis").get<std::string>()),
                          j.at("sign").get<std::string>() == "+");
    }
    if (kind == "h") return hadamard(qubits.at(0));
    if (kind == "s") return s_gate(qubits.at(0));
    if (kind == "sdg") return s_inverse(qubits.at(0));
    if (kind == "cx") return cx(qubits.at(0), qubits.at(1));
    if (kind == "swap") return swap_gate(qubits.at(0), qubits.at(1));
    if (kind == "basis") {
        const std::string basis = j.at("basis").get<std::string>();
        if (basis == "phase") return parity_phase(qubits.at(0), j.at("phi").get<double>());
        if (basis == "x") return basis_change(qubits.at(0), BasisKind::X);
        if (basis == "y") return basis_change(qubits.at(0), BasisKind::Y);
        if (basis == "z") return basis_change(qubits.at(0), BasisKind::Z);
        throw ConfigError("unknown basis '" + basis + "'");
    }
    throw ConfigError("unknown gate kind '" + kind + "'");
}

ordered_json circuit_to_ordered_json(const Circuit& c) {
    ordered_json j;
    j["gates"] = ordered_json::array();
    for (const Gate& g : c.gates) j["gates"].push_back(gate_to_json(g));
    j["measured"] = c.measured;
    j["metadata"] = {{"protocol", c.meta.protocol},
                     {"path_id", c.meta.path_id},
                     {"setting", c.meta.setting}};
    return j;
}

Circuit circuit_from_json_obj(const json& j) {
    Circuit c;
    for (const auto& g : j.at("gates")) c.gates.push_back(gate_from_json(g));
    c.measured = j.at("measured").get<std::vector<QubitId>>();
    if (j.contains("metadata")) {
        const json& m = j.at("metadata");
        c.meta.protocol = m.value("protocol", "");
        c.meta.path_id = m.value("path_id", "");
        c.meta.setting = m.value("setting", "");
    }
    return c;
}

ordered_json manifest_to_json(const RunManifest& m) {
    ordered_json j;
    j["type"] = "manifest";
    j["schema"] = m.schema;
    j["run_id"] = m.run_id;
    j["device"] = m.device;
    j["backend"] = m.backend;
    j["seed"] = m.seed;
    j["config_hash"] = m.config_hash;
    j["created_at"] = m.created_at;
    j["conventions"] = m.conventions;
    return j;
}

ordered_json record_to_json(const CountsRecord& r) {
    ordered_json j;
    j["type"] = "counts";
    j["run_id"] = r.run_id;
    j["device"] = r.device;
    j["backend"] = r.backend;
    j["protocol"] = protocol_name(r.protocol);
    j["params"] = {{"M", r.protocol.params.m}, {"J", r.protocol.params.j}};
    j["stage"] = r.stage;
    j["take"] = r.take;
    j["path"] = r.path;
    j["setting"] = r.setting;
    j["shots"] = r.shots;
    ordered_json counts = ordered_json::object();
    for (const auto& [bits, n] : r.counts.counts) counts[bits] = n;
    j["counts"] = counts;
    j["timestamp"] = r.timestamp;
    j["seed"] = r.seed;
    if (r.circuit) j["circuit"] = circuit_to_ordered_json(*r.circuit);
    return j;
}

CountsRecord record_from_json(const json& j) {
    CountsRecord r;
    r.run_id = j.value("run_id", "");
    r.device = j.value("device", "");
    r.backend = j.value("backend", "");
    r.protocol = protocol_from_name(j.at("protocol").get<std::string>());
    r.stage = j.at("stage").get<std::string>();
    r.take = j.value("take", 1);
    r.path = j.at("path").get<std::vector<QubitId>>();
    r.setting = j.at("setting").get<std::string>();
    r.shots = j.at("shots").get<std::uint64_t>();
    for (const auto& [bits, n] : j.at("counts").items()) {
        r.counts.counts[bits] = n.get<std::uint64_t>();
        r.counts.shots += n.get<std::uint64_t>();
        r.counts.num_bits = bits.size();
    }
    if (r.counts.shots != r.shots) {
        throw ConfigError("counts do not sum to the declared shot count");
    }
    r.timestamp = j.value("timestamp", "");
    r.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("circuit")) r.circuit = circuit_from_json_obj(j.at("circuit"));
    return r;
}

}  // namespace

bool ResultsLog::stage_complete(const ProtocolId& id, const std::string& stage,
                                int take) const {
    for (const StageMarker& m : completed) {
        if (m.protocol == id && m.stage == stage && m.take == take) return true;
    }
    return false;
}

std::string results_to_jsonl(const ResultsLog& log) {
    std::ostringstream out;
    out << manifest_to_json(log.manifest).dump() << '\n';

    // Records grouped per stage, the stage marker following its records.
    std::size_t cursor = 0;
    for (const StageMarker& marker : log.completed) {
        for (std::size_t i = 0; i < marker.n_records; ++i, ++cursor) {
            out << record_to_json(log.records.at(cursor)).dump() << '\n';
        }
        ordered_json j;
        j["type"] = "stage_done";
        j["protocol"] = protocol_name(marker.protocol);
        j["stage"] = marker.stage;
        j["take"] = marker.take;
        j["n_records"] = marker.n_records;
        out << j.dump() << '\n';
    }
    for (; cursor < log.records.size(); ++cursor) {
        out << record_to_json(log.records[cursor]).dump() << '\n';
    }
    return out.str();
}

ResultsLog results_from_jsonl(const std::string& text) {
    ResultsLog log;
    bool have_manifest = false;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ConfigError("results log line " + std::to_string(line_no) +
                              " is corrupt: " + e.what());
        }
        try {
            const std::string type = j.value("type", "counts");
            if (type == "manifest") {
                const std::string schema = j.value("schema", "");
                if (schema != kResultsSchema) {
                    throw ConfigError("results log line " + std::to_string(line_no) +
                                      ": schema '" + schema + "' not supported (expected '" +
                                      kResultsSchema + "')");
                }
                if (!have_manifest) {
                    RunManifest m;
                    m.schema = schema;
                    m.run_id = j.value("run_id", "");
                    m.device = j.value("device", "");
                    m.backend = j.value("backend", "");
                    m.seed = j.value("seed", std::uint64_t{0});
                    m.config_hash = j.value("config_hash", "");
                    m.created_at = j.value("created_at", "");
                    if (j.contains("conventions")) {
                        for (const auto& [k, v] : j.at("conventions").items()) {
                            m.conventions[k] = v.get<std::string>();
                        }
                    }
                    log.manifest = m;
                    have_manifest = true;
                }
            } else if (type == "stage_done") {
                StageMarker m;
                m.protocol = protocol_from_name(j.at("protocol").get<std::string>());
                m.stage = j.at("stage").get<std::string>();
                m.take = j.value("take", 1);
                m.n_records = j.at("n_records").get<std::size_t>();
                log.completed.push_back(std::move(m));
            } else if (type == "counts") {
                log.records.push_back(record_from_json(j));
            } else {
                throw ConfigError("unknown record type '" + type + "'");
            }
        } catch (const json::exception& e) {
            throw ConfigError("results log line " + std::to_string(line_no) +
                              " is malformed: " + e.what());
        }
    }
    if (!have_manifest) {
        throw ConfigError("results log carries no manifest line");
    }
    return log;
}

void write_results(const ResultsLog& log, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write results log '" + path + "'");
    out << results_to_jsonl(log);
}

ResultsLog load_results(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open results log '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return results_from_jsonl(buf.str());
}

std::string circuit_to_json(const Circuit& circuit) {
    return circuit_to_ordered_json(circuit).dump();
}

std::string manifest_to_json_string(const RunManifest& manifest) {
    return manifest_to_json(manifest).dump(2) + "\n";
}

Circuit circuit_from_json(const std::string& text) {
    try {
        return circuit_from_json_obj(json::parse(text));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("circuit JSON malformed: ") + e.what());
    }
}

std::uint64_t stable_hash64(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string stable_hash_hex(const std::string& text) {
    std::uint64_t h = stable_hash64(text);
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

std::string stage_key(const ProtocolId& id, const std::string& stage, int take) {
    return protocol_name(id) + "@" + stage + "#" + std::to_string(take);
}

}  // namespace qpb
