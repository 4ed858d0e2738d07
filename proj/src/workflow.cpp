#include "qpb/workflow.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "qpb/errors.hpp"
#include "qpb/statevector.hpp"

namespace qpb {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

const std::vector<ProtocolId>& canonical_protocols() {
    static const std::vector<ProtocolId> kOrder = {
        {ProtocolKind::Transmit, {}},
        {ProtocolKind::GenTransmit, {2, 0}},
        {ProtocolKind::GenTransmit, {3, 0}},
        {ProtocolKind::DoNothing, {}},
        {ProtocolKind::GenDoNothing, {2, 0}},
        {ProtocolKind::GenDoNothing, {3, 0}},
        {ProtocolKind::BellTransfer, {}},
        {ProtocolKind::CatState, {3, 2}},
        {ProtocolKind::CatState, {4, 2}},
    };
    return kOrder;
}

std::string now_utc_iso() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string resolve_path(const std::string& path, const std::string& base_dir) {
    if (path.empty() || path.front() == '/' || base_dir.empty()) return path;
    return base_dir + "/" + path;
}

// Fewest qubits any instance of the protocol occupies on an all-to-all
// device (both camps).
std::size_t min_instance_qubits(const ProtocolId& id) {
    switch (id.kind) {
        case ProtocolKind::Transmit:
        case ProtocolKind::DoNothing: return 2;
        case ProtocolKind::BellTransfer: return 4;
        case ProtocolKind::GenTransmit:
        case ProtocolKind::GenDoNothing: return 2 * static_cast<std::size_t>(id.params.m);
        case ProtocolKind::CatState:
            return static_cast<std::size_t>(id.params.m + id.params.j);
    }
    return 2;
}

}  // namespace

double WorkflowConfig::threshold(const ProtocolId& id) const {
    auto it = threshold_overrides.find(protocol_name(id));
    return it == threshold_overrides.end() ? threshold_for(id) : it->second;
}

bool WorkflowConfig::has_protocol(const ProtocolId& id) const {
    return std::find(protocols.begin(), protocols.end(), id) != protocols.end();
}

WorkflowConfig load_workflow_config(const std::string& json_text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("run config is not valid JSON: ") + e.what());
    }

    WorkflowConfig cfg;
    try {
        cfg.device_path = resolve_path(j.at("device").get<std::string>(), base_dir);
        cfg.device = load_device_file(cfg.device_path);
        cfg.backend_kind = j.value("backend", std::string("simulator"));
        if (cfg.backend_kind != "simulator" && cfg.backend_kind != "replay") {
            throw ConfigError("backend must be \"simulator\" or \"replay\"");
        }
        if (j.contains("replay_log")) {
            cfg.replay_log = resolve_path(j.at("replay_log").get<std::string>(), base_dir);
        }
        if (cfg.backend_kind == "replay" && cfg.replay_log.empty()) {
            throw ConfigError("replay backend needs a replay_log path");
        }
        cfg.shots = j.value("shots", std::uint64_t{256});
        if (cfg.shots == 0) throw ConfigError("shots must be at least 1");
        cfg.seed = j.value("seed", std::uint64_t{1});
        cfg.k_exclude = j.value("k_exclude", 4);
        cfg.partner_limit = j.value("partner_limit", std::size_t{0});
        cfg.max_stages = j.value("max_stages", 0);
        cfg.log_circuits = j.value("log_circuits", false);
        cfg.timestamp = j.value("timestamp", std::string());
        cfg.output_dir = j.value("output_dir", std::string());

        if (j.contains("protocols")) {
            for (const auto& p : j.at("protocols")) {
                cfg.protocols.push_back(protocol_from_name(p.get<std::string>()));
            }
        } else {
            // Cat state stays opt-in; everything else runs by default.
            for (const ProtocolId& id : canonical_protocols()) {
                if (id.kind != ProtocolKind::CatState) cfg.protocols.push_back(id);
            }
        }
        for (const ProtocolId& id : cfg.protocols) id.validate();

        auto requires_protocol = [&](ProtocolKind kind, ProtocolParams params,
                                     const std::string& needed_by) {
            if (!cfg.has_protocol({kind, params})) {
                throw ConfigError(needed_by + " is configured but its gating predecessor " +
                                  protocol_name({kind, params}) + " is not");
            }
        };
        if (!cfg.has_protocol({ProtocolKind::Transmit, {}}) ||
            !cfg.has_protocol({ProtocolKind::DoNothing, {}})) {
            throw ConfigError("the workflow's filter stages need transmit and do_nothing");
        }
        if (!cfg.device.all_to_all()) {
            if (cfg.has_protocol({ProtocolKind::GenTransmit, {3, 0}})) {
                requires_protocol(ProtocolKind::GenTransmit, {2, 0}, "gen_transmit_m3");
            }
            if (cfg.has_protocol({ProtocolKind::GenDoNothing, {3, 0}})) {
                requires_protocol(ProtocolKind::GenDoNothing, {2, 0}, "gen_do_nothing_m3");
            }
            if (cfg.has_protocol({ProtocolKind::CatState, {3, 2}})) {
                requires_protocol(ProtocolKind::BellTransfer, {}, "cat_state_m3_j2");
            }
            if (cfg.has_protocol({ProtocolKind::CatState, {4, 2}})) {
                requires_protocol(ProtocolKind::CatState, {3, 2}, "cat_state_m4_j2");
            }
        }

        if (cfg.device.all_to_all()) {
            if (cfg.k_exclude < 0 ||
                cfg.k_exclude >= static_cast<int>(cfg.device.num_qubits)) {
                throw ConfigError("k_exclude must lie in [0, device qubit count)");
            }
        }

        if (j.contains("thresholds")) {
            for (const auto& [name, v] : j.at("thresholds").items()) {
                protocol_from_name(name);  // validates the key
                const double t = v.get<double>();
                if (t < 0.0 || t > 1.0) {
                    throw ConfigError("threshold override for " + name + " outside [0, 1]");
                }
                cfg.threshold_overrides[name] = t;
            }
        }

        if (j.contains("noise")) {
            cfg.noise = noise_from_json(j.at("noise").dump(), cfg.device);
        }

        if (j.contains("retakes")) {
            for (const auto& r : j.at("retakes")) {
                RetakeSpec spec;
                spec.protocol = protocol_from_name(r.at("protocol").get<std::string>());
                spec.stage = r.at("stage").get<std::string>();
                spec.takes = r.value("takes", 2);
                spec.use = r.value("use", spec.takes);
                if (spec.takes < 1 || spec.use < 1 || spec.use > spec.takes) {
                    throw ConfigError("retake take indices out of range");
                }
                cfg.retakes.push_back(std::move(spec));
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("run config schema error: ") + e.what());
    }

    // Execution-control knobs do not change what a run measures, so they
    // stay outside the hash; a budget-limited run can then be resumed.
    json hashed = j;
    hashed.erase("max_stages");
    hashed.erase("output_dir");
    cfg.config_hash = stable_hash_hex(hashed.dump());
    return cfg;
}

WorkflowConfig load_workflow_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open run config '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const auto slash = path.find_last_of('/');
    const std::string base = slash == std::string::npos ? std::string(".")
                                                        : path.substr(0, slash);
    return load_workflow_config(buf.str(), base);
}

std::string row_status_name(RowStatus s) {
    switch (s) {
        case RowStatus::Passed: return "passed";
        case RowStatus::Failed: return "failed";
        case RowStatus::NotRun: return "not_run";
    }
    return "?";
}

RowStatus row_status_from_name(const std::string& s) {
    if (s == "passed") return RowStatus::Passed;
    if (s == "failed") return RowStatus::Failed;
    if (s == "not_run") return RowStatus::NotRun;
    throw ConfigError("unknown row status '" + s + "'");
}

// ---------------------------------------------------------------------------

std::vector<QubitId> select_worst_qubits(const std::vector<FidelityEstimate>& estimates,
                                         std::size_t k) {
    if (k >= estimates.size()) {
        throw InvalidArgument("cannot drop " + std::to_string(k) + " of " +
                              std::to_string(estimates.size()) + " qubits");
    }
    std::vector<const FidelityEstimate*> ranked;
    ranked.reserve(estimates.size());
    for (const FidelityEstimate& e : estimates) {
        if (e.key.kind != AggregationKey::Kind::Qubit) {
            throw InvalidArgument("worst-qubit selection needs per-qubit estimates");
        }
        ranked.push_back(&e);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto* a, const auto* b) {
        if (a->min != b->min) return a->min < b->min;
        if (a->mean != b->mean) return a->mean < b->mean;
        return a->key.qubit < b->key.qubit;
    });
    std::vector<QubitId> out;
    for (std::size_t i = 0; i < k; ++i) out.push_back(ranked[i]->key.qubit);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<FidelityEstimate> reduce_and_reaggregate(const std::vector<FidelityRecord>& records,
                                                     const std::set<QubitId>& excluded,
                                                     AggregationKey::Kind keying) {
    std::vector<FidelityRecord> kept;
    kept.reserve(records.size());
    for (const FidelityRecord& r : records) {
        const bool hit = std::any_of(r.touched.begin(), r.touched.end(),
                                     [&](QubitId q) { return excluded.count(q) > 0; });
        if (!hit) kept.push_back(r);
    }
    if (kept.empty()) {
        throw InvalidArgument("digital filtering removed every record");
    }
    return aggregate(kept, keying);
}

// ---------------------------------------------------------------------------
// Engine

namespace {

struct QubitRank {
    QubitId qubit;
    double min;
    double mean;
};

// Worst performer over every record touching a qubit (not only the measured
// camp): a bad routing or visited qubit must be attributable too.
std::optional<QubitId> worst_touched_qubit(const std::vector<FidelityRecord>& records) {
    std::map<QubitId, std::pair<double, std::pair<double, std::size_t>>> stats;  // min, (sum, n)
    for (const FidelityRecord& r : records) {
        for (QubitId q : r.touched) {
            auto [it, fresh] = stats.try_emplace(q, std::make_pair(r.fidelity,
                                                                   std::make_pair(0.0, 0u)));
            it->second.first = std::min(it->second.first, r.fidelity);
            it->second.second.first += r.fidelity;
            it->second.second.second += 1;
        }
    }
    if (stats.empty()) return std::nullopt;
    std::vector<QubitRank> ranked;
    for (const auto& [q, s] : stats) {
        ranked.push_back({q, s.first, s.second.first / s.second.second});
    }
    std::sort(ranked.begin(), ranked.end(), [](const QubitRank& a, const QubitRank& b) {
        if (a.min != b.min) return a.min < b.min;
        if (a.mean != b.mean) return a.mean < b.mean;
        return a.qubit < b.qubit;
    });
    return ranked.front().qubit;
}

class Engine {
public:
    Engine(const WorkflowConfig& cfg, Backend& backend, const ResultsLog* resume,
           ResultsLog& out)
        : cfg_(cfg), backend_(backend), resume_(resume), out_(out) {
        if (resume_ && !resume_->manifest.config_hash.empty() &&
            resume_->manifest.config_hash != cfg_.config_hash) {
            throw ConfigError("resume log was produced by a different configuration");
        }
        const std::string stamp = resume_ ? resume_->manifest.created_at
                                  : !cfg_.timestamp.empty() ? cfg_.timestamp
                                                            : now_utc_iso();
        out_.manifest.schema = kResultsSchema;
        out_.manifest.device = cfg_.device.name;
        out_.manifest.backend = backend_.kind();
        out_.manifest.seed = cfg_.seed;
        out_.manifest.config_hash = cfg_.config_hash;
        out_.manifest.created_at = stamp;
        out_.manifest.run_id = resume_ ? resume_->manifest.run_id
                                       : stable_hash_hex(cfg_.config_hash + ":" +
                                                         std::to_string(cfg_.seed) + ":" + stamp);
        out_.manifest.conventions = {
            {"bell_state", "phi_plus"},
            {"bell_estimator", "(1+xx-yy+zz)/4"},
            {"input_ensemble", "axial6-aligned"},
            {"ghz_estimator", "population-plus-parity"},
        };
        if (resume_) {
            build_resume_index();
        }
        report_.run_id = out_.manifest.run_id;
        report_.device_name = cfg_.device.name;
        report_.timestamp = out_.manifest.created_at;
        report_.lattice = !cfg_.device.all_to_all();
        report_.seed = cfg_.seed;
    }

    WorkflowReport run() {
        if (cfg_.device.all_to_all()) {
            run_ion();
        } else {
            run_lattice();
        }
        order_rows();
        return report_;
    }

private:
    using CountsBySetting = std::map<std::string, CountsTable>;

    void build_resume_index() {
        for (const CountsRecord& r : resume_->records) {
            const std::string key = stage_key(r.protocol, r.stage, r.take) + "|" +
                                    path_id_from_flat(r.protocol, r.path) + "|" + r.setting;
            resume_index_[key] = r.counts;
        }
    }

    bool budget_left() const {
        return cfg_.max_stages == 0 || executed_stages_ < cfg_.max_stages;
    }

    int takes_for(const ProtocolId& id, const std::string& stage, int* use) const {
        for (const RetakeSpec& r : cfg_.retakes) {
            if (r.protocol == id && r.stage == stage) {
                *use = r.use;
                return r.takes;
            }
        }
        *use = 1;
        return 1;
    }

    // Executes (or resumes) one stage take and appends its records to the log.
    std::vector<FidelityRecord> run_take(const ProtocolId& id, const std::string& stage,
                                         int take,
                                         const std::vector<ProtocolInstance>& instances) {
        const std::string key = stage_key(id, stage, take);
        const std::uint64_t stage_seed =
            RandomStream::derive(cfg_.seed, stable_hash64(key), static_cast<std::uint64_t>(take));

        std::vector<Circuit> circuits;
        std::vector<std::pair<std::size_t, std::string>> slots;  // instance, setting
        for (std::size_t i = 0; i < instances.size(); ++i) {
            for (Circuit c : circuits_for_instance(instances[i])) {
                slots.emplace_back(i, c.meta.setting);
                c.meta.protocol = key;
                c.device_qubits = cfg_.device.num_qubits;
                circuits.push_back(std::move(c));
            }
        }

        std::vector<CountsTable> counts;
        const bool resumable = resume_ && resume_->stage_complete(id, stage, take);
        if (resumable) {
            counts.reserve(circuits.size());
            for (const Circuit& c : circuits) {
                const std::string rk = c.meta.protocol + "|" + c.meta.path_id + "|" +
                                       c.meta.setting;
                auto it = resume_index_.find(rk);
                if (it == resume_index_.end()) {
                    throw ConfigError("resume log marks " + key +
                                      " complete but lacks circuit " + c.meta.path_id + "/" +
                                      c.meta.setting);
                }
                counts.push_back(it->second);
            }
        } else {
            ExecutionRequest request;
            request.device = &cfg_.device;
            request.circuits = circuits;
            request.shots = cfg_.shots;
            request.master_seed = stage_seed;
            request.noise = cfg_.noise;
            counts = backend_.execute(request);
        }

        // Log lines for this take, then its completion marker.
        for (std::size_t i = 0; i < circuits.size(); ++i) {
            CountsRecord rec;
            rec.run_id = out_.manifest.run_id;
            rec.device = cfg_.device.name;
            rec.backend = out_.manifest.backend;
            rec.protocol = id;
            rec.stage = stage;
            rec.take = take;
            rec.path = instances[slots[i].first].flat_path;
            rec.setting = slots[i].second;
            rec.shots = counts[i].shots;
            rec.counts = counts[i];
            rec.timestamp = out_.manifest.created_at;
            rec.seed = stage_seed;
            if (cfg_.log_circuits) rec.circuit = circuits[i];
            out_.records.push_back(std::move(rec));
        }
        out_.completed.push_back({id, stage, take, circuits.size()});
        ++executed_stages_;

        // Fold each instance's settings into one fidelity record.
        std::vector<FidelityRecord> records;
        std::vector<CountsBySetting> grouped(instances.size());
        for (std::size_t i = 0; i < circuits.size(); ++i) {
            grouped[slots[i].first][slots[i].second] = counts[i];
        }
        for (std::size_t i = 0; i < instances.size(); ++i) {
            const ProtocolInstance& inst = instances[i];
            const FidelityValue fv = estimate_instance_fidelity(id, grouped[i]);
            FidelityRecord r;
            r.id = id;
            r.stage = stage;
            r.take = take;
            r.camp = inst.measured_camp;
            r.touched = inst.touched;
            r.rectangle = inst.rectangle;
            r.fidelity = fv.value;
            r.stderr_ = fv.stderr_;
            r.shots = cfg_.shots * grouped[i].size();
            records.push_back(std::move(r));
        }
        return records;
    }

    // One logical stage including its retakes; returns the gating records.
    std::vector<FidelityRecord> run_stage(const ProtocolId& id, const std::string& stage,
                                          const std::vector<ProtocolInstance>& instances,
                                          AggregationKey::Kind keying,
                                          const std::vector<int>& entering_rects,
                                          const std::vector<QubitId>& entering_qubits,
                                          StageResult** gating_result) {
        int use = 1;
        const int takes = takes_for(id, stage, &use);
        std::vector<FidelityRecord> gating_records;
        *gating_result = nullptr;
        std::size_t gating_index = 0;

        for (int take = 1; take <= takes; ++take) {
            std::vector<FidelityRecord> records = run_take(id, stage, take, instances);

            StageResult sr;
            sr.protocol = id;
            sr.stage = stage;
            sr.take = take;
            sr.used_for_gating = (take == use);
            sr.threshold = cfg_.threshold(id);
            sr.keying = keying;
            sr.entering_rectangles = entering_rects;
            sr.entering_qubits = entering_qubits;
            sr.estimates = aggregate(records, keying);
            sr.passes = stage_pass(sr.estimates, sr.threshold);
            for (const auto& [k, ok] : sr.passes) {
                if (!ok) continue;
                if (k.kind == AggregationKey::Kind::Rectangle) {
                    sr.surviving_rectangles.push_back(k.rectangle);
                } else if (k.kind == AggregationKey::Kind::Qubit) {
                    sr.surviving_qubits.push_back(k.qubit);
                }
            }
            sr.records = records;
            if (take == use) gating_records = std::move(records);
            report_.stages.push_back(std::move(sr));
            if (take == use) gating_index = report_.stages.size() - 1;
        }
        *gating_result = &report_.stages[gating_index];
        return gating_records;
    }

    void set_row(const ProtocolId& id, RowStatus status, std::vector<QubitId> qubits,
                 std::vector<int> rects, double metric) {
        ProtocolOutcome row;
        row.id = id;
        row.status = status;
        row.subchip_qubits = std::move(qubits);
        row.subchip_rectangles = std::move(rects);
        row.metric = metric;
        rows_[protocol_name(id)] = std::move(row);
    }

    void order_rows() {
        report_.rows.clear();
        for (const ProtocolId& id : canonical_protocols()) {
            auto it = rows_.find(protocol_name(id));
            if (it != rows_.end()) report_.rows.push_back(it->second);
        }
        // any non-canonical entries keep deterministic name order
        for (const auto& [name, row] : rows_) {
            const bool canonical = std::any_of(
                canonical_protocols().begin(), canonical_protocols().end(),
                [&](const ProtocolId& id) { return protocol_name(id) == name; });
            if (!canonical) report_.rows.push_back(row);
        }
    }

    static double min_fidelity(const std::vector<FidelityRecord>& records) {
        double out = std::numeric_limits<double>::infinity();
        for (const FidelityRecord& r : records) out = std::min(out, r.fidelity);
        return out;
    }

    // -- all-to-all ---------------------------------------------------------

    void run_ion() {
        std::vector<QubitId> all;
        for (QubitId q = 0; q < cfg_.device.num_qubits; ++q) all.push_back(q);
        const ProtocolId transmit{ProtocolKind::Transmit, {}};
        const ProtocolId do_nothing{ProtocolKind::DoNothing, {}};

        StageResult* sr = nullptr;
        if (!budget_left()) {
            report_.complete = false;
            return;
        }
        auto recs_t = run_stage(transmit, "all_pairs", ion_pair_instances(transmit, all),
                                AggregationKey::Kind::Qubit, {}, all, &sr);
        if (!budget_left()) {
            report_.complete = false;
            return;
        }
        auto recs_d = run_stage(do_nothing, "all_pairs", ion_pair_instances(do_nothing, all),
                                AggregationKey::Kind::Qubit, {}, all, &sr);

        // Worst-k selection over both filter protocols together.
        std::vector<FidelityRecord> combined = recs_t;
        combined.insert(combined.end(), recs_d.begin(), recs_d.end());
        const auto per_qubit = aggregate(combined, AggregationKey::Kind::Qubit);
        const auto excluded_vec =
            select_worst_qubits(per_qubit, static_cast<std::size_t>(cfg_.k_exclude));
        const std::set<QubitId> excluded(excluded_vec.begin(), excluded_vec.end());
        report_.stage1_excluded = excluded_vec;

        std::vector<QubitId> reduced;
        for (QubitId q : all) {
            if (!excluded.count(q)) reduced.push_back(q);
        }

        // Digital re-aggregation of the existing records on the reduced chip.
        bool verified = true;
        auto filter_stage = [&](const ProtocolId& id,
                                const std::vector<FidelityRecord>& records) {
            StageResult fs;
            fs.protocol = id;
            fs.stage = "all_pairs_filtered";
            fs.threshold = cfg_.threshold(id);
            fs.keying = AggregationKey::Kind::Qubit;
            fs.entering_qubits = reduced;
            fs.estimates = reduce_and_reaggregate(records, excluded, AggregationKey::Kind::Qubit);
            fs.passes = stage_pass(fs.estimates, fs.threshold);
            for (const auto& [k, ok] : fs.passes) {
                if (ok) fs.surviving_qubits.push_back(k.qubit);
            }
            for (const FidelityRecord& r : records) {
                const bool hit = std::any_of(r.touched.begin(), r.touched.end(),
                                             [&](QubitId q) { return excluded.count(q) > 0; });
                if (!hit) fs.records.push_back(r);
            }
            const bool all_pass = fs.surviving_qubits.size() == fs.estimates.size();
            verified = verified && all_pass;

            if (all_pass) {
                set_row(id, RowStatus::Passed, reduced, {}, min_fidelity(fs.records));
            } else {
                greedy_row(id, fs.records, reduced);
            }
            report_.stages.push_back(std::move(fs));
            return all_pass;
        };
        const bool t_ok = filter_stage(transmit, recs_t);
        const bool d_ok = filter_stage(do_nothing, recs_d);
        report_.stage1_verified = verified;

        const auto t_est = report_.stages[report_.stages.size() - 2].surviving_qubits;
        const auto d_est = report_.stages.back().surviving_qubits;
        if (t_est.empty() && d_est.empty()) {
            // Nothing survived the filters; running entangling protocols on a
            // chip with no working qubit teaches nothing.
            report_.terminated_early = true;
            return;
        }
        (void)t_ok;
        (void)d_ok;

        // Bell first, then both generalized families in rising M, then the
        // optional cat states; all on the fixed reduced chip.
        const std::vector<ProtocolId> step4 = {
            {ProtocolKind::BellTransfer, {}},  {ProtocolKind::GenTransmit, {2, 0}},
            {ProtocolKind::GenTransmit, {3, 0}}, {ProtocolKind::GenDoNothing, {2, 0}},
            {ProtocolKind::GenDoNothing, {3, 0}}, {ProtocolKind::CatState, {3, 2}},
            {ProtocolKind::CatState, {4, 2}},
        };
        for (const ProtocolId& id : step4) {
            if (!cfg_.has_protocol(id)) continue;
            if (!budget_left()) {
                report_.complete = false;
                return;
            }
            if (reduced.size() < min_instance_qubits(id)) {
                set_row(id, RowStatus::Failed, {}, {}, 0.0);
                continue;
            }
            StageResult* stage_result = nullptr;
            auto records = run_stage(id, "reduced",
                                     ion_camp_instances(id, reduced, cfg_.partner_limit),
                                     AggregationKey::Kind::Camp, {}, reduced, &stage_result);
            greedy_row(id, records, reduced);
        }
    }

    // Greedy search for the maximal qubit set whose every camp passes: drop
    // the worst touched qubit until everything left clears the threshold.
    void greedy_row(const ProtocolId& id, const std::vector<FidelityRecord>& records,
                    const std::vector<QubitId>& start_set) {
        std::set<QubitId> current(start_set.begin(), start_set.end());
        const double threshold = cfg_.threshold(id);
        const std::size_t min_size = min_instance_qubits(id);

        while (current.size() >= min_size) {
            std::vector<FidelityRecord> valid;
            for (const FidelityRecord& r : records) {
                const bool inside = std::all_of(r.touched.begin(), r.touched.end(),
                                                [&](QubitId q) { return current.count(q) > 0; });
                if (inside) valid.push_back(r);
            }
            if (valid.empty()) break;
            const double lowest = min_fidelity(valid);
            if (lowest >= threshold) {
                set_row(id, RowStatus::Passed,
                        std::vector<QubitId>(current.begin(), current.end()), {}, lowest);
                return;
            }
            const auto worst = worst_touched_qubit(valid);
            if (!worst) break;
            current.erase(*worst);
        }
        set_row(id, RowStatus::Failed, {}, {}, 0.0);
    }

    // -- lattice ------------------------------------------------------------

    std::vector<ProtocolInstance> lattice_instances(const ProtocolId& id, PathStage st,
                                                    const std::vector<int>& entering) {
        std::vector<ProtocolInstance> out;
        for (int index : entering) {
            const Rectangle& rect = rect_by_index_.at(index);
            for (const QubitPath& path : enumerate_paths(rect, st)) {
                if (auto inst = lattice_instance(id, path, index)) {
                    out.push_back(std::move(*inst));
                }
            }
        }
        return out;
    }

    // c2c -> M-L -> A-L with rectangle elimination. Returns the survivors and
    // collects every gating record of the protocol for its metric.
    std::vector<int> full_assessment(const ProtocolId& id, std::vector<int> entering,
                                     std::vector<PathStage> stages,
                                     std::vector<FidelityRecord>& all_records, bool* aborted) {
        *aborted = false;
        for (PathStage st : stages) {
            if (entering.empty()) return entering;
            if (!budget_left()) {
                report_.complete = false;
                *aborted = true;
                return entering;
            }
            StageResult* sr = nullptr;
            auto records = run_stage(id, stage_name(st), lattice_instances(id, st, entering),
                                     AggregationKey::Kind::Rectangle, entering, {}, &sr);
            all_records.insert(all_records.end(), records.begin(), records.end());
            entering = sr->surviving_rectangles;
        }
        return entering;
    }

    void lattice_row(const ProtocolId& id, const std::vector<int>& survivors,
                     const std::vector<FidelityRecord>& all_records, bool conducted) {
        if (!conducted) return;  // row stays absent -> not_run
        if (survivors.empty()) {
            set_row(id, RowStatus::Failed, {}, {}, 0.0);
            return;
        }
        // Average over surviving cells of each cell's minimum across every
        // inner path tested in the full assessment.
        double sum = 0.0;
        for (int r : survivors) {
            double cell_min = std::numeric_limits<double>::infinity();
            for (const FidelityRecord& rec : all_records) {
                if (rec.rectangle == r) cell_min = std::min(cell_min, rec.fidelity);
            }
            sum += cell_min;
        }
        set_row(id, RowStatus::Passed, {}, survivors, sum / survivors.size());
    }

    void run_lattice() {
        const auto rects = partition_rectangles(cfg_.device);
        std::vector<int> all;
        for (const Rectangle& r : rects) {
            rect_by_index_[r.index] = r;
            all.push_back(r.index);
        }

        const ProtocolId transmit{ProtocolKind::Transmit, {}};
        const ProtocolId do_nothing{ProtocolKind::DoNothing, {}};

        // Filtration: transmit c2c, then do-nothing c2c on its survivors.
        bool aborted = false;
        std::vector<FidelityRecord> t_records, d_records;
        std::vector<int> s1 = full_assessment(transmit, all, {PathStage::C2C}, t_records,
                                              &aborted);
        if (aborted) return;
        if (s1.empty()) {
            report_.terminated_early = true;
            set_row(transmit, RowStatus::Failed, {}, {}, 0.0);
            return;
        }
        std::vector<int> s2 = full_assessment(do_nothing, s1, {PathStage::C2C}, d_records,
                                              &aborted);
        if (aborted) return;
        if (s2.empty()) {
            report_.terminated_early = true;
            set_row(transmit, RowStatus::Failed, {}, {}, 0.0);
            set_row(do_nothing, RowStatus::Failed, {}, {}, 0.0);
            return;
        }

        // Full assessments for the three base protocols on the filter
        // survivors, then the generalized chains on each branch's survivors.
        std::vector<int> t_surv = full_assessment(transmit, s2,
                                                  {PathStage::ML, PathStage::AL}, t_records,
                                                  &aborted);
        if (aborted) return;
        lattice_row(transmit, t_surv, t_records, true);

        std::vector<int> d_surv = full_assessment(do_nothing, s2,
                                                  {PathStage::ML, PathStage::AL}, d_records,
                                                  &aborted);
        if (aborted) return;
        lattice_row(do_nothing, d_surv, d_records, true);

        const ProtocolId bell{ProtocolKind::BellTransfer, {}};
        std::vector<int> b_surv;
        if (cfg_.has_protocol(bell)) {
            std::vector<FidelityRecord> recs;
            b_surv = full_assessment(bell, s2, {PathStage::C2C, PathStage::ML, PathStage::AL},
                                     recs, &aborted);
            if (aborted) return;
            lattice_row(bell, b_surv, recs, true);
        }

        auto generalized_chain = [&](ProtocolKind kind, const std::vector<int>& base) {
            ProtocolId m2{kind, {2, 0}};
            ProtocolId m3{kind, {3, 0}};
            std::vector<int> m2_surv;
            if (cfg_.has_protocol(m2) && !base.empty()) {
                std::vector<FidelityRecord> recs;
                bool ab = false;
                m2_surv = full_assessment(m2, base,
                                          {PathStage::C2C, PathStage::ML, PathStage::AL}, recs,
                                          &ab);
                if (ab) return;
                lattice_row(m2, m2_surv, recs, true);
            }
            if (cfg_.has_protocol(m3) && !m2_surv.empty()) {
                std::vector<FidelityRecord> recs;
                bool ab = false;
                const auto m3_surv = full_assessment(
                    m3, m2_surv, {PathStage::C2C, PathStage::ML, PathStage::AL}, recs, &ab);
                if (ab) return;
                lattice_row(m3, m3_surv, recs, true);
            }
        };

        generalized_chain(ProtocolKind::GenTransmit, t_surv);
        if (!report_.complete) return;
        generalized_chain(ProtocolKind::GenDoNothing, d_surv);
        if (!report_.complete) return;

        const ProtocolId cat3{ProtocolKind::CatState, {3, 2}};
        const ProtocolId cat4{ProtocolKind::CatState, {4, 2}};
        std::vector<int> c3_surv;
        if (cfg_.has_protocol(cat3) && !b_surv.empty()) {
            std::vector<FidelityRecord> recs;
            c3_surv = full_assessment(cat3, b_surv,
                                      {PathStage::C2C, PathStage::ML, PathStage::AL}, recs,
                                      &aborted);
            if (aborted) return;
            lattice_row(cat3, c3_surv, recs, true);
        }
        if (cfg_.has_protocol(cat4) && !c3_surv.empty()) {
            std::vector<FidelityRecord> recs;
            const auto c4_surv = full_assessment(
                cat4, c3_surv, {PathStage::C2C, PathStage::ML, PathStage::AL}, recs, &aborted);
            if (aborted) return;
            lattice_row(cat4, c4_surv, recs, true);
        }
    }

    const WorkflowConfig& cfg_;
    Backend& backend_;
    const ResultsLog* resume_;
    ResultsLog& out_;
    WorkflowReport report_;
    std::map<std::string, ProtocolOutcome> rows_;
    std::map<std::string, CountsTable> resume_index_;
    std::map<int, Rectangle> rect_by_index_;
    int executed_stages_ = 0;
};

}  // namespace

WorkflowReport run_workflow(const WorkflowConfig& config, Backend& backend,
                            const ResultsLog* resume_from, ResultsLog& log_out) {
    Engine engine(config, backend, resume_from, log_out);
    return engine.run();
}

WorkflowReport run_workflow(const WorkflowConfig& config, ResultsLog& log_out,
                            const ResultsLog* resume_from) {
    if (config.backend_kind == "replay") {
        const ResultsLog source = load_results(config.replay_log);
        ReplayBackend backend;
        for (const CountsRecord& r : source.records) {
            backend.add_record(stage_key(r.protocol, r.stage, r.take),
                               path_id_from_flat(r.protocol, r.path), r.setting, r.counts);
        }
        return run_workflow(config, backend, resume_from, log_out);
    }
    SimulatorBackend backend;
    return run_workflow(config, backend, resume_from, log_out);
}

// ---------------------------------------------------------------------------
// Report serialization

std::string report_to_json(const WorkflowReport& report) {
    ordered_json j;
    j["schema"] = "qpb.report.v1";
    j["run_id"] = report.run_id;
    j["device"] = report.device_name;
    j["kind"] = report.lattice ? "lattice" : "all_to_all";
    j["timestamp"] = report.timestamp;
    j["seed"] = report.seed;
    j["stage1_excluded"] = report.stage1_excluded;
    j["stage1_verified"] = report.stage1_verified;
    j["terminated_early"] = report.terminated_early;
    j["complete"] = report.complete;

    j["rows"] = ordered_json::array();
    for (const ProtocolOutcome& row : report.rows) {
        ordered_json r;
        r["protocol"] = protocol_name(row.id);
        r["label"] = protocol_label(row.id);
        r["status"] = row_status_name(row.status);
        r["subchip_qubits"] = row.subchip_qubits;
        r["subchip_rectangles"] = row.subchip_rectangles;
        r["metric"] = row.metric;
        j["rows"].push_back(std::move(r));
    }

    j["stages"] = ordered_json::array();
    for (const StageResult& s : report.stages) {
        ordered_json e;
        e["protocol"] = protocol_name(s.protocol);
        e["stage"] = s.stage;
        e["take"] = s.take;
        e["used_for_gating"] = s.used_for_gating;
        e["threshold"] = s.threshold;
        e["entering_rectangles"] = s.entering_rectangles;
        e["surviving_rectangles"] = s.surviving_rectangles;
        e["entering_qubits"] = s.entering_qubits;
        e["surviving_qubits"] = s.surviving_qubits;
        e["estimates"] = ordered_json::array();
        for (const FidelityEstimate& est : s.estimates) {
            ordered_json o;
            o["key"] = est.key.text();
            o["mean"] = est.mean;
            o["min"] = est.min;
            o["max"] = est.max;
            o["stderr"] = est.stderr_;
            o["n"] = est.n_circuits;
            e["estimates"].push_back(std::move(o));
        }
        j["stages"].push_back(std::move(e));
    }
    return j.dump(2) + "\n";
}

WorkflowReport report_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("report is not valid JSON: ") + e.what());
    }
    if (j.value("schema", "") != "qpb.report.v1") {
        throw ConfigError("report schema '" + j.value("schema", std::string("<missing>")) +
                          "' not supported (expected 'qpb.report.v1')");
    }
    WorkflowReport report;
    report.run_id = j.value("run_id", "");
    report.device_name = j.value("device", "");
    report.lattice = j.value("kind", "lattice") == "lattice";
    report.timestamp = j.value("timestamp", "");
    report.seed = j.value("seed", std::uint64_t{0});
    report.stage1_verified = j.value("stage1_verified", true);
    report.terminated_early = j.value("terminated_early", false);
    report.complete = j.value("complete", true);
    if (j.contains("stage1_excluded")) {
        report.stage1_excluded = j.at("stage1_excluded").get<std::vector<QubitId>>();
    }
    for (const auto& r : j.value("rows", json::array())) {
        ProtocolOutcome row;
        row.id = protocol_from_name(r.at("protocol").get<std::string>());
        row.status = row_status_from_name(r.at("status").get<std::string>());
        if (r.contains("subchip_qubits")) {
            row.subchip_qubits = r.at("subchip_qubits").get<std::vector<QubitId>>();
        }
        if (r.contains("subchip_rectangles")) {
            row.subchip_rectangles = r.at("subchip_rectangles").get<std::vector<int>>();
        }
        row.metric = r.value("metric", 0.0);
        report.rows.push_back(std::move(row));
    }
    return report;
}

}  // namespace qpb
