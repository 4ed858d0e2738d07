#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qpb/backend.hpp"
#include "qpb/charts.hpp"
#include "qpb/errors.hpp"
#include "qpb/report.hpp"
#include "qpb/results_log.hpp"
#include "qpb/topology.hpp"
#include "qpb/workflow.hpp"

namespace fs = std::filesystem;
using namespace qpb;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitBackend = 3;
constexpr int kExitEmptySurvivors = 4;

std::vector<QubitId> parse_qubit_list(const std::string& text) {
    std::vector<QubitId> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(static_cast<QubitId>(std::stoul(item)));
    }
    if (out.empty()) throw ConfigError("expected a comma-separated qubit list");
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << content;
}

// --out flag, then the config, then QPB_OUT_DIR, then ./qpb-out.
std::string resolve_out_dir(const std::string& flag, const std::string& from_config) {
    if (!flag.empty()) return flag;
    if (!from_config.empty()) return from_config;
    if (const char* env = std::getenv("QPB_OUT_DIR"); env && *env) return env;
    return "qpb-out";
}

int cmd_topology(const std::string& device_path, bool rectangles, const std::string& paths_stage,
                 int rect_index) {
    const DeviceTopology device = load_device_file(device_path);
    std::cout << "device: " << device.name << "\n";
    std::cout << "qubits: " << device.num_qubits << "\n";
    std::cout << "connectivity: "
              << (device.all_to_all() ? "all-to-all"
                                      : "edge list (" + std::to_string(device.edges.size()) +
                                            " edges)")
              << "\n";

    if (device.all_to_all()) {
        if (rectangles || !paths_stage.empty()) {
            std::cout << "rectangles undefined for all-to-all devices\n";
        }
        return 0;
    }

    const auto rects = partition_rectangles(device);
    std::cout << "rectangles: " << rects.size() << "\n";

    if (rectangles) {
        for (const Rectangle& r : rects) {
            std::cout << "rect " << r.index << ": cycle";
            for (QubitId q : r.cycle) std::cout << ' ' << q;
            std::cout << " | corners";
            for (QubitId q : r.corners) std::cout << ' ' << q;
            std::cout << "\n";
        }
    }

    if (!paths_stage.empty()) {
        const PathStage stage = stage_from_name(paths_stage);
        const Rectangle* rect = nullptr;
        for (const Rectangle& r : rects) {
            if (r.index == rect_index) rect = &r;
        }
        if (!rect) throw ConfigError("no rectangle with index " + std::to_string(rect_index));
        const auto paths = enumerate_paths(*rect, stage);
        for (const QubitPath& p : paths) {
            for (std::size_t i = 0; i < p.qubits.size(); ++i) {
                std::cout << (i ? "-" : "") << p.qubits[i];
            }
            std::cout << "\n";
        }
        std::cout << stage_name(stage) << " paths in rect " << rect_index << ": "
                  << paths.size() << "\n";
    }
    return 0;
}

int cmd_validate(const std::string& config_path) {
    const WorkflowConfig cfg = load_workflow_config_file(config_path);
    std::cout << "OK: device " << cfg.device.name << " ("
              << (cfg.device.all_to_all() ? "all-to-all" : "lattice") << "), backend "
              << cfg.backend_kind << ", " << cfg.protocols.size() << " protocols, shots "
              << cfg.shots << ", seed " << cfg.seed << "\n";
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_flag, bool resume) {
    WorkflowConfig cfg = load_workflow_config_file(config_path);
    const std::string out_dir = resolve_out_dir(out_flag, cfg.output_dir);
    fs::create_directories(out_dir);
    fs::create_directories(out_dir + "/charts");

    ResultsLog resume_log;
    const ResultsLog* resume_ptr = nullptr;
    const std::string log_path = out_dir + "/results.jsonl";
    if (resume) {
        if (!fs::exists(log_path)) {
            throw ConfigError("--resume: no previous log at '" + log_path + "'");
        }
        resume_log = load_results(log_path);
        resume_ptr = &resume_log;
    }

    ResultsLog log;
    const WorkflowReport report = run_workflow(cfg, log, resume_ptr);

    write_results(log, log_path);
    write_file(out_dir + "/manifest.json", manifest_to_json_string(log.manifest));
    write_file(out_dir + "/report.json", report_to_json(report));
    for (const StageResult& s : report.stages) {
        ChartSpec spec;
        spec.title = report.device_name + " " + protocol_label(s.protocol) + " " + s.stage +
                     (s.take > 1 ? " take " + std::to_string(s.take) : "");
        spec.x_label = s.keying == AggregationKey::Kind::Qubit     ? "measured qubit"
                       : s.keying == AggregationKey::Kind::Camp    ? "receiving camp"
                                                                   : "rectangle";
        spec.threshold = s.threshold;
        const std::string name = report.run_id + "_" + protocol_name(s.protocol) + "_" +
                                 s.stage + (s.take > 1 ? "_t" + std::to_string(s.take) : "") +
                                 ".svg";
        write_file(out_dir + "/charts/" + name, render_bar_chart_svg(s.estimates, spec));
    }
    write_file(out_dir + "/table.md",
               emit_comparison_table({report}, TableFormat::Markdown));
    write_file(out_dir + "/table.csv", emit_comparison_table({report}, TableFormat::CSV));

    std::cout << "run " << report.run_id << " on " << report.device_name
              << (report.complete ? "" : " (stopped by max_stages)") << "\n";
    for (const ProtocolOutcome& row : report.rows) {
        std::cout << "  " << protocol_label(row.id) << ": " << row_status_name(row.status);
        if (row.status == RowStatus::Passed) {
            const std::size_t size = report.lattice ? row.subchip_rectangles.size()
                                                    : row.subchip_qubits.size();
            std::cout << " (sub-chip " << size << ", " << format_fidelity(row.metric) << ")";
        }
        std::cout << "\n";
    }
    std::cout << "artifacts in " << out_dir << "\n";
    return report.terminated_early ? kExitEmptySurvivors : 0;
}

int cmd_report(const std::vector<std::string>& report_paths, const std::string& format,
               const std::string& out_file) {
    std::vector<WorkflowReport> reports;
    for (const std::string& p : report_paths) {
        reports.push_back(report_from_json(read_file(p)));
    }
    std::vector<std::string> warnings;
    const TableFormat fmt = format == "csv" ? TableFormat::CSV : TableFormat::Markdown;
    const std::string table = emit_comparison_table(reports, fmt, &warnings);
    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
    if (out_file.empty()) {
        std::cout << table;
    } else {
        write_file(out_file, table);
        std::cout << "wrote " << out_file << "\n";
    }
    return 0;
}

int cmd_simulate(const std::string& device_path, const std::string& protocol,
                 const std::string& path_arg, std::uint64_t shots, std::uint64_t seed,
                 bool no_noise, bool print_circuit) {
    const DeviceTopology device = load_device_file(device_path);
    const ProtocolId id = protocol_from_name(protocol);
    const std::vector<QubitId> layout = parse_qubit_list(path_arg);

    ProtocolInstance inst;
    if (device.all_to_all()) {
        inst = ion_instance_from_flat(id, layout);
    } else {
        auto maybe = lattice_instance(id, QubitPath{layout, PathStage::AL}, 0);
        if (!maybe) {
            throw ConfigError("path too short for " + protocol_name(id));
        }
        inst = *maybe;
    }

    ExecutionRequest request;
    request.device = &device;
    for (Circuit c : circuits_for_instance(inst)) {
        c.device_qubits = device.num_qubits;
        request.circuits.push_back(std::move(c));
    }
    request.shots = shots;
    request.master_seed = seed;
    if (no_noise) request.noise = NoiseModel{};

    SimulatorBackend backend;
    const auto counts = backend.execute(request);

    std::map<std::string, CountsTable> by_setting;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const Circuit& c = request.circuits[i];
        by_setting[c.meta.setting] = counts[i];
        std::cout << "setting " << c.meta.setting << ":";
        for (const auto& [bits, n] : counts[i].counts) std::cout << ' ' << bits << '=' << n;
        std::cout << "\n";
        if (print_circuit) std::cout << "  " << circuit_to_json(c) << "\n";
    }

    const FidelityValue estimate = estimate_instance_fidelity(id, by_setting);
    std::cout << "estimated fidelity: " << format_fidelity(estimate.value) << " +- "
              << format_fidelity(estimate.stderr_) << "\n";

    const NoiseModel& noise = request.effective_noise();
    std::map<std::string, CountsTable> exact;
    for (const Circuit& c : request.circuits) {
        const auto lowered = lower_for_execution(c, device, noise);
        if (lowered.dense_to_device.size() > 10) {
            std::cout << "(instance too wide for the exact oracle)\n";
            exact.clear();
            break;
        }
        const auto probs = oracle_distribution(lowered);
        CountsTable table;
        table.num_bits = lowered.compact.measured.size();
        const std::uint64_t denom = 1'000'000'000ULL;
        for (std::size_t o = 0; o < probs.size(); ++o) {
            if (probs[o] <= 0.0) continue;
            std::string bits(table.num_bits, '0');
            for (std::size_t b = 0; b < table.num_bits; ++b) {
                if ((o >> b) & 1u) bits[b] = '1';
            }
            table.add(bits, static_cast<std::uint64_t>(probs[o] * denom + 0.5));
        }
        exact[c.meta.setting] = table;
    }
    if (!exact.empty()) {
        const FidelityValue oracle = estimate_instance_fidelity(id, exact);
        std::cout << "oracle fidelity: " << format_fidelity(oracle.value) << "\n";
    }
    std::cout << "threshold: " << format_fidelity(threshold_for(id)) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qpb - protocol-based quantumness benchmarking", "qpb"};
    app.set_version_flag("--version", "qpb 0.1.0");
    app.require_subcommand(1);

    // topology
    auto* topo = app.add_subcommand("topology", "Inspect a device descriptor");
    std::string topo_device;
    bool topo_rects = false;
    std::string topo_paths;
    int topo_rect_index = 1;
    topo->add_option("device", topo_device, "Device descriptor JSON")->required();
    topo->add_flag("--rectangles", topo_rects, "List the 12-qubit cells and corners");
    topo->add_option("--paths", topo_paths, "Enumerate stage paths: c2c, ml or al");
    topo->add_option("--rect", topo_rect_index, "Rectangle index for --paths (default 1)");

    // run
    auto* run = app.add_subcommand("run", "Execute the optimal-lookup workflow");
    std::string run_config, run_out;
    bool run_resume = false;
    run->add_option("config", run_config, "Run configuration JSON")->required();
    run->add_option("--out", run_out, "Output directory (overrides config and QPB_OUT_DIR)");
    run->add_flag("--resume", run_resume, "Reuse completed stages from the existing log");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Run one protocol instance on the simulator");
    std::string sim_device, sim_protocol, sim_path;
    std::uint64_t sim_shots = 1024, sim_seed = 1;
    bool sim_no_noise = false, sim_print_circuit = false;
    sim->add_option("device", sim_device, "Device descriptor JSON")->required();
    sim->add_option("--protocol", sim_protocol,
                    "Protocol id (transmit, do_nothing, bell_transfer, gen_transmit_m2, "
                    "gen_transmit_m3, gen_do_nothing_m2, gen_do_nothing_m3, cat_state_m3_j2, "
                    "cat_state_m4_j2)")
        ->required();
    sim->add_option("--path", sim_path,
                    "Comma-separated layout: a path on lattice devices, senders-then-receivers "
                    "on all-to-all devices")
        ->required();
    sim->add_option("--shots", sim_shots, "Shots per setting (default 1024)");
    sim->add_option("--seed", sim_seed, "Master seed (default 1)");
    sim->add_flag("--no-noise", sim_no_noise, "Ignore the descriptor's noise block");
    sim->add_flag("--print-circuit", sim_print_circuit, "Print each circuit as JSON");

    // report
    auto* rep = app.add_subcommand("report", "Combine run reports into a comparison table");
    std::vector<std::string> rep_paths;
    std::string rep_format = "markdown", rep_out;
    rep->add_option("reports", rep_paths, "report.json files")->required()->expected(-1);
    rep->add_option("--format", rep_format, "markdown or csv")
        ->check(CLI::IsMember({"markdown", "csv"}));
    rep->add_option("--out", rep_out, "Write the table to a file instead of stdout");

    // validate
    auto* val = app.add_subcommand("validate", "Check a run configuration");
    std::string val_config;
    val->add_option("config", val_config, "Run configuration JSON")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (topo->parsed()) {
            return cmd_topology(topo_device, topo_rects, topo_paths, topo_rect_index);
        }
        if (run->parsed()) return cmd_run(run_config, run_out, run_resume);
        if (sim->parsed()) {
            return cmd_simulate(sim_device, sim_protocol, sim_path, sim_shots, sim_seed,
                                sim_no_noise, sim_print_circuit);
        }
        if (rep->parsed()) return cmd_report(rep_paths, rep_format, rep_out);
        if (val->parsed()) return cmd_validate(val_config);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const BackendError& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return kExitBackend;
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
