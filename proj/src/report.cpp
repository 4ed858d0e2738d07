#include "qpb/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "qpb/errors.hpp"

namespace qpb {

namespace {

const std::vector<ProtocolId>& table_rows() {
    static const std::vector<ProtocolId> kRows = {
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
    return kRows;
}

struct Cell {
    std::string subchip;  // size or count; "-" failed; "" not run
    std::string value;    // fidelity metric with the same conventions
    std::string status;
};

Cell cell_for(const WorkflowReport& report, const ProtocolId& id) {
    for (const ProtocolOutcome& row : report.rows) {
        if (!(row.id == id)) continue;
        Cell c;
        c.status = row_status_name(row.status);
        switch (row.status) {
            case RowStatus::Passed: {
                const std::size_t size = report.lattice ? row.subchip_rectangles.size()
                                                        : row.subchip_qubits.size();
                c.subchip = std::to_string(size);
                c.value = format_fidelity(row.metric);
                break;
            }
            case RowStatus::Failed:
                c.subchip = "-";
                c.value = "-";
                break;
            case RowStatus::NotRun: break;
        }
        return c;
    }
    Cell c;
    c.status = row_status_name(RowStatus::NotRun);
    return c;
}

std::vector<const WorkflowReport*> dedup_latest(const std::vector<WorkflowReport>& reports,
                                                std::vector<std::string>* warnings) {
    std::vector<const WorkflowReport*> kept;
    std::map<std::string, std::size_t> by_device;  // device -> index into kept
    for (const WorkflowReport& r : reports) {
        auto it = by_device.find(r.device_name);
        if (it == by_device.end()) {
            by_device[r.device_name] = kept.size();
            kept.push_back(&r);
            continue;
        }
        const WorkflowReport* previous = kept[it->second];
        const WorkflowReport* winner =
            r.timestamp >= previous->timestamp ? &r : previous;  // ISO strings sort by time
        if (warnings) {
            warnings->push_back("device '" + r.device_name + "' appears in runs " +
                                previous->run_id + " and " + r.run_id + "; keeping " +
                                winner->run_id + " (latest timestamp)");
        }
        kept[it->second] = winner;
    }
    return kept;
}

}  // namespace

std::string format_fidelity(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", value);
    std::string s(buf);
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
}

std::string emit_comparison_table(const std::vector<WorkflowReport>& reports,
                                  TableFormat format, std::vector<std::string>* warnings) {
    if (reports.empty()) throw InvalidArgument("comparison table needs at least one report");
    const auto kept = dedup_latest(reports, warnings);

    std::ostringstream out;
    if (format == TableFormat::CSV) {
        out << "protocol,device,metric_kind,subchip,value,status\n";
        for (const ProtocolId& id : table_rows()) {
            for (const WorkflowReport* r : kept) {
                const Cell c = cell_for(*r, id);
                out << protocol_name(id) << ',' << r->device_name << ','
                    << (r->lattice ? "avg_min_fidelity" : "min_fidelity") << ',' << c.subchip
                    << ',' << c.value << ',' << c.status << '\n';
            }
        }
        return out.str();
    }

    out << "| Protocol |";
    for (const WorkflowReport* r : kept) {
        if (r->lattice) {
            out << ' ' << r->device_name << " Sub-Chips | " << r->device_name
                << " Avg Min F. |";
        } else {
            out << ' ' << r->device_name << " Sub-Chip Size | " << r->device_name
                << " Min F. |";
        }
    }
    out << '\n' << "| --- |";
    for (std::size_t i = 0; i < kept.size(); ++i) out << " --- | --- |";
    out << '\n';
    for (const ProtocolId& id : table_rows()) {
        out << "| " << protocol_label(id) << " |";
        for (const WorkflowReport* r : kept) {
            const Cell c = cell_for(*r, id);
            out << (c.subchip.empty() ? " " : ' ' + c.subchip + ' ') << '|'
                << (c.value.empty() ? " " : ' ' + c.value + ' ') << '|';
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace qpb
