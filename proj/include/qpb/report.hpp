#pragma once

#include <string>
#include <vector>

#include "qpb/workflow.hpp"

namespace qpb {

enum class TableFormat { CSV, Markdown };

/// Fidelity rendering used in tables: up to three decimals, trailing zeros
/// trimmed ("0.75", "0.806", "0.5").
std::string format_fidelity(double value);

/// Cross-architecture comparison table, one row per protocol in fixed order.
/// All-to-all devices contribute (sub-chip size, min fidelity) columns,
/// lattices (sub-chip count, average min fidelity). A "-" cell means the
/// protocol ran but left no surviving sub-chip; an empty cell means it never
/// ran. Reports sharing a device name collapse to the latest timestamp, with
/// a note appended to `warnings`.
std::string emit_comparison_table(const std::vector<WorkflowReport>& reports, TableFormat format,
                                  std::vector<std::string>* warnings = nullptr);

}  // namespace qpb
