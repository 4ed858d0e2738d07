#pragma once

#include <cstdint>
#include <map>
#include <utility>

#include "qpb/circuit.hpp"

namespace qpb {

/// Depolarizing-plus-readout noise description. Probabilities are channel
/// parameters: a single-qubit gate is followed by a depolarizing channel of
/// strength p1 on its qubit, a two-qubit gate by strength p2 on its pair,
/// and each measured bit flips with its readout probability.
struct NoiseModel {
    double p1_default = 0.0;
    double p2_default = 0.0;
    double readout_default = 0.0;
    std::map<QubitId, double> p1_overrides;
    std::map<std::pair<QubitId, QubitId>, double> p2_overrides;  // key a < b
    std::map<QubitId, double> readout_overrides;

    double p1(QubitId q) const {
        auto it = p1_overrides.find(q);
        return it == p1_overrides.end() ? p1_default : it->second;
    }

    double p2(QubitId a, QubitId b) const {
        if (a > b) std::swap(a, b);
        auto it = p2_overrides.find({a, b});
        return it == p2_overrides.end() ? p2_default : it->second;
    }

    double readout(QubitId q) const {
        auto it = readout_overrides.find(q);
        return it == readout_overrides.end() ? readout_default : it->second;
    }

    bool is_noiseless() const {
        if (p1_default != 0.0 || p2_default != 0.0 || readout_default != 0.0) return false;
        for (const auto& [q, p] : p1_overrides)
            if (p != 0.0) return false;
        for (const auto& [e, p] : p2_overrides)
            if (p != 0.0) return false;
        for (const auto& [q, p] : readout_overrides)
            if (p != 0.0) return false;
        return true;
    }

    /// Throws ConfigError if any probability is outside [0, 1].
    void validate() const;
};

}  // namespace qpb
