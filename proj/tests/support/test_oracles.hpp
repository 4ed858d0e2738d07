// Independent reference implementations used only by tests. These must stay
// decoupled from the library code paths they check.
#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <vector>

#include "qpb/circuit.hpp"
#include "qpb/counts.hpp"
#include "qpb/density.hpp"
#include "qpb/statevector.hpp"

namespace qpb::testing {

// All shortest paths between every ordered vertex pair of an undirected
// graph, via BFS predecessor DAGs.
inline std::vector<std::vector<QubitId>> all_shortest_paths(
    const std::map<QubitId, std::set<QubitId>>& adj) {
    std::vector<std::vector<QubitId>> result;
    for (const auto& [source, _] : adj) {
        std::map<QubitId, int> dist;
        std::map<QubitId, std::vector<QubitId>> preds;
        std::deque<QubitId> frontier{source};
        dist[source] = 0;
        while (!frontier.empty()) {
            const QubitId v = frontier.front();
            frontier.pop_front();
            for (QubitId w : adj.at(v)) {
                if (!dist.count(w)) {
                    dist[w] = dist[v] + 1;
                    frontier.push_back(w);
                }
                if (dist[w] == dist[v] + 1) preds[w].push_back(v);
            }
        }
        for (const auto& [target, _2] : adj) {
            if (target == source) continue;
            // walk the predecessor DAG backwards
            std::vector<std::vector<QubitId>> partial{{target}};
            while (true) {
                std::vector<std::vector<QubitId>> next;
                bool done = true;
                for (const auto& p : partial) {
                    if (p.back() == source) {
                        next.push_back(p);
                        continue;
                    }
                    done = false;
                    for (QubitId pred : preds.at(p.back())) {
                        auto ext = p;
                        ext.push_back(pred);
                        next.push_back(std::move(ext));
                    }
                }
                partial = std::move(next);
                if (done) break;
            }
            for (auto& p : partial) {
                std::reverse(p.begin(), p.end());
                result.push_back(std::move(p));
            }
        }
    }
    return result;
}

// The classical intercept-resend channel: measure in Z, re-prepare. Returns
// the single-qubit transfer fidelity averaged over the six axial states.
inline double intercept_resend_average_fidelity() {
    double total = 0.0;
    const Axis axes[] = {Axis::Z, Axis::X, Axis::Y};
    int n = 0;
    for (Axis axis : axes) {
        for (bool positive : {true, false}) {
            DensityMatrix rho(1);
            rho.apply_gate(prep_axial(0, axis, positive));
            rho.dephase_z(0);
            // rotate the prepared basis back onto Z and read the match odds
            Gate undo = basis_change(0, axis == Axis::X   ? BasisKind::X
                                        : axis == Axis::Y ? BasisKind::Y
                                                          : BasisKind::Z);
            rho.apply_gate(undo);
            const auto probs = rho.measure_distribution({0});
            total += positive ? probs[0] : probs[1];
            ++n;
        }
    }
    return total / n;
}

inline double tv_distance(const CountsTable& counts, const std::vector<double>& probs) {
    double tv = 0.0;
    for (std::size_t o = 0; o < probs.size(); ++o) {
        std::string bits(counts.num_bits, '0');
        for (std::size_t b = 0; b < counts.num_bits; ++b) {
            if ((o >> b) & 1u) bits[b] = '1';
        }
        const auto it = counts.counts.find(bits);
        const double empirical =
            it == counts.counts.end()
                ? 0.0
                : static_cast<double>(it->second) / static_cast<double>(counts.shots);
        tv += std::abs(empirical - probs[o]);
    }
    return tv / 2.0;
}

inline StateVector evolve(const Circuit& c, int n) {
    StateVector sv(n);
    for (const Gate& g : c.gates) sv.apply_gate(g);
    return sv;
}

}  // namespace qpb::testing
