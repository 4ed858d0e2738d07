#include "qpb/topology.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qpb/errors.hpp"

namespace qpb {

using nlohmann::json;

std::string stage_name(PathStage stage) {
    switch (stage) {
        case PathStage::C2C: return "c2c";
        case PathStage::ML: return "ml";
        case PathStage::AL: return "al";
    }
    return "?";
}

PathStage stage_from_name(const std::string& name) {
    if (name == "c2c") return PathStage::C2C;
    if (name == "ml") return PathStage::ML;
    if (name == "al") return PathStage::AL;
    throw ConfigError("unknown path stage '" + name + "' (expected c2c, ml or al)");
}

bool DeviceTopology::has_edge(QubitId a, QubitId b) const {
    if (a == b) return false;
    if (all_to_all()) return a < num_qubits && b < num_qubits;
    if (a > b) std::swap(a, b);
    return std::binary_search(edges.begin(), edges.end(), std::make_pair(a, b));
}

const std::vector<QubitId>& DeviceTopology::neighbors(QubitId q) const {
    return adjacency_.at(q);
}

void DeviceTopology::rebuild_adjacency() {
    adjacency_.assign(num_qubits, {});
    for (const auto& [a, b] : edges) {
        adjacency_[a].push_back(b);
        adjacency_[b].push_back(a);
    }
    for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
}

void NoiseModel::validate() const {
    auto check = [](double p, const std::string& what) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw ConfigError("noise probability out of range for " + what);
        }
    };
    check(p1_default, "p1");
    check(p2_default, "p2");
    check(readout_default, "readout");
    for (const auto& [q, p] : p1_overrides) check(p, "p1 override of qubit " + std::to_string(q));
    for (const auto& [e, p] : p2_overrides) {
        check(p, "p2 override of edge " + std::to_string(e.first) + "-" + std::to_string(e.second));
    }
    for (const auto& [q, p] : readout_overrides) {
        check(p, "readout override of qubit " + std::to_string(q));
    }
}

namespace {

NoiseModel parse_noise(const json& j, std::uint32_t num_qubits,
                       const DeviceTopology* edge_check) {
    NoiseModel noise;
    if (j.contains("p1")) noise.p1_default = j.at("p1").get<double>();
    if (j.contains("p2")) noise.p2_default = j.at("p2").get<double>();
    if (j.contains("readout")) noise.readout_default = j.at("readout").get<double>();

    auto parse_qubit_map = [&](const char* key, std::map<QubitId, double>& out) {
        if (!j.contains(key)) return;
        for (const auto& [qs, v] : j.at(key).items()) {
            const long q = std::stol(qs);
            if (q < 0 || q >= static_cast<long>(num_qubits)) {
                throw ConfigError(std::string(key) + " references unknown qubit " + qs);
            }
            out[static_cast<QubitId>(q)] = v.get<double>();
        }
    };
    parse_qubit_map("p1_overrides", noise.p1_overrides);
    parse_qubit_map("readout_overrides", noise.readout_overrides);

    if (j.contains("p2_overrides")) {
        for (const auto& [es, v] : j.at("p2_overrides").items()) {
            const auto dash = es.find('-');
            if (dash == std::string::npos) {
                throw ConfigError("p2_overrides key must look like \"a-b\", got '" + es + "'");
            }
            QubitId a = static_cast<QubitId>(std::stoul(es.substr(0, dash)));
            QubitId b = static_cast<QubitId>(std::stoul(es.substr(dash + 1)));
            if (a == b || a >= num_qubits || b >= num_qubits) {
                throw ConfigError("p2_overrides references invalid edge '" + es + "'");
            }
            if (edge_check && !edge_check->all_to_all() && !edge_check->has_edge(a, b)) {
                throw ConfigError("p2_overrides references non-existent edge '" + es + "'");
            }
            if (a > b) std::swap(a, b);
            noise.p2_overrides[{a, b}] = v.get<double>();
        }
    }
    noise.validate();
    return noise;
}

Rectangle parse_rectangle(const json& j) {
    Rectangle rect;
    rect.index = j.at("index").get<int>();
    const auto cycle = j.at("cycle").get<std::vector<QubitId>>();
    const auto corners = j.at("corners").get<std::vector<QubitId>>();
    if (cycle.size() != 12) throw ConfigError("rectangle cycle must list 12 qubits");
    if (corners.size() != 4) throw ConfigError("rectangle corners must list 4 qubits");
    std::copy(cycle.begin(), cycle.end(), rect.cycle.begin());
    std::copy(corners.begin(), corners.end(), rect.corners.begin());
    return rect;
}

void validate_rectangle(const Rectangle& rect, const DeviceTopology& topo) {
    std::set<QubitId> distinct(rect.cycle.begin(), rect.cycle.end());
    if (distinct.size() != 12) {
        throw ConfigError("rectangle " + std::to_string(rect.index) + " repeats a qubit");
    }
    for (int i = 0; i < 12; ++i) {
        const QubitId a = rect.cycle[i];
        const QubitId b = rect.cycle[(i + 1) % 12];
        if (a >= topo.num_qubits || !topo.has_edge(a, b)) {
            throw ConfigError("rectangle " + std::to_string(rect.index) +
                              " cycle is not a closed loop of device edges");
        }
    }
    std::vector<int> corner_pos;
    for (QubitId c : rect.corners) {
        auto it = std::find(rect.cycle.begin(), rect.cycle.end(), c);
        if (it == rect.cycle.end()) {
            throw ConfigError("rectangle " + std::to_string(rect.index) +
                              " corner is not on the cycle");
        }
        corner_pos.push_back(static_cast<int>(it - rect.cycle.begin()));
    }
    std::sort(corner_pos.begin(), corner_pos.end());
    if (corner_pos[2] - corner_pos[0] != 6 || corner_pos[3] - corner_pos[1] != 6) {
        throw ConfigError("rectangle " + std::to_string(rect.index) +
                          " corners are not two antipodal pairs");
    }
}

}  // namespace

DeviceTopology load_device(const std::string& descriptor_json) {
    json j;
    try {
        j = json::parse(descriptor_json);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("device descriptor is not valid JSON: ") + e.what());
    }

    DeviceTopology topo;
    try {
        topo.name = j.at("name").get<std::string>();
        const long n = j.at("num_qubits").get<long>();
        if (n <= 0) throw ConfigError("num_qubits must be positive");
        topo.num_qubits = static_cast<std::uint32_t>(n);

        const json& conn = j.at("connectivity");
        if (conn.is_string()) {
            if (conn.get<std::string>() != "all_to_all") {
                throw ConfigError("unknown connectivity kind '" + conn.get<std::string>() + "'");
            }
            topo.connectivity = Connectivity::AllToAll;
            if (j.contains("edges")) {
                throw ConfigError("all-to-all devices must not carry an edge list");
            }
        } else if (conn.is_array()) {
            topo.connectivity = Connectivity::EdgeList;
            std::set<std::pair<QubitId, QubitId>> dedup;
            for (const auto& e : conn) {
                if (!e.is_array() || e.size() != 2) {
                    throw ConfigError("each edge must be a pair [a, b]");
                }
                const long a = e[0].get<long>();
                const long b = e[1].get<long>();
                if (a == b) {
                    throw ConfigError("self-loop on qubit " + std::to_string(a));
                }
                if (a < 0 || b < 0 || a >= n || b >= n) {
                    throw ConfigError("edge [" + std::to_string(a) + ", " + std::to_string(b) +
                                      "] references a qubit outside 0.." + std::to_string(n - 1));
                }
                QubitId lo = static_cast<QubitId>(std::min(a, b));
                QubitId hi = static_cast<QubitId>(std::max(a, b));
                dedup.insert({lo, hi});
            }
            topo.edges.assign(dedup.begin(), dedup.end());
        } else {
            throw ConfigError("connectivity must be \"all_to_all\" or an edge array");
        }

        topo.rebuild_adjacency();

        if (topo.connectivity == Connectivity::EdgeList) {
            // connectivity check
            std::vector<char> seen(topo.num_qubits, 0);
            std::deque<QubitId> frontier{0};
            seen[0] = 1;
            std::size_t reached = 1;
            while (!frontier.empty()) {
                const QubitId q = frontier.front();
                frontier.pop_front();
                for (QubitId nbr : topo.neighbors(q)) {
                    if (!seen[nbr]) {
                        seen[nbr] = 1;
                        ++reached;
                        frontier.push_back(nbr);
                    }
                }
            }
            if (reached != topo.num_qubits) {
                throw ConfigError("device graph is disconnected (" + std::to_string(reached) +
                                  " of " + std::to_string(topo.num_qubits) + " qubits reachable)");
            }
        }

        if (j.contains("embedding")) {
            const json& emb = j.at("embedding");
            if (!emb.is_array() || emb.size() != topo.num_qubits) {
                throw ConfigError("embedding must list one [row, col] entry per qubit");
            }
            topo.embedding.resize(topo.num_qubits);
            for (std::uint32_t q = 0; q < topo.num_qubits; ++q) {
                const json& pos = emb[q];
                if (pos.is_null()) continue;
                topo.embedding[q] = GridPos{pos.at(0).get<int>(), pos.at(1).get<int>()};
            }
        }

        if (j.contains("rectangles")) {
            for (const auto& r : j.at("rectangles")) {
                topo.rectangle_override.push_back(parse_rectangle(r));
            }
            for (const Rectangle& rect : topo.rectangle_override) {
                validate_rectangle(rect, topo);
            }
        }

        if (j.contains("noise")) {
            topo.noise = parse_noise(j.at("noise"), topo.num_qubits, &topo);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("device descriptor schema error: ") + e.what());
    }
    return topo;
}

DeviceTopology load_device_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open device file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return load_device(buf.str());
}

NoiseModel noise_from_json(const std::string& json_text, const DeviceTopology& device) {
    try {
        return parse_noise(json::parse(json_text), device.num_qubits, &device);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("noise block malformed: ") + e.what());
    }
}

std::vector<Rectangle> partition_rectangles(const DeviceTopology& topo) {
    if (topo.all_to_all()) {
        throw ConfigError("rectangles undefined for all-to-all devices");
    }
    if (!topo.rectangle_override.empty()) {
        auto rects = topo.rectangle_override;
        std::sort(rects.begin(), rects.end(),
                  [](const Rectangle& a, const Rectangle& b) { return a.index < b.index; });
        return rects;
    }
    if (topo.embedding.empty()) {
        throw ConfigError("rectangle extraction needs an embedding or an explicit rectangle "
                          "list in the device descriptor");
    }

    auto pos_of = [&](QubitId q) -> const GridPos& {
        if (!topo.embedding[q]) {
            throw ConfigError("embedding missing for qubit " + std::to_string(q));
        }
        return *topo.embedding[q];
    };
    std::map<std::pair<int, int>, QubitId> by_pos;
    for (std::uint32_t q = 0; q < topo.num_qubits; ++q) {
        if (topo.embedding[q]) by_pos[{pos_of(q).row, pos_of(q).col}] = q;
    }

    // A bridge couples the qubit directly above it to the one directly below.
    struct Bridge {
        QubitId id;
        int row, col;
        QubitId above, below;
    };
    std::map<int, std::vector<Bridge>> bridges_by_row;
    for (std::uint32_t q = 0; q < topo.num_qubits; ++q) {
        if (!topo.embedding[q]) continue;
        const auto& nbrs = topo.neighbors(q);
        if (nbrs.size() != 2) continue;
        const GridPos& p = pos_of(q);
        const GridPos& pa = pos_of(nbrs[0]);
        const GridPos& pb = pos_of(nbrs[1]);
        if (pa.col != p.col || pb.col != p.col) continue;
        if (!(pa.row < p.row && p.row < pb.row)) continue;
        bridges_by_row[p.row].push_back({q, p.row, p.col, nbrs[0], nbrs[1]});
    }

    std::vector<Rectangle> rects;
    for (auto& [row, bridges] : bridges_by_row) {
        std::sort(bridges.begin(), bridges.end(),
                  [](const Bridge& a, const Bridge& b) { return a.col < b.col; });
        for (std::size_t i = 0; i + 1 < bridges.size(); ++i) {
            const Bridge& left = bridges[i];
            const Bridge& right = bridges[i + 1];
            if (right.col - left.col != 4) continue;
            const int top_row = pos_of(left.above).row;
            const int bottom_row = pos_of(left.below).row;
            if (pos_of(right.above).row != top_row || pos_of(right.below).row != bottom_row) {
                continue;
            }
            std::vector<QubitId> top, bottom;
            bool complete = true;
            for (int c = left.col; c <= right.col; ++c) {
                auto t = by_pos.find({top_row, c});
                auto b = by_pos.find({bottom_row, c});
                if (t == by_pos.end() || b == by_pos.end()) {
                    complete = false;
                    break;
                }
                top.push_back(t->second);
                bottom.push_back(b->second);
            }
            if (!complete) continue;
            for (std::size_t c = 0; c + 1 < top.size() && complete; ++c) {
                complete = topo.has_edge(top[c], top[c + 1]) &&
                           topo.has_edge(bottom[c], bottom[c + 1]);
            }
            if (!complete) continue;

            Rectangle rect;
            int pos = 0;
            for (QubitId q : top) rect.cycle[pos++] = q;           // positions 0..4
            rect.cycle[pos++] = right.id;                          // position 5
            for (auto it = bottom.rbegin(); it != bottom.rend(); ++it) {
                rect.cycle[pos++] = *it;                           // positions 6..10
            }
            rect.cycle[pos++] = left.id;                           // position 11
            rect.corners = {rect.cycle[0], rect.cycle[4], rect.cycle[6], rect.cycle[10]};
            rects.push_back(rect);
        }
    }

    if (rects.empty()) {
        throw ConfigError("no 12-cycle cells found in device '" + topo.name + "'");
    }
    std::sort(rects.begin(), rects.end(), [&](const Rectangle& a, const Rectangle& b) {
        const GridPos& pa = pos_of(a.cycle[0]);
        const GridPos& pb = pos_of(b.cycle[0]);
        return std::tie(pa.row, pa.col) < std::tie(pb.row, pb.col);
    });
    for (std::size_t i = 0; i < rects.size(); ++i) {
        rects[i].index = static_cast<int>(i) + 1;
        validate_rectangle(rects[i], topo);
    }
    return rects;
}

namespace {

// Walk the 12-cycle from position `start`, `count` vertices in direction +-1.
std::vector<QubitId> cycle_walk(const Rectangle& rect, int start, int step, int count) {
    std::vector<QubitId> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        out.push_back(rect.cycle[((start + i * step) % 12 + 12) % 12]);
    }
    return out;
}

}  // namespace

std::vector<QubitPath> enumerate_paths(const Rectangle& rect, PathStage stage) {
    std::vector<std::vector<QubitId>> raw;

    switch (stage) {
        case PathStage::C2C: {
            // Two antipodal corner pairs, two routes around, both directions.
            const int corner_pos[4] = {0, 4, 6, 10};
            for (int pair = 0; pair < 2; ++pair) {
                const int a = corner_pos[pair];
                for (int start : {a, (a + 6) % 12}) {
                    raw.push_back(cycle_walk(rect, start, +1, 7));
                    raw.push_back(cycle_walk(rect, start, -1, 7));
                }
            }
            break;
        }
        case PathStage::ML: {
            for (int start = 0; start < 12; ++start) {
                raw.push_back(cycle_walk(rect, start, +1, 7));
                raw.push_back(cycle_walk(rect, start, -1, 7));
            }
            break;
        }
        case PathStage::AL: {
            for (int a = 0; a < 12; ++a) {
                for (int b = 0; b < 12; ++b) {
                    if (a == b) continue;
                    const int fwd = ((b - a) % 12 + 12) % 12;
                    const int dist = std::min(fwd, 12 - fwd);
                    if (dist == 6) {
                        raw.push_back(cycle_walk(rect, a, +1, 7));
                        raw.push_back(cycle_walk(rect, a, -1, 7));
                    } else {
                        raw.push_back(cycle_walk(rect, a, fwd == dist ? +1 : -1, dist + 1));
                    }
                }
            }
            break;
        }
    }

    std::sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) {
        if (a.front() != b.front()) return a.front() < b.front();
        if (a.back() != b.back()) return a.back() < b.back();
        return a < b;
    });

    std::vector<QubitPath> paths;
    paths.reserve(raw.size());
    for (auto& qubits : raw) {
        paths.push_back(QubitPath{std::move(qubits), stage});
    }
    return paths;
}

int swap_distance(const DeviceTopology& topo, QubitId a, QubitId b, const QubitPath* path) {
    if (a == b) throw InvalidArgument("swap distance undefined for a qubit and itself");
    if (a >= topo.num_qubits || b >= topo.num_qubits) {
        throw InvalidArgument("qubit outside device");
    }
    if (topo.all_to_all()) return 1;
    if (path) {
        if (path->qubits.empty() || path->qubits.front() != a || path->qubits.back() != b) {
            throw InvalidArgument("path endpoints do not match the queried qubits");
        }
        return static_cast<int>(path->qubits.size()) - 1;
    }
    std::vector<int> dist(topo.num_qubits, -1);
    std::deque<QubitId> frontier{a};
    dist[a] = 0;
    while (!frontier.empty()) {
        const QubitId q = frontier.front();
        frontier.pop_front();
        if (q == b) return dist[q];
        for (QubitId nbr : topo.neighbors(q)) {
            if (dist[nbr] < 0) {
                dist[nbr] = dist[q] + 1;
                frontier.push_back(nbr);
            }
        }
    }
    throw InvalidArgument("qubits are not connected");
}

}  // namespace qpb
