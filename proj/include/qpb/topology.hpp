#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qpb/circuit.hpp"
#include "qpb/noise.hpp"

namespace qpb {

enum class Connectivity { AllToAll, EdgeList };

enum class PathStage { C2C, ML, AL };

std::string stage_name(PathStage stage);
PathStage stage_from_name(const std::string& name);

/// A 12-qubit cycle cell of a heavy-hex lattice. `cycle` walks the loop;
/// `corners` are the four bridge-attachment qubits, opposite pairs sitting
/// at cycle distance six from each other.
struct Rectangle {
    int index = 0;  // 1-based, row-major over the lattice embedding
    std::array<QubitId, 12> cycle{};
    std::array<QubitId, 4> corners{};
};

struct QubitPath {
    std::vector<QubitId> qubits;
    PathStage stage = PathStage::AL;

    std::size_t length() const { return qubits.size(); }
    bool operator==(const QubitPath&) const = default;
};

struct GridPos {
    int row = 0;
    int col = 0;
};

class DeviceTopology {
public:
    std::string name;
    std::uint32_t num_qubits = 0;
    Connectivity connectivity = Connectivity::AllToAll;
    std::vector<std::pair<QubitId, QubitId>> edges;        // a < b, sorted
    std::vector<std::optional<GridPos>> embedding;          // per qubit, may be empty
    std::vector<Rectangle> rectangle_override;              // explicit cells, optional
    NoiseModel noise;

    bool all_to_all() const { return connectivity == Connectivity::AllToAll; }
    bool has_edge(QubitId a, QubitId b) const;
    const std::vector<QubitId>& neighbors(QubitId q) const;

    void rebuild_adjacency();

private:
    std::vector<std::vector<QubitId>> adjacency_;
};

/// Parses and validates a device descriptor (JSON text). Throws ConfigError
/// on schema violations, self-loops, out-of-range qubits, or a disconnected
/// edge-list graph.
DeviceTopology load_device(const std::string& descriptor_json);
DeviceTopology load_device_file(const std::string& path);

/// Parses a noise block (as found in descriptors and run configs), checking
/// referenced qubits and edges against the device.
NoiseModel noise_from_json(const std::string& json_text, const DeviceTopology& device);

/// All 12-cycle unit cells of a heavy-hex edge-list device, indexed 1..R
/// row-major over the embedding. Uses the descriptor's explicit rectangle
/// list when present. Throws ConfigError for all-to-all devices and when no
/// cells can be identified.
std::vector<Rectangle> partition_rectangles(const DeviceTopology& topology);

/// Stage path sets of one rectangle in deterministic order (lexicographic by
/// endpoints, then by route). C2C: 8 paths, M-L: 24, A-L: 144.
std::vector<QubitPath> enumerate_paths(const Rectangle& rect, PathStage stage);

/// Number of swap gates needed to move a state from `a` to `b`: always 1 on
/// all-to-all devices, path length - 1 along an explicit path, else the
/// graph distance.
int swap_distance(const DeviceTopology& topology, QubitId a, QubitId b,
                  const QubitPath* path = nullptr);

}  // namespace qpb
