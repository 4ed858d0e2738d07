#include "qpb/topology.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qpb/errors.hpp"
#include "support/test_oracles.hpp"

using namespace qpb;

namespace {

std::string device_path(const std::string& name) {
    return std::string(QPB_SOURCE_DIR) + "/devices/" + name;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST(LoadDevice, AllToAllDescriptor) {
    const DeviceTopology dev = load_device_file(device_path("ibex-like.json"));
    EXPECT_TRUE(dev.all_to_all());
    EXPECT_EQ(dev.num_qubits, 12u);
    EXPECT_EQ(swap_distance(dev, 0, 11), 1);
    EXPECT_EQ(swap_distance(dev, 3, 9), 1);
}

TEST(LoadDevice, HeavyHexDescriptors) {
    const DeviceTopology eagle = load_device_file(device_path("eagle-like.json"));
    EXPECT_EQ(eagle.num_qubits, 127u);
    EXPECT_EQ(eagle.edges.size(), 144u);
    const DeviceTopology heron = load_device_file(device_path("heron-like.json"));
    EXPECT_EQ(heron.num_qubits, 156u);
}

TEST(LoadDevice, RejectsSelfLoop) {
    const std::string bad = R"({"name":"bad","num_qubits":6,
        "connectivity":[[0,1],[1,2],[2,3],[3,4],[4,5],[5,5]]})";
    EXPECT_THROW(load_device(bad), ConfigError);
}

TEST(LoadDevice, RejectsDisconnectedGraph) {
    const std::string bad = R"({"name":"bad","num_qubits":4,
        "connectivity":[[0,1],[2,3]]})";
    EXPECT_THROW(load_device(bad), ConfigError);
}

TEST(LoadDevice, RejectsOutOfRangeEdge) {
    const std::string bad = R"({"name":"bad","num_qubits":3,
        "connectivity":[[0,1],[1,2],[2,9]]})";
    EXPECT_THROW(load_device(bad), ConfigError);
}

TEST(LoadDevice, RejectsUnknownConnectivity) {
    const std::string bad = R"({"name":"bad","num_qubits":3,"connectivity":"star"})";
    EXPECT_THROW(load_device(bad), ConfigError);
}

TEST(Rectangles, CountsMatchDeviceFamilies) {
    const auto eagle = partition_rectangles(load_device_file(device_path("eagle-like.json")));
    EXPECT_EQ(eagle.size(), 18u);
    const auto heron = partition_rectangles(load_device_file(device_path("heron-like.json")));
    EXPECT_EQ(heron.size(), 21u);
    for (std::size_t i = 0; i < heron.size(); ++i) {
        EXPECT_EQ(heron[i].index, static_cast<int>(i) + 1);
    }
}

TEST(Rectangles, AllToAllRejected) {
    const DeviceTopology dev = load_device_file(device_path("ibex-like.json"));
    EXPECT_THROW(partition_rectangles(dev), ConfigError);
}

TEST(Rectangles, CellsAreValidTwelveCycles) {
    const DeviceTopology dev = load_device_file(device_path("eagle-like.json"));
    for (const Rectangle& r : partition_rectangles(dev)) {
        std::set<QubitId> distinct(r.cycle.begin(), r.cycle.end());
        EXPECT_EQ(distinct.size(), 12u);
        for (int i = 0; i < 12; ++i) {
            EXPECT_TRUE(dev.has_edge(r.cycle[i], r.cycle[(i + 1) % 12]));
        }
        // corners sit at cycle positions 0, 4, 6, 10: antipodal pairs
        EXPECT_EQ(r.corners[0], r.cycle[0]);
        EXPECT_EQ(r.corners[1], r.cycle[4]);
        EXPECT_EQ(r.corners[2], r.cycle[6]);
        EXPECT_EQ(r.corners[3], r.cycle[10]);
    }
}

TEST(Rectangles, StableUnderEdgePermutation) {
    nlohmann::json j = nlohmann::json::parse(slurp(device_path("eagle-like.json")));
    auto edges = j["connectivity"];
    std::reverse(edges.begin(), edges.end());
    for (auto& e : edges) std::swap(e[0], e[1]);  // also flip every pair
    j["connectivity"] = edges;
    const auto original = partition_rectangles(load_device_file(device_path("eagle-like.json")));
    const auto permuted = partition_rectangles(load_device(j.dump()));
    ASSERT_EQ(original.size(), permuted.size());
    for (std::size_t i = 0; i < original.size(); ++i) {
        EXPECT_EQ(original[i].cycle, permuted[i].cycle);
        EXPECT_EQ(original[i].corners, permuted[i].corners);
        EXPECT_EQ(original[i].index, permuted[i].index);
    }
}

TEST(Rectangles, NoCellsFoundIsAnError) {
    // a plain line with an embedding has no 12-cycle cells
    nlohmann::json j;
    j["name"] = "line";
    j["num_qubits"] = 13;
    auto edges = nlohmann::json::array();
    auto embedding = nlohmann::json::array();
    for (int i = 0; i < 13; ++i) {
        if (i + 1 < 13) edges.push_back({i, i + 1});
        embedding.push_back({0, i});
    }
    j["connectivity"] = edges;
    j["embedding"] = embedding;
    EXPECT_THROW(partition_rectangles(load_device(j.dump())), ConfigError);

    // without embedding or override, extraction cannot identify corners
    j.erase("embedding");
    EXPECT_THROW(partition_rectangles(load_device(j.dump())), ConfigError);
}

TEST(Rectangles, ExplicitOverrideWins) {
    // A 12-cycle ring device with the cell spelled out by hand.
    nlohmann::json j;
    j["name"] = "ring";
    j["num_qubits"] = 12;
    auto edges = nlohmann::json::array();
    for (int i = 0; i < 12; ++i) edges.push_back({i, (i + 1) % 12});
    j["connectivity"] = edges;
    j["rectangles"] = {{{"index", 1},
                        {"cycle", {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}},
                        {"corners", {0, 4, 6, 10}}}};
    const auto rects = partition_rectangles(load_device(j.dump()));
    ASSERT_EQ(rects.size(), 1u);
    EXPECT_EQ(rects[0].corners[2], 6u);
}

class PathEnumeration : public ::testing::Test {
protected:
    void SetUp() override {
        device_ = load_device_file(device_path("heron-like.json"));
        rects_ = partition_rectangles(device_);
    }
    DeviceTopology device_;
    std::vector<Rectangle> rects_;
};

TEST_F(PathEnumeration, StageCountsForEveryRectangle) {
    for (const Rectangle& r : rects_) {
        EXPECT_EQ(enumerate_paths(r, PathStage::C2C).size(), 8u);
        EXPECT_EQ(enumerate_paths(r, PathStage::ML).size(), 24u);
        EXPECT_EQ(enumerate_paths(r, PathStage::AL).size(), 144u);
    }
}

TEST_F(PathEnumeration, CornerPathsHaveSevenQubits) {
    for (const QubitPath& p : enumerate_paths(rects_[0], PathStage::C2C)) {
        EXPECT_EQ(p.qubits.size(), 7u);
        const auto& corners = rects_[0].corners;
        EXPECT_TRUE(std::count(corners.begin(), corners.end(), p.qubits.front()) == 1);
        EXPECT_TRUE(std::count(corners.begin(), corners.end(), p.qubits.back()) == 1);
    }
}

TEST_F(PathEnumeration, MaximalPathsHaveSevenQubits) {
    for (const QubitPath& p : enumerate_paths(rects_[0], PathStage::ML)) {
        EXPECT_EQ(p.qubits.size(), 7u);
    }
}

TEST_F(PathEnumeration, PathsAreSimpleAndDeviceConsistent) {
    for (PathStage stage : {PathStage::C2C, PathStage::ML, PathStage::AL}) {
        for (const QubitPath& p : enumerate_paths(rects_[2], stage)) {
            std::set<QubitId> distinct(p.qubits.begin(), p.qubits.end());
            EXPECT_EQ(distinct.size(), p.qubits.size());
            EXPECT_GE(p.qubits.size(), 2u);
            EXPECT_LE(p.qubits.size(), 7u);
            for (std::size_t i = 0; i + 1 < p.qubits.size(); ++i) {
                EXPECT_TRUE(device_.has_edge(p.qubits[i], p.qubits[i + 1]));
            }
        }
    }
}

TEST_F(PathEnumeration, Deterministic) {
    const auto a = enumerate_paths(rects_[4], PathStage::AL);
    const auto b = enumerate_paths(rects_[4], PathStage::AL);
    EXPECT_EQ(a, b);
}

TEST_F(PathEnumeration, AllLengthsSplitsIntoUniqueAndAntipodal) {
    const auto paths = enumerate_paths(rects_[0], PathStage::AL);
    std::map<std::pair<QubitId, QubitId>, int> route_count;
    for (const QubitPath& p : paths) {
        route_count[{p.qubits.front(), p.qubits.back()}]++;
    }
    int unique = 0, doubled = 0;
    for (const auto& [pair, n] : route_count) {
        if (n == 1) ++unique;
        if (n == 2) ++doubled;
        EXPECT_LE(n, 2);
    }
    EXPECT_EQ(unique, 120);
    EXPECT_EQ(doubled, 12);  // 12 antipodal ordered pairs contribute 24 paths
}

TEST_F(PathEnumeration, AllLengthsMatchesBruteForceOracle) {
    const Rectangle& rect = rects_[7];
    std::map<QubitId, std::set<QubitId>> ring;
    for (int i = 0; i < 12; ++i) {
        ring[rect.cycle[i]].insert(rect.cycle[(i + 1) % 12]);
        ring[rect.cycle[(i + 1) % 12]].insert(rect.cycle[i]);
    }
    auto expected = qpb::testing::all_shortest_paths(ring);
    auto actual_paths = enumerate_paths(rect, PathStage::AL);
    std::vector<std::vector<QubitId>> actual;
    for (const QubitPath& p : actual_paths) actual.push_back(p.qubits);
    std::sort(expected.begin(), expected.end());
    std::sort(actual.begin(), actual.end());
    EXPECT_EQ(actual, expected);
}

TEST(SwapDistance, PathAndGraphQueries) {
    const DeviceTopology dev = load_device_file(device_path("heron-like.json"));
    const auto rects = partition_rectangles(dev);
    const Rectangle& r = rects[0];
    EXPECT_EQ(swap_distance(dev, r.corners[0], r.corners[2]), 6);
    EXPECT_EQ(swap_distance(dev, r.cycle[0], r.cycle[1]), 1);
    const QubitPath long_way{
        {r.cycle[0], r.cycle[11], r.cycle[10], r.cycle[9], r.cycle[8], r.cycle[7], r.cycle[6]},
        PathStage::C2C};
    EXPECT_EQ(swap_distance(dev, r.cycle[0], r.cycle[6], &long_way), 6);
    EXPECT_THROW(swap_distance(dev, 3, 3), InvalidArgument);
    EXPECT_THROW(swap_distance(dev, r.cycle[1], r.cycle[6], &long_way), InvalidArgument);
}
