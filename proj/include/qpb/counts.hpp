#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace qpb {

/// Shot tallies keyed by outcome bitstring. Character j of a key is the
/// outcome of the j-th measured qubit ('0' or '1'); counts sum to `shots`.
struct CountsTable {
    std::map<std::string, std::uint64_t> counts;
    std::uint64_t shots = 0;
    std::size_t num_bits = 0;

    bool operator==(const CountsTable&) const = default;

    void add(const std::string& bitstring, std::uint64_t n = 1) {
        counts[bitstring] += n;
        shots += n;
    }
};

}  // namespace qpb
