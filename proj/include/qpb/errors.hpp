#pragma once

#include <stdexcept>
#include <string>

namespace qpb {

/// Invalid descriptor, config file, or parameter combination.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Execution-side failure: unbound qubits, missing replay data, bad requests.
class BackendError : public std::runtime_error {
public:
    explicit BackendError(const std::string& what) : std::runtime_error(what) {}
};

/// Violated precondition of a library operation.
class InvalidArgument : public std::invalid_argument {
public:
    explicit InvalidArgument(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace qpb
