#pragma once

#include <stdexcept>
#include <string>

namespace shellgate {

// Bad CLI/config values: unknown enum strings, out-of-range knobs,
// malformed rules files.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Unreadable or malformed input data (corpora, captures, model files).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Violated call contract: dimension mismatches, bad preconditions.
class ContractError : public std::logic_error {
public:
    explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

// Training could not proceed or diverged.
class TrainError : public std::runtime_error {
public:
    explicit TrainError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace shellgate
