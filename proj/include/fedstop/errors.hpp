#pragma once

#include <stdexcept>
#include <string>

namespace fedstop {

// Mismatched vector/matrix lengths between operands.
class DimensionError : public std::runtime_error {
public:
    explicit DimensionError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite value where a finite one is required (overflow, NaN).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration or argument combination.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// State-machine misuse (e.g. out-of-order round fed to a monitor).
class ProtocolError : public std::runtime_error {
public:
    explicit ProtocolError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem trouble while reading or emitting artifacts.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Local training produced non-finite parameters. Carries enough context to
// mark the run FAILED at the right place.
class ClientFailure : public NumericError {
public:
    ClientFailure(int round, int client_id, const std::string& what)
        : NumericError("round " + std::to_string(round) + ", client " +
                       std::to_string(client_id) + ": " + what),
          round_(round),
          client_id_(client_id) {}

    int round() const { return round_; }
    int client_id() const { return client_id_; }

private:
    int round_;
    int client_id_;
};

}  // namespace fedstop
