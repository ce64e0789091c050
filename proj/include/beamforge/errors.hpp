#pragma once

#include <stdexcept>
#include <string>

namespace beamforge {

/// Invalid configuration value or inconsistent dimensions. CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Filesystem failure while reading inputs or writing results. CLI exit code 4.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Snapshot of where a training run blew up.
struct DivergenceInfo {
    int epoch = 0;
    std::string stage;
    long step = 0;
    double loss = 0.0;
    double alpha_rf = 0.0;
    double alpha_antenna = 0.0;
};

/// Loss became non-finite or exceeded the divergence bound. CLI exit code 3.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& msg, DivergenceInfo info)
        : std::runtime_error(msg), info_(std::move(info)) {}
    const DivergenceInfo& info() const noexcept { return info_; }

private:
    DivergenceInfo info_;
};

} // namespace beamforge
