#pragma once

#include <stdexcept>
#include <string>

namespace qmfs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ConfigErrorKind {
    NegativeRate,
    EfficiencyOutOfRange,
    ProtocolCavityMismatch,
    InvalidSqueezing,
    InvalidTime,
    NonFinite,
    Parse,
};

inline const char* to_string(ConfigErrorKind kind) {
    switch (kind) {
    case ConfigErrorKind::NegativeRate: return "NegativeRate";
    case ConfigErrorKind::EfficiencyOutOfRange: return "EfficiencyOutOfRange";
    case ConfigErrorKind::ProtocolCavityMismatch: return "ProtocolCavityMismatch";
    case ConfigErrorKind::InvalidSqueezing: return "InvalidSqueezing";
    case ConfigErrorKind::InvalidTime: return "InvalidTime";
    case ConfigErrorKind::NonFinite: return "NonFinite";
    case ConfigErrorKind::Parse: return "Parse";
    }
    return "Unknown";
}

/// Rejected configuration. `field()` names the offending entry using the
/// JSON key path, e.g. "cavities[1].kappa".
class ConfigError : public Error {
public:
    ConfigError(ConfigErrorKind kind, std::string field, const std::string& detail)
        : Error(std::string(to_string(kind)) + " at '" + field + "': " + detail),
          kind_(kind), field_(std::move(field)) {}

    ConfigErrorKind kind() const noexcept { return kind_; }
    const std::string& field() const noexcept { return field_; }

private:
    ConfigErrorKind kind_;
    std::string field_;
};

class SingularDrift : public Error {
public:
    using Error::Error;
};

class StepSizeRejected : public Error {
public:
    using Error::Error;
};

class StepTooCoarse : public Error {
public:
    using Error::Error;
};

class RegimeViolation : public Error {
public:
    using Error::Error;
};

/// A fidelity target that cannot be met within the search limits.
class Unreachable : public Error {
public:
    using Error::Error;
};

class CutoffTooSmall : public Error {
public:
    using Error::Error;
};

class StateIdentificationAmbiguous : public Error {
public:
    using Error::Error;
};

}  // namespace qmfs
