#pragma once

#include <stdexcept>
#include <string>

namespace tsc {

/// A configuration value failed validation. `field()` names the offending key.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// The signal machine was driven out of order (e.g. actuated mid-interval).
class SequencingError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A required input file (model, run directory) does not exist.
class MissingArtifact : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MalformedModel : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ArchitectureMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace tsc
