#pragma once

#include <stdexcept>
#include <string>

namespace noon {

/// Input outside a model's validity domain (visibility, efficiency, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Monte Carlo run could not finish, e.g. the pulse guard limit was hit.
class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Calibration fit failed or the data cannot support it.
class CalibrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed configuration or input file.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace noon
