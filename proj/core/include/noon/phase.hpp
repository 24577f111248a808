#pragma once

#include <cmath>
#include <numbers>

#include "noon/error.hpp"

namespace noon {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Interferometric phase in radians. Always finite.
class Phase {
public:
    constexpr Phase() = default;
    explicit Phase(double radians) : rad_(radians) {
        if (!std::isfinite(radians)) {
            throw DomainError("phase must be finite");
        }
    }

    [[nodiscard]] constexpr double radians() const noexcept { return rad_; }

    /// Canonical representative in [0, pi); the two-photon fringe has period pi.
    [[nodiscard]] Phase reduced() const {
        double r = std::fmod(rad_, kPi);
        if (r < 0.0) {
            r += kPi;
        }
        if (r >= kPi) {
            r = 0.0;
        }
        return Phase(r);
    }

    /// Representative in [0, 2pi), the period of tabulated transmission profiles.
    [[nodiscard]] Phase wrapped() const {
        double r = std::fmod(rad_, kTwoPi);
        if (r < 0.0) {
            r += kTwoPi;
        }
        if (r >= kTwoPi) {
            r = 0.0;
        }
        return Phase(r);
    }

    friend constexpr auto operator<=>(const Phase&, const Phase&) = default;

private:
    double rad_ = 0.0;
};

} // namespace noon
