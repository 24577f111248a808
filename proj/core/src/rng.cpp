#include "noon/rng.hpp"

#include <cmath>

namespace noon {

namespace {

std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint32_t domain,
                              std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32), domain,
                      static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

} // namespace

Rng::Rng(std::uint64_t seed) : Rng(seed, StreamDomain::Generic, 0) {}

Rng::Rng(std::uint64_t seed, StreamDomain domain, std::uint64_t index)
    : engine_(seeded_engine(seed, static_cast<std::uint32_t>(domain), index)) {}

double Rng::geometric(double p) noexcept {
    if (p >= 1.0) {
        return 1.0;
    }
    // 1 - uniform() lies in (0, 1], so the log is finite.
    const double u = 1.0 - uniform();
    return 1.0 + std::floor(std::log(u) / std::log1p(-p));
}

std::uint64_t Rng::below(std::uint64_t n) noexcept {
    // Reject the low tail so that x % n is exactly uniform.
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        const std::uint64_t x = engine_();
        if (x >= threshold) {
            return x % n;
        }
    }
}

double Rng::normal() noexcept {
    if (has_spare_) {
        has_spare_ = false;
        return spare_normal_;
    }
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_normal_ = v * f;
    has_spare_ = true;
    return u * f;
}

} // namespace noon
