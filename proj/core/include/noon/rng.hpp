#pragma once

#include <cstdint>
#include <random>

namespace noon {

/// Independent work units draw from disjoint substreams keyed by
/// (seed, domain, index), so results do not depend on scheduling.
enum class StreamDomain : std::uint32_t {
    ScanRow = 1,
    EstimateSample = 2,
    PulseChunk = 3,
    Bootstrap = 4,
    Generic = 5,
};

/// mt19937_64 seeded through std::seed_seq with the words
/// {seed_lo, seed_hi, domain, index_lo, index_hi}. Variate transforms are
/// written out here rather than taken from <random> distributions, whose
/// output is implementation-defined.
class Rng {
public:
    static constexpr const char* kAlgorithm =
        "mt19937_64; substream seed_seq{seed_lo,seed_hi,domain,index_lo,index_hi}";

    explicit Rng(std::uint64_t seed);
    Rng(std::uint64_t seed, StreamDomain domain, std::uint64_t index);

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) noexcept { return uniform() < p; }

    /// Number of trials up to and including the first success, p in (0, 1].
    /// Returned as double so callers can detect values beyond any guard limit.
    double geometric(double p) noexcept;

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) noexcept;

    /// Standard normal variate (Marsaglia polar method).
    double normal() noexcept;

    std::uint64_t next() noexcept { return engine_(); }

private:
    std::mt19937_64 engine_;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

} // namespace noon
