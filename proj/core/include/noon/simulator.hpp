#pragma once

// Seeded Monte Carlo of the pulsed pair source feeding the interferometer:
// single/double pair emission, per-photon loss, dark clicks and click union on
// the two non-number-resolving detectors.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "noon/model.hpp"
#include "noon/rng.hpp"

namespace noon::sim {

inline constexpr std::uint64_t kDefaultMaxPulses = 10'000'000'000ULL;
/// Operational default only; chosen to give plausible event rates.
inline constexpr double kDefaultPairProb = 0.0046;
inline constexpr double kDefaultRepRateHz = 81e6;

struct SourceConfig {
    /// Probability that a pulse yields exactly one pair.
    double pair_prob = kDefaultPairProb;
    InterferometerModel model;
    std::uint64_t seed = 0;
    double rep_rate_hz = kDefaultRepRateHz;
    /// simulate_trials gives up once this many pulses were consumed.
    std::uint64_t max_pulses = kDefaultMaxPulses;

    void validate() const;
    /// pair_prob * (1 + xi).
    [[nodiscard]] double emission_prob() const noexcept {
        return pair_prob * (1.0 + model.xi);
    }
};

enum class EventClass : std::uint8_t { C11, C20, C02 };

struct EventCounts {
    std::uint64_t c11 = 0;
    std::uint64_t c20 = 0;
    std::uint64_t c02 = 0;
    std::uint64_t pulses = 0;
    /// Ground truth, oracle-only: pairs that actually passed the phase shift.
    std::uint64_t pairs_generated = 0;

    [[nodiscard]] std::uint64_t recorded() const noexcept { return c11 + c20 + c02; }
    void add(EventClass c) noexcept;
    EventCounts& operator+=(const EventCounts& o) noexcept;
    friend bool operator==(const EventCounts&, const EventCounts&) = default;
};

/// How a scan row was acquired. `duration_s` is the acquisition period tau,
/// metadata only.
struct Acquisition {
    enum class Mode : std::uint8_t { FixedEvents, FixedPulses };
    Mode mode = Mode::FixedEvents;
    std::uint64_t target = 0;
    double duration_s = 0.0;
};

struct ScanRow {
    Phase phi;
    EventCounts counts;
    Acquisition acquisition;
};

/// Rows with strictly increasing phases in [0, 2pi).
class FringeScan {
public:
    FringeScan() = default;
    explicit FringeScan(std::vector<ScanRow> rows);

    [[nodiscard]] std::span<const ScanRow> rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t size() const noexcept { return rows_.size(); }
    [[nodiscard]] bool empty() const noexcept { return rows_.empty(); }
    [[nodiscard]] std::vector<double> phases() const;

private:
    std::vector<ScanRow> rows_;
};

/// Per-(config, phase) sampler with the probabilities precomputed.
class PulseSampler {
public:
    PulseSampler(const SourceConfig& config, Phase phi);

    /// One laser pulse, simulated literally. Adds emitted pairs to `pairs`.
    std::optional<EventClass> pulse(Rng& rng, std::uint64_t& pairs) const;

    /// Pulses until exactly `k` recorded events; empty pulses are skipped in
    /// geometric jumps, which leaves the joint distribution unchanged.
    EventCounts trials(Rng& rng, std::uint64_t k, std::uint64_t max_pulses) const;

    /// Exactly `n` pulses.
    EventCounts pulses(Rng& rng, std::uint64_t n) const;

    /// Probability that a pulse contains an emission or a dark click.
    [[nodiscard]] double active_prob() const noexcept { return active_prob_; }

private:
    struct Clicks {
        bool t = false;
        bool r = false;
    };

    void emit_pair(Rng& rng, Clicks& clicks) const;
    // Contents of a pulse known to hold an emission or a dark click.
    std::optional<EventClass> active_pulse(Rng& rng, std::uint64_t& pairs) const;
    std::uint64_t emitted_pairs(Rng& rng) const;
    static std::optional<EventClass> classify(Clicks c) noexcept;

    OutcomeDistribution q_;
    double eta_t_;
    double eta_r_;
    double emit_prob_;
    double double_given_emit_;
    double dark_;
    double active_prob_;
    double emit_given_active_;
};

std::optional<EventClass> simulate_pulse(const SourceConfig& config, Phase phi, Rng& rng);

/// Runs until exactly `k` recorded trials. Throws SimulationError when the
/// pulse guard limit is exceeded.
EventCounts simulate_trials(const SourceConfig& config, Phase phi, std::uint64_t k,
                            Rng& rng);

/// Fixed number of pulses, split into chunks on independent substreams so the
/// result is identical for any thread count.
EventCounts simulate_pulses(const SourceConfig& config, Phase phi, std::uint64_t pulses,
                            std::size_t threads = 1);

/// One row per phase, row i drawn from substream (seed, ScanRow, i).
FringeScan simulate_scan(const SourceConfig& config, std::span<const double> phases,
                         std::uint64_t events_per_phase, std::size_t threads = 1);

} // namespace noon::sim
