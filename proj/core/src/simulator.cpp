#include "noon/simulator.hpp"

#include <algorithm>
#include <string>

#include "noon/parallel.hpp"

namespace noon::sim {

namespace {

constexpr std::uint64_t kPulseChunk = 1ULL << 24;

} // namespace

void SourceConfig::validate() const {
    model.validate();
    if (!(pair_prob >= 0.0 && pair_prob <= 1.0)) {
        throw DomainError("pair_prob must lie in [0, 1], got " + std::to_string(pair_prob));
    }
    if (emission_prob() > 1.0) {
        throw DomainError("pair_prob * (1 + xi) must not exceed 1");
    }
    if (!(rep_rate_hz > 0.0)) {
        throw DomainError("rep_rate_hz must be positive");
    }
    if (max_pulses == 0) {
        throw DomainError("max_pulses must be positive");
    }
}

void EventCounts::add(EventClass c) noexcept {
    switch (c) {
    case EventClass::C11:
        ++c11;
        break;
    case EventClass::C20:
        ++c20;
        break;
    case EventClass::C02:
        ++c02;
        break;
    }
}

EventCounts& EventCounts::operator+=(const EventCounts& o) noexcept {
    c11 += o.c11;
    c20 += o.c20;
    c02 += o.c02;
    pulses += o.pulses;
    pairs_generated += o.pairs_generated;
    return *this;
}

FringeScan::FringeScan(std::vector<ScanRow> rows) : rows_(std::move(rows)) {
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        const double phi = rows_[i].phi.radians();
        if (!(phi >= 0.0 && phi < kTwoPi)) {
            throw DomainError("scan phases must lie in [0, 2pi)");
        }
        if (i > 0 && !(phi > rows_[i - 1].phi.radians())) {
            throw DomainError("scan phases must be strictly increasing");
        }
        const EventCounts& c = rows_[i].counts;
        if (c.pulses != 0 && c.recorded() > c.pulses) {
            throw DomainError("scan row records more events than pulses");
        }
    }
}

std::vector<double> FringeScan::phases() const {
    std::vector<double> out;
    out.reserve(rows_.size());
    for (const auto& r : rows_) {
        out.push_back(r.phi.radians());
    }
    return out;
}

PulseSampler::PulseSampler(const SourceConfig& config, Phase phi)
    : q_(ideal_outcome_probs(phi, config.model.visibility)),
      eta_t_(config.model.eta_t.at(phi)),
      eta_r_(config.model.eta_r.at(phi)),
      emit_prob_(config.emission_prob()),
      double_given_emit_(config.model.xi / (1.0 + config.model.xi)),
      dark_(config.model.dark_prob) {
    config.validate();
    const double quiet_darks = (1.0 - dark_) * (1.0 - dark_);
    active_prob_ = 1.0 - (1.0 - emit_prob_) * quiet_darks;
    emit_given_active_ = active_prob_ > 0.0 ? emit_prob_ / active_prob_ : 0.0;
}

void PulseSampler::emit_pair(Rng& rng, Clicks& clicks) const {
    const double u = rng.uniform();
    if (u < q_.q11) {
        clicks.t = clicks.t || rng.bernoulli(eta_t_);
        clicks.r = clicks.r || rng.bernoulli(eta_r_);
    } else if (u < q_.q11 + q_.q20) {
        const bool a = rng.bernoulli(eta_t_);
        const bool b = rng.bernoulli(eta_t_);
        clicks.t = clicks.t || a || b;
    } else {
        const bool a = rng.bernoulli(eta_r_);
        const bool b = rng.bernoulli(eta_r_);
        clicks.r = clicks.r || a || b;
    }
}

std::uint64_t PulseSampler::emitted_pairs(Rng& rng) const {
    if (double_given_emit_ > 0.0 && rng.bernoulli(double_given_emit_)) {
        return 2;
    }
    return 1;
}

std::optional<EventClass> PulseSampler::classify(Clicks c) noexcept {
    if (c.t && c.r) {
        return EventClass::C11;
    }
    if (c.t) {
        return EventClass::C20;
    }
    if (c.r) {
        return EventClass::C02;
    }
    return std::nullopt;
}

std::optional<EventClass> PulseSampler::pulse(Rng& rng, std::uint64_t& pairs) const {
    Clicks clicks;
    if (emit_prob_ > 0.0 && rng.bernoulli(emit_prob_)) {
        const std::uint64_t m = emitted_pairs(rng);
        pairs += m;
        for (std::uint64_t i = 0; i < m; ++i) {
            emit_pair(rng, clicks);
        }
    }
    if (dark_ > 0.0) {
        clicks.t = rng.bernoulli(dark_) || clicks.t;
        clicks.r = rng.bernoulli(dark_) || clicks.r;
    }
    return classify(clicks);
}

std::optional<EventClass> PulseSampler::active_pulse(Rng& rng,
                                                     std::uint64_t& pairs) const {
    Clicks clicks;
    if (emit_given_active_ >= 1.0 || rng.bernoulli(emit_given_active_)) {
        const std::uint64_t m = emitted_pairs(rng);
        pairs += m;
        for (std::uint64_t i = 0; i < m; ++i) {
            emit_pair(rng, clicks);
        }
        if (dark_ > 0.0) {
            clicks.t = rng.bernoulli(dark_) || clicks.t;
            clicks.r = rng.bernoulli(dark_) || clicks.r;
        }
        return classify(clicks);
    }
    // No emission: at least one detector fired dark. Patterns (t), (r), (t, r)
    // have weights d(1-d), d(1-d), d^2.
    const double single = dark_ * (1.0 - dark_);
    const double both = dark_ * dark_;
    const double u = rng.uniform() * (2.0 * single + both);
    if (u < single) {
        return EventClass::C20;
    }
    if (u < 2.0 * single) {
        return EventClass::C02;
    }
    return EventClass::C11;
}

EventCounts PulseSampler::trials(Rng& rng, std::uint64_t k,
                                 std::uint64_t max_pulses) const {
    if (k == 0) {
        throw DomainError("recorded-trial target must be at least 1");
    }
    EventCounts counts;
    if (active_prob_ <= 0.0) {
        throw SimulationError("pulse guard limit exceeded: no emission or dark clicks "
                              "possible with this configuration");
    }
    const auto limit = static_cast<double>(max_pulses);
    while (counts.recorded() < k) {
        const double gap = rng.geometric(active_prob_);
        if (static_cast<double>(counts.pulses) + gap > limit) {
            throw SimulationError("pulse guard limit of " + std::to_string(max_pulses) +
                                  " pulses exceeded after " +
                                  std::to_string(counts.recorded()) + " of " +
                                  std::to_string(k) + " recorded trials");
        }
        counts.pulses += static_cast<std::uint64_t>(gap);
        if (auto c = active_pulse(rng, counts.pairs_generated)) {
            counts.add(*c);
        }
    }
    return counts;
}

EventCounts PulseSampler::pulses(Rng& rng, std::uint64_t n) const {
    EventCounts counts;
    counts.pulses = n;
    if (active_prob_ <= 0.0) {
        return counts;
    }
    const auto total = static_cast<double>(n);
    double position = 0.0;
    for (;;) {
        position += rng.geometric(active_prob_);
        if (position > total) {
            break;
        }
        if (auto c = active_pulse(rng, counts.pairs_generated)) {
            counts.add(*c);
        }
    }
    return counts;
}

std::optional<EventClass> simulate_pulse(const SourceConfig& config, Phase phi, Rng& rng) {
    std::uint64_t pairs = 0;
    return PulseSampler(config, phi).pulse(rng, pairs);
}

EventCounts simulate_trials(const SourceConfig& config, Phase phi, std::uint64_t k,
                            Rng& rng) {
    return PulseSampler(config, phi).trials(rng, k, config.max_pulses);
}

EventCounts simulate_pulses(const SourceConfig& config, Phase phi, std::uint64_t pulses,
                            std::size_t threads) {
    const PulseSampler sampler(config, phi);
    const std::uint64_t chunks = (pulses + kPulseChunk - 1) / kPulseChunk;
    std::vector<EventCounts> partial(chunks);
    parallel_for(chunks, threads, [&](std::size_t i) {
        Rng rng(config.seed, StreamDomain::PulseChunk, i);
        const std::uint64_t begin = i * kPulseChunk;
        const std::uint64_t n = std::min(kPulseChunk, pulses - begin);
        partial[i] = sampler.pulses(rng, n);
    });
    EventCounts total;
    for (const auto& p : partial) {
        total += p;
    }
    return total;
}

FringeScan simulate_scan(const SourceConfig& config, std::span<const double> phases,
                         std::uint64_t events_per_phase, std::size_t threads) {
    if (phases.empty()) {
        throw DomainError("scan needs at least one phase");
    }
    config.validate();
    std::vector<ScanRow> rows(phases.size());
    parallel_for(phases.size(), threads, [&](std::size_t i) {
        const Phase phi(phases[i]);
        Rng rng(config.seed, StreamDomain::ScanRow, i);
        rows[i].phi = phi;
        rows[i].counts = simulate_trials(config, phi, events_per_phase, rng);
        rows[i].acquisition = {Acquisition::Mode::FixedEvents, events_per_phase,
                               static_cast<double>(rows[i].counts.pulses) /
                                   config.rep_rate_hz};
    });
    return FringeScan(std::move(rows));
}

} // namespace noon::sim
