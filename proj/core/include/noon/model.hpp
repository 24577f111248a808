#pragma once

// Analytic model of the N=2 NOON polarization interferometer: ideal two-photon
// outcome probabilities, per-photon loss, renormalization over recorded events
// and the per-outcome "at least one click" efficiencies used for resource
// accounting.

#include <span>
#include <vector>

#include "noon/phase.hpp"

namespace noon {

inline constexpr int kPhotonNumber = 2;
inline constexpr double kProbabilityTolerance = 1e-12;
/// Largest allowed max/min ratio of an angle-dependent transmission profile.
inline constexpr double kMaxTransmissionVariation = 1.02;
inline constexpr double kMaxXi = 0.1;
inline constexpr double kMaxDarkProb = 1e-3;

/// Arm efficiency, either constant or tabulated over phase with linear
/// interpolation. Tabulated profiles are periodic in 2pi.
class TransmissionProfile {
public:
    TransmissionProfile() = default;

    static TransmissionProfile constant(double eta);
    /// `phis` strictly increasing in [0, 2pi), one value per grid point.
    static TransmissionProfile tabulated(std::vector<double> phis,
                                         std::vector<double> values);

    [[nodiscard]] double at(Phase phi) const;
    [[nodiscard]] bool is_constant() const noexcept { return phis_.empty(); }
    [[nodiscard]] double min() const noexcept;
    [[nodiscard]] double max() const noexcept;
    /// max/min - 1.
    [[nodiscard]] double variation() const noexcept { return max() / min() - 1.0; }

    [[nodiscard]] std::span<const double> grid() const noexcept { return phis_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

    /// Same shape, every value multiplied by `factor` and clamped to (0, 1].
    [[nodiscard]] TransmissionProfile scaled(double factor) const;
    /// Same shape, every value shifted by `delta` and clamped to (0, 1].
    [[nodiscard]] TransmissionProfile shifted(double delta) const;

private:
    std::vector<double> phis_;
    std::vector<double> values_{1.0};
};

struct InterferometerModel {
    double visibility = 1.0;
    TransmissionProfile eta_t = TransmissionProfile::constant(1.0);
    TransmissionProfile eta_r = TransmissionProfile::constant(1.0);
    /// Double-pair emission probability relative to single-pair.
    double xi = 0.0;
    /// Per-pulse, per-detector dark-click probability (simulator only).
    double dark_prob = 0.0;
    int photon_number = kPhotonNumber;

    /// Throws DomainError when any field leaves its validity range.
    void validate() const;

    [[nodiscard]] bool has_constant_transmission() const noexcept {
        return eta_t.is_constant() && eta_r.is_constant();
    }
};

/// Pre-loss outcome probabilities of the two photons.
struct OutcomeDistribution {
    double q11 = 0.0;
    double q20 = 0.0;
    double q02 = 0.0;
};

/// Per-pair probabilities of each recorded event class, plus the
/// distribution renormalized over recorded events.
struct RecordedDistribution {
    double P11 = 0.0;
    double P20 = 0.0;
    double P02 = 0.0;
    double Pnone = 0.0;
    double p11 = 0.0;
    double p20 = 0.0;
    double p02 = 0.0;

    [[nodiscard]] double detected() const noexcept { return P11 + P20 + P02; }
};

struct OutcomeEfficiencies {
    double eta11 = 1.0;
    double eta20 = 1.0;
    double eta02 = 1.0;

    [[nodiscard]] double min() const noexcept;
};

/// q11 = (1 + v cos 2phi)/2, q20 = q02 = (1 - v cos 2phi)/4.
OutcomeDistribution ideal_outcome_probs(Phase phi, double visibility);

/// Independent Bernoulli loss per photon, non-number-resolving detectors.
RecordedDistribution lossy_event_probs(const OutcomeDistribution& q, double eta_t,
                                       double eta_r);

RecordedDistribution recorded_probs(const InterferometerModel& model, Phase phi);

/// Event-class probabilities per emission when a fraction xi/(1+xi) of
/// emissions carries two independent pairs whose clicks are unioned by the
/// non-number-resolving detectors. Equals `single` when xi = 0.
RecordedDistribution with_double_pairs(const RecordedDistribution& single, double xi);

/// recorded_probs combined with the model's double-pair fraction; this is the
/// distribution a recorded trial actually follows.
RecordedDistribution emission_probs(const InterferometerModel& model, Phase phi);

/// Probability that each outcome class yields at least one click.
OutcomeEfficiencies outcome_efficiencies(double eta_t, double eta_r);

/// Lowest of the three outcome efficiencies at `phi`.
double eta_min(const InterferometerModel& model, Phase phi);

/// eta^N v^2 N; a value above 1 signals a possible quantum advantage.
double resch_criterion(double eta, double visibility, int photon_number);

} // namespace noon
