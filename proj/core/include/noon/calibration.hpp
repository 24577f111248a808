#pragma once

// Recovers interferometer parameters from a fringe scan: arm transmissions
// from the zero-phase count ratios, visibility from the coincidence fringe,
// per-phase transmissions by least squares on the normalized probabilities,
// and the double-pair fraction from the per-pulse detection rate.

#include <cstdint>
#include <optional>
#include <vector>

#include "noon/model.hpp"
#include "noon/simulator.hpp"

namespace noon::calib {

struct ZeroPhaseTransmissions {
    double eta_r = 0.0;
    double eta_r_err = 0.0;
    double eta_t = 0.0;
    double eta_t_err = 0.0;
};

/// eta_r = c11/(c11+c20), eta_t = c11/(c11+c02) with binomial errors.
/// Throws CalibrationError when c11 == 0.
ZeroPhaseTransmissions transmissions_at_zero(const sim::EventCounts& counts);

struct VisibilityFit {
    double visibility = 0.0;
    double visibility_err = 0.0;
    /// Mean coincidence rate A of A(1 + v cos(2phi + phi0)) + B.
    double amplitude = 0.0;
    double phase_offset = 0.0;
    /// Not separable from A with a single fringe; reported as 0.
    double baseline = 0.0;
    double residual = 0.0;
    bool converged = false;
};

/// Least-squares fit to the coincidence rate c11/pulses (c11/recorded when
/// pulses are unknown). Needs >= 8 phases covering a full fringe period.
VisibilityFit fit_visibility(const sim::FringeScan& scan);

enum class Weighting : std::uint8_t {
    /// Plain squared residuals of normalized probabilities.
    Unweighted,
    /// Residuals weighted by recorded events / p (Pearson chi-square).
    CountWeighted,
};

struct FitOptions {
    Weighting weighting = Weighting::Unweighted;
    /// Per-phase transmission fits with a standard error above this are
    /// treated as ill-conditioned and carry no weight in the profile.
    double conditioning_limit = 0.02;
    /// Fourier order of the smooth transmission profile (0 = constant).
    int profile_order = 2;
    /// Known double-pair fraction, modelled in every row.
    double xi = 0.0;
};

/// Per-phase, unsmoothed transmission fit.
struct PhaseTransmissionFit {
    double phi = 0.0;
    double eta_t = 0.0;
    double eta_t_err = 0.0;
    double eta_r = 0.0;
    double eta_r_err = 0.0;
    bool well_conditioned = false;
};

struct CalibrationCurves {
    InterferometerModel model;
    double visibility_err = 0.0;
    double xi_err = 0.0;
    bool xi_estimated = false;

    /// Constant-transmission fit over every row.
    double eta_t_global = 1.0;
    double eta_t_global_err = 0.0;
    double eta_r_global = 1.0;
    double eta_r_global_err = 0.0;

    /// Profile standard errors at the grid phases of model.eta_t/eta_r.
    std::vector<double> eta_t_err;
    std::vector<double> eta_r_err;
    std::vector<PhaseTransmissionFit> per_phase;

    double variation_t = 0.0;
    double variation_r = 0.0;
    double residual = 0.0;
    double phase_offset = 0.0;
    double baseline = 0.0;
    std::size_t evaluations = 0;
    bool converged = false;

    [[nodiscard]] double worst_variation() const noexcept {
        return variation_t > variation_r ? variation_t : variation_r;
    }
};

/// Exact curves for a known model (no fit, zero uncertainties).
CalibrationCurves curves_from_model(const InterferometerModel& model);

/// Visibility from the coincidence fringe, then per-phase transmissions by
/// least squares and a smooth profile through them. Rows whose per-phase fit is
/// ill-conditioned (near the coincidence minima) keep wide error bars and do
/// not pull the profile. The apparent fringe visibility is mapped back to the
/// two-photon visibility given the global transmissions and options.xi.
/// Throws CalibrationError on failure.
CalibrationCurves fit_model(const sim::FringeScan& scan, const FitOptions& options = {});

/// Visibility the plain fringe fit would report for noiseless data from
/// `model` at `phases` (double pairs and transmission variation included).
double apparent_visibility(const InterferometerModel& model, std::span<const double> phases);

struct CalibrateOptions {
    FitOptions fit;
    /// Single-pair probability per pulse; enables the xi estimate.
    std::optional<double> pair_prob;
    /// Fixed xi, overriding any estimate.
    std::optional<double> xi;
    double xi_err = 0.0;
    int max_iterations = 6;
};

/// fit_model with xi either fixed or estimated from the detection rate,
/// alternating fit and estimate until xi settles. Estimates are clamped to
/// [0, 0.1].
CalibrationCurves calibrate(const sim::FringeScan& scan, const CalibrateOptions& options);

struct XiEstimate {
    double xi = 0.0;
    double xi_err = 0.0;
};

/// Inverts the per-pulse detection probability
///   r = 1 - (1-d)^2 [ (1 - p(1+xi)) + p(1-e1) + p xi (1-e1)^2 ]
/// for xi, where p is the independently measured single-pair probability and
/// e1 the probability that one pair clicks at `phi`. The result is not
/// clamped at zero so that it stays unbiased.
XiEstimate estimate_xi(std::uint64_t total_detections, std::uint64_t pulses,
                       const CalibrationCurves& curves, Phase phi, double pair_prob);

/// Same inversion pooled over every scan row (rows without pulse counts are
/// skipped).
XiEstimate estimate_xi(const sim::FringeScan& scan, const CalibrationCurves& curves,
                       double pair_prob);

/// Probability that a single emitted pair produces at least one click.
double single_pair_detection_prob(const InterferometerModel& model, Phase phi);

} // namespace noon::calib
