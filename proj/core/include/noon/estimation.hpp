#pragma once

// Fisher information of the three-outcome measurement, shot-noise resource
// accounting, least-squares phase estimation and sample statistics.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "noon/calibration.hpp"
#include "noon/model.hpp"
#include "noon/simulator.hpp"

namespace noon::est {

/// Step of the central differences used for tabulated transmissions.
inline constexpr double kFisherStep = 1e-5;
/// Below this a probability is treated as zero and its term replaced by the
/// analytic limit.
inline constexpr double kZeroProbability = 1e-12;

/// Per recorded trial, sum_i (d p_i/d phi)^2 / p_i. Analytic for constant
/// transmissions, finite differences otherwise.
double fisher_information(const InterferometerModel& model, Phase phi);
double fisher_information(const calib::CalibrationCurves& curves, Phase phi);

/// Closed-form derivative path; requires constant transmissions.
double fisher_information_analytic(const InterferometerModel& model, Phase phi);
/// Central finite differences on the (possibly interpolated) model.
double fisher_information_numeric(const InterferometerModel& model, Phase phi,
                                  double step = kFisherStep);

struct FisherPoint {
    double phi = 0.0;
    double fisher = 0.0;
    double f_lo = 0.0;
    double f_hi = 0.0;
    /// Unadjusted shot-noise level per recorded trial, N.
    double snl = 0.0;
    /// N (1 + xi) / eta_min(phi).
    double snl_adjusted = 0.0;
};

struct FisherCurve {
    std::vector<FisherPoint> points;
};

/// Fisher information on `phases` with a 95% band from first-order propagation
/// of the calibration uncertainties (each parameter perturbed by +-1 sigma).
FisherCurve fisher_curve(const calib::CalibrationCurves& curves,
                         std::span<const double> phases);

struct ResourceAccount {
    std::uint64_t k = 0;
    double xi = 0.0;
    double eta_min = 1.0;
    /// Actual trials, k (1 + xi) / eta_min.
    double k_tilde = 0.0;
    /// N k_tilde.
    double resources = 0.0;
    /// N k_tilde / k.
    double f_snl = 0.0;
    int photon_number = kPhotonNumber;

    [[nodiscard]] double k_tilde_ratio() const noexcept {
        return k_tilde / static_cast<double>(k);
    }
    /// Resources behind `samples` repetitions, N k_tilde s.
    [[nodiscard]] double total_resources(std::uint64_t samples) const noexcept {
        return resources * static_cast<double>(samples);
    }
};

ResourceAccount snl_adjusted(std::uint64_t k, double xi, double eta_min,
                             int photon_number = kPhotonNumber);
/// Account from an already known k_tilde / k ratio.
ResourceAccount account_from_ratio(std::uint64_t k, double k_tilde_ratio,
                                   int photon_number = kPhotonNumber);

/// 1 / sqrt(n_tot).
double snl_sem(double n_tot);

struct PhaseEstimate {
    double phi = 0.0;
    double objective = 0.0;
    /// Minimum sits on an edge of the search range.
    bool boundary = false;
};

/// Least-squares phase estimator against fixed calibration curves. The curve
/// values on the coarse grid are cached, so one instance serves many samples.
class PhaseEstimator {
public:
    static constexpr std::size_t kGridPoints = 2000;
    static constexpr double kTolerance = 1e-9;

    explicit PhaseEstimator(calib::CalibrationCurves curves, double lo = 0.0,
                            double hi = kPi / 2.0);

    /// argmin over [lo, hi] of sum_i (P_i - p_i(phi))^2 with P_i = c_i / k.
    [[nodiscard]] PhaseEstimate estimate(const sim::EventCounts& counts) const;
    [[nodiscard]] PhaseEstimate estimate(double p11, double p20, double p02) const;

    [[nodiscard]] const calib::CalibrationCurves& curves() const noexcept { return curves_; }

private:
    calib::CalibrationCurves curves_;
    double lo_;
    double hi_;
    std::vector<double> grid_;
    std::vector<std::array<double, 3>> table_;
};

PhaseEstimate estimate_phase(const sim::EventCounts& counts,
                             const calib::CalibrationCurves& curves, double lo = 0.0,
                             double hi = kPi / 2.0);

struct BootstrapResult {
    double sem = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

inline constexpr std::size_t kDefaultBootstrapResamples = 10'000;

/// Nonparametric bootstrap of the standard deviation of the mean: the point
/// value is the spread of resampled means, the interval the 2.5/97.5
/// percentiles of resampled sd/sqrt(s). Requires s >= 10 and B >= 1000.
BootstrapResult bootstrap_sem(std::span<const double> estimates,
                              std::size_t resamples = kDefaultBootstrapResamples,
                              std::uint64_t seed = 0);

struct PhaseEstimateBatch {
    std::optional<double> phi_true;
    std::vector<double> estimates;
    std::vector<std::size_t> boundary_samples;
    double mean = 0.0;
    double stddev = 0.0;
    double sem = 0.0;
    std::optional<BootstrapResult> bootstrap;
    std::uint64_t k = 0;
    ResourceAccount account;
    /// 1 / sqrt(N k_tilde s).
    double snl_sem = 0.0;
    /// Cramer-Rao expectation 1 / sqrt(s k F).
    double crb_sem = 0.0;
    double fisher = 0.0;

    [[nodiscard]] std::size_t samples() const noexcept { return estimates.size(); }
};

/// Mean, sample standard deviation and sem = sd / sqrt(s). Requires s >= 2.
PhaseEstimateBatch aggregate_samples(std::span<const double> estimates);
/// As above, with the shot-noise and Cramer-Rao benchmarks attached.
PhaseEstimateBatch aggregate_samples(std::span<const double> estimates,
                                     const ResourceAccount& account, double fisher);

struct BatchRequest {
    double phi_true = 0.0;
    std::uint64_t k = 10'000;
    std::uint64_t samples = 14'520;
    std::size_t bootstrap_resamples = kDefaultBootstrapResamples;
    std::size_t threads = 1;
};

/// Simulates `samples` independent k-trial runs at phi_true (sample j on
/// substream (seed, EstimateSample, j)), estimates each against `curves` and
/// aggregates with resource accounting taken from the calibration.
PhaseEstimateBatch run_estimation_batch(const sim::SourceConfig& truth,
                                        const calib::CalibrationCurves& curves,
                                        const BatchRequest& request);

} // namespace noon::est
