#pragma once

// File formats and run configuration. All angles in files are radians; all
// JSON documents carry a schema_version field.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "noon/calibration.hpp"
#include "noon/estimation.hpp"
#include "noon/simulator.hpp"

namespace noon::io {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::string_view kScanHeader = "phi_rad,c11,c20,c02,pulses,pairs_true";
inline constexpr std::string_view kFisherHeader = "phi_rad,fisher,f_lo,f_hi,snl,snl_adjusted";
inline constexpr std::string_view kSamplesHeader = "sample_id,phi_est_rad";

/// Shortest decimal text that reads back to the same double.
std::string format_double(double x);

/// "start:stop:steps" (stop excluded) or a comma-separated list. Each number may
/// carry a "pi" factor ("2pi", "0.5pi") or an explicit "deg" suffix.
std::vector<double> parse_phase_spec(std::string_view spec);

/// Single angle with the same unit rules as parse_phase_spec.
double parse_angle(std::string_view text);

struct RunConfig {
    InterferometerModel model = reference_model();
    double pair_prob = sim::kDefaultPairProb;
    std::uint64_t seed = 1;
    double rep_rate_hz = sim::kDefaultRepRateHz;
    std::uint64_t max_pulses = sim::kDefaultMaxPulses;

    std::uint64_t k = 10'000;
    std::uint64_t samples = 14'520;
    std::vector<double> phases = default_phases();
    std::uint64_t events_per_phase = 250'000;
    std::size_t bootstrap_resamples = est::kDefaultBootstrapResamples;

    [[nodiscard]] sim::SourceConfig source() const;

    /// v = 0.989, eta_t = 0.8026, eta_r = 0.7941, xi = 0.00155, no dark counts.
    static InterferometerModel reference_model();
    /// 100 equally spaced phases over [0, 2pi).
    static std::vector<double> default_phases();
};

/// Parses and validates a configuration document; unknown keys are rejected.
/// Throws ConfigError.
RunConfig parse_run_config(std::string_view json_text);
/// Fully resolved configuration, every default spelled out.
std::string run_config_to_json(const RunConfig& config);

/// FNV-1a 64 of the bytes, as "fnv1a64:<16 hex digits>".
std::string content_hash(std::string_view bytes);

void write_scan_csv(std::ostream& out, const sim::FringeScan& scan);
/// pairs_true is read back but carries no meaning for analysis.
sim::FringeScan read_scan_csv(std::istream& in, double rep_rate_hz = sim::kDefaultRepRateHz);

struct CalibrationDocument {
    calib::CalibrationCurves curves;
    /// "pair_prob", "fixed" or "none".
    std::string xi_source = "none";
    calib::Weighting weighting = calib::Weighting::Unweighted;
};

std::string calibration_to_json(const CalibrationDocument& doc);
CalibrationDocument calibration_from_json(std::string_view json_text);

void write_fisher_csv(std::ostream& out, const est::FisherCurve& curve);
est::FisherCurve read_fisher_csv(std::istream& in);

void write_samples_csv(std::ostream& out, std::span<const double> estimates);
std::vector<double> read_samples_csv(std::istream& in);

struct EstimateDocument {
    est::PhaseEstimateBatch batch;
    std::string estimates_file;
    std::uint64_t seed = 0;
    std::string config_json;
};

std::string estimate_to_json(const EstimateDocument& doc);

/// Summary fields of an estimate document, as needed by reports.
struct EstimateSummary {
    std::optional<double> phi_true;
    double mean = 0.0;
    double sem = 0.0;
    std::optional<double> sem_ci_lo;
    std::optional<double> sem_ci_hi;
    double snl_sem = 0.0;
    double crb_sem = 0.0;
    std::uint64_t k = 0;
    std::uint64_t s = 0;
    double k_tilde_ratio = 0.0;
    std::size_t boundary_count = 0;
};
EstimateSummary estimate_summary_from_json(std::string_view json_text);

std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary file and renames it into place.
void write_file(const std::filesystem::path& path, std::string_view contents);

} // namespace noon::io
