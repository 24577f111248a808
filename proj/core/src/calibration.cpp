#include "noon/calibration.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "noon/optimize.hpp"

namespace noon::calib {

namespace {

constexpr std::size_t kMinFringePhases = 8;
// Reported when a per-phase transmission is not identifiable at all.
constexpr double kUnboundedError = 1.0;

struct ObservedRow {
    double phi = 0.0;
    std::array<double, 3> p{};
    double n = 0.0;
};

std::vector<ObservedRow> observed_rows(const sim::FringeScan& scan) {
    std::vector<ObservedRow> rows;
    for (const auto& r : scan.rows()) {
        const auto n = static_cast<double>(r.counts.recorded());
        if (n <= 0.0) {
            continue;
        }
        rows.push_back({r.phi.radians(),
                        {static_cast<double>(r.counts.c11) / n,
                         static_cast<double>(r.counts.c20) / n,
                         static_cast<double>(r.counts.c02) / n},
                        n});
    }
    return rows;
}

std::array<double, 3> model_probs(double v, double eta_t, double eta_r, double xi,
                                  double phi) {
    const auto d = with_double_pairs(
        lossy_event_probs(ideal_outcome_probs(Phase(phi), v), eta_t, eta_r), xi);
    return {d.p11, d.p20, d.p02};
}

double row_weight(const ObservedRow& row, const std::array<double, 3>& p, std::size_t i,
                  Weighting w) {
    if (w == Weighting::Unweighted) {
        return 1.0;
    }
    return row.n / std::max(p[i], 1e-12);
}

// Evaluates at efficiencies clamped into (0, 1] and adds a quadratic penalty for
// leaving the box, so the minimizer may sit on the eta = 1 boundary.
double boxed_objective(const std::vector<double>& x, double v, double xi,
                       std::span<const ObservedRow> rows, Weighting weighting) {
    double penalty = 0.0;
    std::array<double, 2> eta{};
    for (std::size_t j = 0; j < 2; ++j) {
        const double c = std::clamp(x[j], 1e-6, 1.0);
        penalty += 1e3 * (x[j] - c) * (x[j] - c);
        eta[j] = c;
    }
    double sum = 0.0;
    for (const auto& row : rows) {
        const auto p = model_probs(v, eta[0], eta[1], xi, row.phi);
        for (std::size_t i = 0; i < 3; ++i) {
            const double r = row.p[i] - p[i];
            sum += row_weight(row, p, i, weighting) * r * r;
        }
    }
    return sum + penalty;
}

opt::MinimizeResult fit_transmissions(double v, double xi, std::span<const ObservedRow> rows,
                                      Weighting weighting, std::array<double, 2> seed,
                                      bool coarse_search) {
    auto objective = [&](const std::vector<double>& x) {
        return boxed_objective(x, v, xi, rows, weighting);
    };
    std::vector<double> start{seed[0], seed[1]};
    std::size_t evaluations = 0;
    if (coarse_search) {
        double best = objective(start);
        for (int i = 1; i <= 20; ++i) {
            for (int j = 1; j <= 20; ++j) {
                const std::vector<double> x{0.05 * i, 0.05 * j};
                const double f = objective(x);
                ++evaluations;
                if (f < best) {
                    best = f;
                    start = x;
                }
            }
        }
    }
    opt::NelderMeadOptions options;
    options.initial_step = {0.02};
    auto result = opt::nelder_mead(objective, start, options);
    // Restart once from the optimum; cheap and removes premature collapses.
    options.initial_step = {1e-3};
    auto polished = opt::nelder_mead(objective, result.x, options);
    polished.evaluations += result.evaluations + evaluations;
    polished.converged = polished.converged && result.converged;
    for (double& e : polished.x) {
        e = std::clamp(e, 1e-6, 1.0);
    }
    return polished;
}

// d(p11, p20)/d(eta_t, eta_r) by central differences.
Eigen::Matrix2d probability_jacobian(double v, double eta_t, double eta_r, double xi,
                                     double phi) {
    constexpr double h = 1e-6;
    Eigen::Matrix2d j;
    const std::array<double, 2> eta{eta_t, eta_r};
    for (int col = 0; col < 2; ++col) {
        auto up = eta;
        auto down = eta;
        up[col] = std::min(1.0, up[col] + h);
        down[col] = std::max(1e-6, down[col] - h);
        const auto pu = model_probs(v, up[0], up[1], xi, phi);
        const auto pd = model_probs(v, down[0], down[1], xi, phi);
        const double dx = up[col] - down[col];
        j(0, col) = (pu[0] - pd[0]) / dx;
        j(1, col) = (pu[1] - pd[1]) / dx;
    }
    return j;
}

Eigen::Matrix2d multinomial_cov(const std::array<double, 3>& p, double n) {
    Eigen::Matrix2d s;
    s(0, 0) = p[0] * (1.0 - p[0]);
    s(1, 1) = p[1] * (1.0 - p[1]);
    s(0, 1) = s(1, 0) = -p[0] * p[1];
    return s / n;
}

std::pair<double, double> capped_errors(const Eigen::Matrix2d& cov) {
    auto capped = [](double var) {
        if (!std::isfinite(var) || var < 0.0) {
            return kUnboundedError;
        }
        return std::min(std::sqrt(var), kUnboundedError);
    };
    return {capped(cov(0, 0)), capped(cov(1, 1))};
}

Eigen::VectorXd fourier_basis(double phi, int order) {
    Eigen::VectorXd b(2 * order + 1);
    b(0) = 1.0;
    for (int j = 1; j <= order; ++j) {
        b(2 * j - 1) = std::cos(j * phi);
        b(2 * j) = std::sin(j * phi);
    }
    return b;
}

struct SmoothProfile {
    std::vector<double> values;
    std::vector<double> errors;
};

// Weighted least-squares Fourier series through the well-conditioned per-phase
// estimates, evaluated on every scan phase.
SmoothProfile smooth_profile(const std::vector<PhaseTransmissionFit>& fits, bool arm_t,
                             int order, double fallback, double fallback_err) {
    std::vector<const PhaseTransmissionFit*> used;
    for (const auto& f : fits) {
        if (f.well_conditioned) {
            used.push_back(&f);
        }
    }
    SmoothProfile out;
    if (used.empty()) {
        out.values.assign(fits.size(), fallback);
        out.errors.assign(fits.size(), fallback_err);
        return out;
    }
    while (order > 0 && used.size() < static_cast<std::size_t>(4 * order + 2)) {
        --order;
    }
    const auto m = static_cast<Eigen::Index>(used.size());
    const Eigen::Index k = 2 * order + 1;
    Eigen::MatrixXd x(m, k);
    Eigen::VectorXd y(m);
    Eigen::VectorXd w(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& f = *used[static_cast<std::size_t>(i)];
        x.row(i) = fourier_basis(f.phi, order).transpose();
        y(i) = arm_t ? f.eta_t : f.eta_r;
        const double err = std::max(arm_t ? f.eta_t_err : f.eta_r_err, 1e-12);
        w(i) = 1.0 / (err * err);
    }
    const Eigen::MatrixXd xtwx = x.transpose() * w.asDiagonal() * x;
    const Eigen::VectorXd xtwy = x.transpose() * w.asDiagonal() * y;
    const auto ldlt = xtwx.ldlt();
    const Eigen::VectorXd coef = ldlt.solve(xtwy);
    const Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(k, k));
    for (const auto& f : fits) {
        const Eigen::VectorXd b = fourier_basis(f.phi, order);
        out.values.push_back(std::clamp(b.dot(coef), 1e-6, 1.0));
        out.errors.push_back(std::sqrt(std::max(0.0, b.dot(cov * b))));
    }
    return out;
}

TransmissionProfile make_profile(const std::vector<double>& phis,
                                 const std::vector<double>& values) {
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (*hi - *lo <= 1e-12 * *hi) {
        return TransmissionProfile::constant(*hi);
    }
    try {
        return TransmissionProfile::tabulated(phis, values);
    } catch (const DomainError& e) {
        throw CalibrationError(std::string("fitted transmission profile rejected: ") +
                               e.what());
    }
}

} // namespace

ZeroPhaseTransmissions transmissions_at_zero(const sim::EventCounts& counts) {
    if (counts.c11 == 0) {
        throw CalibrationError("no coincidences at phi = 0; the transmission ratios are "
                               "undefined at a coincidence minimum");
    }
    const auto c11 = static_cast<double>(counts.c11);
    const auto nr = c11 + static_cast<double>(counts.c20);
    const auto nt = c11 + static_cast<double>(counts.c02);
    ZeroPhaseTransmissions out;
    out.eta_r = c11 / nr;
    out.eta_t = c11 / nt;
    out.eta_r_err = std::sqrt(out.eta_r * (1.0 - out.eta_r) / nr);
    out.eta_t_err = std::sqrt(out.eta_t * (1.0 - out.eta_t) / nt);
    return out;
}

VisibilityFit fit_visibility(const sim::FringeScan& scan) {
    const auto rows = scan.rows();
    if (rows.size() < kMinFringePhases) {
        throw CalibrationError("insufficient phase coverage: visibility fit needs at least " +
                               std::to_string(kMinFringePhases) + " phases, got " +
                               std::to_string(rows.size()));
    }
    const double span = rows.back().phi.radians() - rows.front().phi.radians();
    const auto n = static_cast<double>(rows.size());
    if (span < kPi * (n - 1.0) / n - 1e-9) {
        throw CalibrationError("insufficient phase coverage: scan must span a full fringe "
                               "period (pi)");
    }

    const bool have_pulses = std::all_of(rows.begin(), rows.end(), [](const auto& r) {
        return r.counts.pulses > 0;
    });
    const auto m = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd x(m, 3);
    Eigen::VectorXd y(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        const double phi = r.phi.radians();
        x(i, 0) = 1.0;
        x(i, 1) = std::cos(2.0 * phi);
        x(i, 2) = std::sin(2.0 * phi);
        const auto norm = static_cast<double>(have_pulses ? r.counts.pulses
                                                          : r.counts.recorded());
        if (norm <= 0.0) {
            throw CalibrationError("scan row without any recorded events");
        }
        y(i) = static_cast<double>(r.counts.c11) / norm;
    }

    const auto qr = x.colPivHouseholderQr();
    if (qr.rank() < 3) {
        throw CalibrationError("visibility fit is rank deficient for these phases");
    }
    const Eigen::Vector3d coef = qr.solve(y);
    const double a = coef(0);
    const double b = coef(1);
    const double c = coef(2);
    if (!(a > 0.0)) {
        throw CalibrationError("visibility fit failed: non-positive mean coincidence rate");
    }
    const double rss = (x * coef - y).squaredNorm();
    const double s2 = rss / std::max(1.0, n - 3.0);
    const Eigen::Matrix3d cov = s2 * (x.transpose() * x).inverse();

    const double amp = std::hypot(b, c);
    VisibilityFit fit;
    fit.amplitude = a;
    fit.visibility = amp / a;
    fit.phase_offset = amp > 0.0 ? std::atan2(-c, b) : 0.0;
    fit.residual = rss;
    Eigen::Vector3d grad;
    if (amp > 0.0) {
        grad << -amp / (a * a), b / (a * amp), c / (a * amp);
        fit.visibility_err = std::sqrt(std::max(0.0, grad.dot(cov * grad)));
    } else {
        fit.visibility_err = std::sqrt(0.5 * (cov(1, 1) + cov(2, 2))) / a;
    }
    fit.converged = std::isfinite(fit.visibility) && std::isfinite(fit.visibility_err);
    if (!fit.converged || fit.visibility > 1.0 + 3.0 * fit.visibility_err + 1e-12) {
        throw CalibrationError("visibility fit failed: v = " + std::to_string(fit.visibility) +
                               " +- " + std::to_string(fit.visibility_err));
    }
    return fit;
}

CalibrationCurves curves_from_model(const InterferometerModel& model) {
    model.validate();
    CalibrationCurves c;
    c.model = model;
    c.eta_t_global = model.eta_t.is_constant() ? model.eta_t.min()
                                               : 0.5 * (model.eta_t.min() + model.eta_t.max());
    c.eta_r_global = model.eta_r.is_constant() ? model.eta_r.min()
                                               : 0.5 * (model.eta_r.min() + model.eta_r.max());
    c.eta_t_err.assign(model.eta_t.grid().size(), 0.0);
    c.eta_r_err.assign(model.eta_r.grid().size(), 0.0);
    c.variation_t = model.eta_t.variation();
    c.variation_r = model.eta_r.variation();
    c.xi_estimated = model.xi > 0.0;
    c.converged = true;
    return c;
}

namespace {

// Global and per-phase transmission fits at fixed visibility, and the smooth
// profile through them. Fills the transmission fields of `curves`.
bool fit_transmission_curves(std::span<const ObservedRow> rows, double v,
                             const FitOptions& options, CalibrationCurves& curves) {
    const double xi = options.xi;
    curves.per_phase.clear();

    // Constant transmissions over the whole scan.
    auto global = fit_transmissions(v, xi, rows, options.weighting, {0.8, 0.8}, true);
    curves.evaluations += global.evaluations;
    curves.eta_t_global = global.x[0];
    curves.eta_r_global = global.x[1];
    {
        // Sandwich covariance under multinomial sampling of each row.
        Eigen::Matrix2d jtj = Eigen::Matrix2d::Zero();
        Eigen::Matrix2d meat = Eigen::Matrix2d::Zero();
        for (const auto& row : rows) {
            const Eigen::Matrix2d j =
                probability_jacobian(v, global.x[0], global.x[1], xi, row.phi);
            const auto p = model_probs(v, global.x[0], global.x[1], xi, row.phi);
            // Residual of p02 is minus the sum of the other two.
            Eigen::Matrix<double, 3, 2> j3;
            j3.topRows<2>() = j;
            j3.row(2) = -(j.row(0) + j.row(1));
            Eigen::Matrix3d s = Eigen::Matrix3d::Zero();
            for (int a = 0; a < 3; ++a) {
                for (int b = 0; b < 3; ++b) {
                    s(a, b) = (a == b ? p[static_cast<std::size_t>(a)] : 0.0) -
                              p[static_cast<std::size_t>(a)] * p[static_cast<std::size_t>(b)];
                }
            }
            s /= row.n;
            jtj += j3.transpose() * j3;
            meat += j3.transpose() * s * j3;
        }
        const Eigen::Matrix2d bread = jtj.inverse();
        const auto [et, er] = capped_errors(bread * meat * bread);
        curves.eta_t_global_err = et;
        curves.eta_r_global_err = er;
    }

    // Per-phase transmissions: two unknowns against two independent probabilities.
    bool converged = global.converged;
    for (const auto& row : rows) {
        const std::array<ObservedRow, 1> one{row};
        auto fit = fit_transmissions(v, xi, one, Weighting::Unweighted,
                                     {global.x[0], global.x[1]}, false);
        curves.evaluations += fit.evaluations;
        PhaseTransmissionFit pf;
        pf.phi = row.phi;
        pf.eta_t = fit.x[0];
        pf.eta_r = fit.x[1];
        const Eigen::Matrix2d j = probability_jacobian(v, pf.eta_t, pf.eta_r, xi, row.phi);
        const auto p = model_probs(v, pf.eta_t, pf.eta_r, xi, row.phi);
        if (std::abs(j.determinant()) > 1e-12) {
            const Eigen::Matrix2d jinv = j.inverse();
            const auto [et, er] = capped_errors(jinv * multinomial_cov(p, row.n) *
                                                jinv.transpose());
            pf.eta_t_err = et;
            pf.eta_r_err = er;
        } else {
            pf.eta_t_err = kUnboundedError;
            pf.eta_r_err = kUnboundedError;
        }
        const bool interior = pf.eta_t < 1.0 - 1e-9 || pf.eta_r < 1.0 - 1e-9 ||
                              fit.value < 1e-20;
        pf.well_conditioned = fit.converged && interior &&
                              pf.eta_t_err <= options.conditioning_limit &&
                              pf.eta_r_err <= options.conditioning_limit;
        if (pf.well_conditioned) {
            converged = converged && fit.converged;
        }
        curves.per_phase.push_back(pf);
    }

    std::vector<double> phis;
    for (const auto& pf : curves.per_phase) {
        phis.push_back(pf.phi);
    }
    const int order = std::max(0, options.profile_order);
    const auto prof_t = smooth_profile(curves.per_phase, true, order, curves.eta_t_global,
                                       curves.eta_t_global_err);
    const auto prof_r = smooth_profile(curves.per_phase, false, order, curves.eta_r_global,
                                       curves.eta_r_global_err);

    curves.model.eta_t = make_profile(phis, prof_t.values);
    curves.model.eta_r = make_profile(phis, prof_r.values);
    if (curves.model.eta_t.is_constant()) {
        curves.eta_t_err.assign(1, prof_t.errors.front());
    } else {
        curves.eta_t_err = prof_t.errors;
    }
    if (curves.model.eta_r.is_constant()) {
        curves.eta_r_err.assign(1, prof_r.errors.front());
    } else {
        curves.eta_r_err = prof_r.errors;
    }
    curves.variation_t = curves.model.eta_t.variation();
    curves.variation_r = curves.model.eta_r.variation();
    return converged;
}

struct VisibilityCorrection {
    double visibility = 0.0;
    double visibility_err = 0.0;
};

// Solves apparent_visibility(v) = measured for v in [0, 1] by bisection.
VisibilityCorrection correct_visibility(const VisibilityFit& fit, InterferometerModel model,
                                        std::span<const double> phases) {
    auto apparent = [&](double v) {
        model.visibility = v;
        return apparent_visibility(model, phases);
    };
    double lo = 0.0;
    double hi = 1.0;
    VisibilityCorrection out;
    if (fit.visibility >= apparent(hi)) {
        out.visibility = hi;
    } else if (fit.visibility <= apparent(lo)) {
        out.visibility = lo;
    } else {
        for (int i = 0; i < 60; ++i) {
            const double mid = 0.5 * (lo + hi);
            (apparent(mid) < fit.visibility ? lo : hi) = mid;
        }
        out.visibility = 0.5 * (lo + hi);
    }
    const double h = 1e-4;
    const double a = std::max(0.0, out.visibility - h);
    const double b = std::min(1.0, out.visibility + h);
    const double slope = (apparent(b) - apparent(a)) / (b - a);
    out.visibility_err = slope > 0.0 ? fit.visibility_err / slope : fit.visibility_err;
    return out;
}

} // namespace

double apparent_visibility(const InterferometerModel& model, std::span<const double> phases) {
    const auto m = static_cast<Eigen::Index>(phases.size());
    if (m < 3) {
        throw DomainError("apparent visibility needs at least 3 phases");
    }
    Eigen::MatrixXd x(m, 3);
    Eigen::VectorXd y(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double phi = phases[static_cast<std::size_t>(i)];
        x(i, 0) = 1.0;
        x(i, 1) = std::cos(2.0 * phi);
        x(i, 2) = std::sin(2.0 * phi);
        y(i) = emission_probs(model, Phase(phi)).P11;
    }
    const Eigen::Vector3d coef = x.colPivHouseholderQr().solve(y);
    return std::hypot(coef(1), coef(2)) / coef(0);
}

CalibrationCurves fit_model(const sim::FringeScan& scan, const FitOptions& options) {
    if (!(options.xi >= 0.0 && options.xi <= kMaxXi)) {
        throw DomainError("xi must lie in [0, 0.1]");
    }
    const VisibilityFit vis = fit_visibility(scan);
    const auto rows = observed_rows(scan);
    std::vector<double> phases;
    for (const auto& r : scan.rows()) {
        phases.push_back(r.phi.radians());
    }

    CalibrationCurves curves;
    curves.phase_offset = vis.phase_offset;
    curves.baseline = vis.baseline;
    curves.model.xi = options.xi;
    curves.model.dark_prob = 0.0;

    // Transmissions and visibility are refined in turn; two or three rounds settle.
    double v = std::clamp(vis.visibility, 0.0, 1.0);
    double v_err = vis.visibility_err;
    bool converged = false;
    for (int round = 0; round < 4; ++round) {
        curves.model.visibility = v;
        converged = fit_transmission_curves(rows, v, options, curves);
        // The profile shape trades off against v, so the mapping uses the
        // constant transmissions.
        InterferometerModel flat = curves.model;
        flat.eta_t = TransmissionProfile::constant(curves.eta_t_global);
        flat.eta_r = TransmissionProfile::constant(curves.eta_r_global);
        const auto corrected = correct_visibility(vis, flat, phases);
        const double change = std::abs(corrected.visibility - v);
        v = corrected.visibility;
        v_err = corrected.visibility_err;
        if (change <= 1e-3 * std::max(v_err, 1e-9)) {
            break;
        }
    }
    curves.model.visibility = v;
    curves.visibility_err = v_err;
    curves.model.validate();

    double residual = 0.0;
    for (const auto& row : rows) {
        const auto d = emission_probs(curves.model, Phase(row.phi));
        const std::array<double, 3> p{d.p11, d.p20, d.p02};
        for (std::size_t i = 0; i < 3; ++i) {
            residual += (row.p[i] - p[i]) * (row.p[i] - p[i]);
        }
    }
    curves.residual = residual;
    curves.converged = vis.converged && converged;
    if (!curves.converged) {
        throw CalibrationError("calibration fit did not converge");
    }
    return curves;
}

CalibrationCurves calibrate(const sim::FringeScan& scan, const CalibrateOptions& options) {
    FitOptions fit = options.fit;
    if (options.xi) {
        fit.xi = *options.xi;
        CalibrationCurves curves = fit_model(scan, fit);
        curves.xi_err = options.xi_err;
        return curves;
    }
    if (!options.pair_prob || !(*options.pair_prob > 0.0)) {
        fit.xi = 0.0;
        return fit_model(scan, fit);
    }
    CalibrationCurves curves;
    fit.xi = 0.0;
    for (int i = 0; i < std::max(1, options.max_iterations); ++i) {
        curves = fit_model(scan, fit);
        const XiEstimate est = estimate_xi(scan, curves, *options.pair_prob);
        const double next = std::clamp(est.xi, 0.0, kMaxXi);
        curves.xi_err = est.xi_err;
        const bool settled = std::abs(next - fit.xi) <= 1e-3 * std::max(est.xi_err, 1e-12);
        fit.xi = next;
        if (settled) {
            break;
        }
    }
    if (curves.model.xi != fit.xi) {
        const double err = curves.xi_err;
        curves = fit_model(scan, fit);
        curves.xi_err = err;
    }
    curves.xi_estimated = true;
    return curves;
}

double single_pair_detection_prob(const InterferometerModel& model, Phase phi) {
    const auto q = ideal_outcome_probs(phi, model.visibility);
    const auto e = outcome_efficiencies(model.eta_t.at(phi), model.eta_r.at(phi));
    return q.q11 * e.eta11 + q.q20 * e.eta20 + q.q02 * e.eta02;
}

namespace {

// Per-pulse detection probability r(xi) = a + b * xi.
std::pair<double, double> detection_rate_line(const InterferometerModel& model, Phase phi,
                                              double pair_prob) {
    const double e1 = single_pair_detection_prob(model, phi);
    const double quiet = (1.0 - model.dark_prob) * (1.0 - model.dark_prob);
    const double miss = 1.0 - e1;
    const double a = 1.0 - quiet * (1.0 - pair_prob * e1);
    const double b = quiet * pair_prob * (1.0 - miss * miss);
    return {a, b};
}

void check_xi_inputs(std::uint64_t detections, std::uint64_t pulses, double pair_prob) {
    if (pulses == 0) {
        throw DomainError("xi estimate needs a positive pulse count");
    }
    if (!(pair_prob > 0.0 && pair_prob < 1.0)) {
        throw DomainError("xi estimate needs a pair probability in (0, 1)");
    }
    if (static_cast<double>(detections) / static_cast<double>(pulses) >= 0.5) {
        throw DomainError("detection rate is at or above saturation (>= 0.5 per pulse)");
    }
}

} // namespace

XiEstimate estimate_xi(std::uint64_t total_detections, std::uint64_t pulses,
                       const CalibrationCurves& curves, Phase phi, double pair_prob) {
    check_xi_inputs(total_detections, pulses, pair_prob);
    const auto [a, b] = detection_rate_line(curves.model, phi, pair_prob);
    const double n = static_cast<double>(pulses);
    const double r = static_cast<double>(total_detections) / n;
    XiEstimate out;
    out.xi = (r - a) / b;
    out.xi_err = std::sqrt(r * (1.0 - r) / n) / b;
    return out;
}

XiEstimate estimate_xi(const sim::FringeScan& scan, const CalibrationCurves& curves,
                       double pair_prob) {
    double detections = 0.0;
    double expected_base = 0.0;
    double slope = 0.0;
    double variance = 0.0;
    std::uint64_t total_pulses = 0;
    std::uint64_t total_detections = 0;
    for (const auto& row : scan.rows()) {
        if (row.counts.pulses == 0) {
            continue;
        }
        const auto n = static_cast<double>(row.counts.pulses);
        const auto d = static_cast<double>(row.counts.recorded());
        const auto [a, b] = detection_rate_line(curves.model, row.phi, pair_prob);
        detections += d;
        expected_base += n * a;
        slope += n * b;
        const double r = d / n;
        variance += n * r * (1.0 - r);
        total_pulses += row.counts.pulses;
        total_detections += row.counts.recorded();
    }
    check_xi_inputs(total_detections, total_pulses, pair_prob);
    XiEstimate out;
    out.xi = (detections - expected_base) / slope;
    out.xi_err = std::sqrt(variance) / slope;
    return out;
}

} // namespace noon::calib
