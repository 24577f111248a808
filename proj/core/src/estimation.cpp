#include "noon/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "noon/optimize.hpp"
#include "noon/parallel.hpp"
#include "noon/rng.hpp"

namespace noon::est {

namespace {

std::array<double, 3> probs(const InterferometerModel& model, double phi) {
    const auto d = with_double_pairs(
        lossy_event_probs(ideal_outcome_probs(Phase(phi), model.visibility),
                          model.eta_t.at(Phase(phi)), model.eta_r.at(Phase(phi))),
        model.xi);
    return {d.p11, d.p20, d.p02};
}

double mean_of(std::span<const double> xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_stddev(std::span<const double> xs, double mean) {
    double ss = 0.0;
    for (double x : xs) {
        ss += (x - mean) * (x - mean);
    }
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

// Linear interpolation between order statistics (type 7).
double percentile(std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double t = pos - static_cast<double>(lo);
    return sorted[lo] + t * (sorted[hi] - sorted[lo]);
}

double mean_error(const std::vector<double>& errs) {
    if (errs.empty()) {
        return 0.0;
    }
    return std::accumulate(errs.begin(), errs.end(), 0.0) / static_cast<double>(errs.size());
}

} // namespace

double fisher_information_analytic(const InterferometerModel& model, Phase phi) {
    model.validate();
    if (!model.has_constant_transmission()) {
        throw DomainError("analytic Fisher information needs constant transmissions");
    }
    const double v = model.visibility;
    if (v == 0.0) {
        return 0.0;
    }
    const double et = model.eta_t.at(phi);
    const double er = model.eta_r.at(phi);
    const auto eff = outcome_efficiencies(et, er);
    const double c = std::cos(2.0 * phi.radians());
    const double u = v * c;

    // Per-pair probabilities (11, 20, 02, none) are affine in u = v cos(2 phi).
    const std::array<double, 4> pair_p{
        et * er * 0.5 * (1.0 + u),
        0.25 * (1.0 - u) * eff.eta20 + 0.5 * (1.0 + u) * et * (1.0 - er),
        0.25 * (1.0 - u) * eff.eta02 + 0.5 * (1.0 + u) * er * (1.0 - et),
        0.5 * (1.0 + u) * (1.0 - et) * (1.0 - er) +
            0.25 * (1.0 - u) * ((1.0 - eff.eta20) + (1.0 - eff.eta02))};
    const std::array<double, 4> pair_dp{
        0.5 * et * er, -0.25 * eff.eta20 + 0.5 * et * (1.0 - er),
        -0.25 * eff.eta02 + 0.5 * er * (1.0 - et),
        0.5 * (1.0 - et) * (1.0 - er) - 0.25 * ((1.0 - eff.eta20) + (1.0 - eff.eta02))};

    std::array<double, 3> big_p{pair_p[0], pair_p[1], pair_p[2]};
    std::array<double, 3> big_dp{pair_dp[0], pair_dp[1], pair_dp[2]};
    if (model.xi > 0.0) {
        // Two pairs per emission: quadratic in the single-pair probabilities.
        const double w1 = 1.0 / (1.0 + model.xi);
        const double w2 = model.xi / (1.0 + model.xi);
        const double n = pair_p[3];
        const double dn = pair_dp[3];
        const double a = pair_p[1] + n;
        const double da = pair_dp[1] + dn;
        const double b = pair_p[2] + n;
        const double db = pair_dp[2] + dn;
        const double t = a * a - n * n;
        const double dt = 2.0 * (a * da - n * dn);
        const double r = b * b - n * n;
        const double dr = 2.0 * (b * db - n * dn);
        const double both = 1.0 - a * a - b * b + n * n;
        const double dboth = 2.0 * (n * dn - a * da - b * db);
        big_p = {w1 * pair_p[0] + w2 * both, w1 * pair_p[1] + w2 * t,
                 w1 * pair_p[2] + w2 * r};
        big_dp = {w1 * pair_dp[0] + w2 * dboth, w1 * pair_dp[1] + w2 * dt,
                  w1 * pair_dp[2] + w2 * dr};
    }
    const double d = big_p[0] + big_p[1] + big_p[2];
    const double dd = big_dp[0] + big_dp[1] + big_dp[2];
    // (du/dphi)^2 = 4 v^2 sin^2(2 phi) = 4 (v^2 - u^2).
    const double du2 = std::max(0.0, 4.0 * (v * v - u * u));

    double f = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double p = big_p[i] / d;
        const double dp_du = (big_dp[i] * d - big_p[i] * dd) / (d * d);
        if (p < kZeroProbability) {
            // p vanishes only at u = +-v, where (dp/dphi)^2 / p -> 8 v |dp/du|.
            f += 8.0 * v * std::abs(dp_du);
        } else {
            f += dp_du * dp_du * du2 / p;
        }
    }
    return f;
}

double fisher_information_numeric(const InterferometerModel& model, Phase phi, double step) {
    model.validate();
    const double x = phi.radians();
    const auto p0 = probs(model, x);
    const auto pp = probs(model, x + step);
    const auto pm = probs(model, x - step);
    double f = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        if (p0[i] < kZeroProbability) {
            // Near a zero p ~ a x^2, so (p')^2 / p -> 4a = 2 p''.
            f += 2.0 * std::abs(pp[i] - 2.0 * p0[i] + pm[i]) / (step * step);
            continue;
        }
        const double dp = (pp[i] - pm[i]) / (2.0 * step);
        f += dp * dp / p0[i];
    }
    return f;
}

double fisher_information(const InterferometerModel& model, Phase phi) {
    if (model.has_constant_transmission()) {
        return fisher_information_analytic(model, phi);
    }
    return fisher_information_numeric(model, phi);
}

double fisher_information(const calib::CalibrationCurves& curves, Phase phi) {
    return fisher_information(curves.model, phi);
}

FisherCurve fisher_curve(const calib::CalibrationCurves& curves,
                         std::span<const double> phases) {
    const InterferometerModel& base = curves.model;
    base.validate();

    struct Perturbation {
        InterferometerModel plus;
        InterferometerModel minus;
        double scale = 0.0; // sigma / (x_plus - x_minus)
    };
    std::vector<Perturbation> perturbations;

    if (curves.visibility_err > 0.0) {
        Perturbation p{base, base, 0.0};
        const double hi = std::min(1.0, base.visibility + curves.visibility_err);
        const double lo = std::max(0.0, base.visibility - curves.visibility_err);
        p.plus.visibility = hi;
        p.minus.visibility = lo;
        if (hi > lo) {
            p.scale = curves.visibility_err / (hi - lo);
            perturbations.push_back(std::move(p));
        }
    }
    auto add_arm = [&](bool arm_t, double sigma) {
        if (!(sigma > 0.0)) {
            return;
        }
        Perturbation p{base, base, 0.0};
        const TransmissionProfile& prof = arm_t ? base.eta_t : base.eta_r;
        const double ref = prof.min();
        const double up = std::min(1.0, ref + sigma) - ref;
        const double down = ref - std::max(1e-6, ref - sigma);
        (arm_t ? p.plus.eta_t : p.plus.eta_r) = prof.shifted(up);
        (arm_t ? p.minus.eta_t : p.minus.eta_r) = prof.shifted(-down);
        if (up + down > 0.0) {
            p.scale = sigma / (up + down);
            perturbations.push_back(std::move(p));
        }
    };
    add_arm(true, mean_error(curves.eta_t_err));
    add_arm(false, mean_error(curves.eta_r_err));

    FisherCurve curve;
    curve.points.reserve(phases.size());
    for (double x : phases) {
        const Phase phi(x);
        FisherPoint pt;
        pt.phi = x;
        pt.fisher = fisher_information(base, phi);
        double var = 0.0;
        for (const auto& p : perturbations) {
            const double delta =
                (fisher_information(p.plus, phi) - fisher_information(p.minus, phi)) *
                p.scale;
            var += delta * delta;
        }
        const double half_width = 1.959963984540054 * std::sqrt(var);
        pt.f_lo = std::max(0.0, pt.fisher - half_width);
        pt.f_hi = pt.fisher + half_width;
        pt.snl = base.photon_number;
        pt.snl_adjusted = base.photon_number * (1.0 + base.xi) / eta_min(base, phi);
        curve.points.push_back(pt);
    }
    return curve;
}

ResourceAccount snl_adjusted(std::uint64_t k, double xi, double eta_min,
                             int photon_number) {
    if (k == 0) {
        throw DomainError("recorded trials k must be at least 1");
    }
    if (!(xi >= 0.0)) {
        throw DomainError("xi must be non-negative");
    }
    if (!(eta_min > 0.0 && eta_min <= 1.0)) {
        throw DomainError("eta_min must lie in (0, 1]");
    }
    ResourceAccount a;
    a.k = k;
    a.xi = xi;
    a.eta_min = eta_min;
    a.photon_number = photon_number;
    a.k_tilde = static_cast<double>(k) * (1.0 + xi) / eta_min;
    a.resources = photon_number * a.k_tilde;
    a.f_snl = a.resources / static_cast<double>(k);
    return a;
}

ResourceAccount account_from_ratio(std::uint64_t k, double k_tilde_ratio,
                                   int photon_number) {
    if (k == 0 || !(k_tilde_ratio >= 1.0)) {
        throw DomainError("need k >= 1 and k_tilde / k >= 1");
    }
    ResourceAccount a;
    a.k = k;
    a.photon_number = photon_number;
    a.k_tilde = static_cast<double>(k) * k_tilde_ratio;
    a.resources = photon_number * a.k_tilde;
    a.f_snl = photon_number * k_tilde_ratio;
    // Split the ratio as if all overhead came from loss.
    a.eta_min = 1.0 / k_tilde_ratio;
    return a;
}

double snl_sem(double n_tot) {
    if (!(n_tot >= 1.0)) {
        throw DomainError("resource count must be at least 1");
    }
    return 1.0 / std::sqrt(n_tot);
}

PhaseEstimator::PhaseEstimator(calib::CalibrationCurves curves, double lo, double hi)
    : curves_(std::move(curves)), lo_(lo), hi_(hi) {
    if (!(hi > lo)) {
        throw DomainError("phase search range must be non-empty");
    }
    curves_.model.validate();
    grid_.resize(kGridPoints);
    table_.resize(kGridPoints);
    for (std::size_t i = 0; i < kGridPoints; ++i) {
        grid_[i] = lo_ + (hi_ - lo_) * static_cast<double>(i) /
                             static_cast<double>(kGridPoints - 1);
        table_[i] = probs(curves_.model, grid_[i]);
    }
}

PhaseEstimate PhaseEstimator::estimate(const sim::EventCounts& counts) const {
    const auto k = static_cast<double>(counts.recorded());
    if (k <= 0.0) {
        throw DomainError("phase estimate needs at least one recorded trial");
    }
    return estimate(static_cast<double>(counts.c11) / k, static_cast<double>(counts.c20) / k,
                    static_cast<double>(counts.c02) / k);
}

PhaseEstimate PhaseEstimator::estimate(double p11, double p20, double p02) const {
    const std::array<double, 3> measured{p11, p20, p02};
    auto distance = [&](const std::array<double, 3>& p) {
        double s = 0.0;
        for (std::size_t i = 0; i < 3; ++i) {
            s += (measured[i] - p[i]) * (measured[i] - p[i]);
        }
        return s;
    };

    std::size_t best = 0;
    double best_value = distance(table_[0]);
    for (std::size_t i = 1; i < grid_.size(); ++i) {
        const double d = distance(table_[i]);
        if (d < best_value) {
            best = i;
            best_value = d;
        }
    }

    const double a = grid_[best == 0 ? 0 : best - 1];
    const double b = grid_[std::min(best + 1, grid_.size() - 1)];
    const auto refined = opt::golden_section(
        [&](double x) { return distance(probs(curves_.model, x)); }, a, b, kTolerance);

    PhaseEstimate out;
    if (refined.value < best_value ||
        (refined.value == best_value && refined.x < grid_[best])) {
        out.phi = refined.x;
        out.objective = refined.value;
    } else {
        out.phi = grid_[best];
        out.objective = best_value;
    }
    const double edge = 10.0 * kTolerance;
    out.boundary = out.phi - lo_ <= edge || hi_ - out.phi <= edge;
    return out;
}

PhaseEstimate estimate_phase(const sim::EventCounts& counts,
                             const calib::CalibrationCurves& curves, double lo, double hi) {
    return PhaseEstimator(curves, lo, hi).estimate(counts);
}

BootstrapResult bootstrap_sem(std::span<const double> estimates, std::size_t resamples,
                              std::uint64_t seed) {
    const std::size_t s = estimates.size();
    if (s < 10) {
        throw DomainError("bootstrap needs at least 10 samples");
    }
    if (resamples < 1000) {
        throw DomainError("bootstrap needs at least 1000 resamples");
    }
    BootstrapResult out;
    if (std::all_of(estimates.begin(), estimates.end(),
                    [&](double x) { return x == estimates.front(); })) {
        return out;
    }

    Rng rng(seed, StreamDomain::Bootstrap, 0);
    std::vector<double> means(resamples);
    std::vector<double> sems(resamples);
    std::vector<double> draw(s);
    const double root_s = std::sqrt(static_cast<double>(s));
    for (std::size_t b = 0; b < resamples; ++b) {
        for (std::size_t i = 0; i < s; ++i) {
            draw[i] = estimates[rng.below(s)];
        }
        means[b] = mean_of(draw);
        sems[b] = sample_stddev(draw, means[b]) / root_s;
    }
    out.sem = sample_stddev(means, mean_of(means));
    std::sort(sems.begin(), sems.end());
    out.ci_lo = percentile(sems, 0.025);
    out.ci_hi = percentile(sems, 0.975);
    return out;
}

PhaseEstimateBatch aggregate_samples(std::span<const double> estimates) {
    if (estimates.size() < 2) {
        throw DomainError("aggregating needs at least 2 samples");
    }
    PhaseEstimateBatch batch;
    batch.estimates.assign(estimates.begin(), estimates.end());
    batch.mean = mean_of(estimates);
    batch.stddev = sample_stddev(estimates, batch.mean);
    batch.sem = batch.stddev / std::sqrt(static_cast<double>(estimates.size()));
    return batch;
}

PhaseEstimateBatch aggregate_samples(std::span<const double> estimates,
                                     const ResourceAccount& account, double fisher) {
    PhaseEstimateBatch batch = aggregate_samples(estimates);
    const auto s = static_cast<std::uint64_t>(estimates.size());
    batch.k = account.k;
    batch.account = account;
    batch.fisher = fisher;
    batch.snl_sem = snl_sem(account.total_resources(s));
    batch.crb_sem = fisher > 0.0 ? 1.0 / std::sqrt(static_cast<double>(s) *
                                                   static_cast<double>(account.k) * fisher)
                                 : std::numeric_limits<double>::infinity();
    return batch;
}

PhaseEstimateBatch run_estimation_batch(const sim::SourceConfig& truth,
                                        const calib::CalibrationCurves& curves,
                                        const BatchRequest& request) {
    truth.validate();
    if (request.samples < 2) {
        throw DomainError("estimation batch needs at least 2 samples");
    }
    const Phase phi(request.phi_true);
    const PhaseEstimator estimator(curves);
    std::vector<PhaseEstimate> results(request.samples);
    parallel_for(request.samples, request.threads, [&](std::size_t j) {
        Rng rng(truth.seed, StreamDomain::EstimateSample, j);
        const auto counts = sim::simulate_trials(truth, phi, request.k, rng);
        results[j] = estimator.estimate(counts);
    });

    std::vector<double> estimates(results.size());
    std::vector<std::size_t> boundary;
    for (std::size_t j = 0; j < results.size(); ++j) {
        estimates[j] = results[j].phi;
        if (results[j].boundary) {
            boundary.push_back(j);
        }
    }
    const ResourceAccount account =
        snl_adjusted(request.k, curves.model.xi, eta_min(curves.model, phi));
    PhaseEstimateBatch batch =
        aggregate_samples(estimates, account, fisher_information(curves, phi));
    batch.phi_true = request.phi_true;
    batch.boundary_samples = std::move(boundary);
    if (request.bootstrap_resamples >= 1000 && estimates.size() >= 10) {
        batch.bootstrap = bootstrap_sem(estimates, request.bootstrap_resamples, truth.seed);
    }
    return batch;
}

} // namespace noon::est
