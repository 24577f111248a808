#include "noon/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace noon {

namespace {

void check_efficiency(double eta, const char* what) {
    if (!(eta > 0.0 && eta <= 1.0)) {
        throw DomainError(std::string(what) + " must lie in (0, 1], got " +
                          std::to_string(eta));
    }
}

void check_visibility(double v) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw DomainError("visibility must lie in [0, 1], got " + std::to_string(v));
    }
}

double clamp_efficiency(double eta) {
    return std::clamp(eta, 1e-9, 1.0);
}

} // namespace

TransmissionProfile TransmissionProfile::constant(double eta) {
    check_efficiency(eta, "transmission");
    TransmissionProfile p;
    p.values_ = {eta};
    return p;
}

TransmissionProfile TransmissionProfile::tabulated(std::vector<double> phis,
                                                   std::vector<double> values) {
    if (phis.size() != values.size() || phis.empty()) {
        throw DomainError("transmission profile needs one value per grid phase");
    }
    for (std::size_t i = 0; i < phis.size(); ++i) {
        if (!(phis[i] >= 0.0 && phis[i] < kTwoPi)) {
            throw DomainError("transmission profile phases must lie in [0, 2pi)");
        }
        if (i > 0 && !(phis[i] > phis[i - 1])) {
            throw DomainError("transmission profile phases must be strictly increasing");
        }
        check_efficiency(values[i], "transmission");
    }
    TransmissionProfile p;
    if (phis.size() == 1) {
        p.values_ = {values.front()};
        return p;
    }
    p.phis_ = std::move(phis);
    p.values_ = std::move(values);
    if (p.max() / p.min() > kMaxTransmissionVariation) {
        throw DomainError("transmission profile varies by more than 2% (max/min = " +
                          std::to_string(p.max() / p.min()) + ")");
    }
    return p;
}

double TransmissionProfile::at(Phase phi) const {
    if (phis_.empty()) {
        return values_.front();
    }
    const double x = phi.wrapped().radians();
    const std::size_t n = phis_.size();
    // First grid point strictly above x; the segment wraps around 2pi at the ends.
    const auto it = std::upper_bound(phis_.begin(), phis_.end(), x);
    const auto hi = static_cast<std::size_t>(it - phis_.begin());
    double x0 = 0.0;
    double x1 = 0.0;
    double y0 = 0.0;
    double y1 = 0.0;
    if (hi == 0) {
        x0 = phis_[n - 1] - kTwoPi;
        y0 = values_[n - 1];
        x1 = phis_[0];
        y1 = values_[0];
    } else if (hi == n) {
        x0 = phis_[n - 1];
        y0 = values_[n - 1];
        x1 = phis_[0] + kTwoPi;
        y1 = values_[0];
    } else {
        x0 = phis_[hi - 1];
        y0 = values_[hi - 1];
        x1 = phis_[hi];
        y1 = values_[hi];
    }
    const double t = (x - x0) / (x1 - x0);
    return y0 + t * (y1 - y0);
}

double TransmissionProfile::min() const noexcept {
    return *std::min_element(values_.begin(), values_.end());
}

double TransmissionProfile::max() const noexcept {
    return *std::max_element(values_.begin(), values_.end());
}

TransmissionProfile TransmissionProfile::scaled(double factor) const {
    TransmissionProfile p = *this;
    for (double& v : p.values_) {
        v = clamp_efficiency(v * factor);
    }
    return p;
}

TransmissionProfile TransmissionProfile::shifted(double delta) const {
    TransmissionProfile p = *this;
    for (double& v : p.values_) {
        v = clamp_efficiency(v + delta);
    }
    return p;
}

void InterferometerModel::validate() const {
    check_visibility(visibility);
    if (photon_number != kPhotonNumber) {
        throw DomainError("only N = 2 NOON states are modelled");
    }
    if (!(xi >= 0.0 && xi <= kMaxXi)) {
        throw DomainError("xi must lie in [0, 0.1], got " + std::to_string(xi));
    }
    if (!(dark_prob >= 0.0 && dark_prob <= kMaxDarkProb)) {
        throw DomainError("dark_prob must lie in [0, 1e-3], got " +
                          std::to_string(dark_prob));
    }
    check_efficiency(eta_t.min(), "eta_t");
    check_efficiency(eta_r.min(), "eta_r");
}

double OutcomeEfficiencies::min() const noexcept {
    return std::min({eta11, eta20, eta02});
}

OutcomeDistribution ideal_outcome_probs(Phase phi, double visibility) {
    check_visibility(visibility);
    const double u = visibility * std::cos(2.0 * phi.radians());
    OutcomeDistribution q;
    q.q11 = 0.5 * (1.0 + u);
    q.q20 = 0.25 * (1.0 - u);
    q.q02 = q.q20;
    return q;
}

RecordedDistribution lossy_event_probs(const OutcomeDistribution& q, double eta_t,
                                       double eta_r) {
    check_efficiency(eta_t, "eta_t");
    check_efficiency(eta_r, "eta_r");
    const double lt = 1.0 - eta_t;
    const double lr = 1.0 - eta_r;

    RecordedDistribution d;
    d.P11 = q.q11 * eta_t * eta_r;
    d.P20 = q.q20 * (1.0 - lt * lt) + q.q11 * eta_t * lr;
    d.P02 = q.q02 * (1.0 - lr * lr) + q.q11 * eta_r * lt;
    d.Pnone = q.q11 * lt * lr + q.q20 * lt * lt + q.q02 * lr * lr;

    const double detected = d.detected();
    d.p11 = d.P11 / detected;
    d.p20 = d.P20 / detected;
    d.p02 = d.P02 / detected;
    return d;
}

RecordedDistribution recorded_probs(const InterferometerModel& model, Phase phi) {
    model.validate();
    return lossy_event_probs(ideal_outcome_probs(phi, model.visibility),
                             model.eta_t.at(phi), model.eta_r.at(phi));
}

RecordedDistribution with_double_pairs(const RecordedDistribution& single, double xi) {
    if (!(xi >= 0.0)) {
        throw DomainError("xi must be non-negative");
    }
    if (xi == 0.0) {
        return single;
    }
    // Two pairs: a detector stays dark only if it is dark for both.
    const double none = single.Pnone;
    const double t_only = (single.P20 + none) * (single.P20 + none) - none * none;
    const double r_only = (single.P02 + none) * (single.P02 + none) - none * none;
    const double none2 = none * none;
    const double both = 1.0 - none2 - t_only - r_only;

    const double w1 = 1.0 / (1.0 + xi);
    const double w2 = xi / (1.0 + xi);
    RecordedDistribution d;
    d.P11 = w1 * single.P11 + w2 * both;
    d.P20 = w1 * single.P20 + w2 * t_only;
    d.P02 = w1 * single.P02 + w2 * r_only;
    d.Pnone = w1 * none + w2 * none2;
    const double detected = d.detected();
    d.p11 = d.P11 / detected;
    d.p20 = d.P20 / detected;
    d.p02 = d.P02 / detected;
    return d;
}

RecordedDistribution emission_probs(const InterferometerModel& model, Phase phi) {
    return with_double_pairs(recorded_probs(model, phi), model.xi);
}

OutcomeEfficiencies outcome_efficiencies(double eta_t, double eta_r) {
    check_efficiency(eta_t, "eta_t");
    check_efficiency(eta_r, "eta_r");
    const double lt = 1.0 - eta_t;
    const double lr = 1.0 - eta_r;
    return {1.0 - lt * lr, 1.0 - lt * lt, 1.0 - lr * lr};
}

double eta_min(const InterferometerModel& model, Phase phi) {
    return outcome_efficiencies(model.eta_t.at(phi), model.eta_r.at(phi)).min();
}

double resch_criterion(double eta, double visibility, int photon_number) {
    check_efficiency(eta, "eta");
    check_visibility(visibility);
    if (photon_number < 1) {
        throw DomainError("photon number must be positive");
    }
    return std::pow(eta, photon_number) * visibility * visibility * photon_number;
}

} // namespace noon
