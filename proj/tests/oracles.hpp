#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the library's probability code.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "noon/calibration.hpp"
#include "noon/model.hpp"
#include "noon/simulator.hpp"

namespace oracle {

inline constexpr double kPi = 3.14159265358979323846;

/// Photon destinations per ideal outcome: 0 = transmitted arm, 1 = reflected arm.
inline const std::array<std::array<int, 2>, 3> kRoutes{{{0, 1}, {0, 0}, {1, 1}}};

struct Classes {
    double c11 = 0.0;
    double c20 = 0.0;
    double c02 = 0.0;
    double none = 0.0;

    [[nodiscard]] double detected() const { return c11 + c20 + c02; }
    [[nodiscard]] std::array<double, 3> normalized() const {
        const double d = detected();
        return {c11 / d, c20 / d, c02 / d};
    }
};

inline void classify(bool t, bool r, double w, Classes& out) {
    if (t && r) {
        out.c11 += w;
    } else if (t) {
        out.c20 += w;
    } else if (r) {
        out.c02 += w;
    } else {
        out.none += w;
    }
}

/// Enumerates every keep/lose pattern of every photon in `pairs` emitted pairs.
/// q holds the ideal outcome probabilities (11, 20, 02).
inline Classes enumerate_losses(const std::array<double, 3>& q, double eta_t, double eta_r,
                                int pairs = 1) {
    const std::array<double, 2> eta{eta_t, eta_r};
    Classes out;
    const int photons = 2 * pairs;
    int outcome_combos = 1;
    for (int i = 0; i < pairs; ++i) {
        outcome_combos *= 3;
    }
    for (int oc = 0; oc < outcome_combos; ++oc) {
        std::vector<int> arms;
        double w_outcome = 1.0;
        int code = oc;
        for (int p = 0; p < pairs; ++p) {
            const int o = code % 3;
            code /= 3;
            w_outcome *= q[static_cast<std::size_t>(o)];
            for (int a : kRoutes[static_cast<std::size_t>(o)]) {
                arms.push_back(a);
            }
        }
        for (int mask = 0; mask < (1 << photons); ++mask) {
            double w = w_outcome;
            bool t = false;
            bool r = false;
            for (int ph = 0; ph < photons; ++ph) {
                const int arm = arms[static_cast<std::size_t>(ph)];
                const bool kept = ((mask >> ph) & 1) != 0;
                w *= kept ? eta[static_cast<std::size_t>(arm)]
                          : 1.0 - eta[static_cast<std::size_t>(arm)];
                if (kept) {
                    (arm == 0 ? t : r) = true;
                }
            }
            classify(t, r, w, out);
        }
    }
    return out;
}

/// Single pairs with weight 1/(1+xi), double pairs with weight xi/(1+xi).
inline Classes enumerate_emission(const std::array<double, 3>& q, double eta_t,
                                  double eta_r, double xi) {
    const Classes one = enumerate_losses(q, eta_t, eta_r, 1);
    const Classes two = enumerate_losses(q, eta_t, eta_r, 2);
    const double w1 = 1.0 / (1.0 + xi);
    const double w2 = xi / (1.0 + xi);
    return {w1 * one.c11 + w2 * two.c11, w1 * one.c20 + w2 * two.c20,
            w1 * one.c02 + w2 * two.c02, w1 * one.none + w2 * two.none};
}

/// Outcome probabilities of the v = 1 two-photon state, computed from Fock
/// amplitudes: |2,0> - exp(2i phi)|0,2> in the H/V modes, a half-wave plate at
/// 22.5 degrees, then a polarizing splitter sending H to the transmitted arm.
inline std::array<double, 3> two_photon_amplitudes(double phi) {
    using cd = std::complex<double>;
    // Coefficients of monomials (a_H^dag)^m (a_V^dag)^n, keyed by (m, n).
    std::map<std::pair<int, int>, cd> state;
    const cd e = std::polar(1.0, 2.0 * phi);
    state[{2, 0}] = 1.0 / std::sqrt(2.0) / std::sqrt(2.0);
    state[{0, 2}] = -e / std::sqrt(2.0) / std::sqrt(2.0);

    // Half-wave plate: a_H -> (a_H + a_V)/sqrt2, a_V -> (a_H - a_V)/sqrt2.
    std::map<std::pair<int, int>, cd> out;
    const double s = 1.0 / std::sqrt(2.0);
    for (const auto& [mn, c] : state) {
        // Expand (s(x + y))^m (s(x - y))^n by repeated multiplication.
        std::map<std::pair<int, int>, cd> poly{{{0, 0}, c}};
        auto multiply = [&](double sign) {
            std::map<std::pair<int, int>, cd> next;
            for (const auto& [k, v] : poly) {
                next[{k.first + 1, k.second}] += v * s;
                next[{k.first, k.second + 1}] += v * s * sign;
            }
            poly = std::move(next);
        };
        for (int i = 0; i < mn.first; ++i) {
            multiply(1.0);
        }
        for (int i = 0; i < mn.second; ++i) {
            multiply(-1.0);
        }
        for (const auto& [k, v] : poly) {
            out[k] += v;
        }
    }
    auto fock_prob = [&](int m, int n) {
        const auto it = out.find({m, n});
        if (it == out.end()) {
            return 0.0;
        }
        const double norm = std::tgamma(m + 1.0) * std::tgamma(n + 1.0);
        return std::norm(it->second) * norm;
    };
    return {fock_prob(1, 1), fock_prob(2, 0), fock_prob(0, 2)};
}

/// q_i for visibility v written out independently of the library.
inline std::array<double, 3> fringe(double phi, double v) {
    const double c = v * std::cos(2.0 * phi);
    return {0.5 * (1.0 + c), 0.25 * (1.0 - c), 0.25 * (1.0 - c)};
}

/// Normalized recorded probabilities from the enumeration oracle.
inline std::array<double, 3> recorded(double phi, double v, double eta_t, double eta_r,
                                      double xi = 0.0) {
    return enumerate_emission(fringe(phi, v), eta_t, eta_r, xi).normalized();
}

/// Fisher information by a five-point stencil on the oracle probabilities.
inline double fisher(double phi, double v, double eta_t, double eta_r, double xi = 0.0) {
    const double h = 1e-4;
    const auto pm2 = recorded(phi - 2 * h, v, eta_t, eta_r, xi);
    const auto pm1 = recorded(phi - h, v, eta_t, eta_r, xi);
    const auto p0 = recorded(phi, v, eta_t, eta_r, xi);
    const auto pp1 = recorded(phi + h, v, eta_t, eta_r, xi);
    const auto pp2 = recorded(phi + 2 * h, v, eta_t, eta_r, xi);
    double f = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double d = (pm2[i] - 8 * pm1[i] + 8 * pp1[i] - pp2[i]) / (12 * h);
        f += d * d / p0[i];
    }
    return f;
}

/// Scan whose counts are the expected values at `pulses` pulses per row,
/// rounded to integers. Effectively noiseless for large pulse counts.
inline noon::sim::FringeScan expected_scan(const noon::InterferometerModel& model,
                                           double pair_prob, std::uint64_t pulses,
                                           const std::vector<double>& phases) {
    std::vector<noon::sim::ScanRow> rows;
    const double emissions = static_cast<double>(pulses) * pair_prob * (1.0 + model.xi);
    for (double phi : phases) {
        const auto q = fringe(phi, model.visibility);
        const auto c = enumerate_emission(q, model.eta_t.at(noon::Phase(phi)),
                                          model.eta_r.at(noon::Phase(phi)), model.xi);
        noon::sim::ScanRow row;
        row.phi = noon::Phase(phi);
        row.counts.c11 = static_cast<std::uint64_t>(std::llround(emissions * c.c11));
        row.counts.c20 = static_cast<std::uint64_t>(std::llround(emissions * c.c20));
        row.counts.c02 = static_cast<std::uint64_t>(std::llround(emissions * c.c02));
        row.counts.pulses = pulses;
        rows.push_back(row);
    }
    return noon::sim::FringeScan(std::move(rows));
}

inline std::vector<double> uniform_phases(std::size_t n, double span = 2.0 * kPi) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = span * static_cast<double>(i) / static_cast<double>(n);
    }
    return out;
}

inline noon::InterferometerModel reference_model() {
    noon::InterferometerModel m;
    m.visibility = 0.989;
    m.eta_t = noon::TransmissionProfile::constant(0.8026);
    m.eta_r = noon::TransmissionProfile::constant(0.7941);
    m.xi = 0.00155;
    return m;
}

/// Pearson chi-square of observed class counts against probabilities.
inline double chi_square(const std::array<std::uint64_t, 3>& observed,
                         const std::array<double, 3>& p) {
    double n = 0.0;
    for (auto o : observed) {
        n += static_cast<double>(o);
    }
    double chi2 = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double e = n * p[i];
        const double d = static_cast<double>(observed[i]) - e;
        chi2 += d * d / e;
    }
    return chi2;
}

} // namespace oracle
