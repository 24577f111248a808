#include "noon/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace noon::opt {

MinimizeResult nelder_mead(const Objective& f, std::vector<double> x0,
                           const NelderMeadOptions& options) {
    const std::size_t n = x0.size();
    MinimizeResult result;
    std::vector<std::vector<double>> simplex(n + 1, x0);
    std::vector<double> values(n + 1);

    auto eval = [&](const std::vector<double>& x) {
        ++result.evaluations;
        return f(x);
    };

    for (std::size_t i = 0; i < n; ++i) {
        const double step = options.initial_step.size() == 1 ? options.initial_step[0]
                                                             : options.initial_step.at(i);
        simplex[i + 1][i] += step;
    }
    for (std::size_t i = 0; i <= n; ++i) {
        values[i] = eval(simplex[i]);
    }

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n);
    std::vector<double> trial(n);
    auto point_along = [&](double t, const std::vector<double>& from) {
        // centroid + t * (centroid - from)
        for (std::size_t j = 0; j < n; ++j) {
            trial[j] = centroid[j] + t * (centroid[j] - from[j]);
        }
        return trial;
    };

    while (result.evaluations < options.max_evaluations) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second_worst = order[n - 1];

        double diameter = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                diameter = std::max(diameter, std::abs(simplex[i][j] - simplex[best][j]));
            }
        }
        const double spread = values[worst] - values[best];
        if (spread <= options.f_tol * (std::abs(values[best]) + options.f_floor) &&
            diameter <= options.x_tol) {
            result.converged = true;
            break;
        }
        if (diameter <= options.x_tol * 1e-3) {
            // Simplex collapsed; nothing more to gain.
            result.converged = true;
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) {
                continue;
            }
            for (std::size_t j = 0; j < n; ++j) {
                centroid[j] += simplex[i][j] / static_cast<double>(n);
            }
        }

        const std::vector<double> reflected = point_along(1.0, simplex[worst]);
        const double f_reflected = eval(reflected);
        if (f_reflected < values[best]) {
            const std::vector<double> expanded = point_along(2.0, simplex[worst]);
            const double f_expanded = eval(expanded);
            if (f_expanded < f_reflected) {
                simplex[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_reflected;
            }
            continue;
        }
        if (f_reflected < values[second_worst]) {
            simplex[worst] = reflected;
            values[worst] = f_reflected;
            continue;
        }
        const bool outside = f_reflected < values[worst];
        const std::vector<double> contracted =
            outside ? point_along(0.5, simplex[worst]) : point_along(-0.5, simplex[worst]);
        const double f_contracted = eval(contracted);
        if (f_contracted < (outside ? f_reflected : values[worst])) {
            simplex[worst] = contracted;
            values[worst] = f_contracted;
            continue;
        }
        // Shrink towards the best vertex.
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) {
                continue;
            }
            for (std::size_t j = 0; j < n; ++j) {
                simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
            }
            values[i] = eval(simplex[i]);
        }
    }

    const auto it = std::min_element(values.begin(), values.end());
    const auto idx = static_cast<std::size_t>(it - values.begin());
    result.x = simplex[idx];
    result.value = *it;
    return result;
}

ScalarMinimum golden_section(const std::function<double(double)>& f, double lo, double hi,
                             double tol) {
    constexpr double kInvPhi = 0.6180339887498949;
    ScalarMinimum best;
    auto consider = [&](double x, double v) {
        if (best.evaluations == 0 || v < best.value || (v == best.value && x < best.x)) {
            best.x = x;
            best.value = v;
        }
        ++best.evaluations;
    };

    consider(lo, f(lo));
    consider(hi, f(hi));
    double a = lo;
    double b = hi;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = f(c);
    double fd = f(d);
    consider(c, fc);
    consider(d, fd);
    while (b - a > tol) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = f(c);
            consider(c, fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = f(d);
            consider(d, fd);
        }
    }
    return best;
}

} // namespace noon::opt
