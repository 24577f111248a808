#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace noon::opt {

struct NelderMeadOptions {
    /// Stop when the simplex objective spread falls below
    /// f_tol * (|f_best| + f_floor) and its diameter below x_tol.
    double f_tol = 1e-10;
    double f_floor = 1e-30;
    double x_tol = 1e-12;
    std::size_t max_evaluations = 100'000;
    /// Initial simplex edge per coordinate (scalar applied to all if size 1).
    std::vector<double> initial_step{0.01};
};

struct MinimizeResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t evaluations = 0;
    bool converged = false;
};

using Objective = std::function<double(const std::vector<double>&)>;

MinimizeResult nelder_mead(const Objective& f, std::vector<double> x0,
                           const NelderMeadOptions& options = {});

struct ScalarMinimum {
    double x = 0.0;
    double value = 0.0;
    std::size_t evaluations = 0;
};

/// Golden-section search on [lo, hi] down to a bracket of width `tol`.
/// Returns the best point seen, including the end points.
ScalarMinimum golden_section(const std::function<double(double)>& f, double lo, double hi,
                             double tol);

} // namespace noon::opt
