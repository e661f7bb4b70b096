#pragma once

#include "sdeu/linalg.hpp"

#include <functional>

namespace sdeu {

struct NelderMeadOptions {
    int max_evaluations = 4000;
    double f_tolerance = 1e-10;
    double initial_step = 0.5;
};

struct MinimizeResult {
    Vector x;
    double value = 0.0;
    int evaluations = 0;
    bool converged = false;
};

/// Derivative-free simplex minimization (standard reflection/expansion/
/// contraction/shrink coefficients 1, 2, 0.5, 0.5). Non-finite objective
/// values are treated as +inf.
MinimizeResult nelder_mead(const std::function<double(const Vector&)>& f, const Vector& x0,
                           const NelderMeadOptions& options = {});

}  // namespace sdeu
