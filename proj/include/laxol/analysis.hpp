#pragma once

#include <span>

namespace laxol {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double max_residual = 0.0;
};

// Ordinary least squares y ~ intercept + slope*x.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

// Slope of log(y) against log(x); the observed convergence order.
double fitted_order(std::span<const double> x, std::span<const double> y);

}  // namespace laxol
