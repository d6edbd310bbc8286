#pragma once

#include <cstddef>
#include <vector>

namespace laxol {

// Real-valued function sampled on a uniform grid. Samples live at
// origin + i*step for i = 0..n (n = values.size() - 1); outside that range the
// function is +infinity (never stored). A periodic GridFn holds one closed
// period: the period is n*step, index arithmetic wraps modulo n, and
// values.front() == values.back() (the seam sample is stored twice).
struct GridFn {
    std::vector<double> values;
    double step = 1.0;
    double origin = 0.0;
    bool periodic = false;

    std::size_t n() const { return values.size() - 1; }  // segment count
    std::size_t size() const { return values.size(); }
    double coord(std::size_t i) const { return origin + static_cast<double>(i) * step; }
    double operator[](std::size_t i) const { return values[i]; }
};

// Validating constructors. make_periodic takes the fundamental domain (one
// sample per grid point of the open period) and duplicates the seam.
GridFn make_grid_fn(std::vector<double> values, double step, double origin = 0.0);
GridFn make_periodic(std::vector<double> fundamental, double step, double origin = 0.0);

void validate(const GridFn& f, const char* who);

// slopes[i] = values[i+1] - values[i], exact floating-point differences.
std::vector<double> slopes(const GridFn& f);

// Discrete convexity/concavity: slope increments compared exactly, no epsilon.
// On failure *first_violation (if given) receives the index of the offending
// segment pair.
bool is_convex(const GridFn& f, std::size_t* first_violation = nullptr);
bool is_concave(const GridFn& f, std::size_t* first_violation = nullptr);

bool all_finite(const GridFn& f);
double max_abs(const GridFn& f);

// sup |f - g| over samples; requires identical sizes.
double sup_dist(const GridFn& f, const GridFn& g);

}  // namespace laxol
