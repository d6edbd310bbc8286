#include "laxol/grid_fn.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "laxol/errors.hpp"

namespace laxol {

void validate(const GridFn& f, const char* who) {
    if (f.values.empty()) throw InvalidInput(std::string(who) + ": empty sample vector");
    if (!(f.step > 0.0)) throw InvalidInput(std::string(who) + ": step must be positive");
    for (double v : f.values) {
        if (!std::isfinite(v)) throw InvalidInput(std::string(who) + ": non-finite sample");
    }
    if (f.periodic) {
        if (f.n() < 1) throw InvalidInput(std::string(who) + ": periodic function needs n >= 1");
        if (f.values.front() != f.values.back())
            throw InvalidInput(std::string(who) + ": periodic seam samples differ");
    }
}

GridFn make_grid_fn(std::vector<double> values, double step, double origin) {
    GridFn f{std::move(values), step, origin, false};
    validate(f, "make_grid_fn");
    return f;
}

GridFn make_periodic(std::vector<double> fundamental, double step, double origin) {
    if (fundamental.empty()) throw InvalidInput("make_periodic: empty sample vector");
    fundamental.push_back(fundamental.front());
    GridFn f{std::move(fundamental), step, origin, true};
    validate(f, "make_periodic");
    return f;
}

std::vector<double> slopes(const GridFn& f) {
    std::vector<double> s(f.n());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = f.values[i + 1] - f.values[i];
    return s;
}

bool is_convex(const GridFn& f, std::size_t* first_violation) {
    for (std::size_t i = 0; i + 2 < f.size(); ++i) {
        const double lo = f.values[i + 1] - f.values[i];
        const double hi = f.values[i + 2] - f.values[i + 1];
        if (hi < lo) {
            if (first_violation) *first_violation = i;
            return false;
        }
    }
    return true;
}

bool is_concave(const GridFn& f, std::size_t* first_violation) {
    for (std::size_t i = 0; i + 2 < f.size(); ++i) {
        const double lo = f.values[i + 1] - f.values[i];
        const double hi = f.values[i + 2] - f.values[i + 1];
        if (hi > lo) {
            if (first_violation) *first_violation = i;
            return false;
        }
    }
    return true;
}

bool all_finite(const GridFn& f) {
    return std::all_of(f.values.begin(), f.values.end(),
                       [](double v) { return std::isfinite(v); });
}

double max_abs(const GridFn& f) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
}

double sup_dist(const GridFn& f, const GridFn& g) {
    if (f.size() != g.size()) throw InvalidInput("sup_dist: size mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::abs(f.values[i] - g.values[i]));
    return m;
}

}  // namespace laxol
