#pragma once

#include <functional>
#include <vector>

#include "laxol/grid_fn.hpp"

namespace laxol {

// Kinetic part of a separable Hamiltonian, described through its convex
// conjugate kstar. Mechanical means kstar(v) = v^2/2 - drift*v (the conjugate
// of p -> |p + drift|^2/2); Tabulated interpolates convex samples linearly
// over a bounded velocity window and refuses to extrapolate.
struct Kinetic {
    enum class Kind { Mechanical, Tabulated };

    Kind kind = Kind::Mechanical;
    double drift = 0.0;
    GridFn table;  // Tabulated only: samples over [table.origin, table.origin + n*step]

    double kstar(double v) const;
    double argmin_velocity() const;
    double v_min() const;
    double v_max() const;
};

Kinetic mechanical(double drift);
Kinetic tabulated(std::vector<double> samples, double v0, double dv);

// Maps the unit period onto the angle [-pi, pi); the spatial builtins read
// cos(frequency * theta(x)), so x = 0 corresponds to the angle -pi.
double theta(double x);

struct Potential {
    enum class Kind { Zero, Const, Cosine, Custom };
    enum class TimeMod { None, Sin, Cos };

    Kind kind = Kind::Zero;
    double value = 0.0;      // Const
    double offset = 0.0;     // Cosine: offset + amplitude * mod(omega*t) * cos(frequency*theta(x))
    double amplitude = 0.0;
    int frequency = 1;
    TimeMod tmod = TimeMod::None;
    double omega = 0.0;
    std::function<double(double, double)> custom;
    double custom_bound = 0.0;
    bool custom_time_dependent = false;

    double operator()(double t, double x) const;
    double bound() const;
    double lipschitz_x() const;
    bool time_dependent() const;
};

Potential potential_zero();
Potential potential_const(double c);
Potential potential_cosine(double offset, double amplitude, int frequency,
                           Potential::TimeMod tmod = Potential::TimeMod::None,
                           double omega = 0.0);
Potential potential_custom(std::function<double(double, double)> f, double bound,
                           bool time_dependent);

struct HamiltonianSpec {
    Kinetic kinetic;
    Potential potential;
    bool space_periodic = true;
    bool time_periodic = false;  // potential repeats with period 1 (autonomous counts)
};

// Validates the pieces (tabulated convexity, unit time period when claimed)
// and spot-checks |V| <= bound on a fixed probe set.
HamiltonianSpec make_spec(Kinetic kinetic, Potential potential, bool space_periodic,
                          bool time_periodic);

}  // namespace laxol
