#include "laxol/hamiltonian.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <utility>

#include "laxol/errors.hpp"

namespace laxol {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double theta(double x) {
    const double r = x - std::floor(x);
    return kTwoPi * r - std::numbers::pi;
}

Kinetic mechanical(double drift) {
    Kinetic k;
    k.kind = Kinetic::Kind::Mechanical;
    k.drift = drift;
    return k;
}

Kinetic tabulated(std::vector<double> samples, double v0, double dv) {
    if (samples.size() < 2) throw InvalidInput("tabulated: need at least two samples");
    Kinetic k;
    k.kind = Kinetic::Kind::Tabulated;
    k.table = make_grid_fn(std::move(samples), dv, v0);
    std::size_t bad = 0;
    if (!is_convex(k.table, &bad))
        throw InvalidInput("tabulated: samples are not convex, slope drops at segment " +
                           std::to_string(bad + 1));
    return k;
}

double Kinetic::kstar(double v) const {
    if (kind == Kind::Mechanical) return 0.5 * v * v - drift * v;
    const double lo = table.origin;
    const double hi = table.coord(table.n());
    if (v < lo || v > hi)
        throw InvalidInput("tabulated kstar: velocity " + std::to_string(v) +
                           " outside table window [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "]");
    const double pos = (v - lo) / table.step;
    std::size_t i = static_cast<std::size_t>(pos);
    if (i >= table.n()) i = table.n() - 1;
    const double frac = pos - static_cast<double>(i);
    return table.values[i] + frac * (table.values[i + 1] - table.values[i]);
}

double Kinetic::argmin_velocity() const {
    if (kind == Kind::Mechanical) return drift;
    std::size_t lo = 0;
    for (std::size_t i = 1; i < table.size(); ++i)
        if (table.values[i] < table.values[lo]) lo = i;
    std::size_t hi = lo;
    while (hi + 1 < table.size() && table.values[hi + 1] == table.values[lo]) ++hi;
    return table.coord(lo) + 0.5 * static_cast<double>(hi - lo) * table.step;
}

double Kinetic::v_min() const {
    return kind == Kind::Mechanical ? -std::numeric_limits<double>::infinity() : table.origin;
}

double Kinetic::v_max() const {
    return kind == Kind::Mechanical ? std::numeric_limits<double>::infinity()
                                    : table.coord(table.n());
}

Potential potential_zero() { return Potential{}; }

Potential potential_const(double c) {
    Potential p;
    p.kind = Potential::Kind::Const;
    p.value = c;
    return p;
}

Potential potential_cosine(double offset, double amplitude, int frequency,
                           Potential::TimeMod tmod, double omega) {
    if (frequency < 1) throw InvalidInput("potential_cosine: frequency must be >= 1");
    Potential p;
    p.kind = Potential::Kind::Cosine;
    p.offset = offset;
    p.amplitude = amplitude;
    p.frequency = frequency;
    p.tmod = tmod;
    p.omega = omega;
    return p;
}

Potential potential_custom(std::function<double(double, double)> f, double bound,
                           bool time_dependent) {
    Potential p;
    p.kind = Potential::Kind::Custom;
    p.custom = std::move(f);
    p.custom_bound = bound;
    p.custom_time_dependent = time_dependent;
    return p;
}

double Potential::operator()(double t, double x) const {
    switch (kind) {
        case Kind::Zero:
            return 0.0;
        case Kind::Const:
            return value;
        case Kind::Cosine: {
            double mod = 1.0;
            if (tmod == TimeMod::Sin)
                mod = std::sin(omega * t);
            else if (tmod == TimeMod::Cos)
                mod = std::cos(omega * t);
            return offset + amplitude * mod * std::cos(static_cast<double>(frequency) * theta(x));
        }
        case Kind::Custom:
            return custom(t, x);
    }
    return 0.0;
}

double Potential::bound() const {
    switch (kind) {
        case Kind::Zero:
            return 0.0;
        case Kind::Const:
            return std::abs(value);
        case Kind::Cosine:
            return std::abs(offset) + std::abs(amplitude);
        case Kind::Custom:
            return custom_bound;
    }
    return 0.0;
}

double Potential::lipschitz_x() const {
    if (kind == Kind::Cosine) return std::abs(amplitude) * static_cast<double>(frequency) * kTwoPi;
    if (kind == Kind::Custom) return std::numeric_limits<double>::infinity();
    return 0.0;
}

bool Potential::time_dependent() const {
    if (kind == Kind::Cosine) return tmod != TimeMod::None && amplitude != 0.0;
    if (kind == Kind::Custom) return custom_time_dependent;
    return false;
}

HamiltonianSpec make_spec(Kinetic kinetic, Potential potential, bool space_periodic,
                          bool time_periodic) {
    if (time_periodic && potential.kind == Potential::Kind::Cosine && potential.time_dependent()) {
        const double turns = potential.omega / kTwoPi;
        const double nearest = std::round(turns);
        if (nearest < 1.0 || std::abs(turns - nearest) > 1e-9)
            throw InvalidInput(
                "make_spec: time-periodic flag requires omega to be a multiple of 2*pi");
    }
    HamiltonianSpec spec{std::move(kinetic), std::move(potential), space_periodic, time_periodic};
    const double bound = spec.potential.bound();
    std::mt19937_64 rng(0x5eedULL);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int probe = 0; probe < 64; ++probe) {
        const double t = 4.0 * unit(rng) - 2.0;
        const double x = 4.0 * unit(rng) - 2.0;
        const double v = spec.potential(t, x);
        if (!std::isfinite(v)) throw InvalidInput("make_spec: potential sample is not finite");
        if (std::abs(v) > bound + 1e-9 * std::max(1.0, bound))
            throw InvalidInput("make_spec: potential exceeds its declared bound");
    }
    return spec;
}

}  // namespace laxol
