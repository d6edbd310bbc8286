#include "laxol/weakkam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "laxol/errors.hpp"
#include "laxol/parallel.hpp"

namespace laxol {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::int64_t steps_per_period(const SchemeParams& params, const char* who) {
    const std::int64_t ell = std::llround(1.0 / params.tau);
    if (ell < 1 || std::abs(static_cast<double>(ell) * params.tau - 1.0) > 1e-9)
        throw InvalidInput(std::string(who) + ": tau must be a unit fraction of the time period");
    return ell;
}

void require_time_periodic(const HamiltonianSpec& spec, const char* who) {
    if (!spec.space_periodic)
        throw InvalidInput(std::string(who) + ": spec must be space-periodic");
    if (spec.potential.time_dependent() && !spec.time_periodic)
        throw InvalidInput(std::string(who) + ": spec must be time-periodic with period 1");
}

// One whole period of the semigroup with in-period time labels, so the
// potential samples repeat bit-identically from one period to the next.
GridFn apply_one_period(const GridFn& u, const HamiltonianSpec& spec, const SchemeParams& params,
                        const Kernel& kernel, std::int64_t ell) {
    GridFn v = u;
    for (std::int64_t i = 0; i < ell; ++i)
        v = step_fully_discrete(v, static_cast<double>(i) * params.tau, spec, params, kernel);
    return v;
}

}  // namespace

EffectiveHEstimate estimate_hbar_drift(const GridFn& u0, const HamiltonianSpec& spec,
                                       const SchemeParams& params, int max_periods, double tol) {
    require_time_periodic(spec, "estimate_hbar_drift");
    const std::int64_t ell = steps_per_period(params, "estimate_hbar_drift");
    if (max_periods < 1) throw InvalidInput("estimate_hbar_drift: max_periods must be >= 1");
    const Kernel kernel = build_kernel(spec, params);

    EffectiveHEstimate est;
    est.method = EffectiveHEstimate::Method::Drift;

    GridFn u = u0;
    std::vector<double> prev_delta;
    std::vector<double> delta(u0.size(), 0.0);
    const std::size_t fundamental = u0.periodic ? u0.n() : u0.size();

    for (int p = 0; p < max_periods; ++p) {
        GridFn next = apply_one_period(u, spec, params, kernel, ell);
        est.n_steps += ell;
        for (std::size_t j = 0; j < u.size(); ++j) delta[j] = next.values[j] - u.values[j];
        u = std::move(next);

        double mean = 0.0;
        for (std::size_t j = 0; j < fundamental; ++j) mean += delta[j];
        mean /= static_cast<double>(fundamental);
        est.h_bar = mean;

        double residual = 0.0;
        for (std::size_t j = 0; j < u.size(); ++j)
            residual = std::max(residual, std::abs(delta[j] - mean));
        est.residual = residual;

        if (!prev_delta.empty()) {
            double change = 0.0;
            for (std::size_t j = 0; j < delta.size(); ++j)
                change = std::max(change, std::abs(delta[j] - prev_delta[j]));
            if (change < tol) {
                est.converged = true;
                return est;
            }
        }
        prev_delta = delta;
    }
    return est;
}

MinPlusMatrix build_period_matrix(const HamiltonianSpec& spec, const SchemeParams& params) {
    require_time_periodic(spec, "build_period_matrix");
    const std::int64_t ell = steps_per_period(params, "build_period_matrix");
    const std::size_t n = static_cast<std::size_t>(params.n_space);
    if (n > 512) throw InvalidInput("build_period_matrix: n_space exceeds the dense guard (512)");

    const Kernel kernel = build_kernel(spec, params);
    const std::int64_t first =
        kernel.center_index - static_cast<std::int64_t>(kernel.window.n() / 2);
    const std::int64_t last = first + static_cast<std::int64_t>(kernel.window.n());
    const double eps = params.epsilon();

    MinPlusMatrix C;
    MinPlusMatrix step;
    step.n = n;
    step.cost.assign(n * n, kInf);

    for (std::int64_t i = 0; i < ell; ++i) {
        const double t = static_cast<double>(i) * params.tau;
        const double tv = params.v_sampling == PotentialSampling::Arrival ? t + params.tau : t;
        // kinetic part: min over period shifts of the window sample
        parallel_for(n, [&](std::size_t y) {
            for (std::size_t x = 0; x < n; ++x) {
                const std::int64_t d0 = static_cast<std::int64_t>(x) - static_cast<std::int64_t>(y);
                double kin = kInf;
                // shifts k with d0 + k*n inside [first, last]
                std::int64_t k = (first - d0) / static_cast<std::int64_t>(n) - 1;
                for (; d0 + k * static_cast<std::int64_t>(n) <= last; ++k) {
                    const std::int64_t d = d0 + k * static_cast<std::int64_t>(n);
                    if (d < first) continue;
                    kin = std::min(kin,
                                   kernel.window.values[static_cast<std::size_t>(d - first)]);
                }
                const double vx = spec.potential(tv, static_cast<double>(x) * eps);
                step.at(y, x) = kin - params.tau * vx;
            }
        });
        C = (i == 0) ? step : minplus_product(C, step);
    }
    return C;
}

MinPlusMatrix minplus_product(const MinPlusMatrix& A, const MinPlusMatrix& B) {
    if (A.n != B.n) throw InvalidInput("minplus_product: size mismatch");
    const std::size_t n = A.n;
    MinPlusMatrix C;
    C.n = n;
    C.cost.assign(n * n, kInf);
    parallel_for(n, [&](std::size_t y) {
        for (std::size_t z = 0; z < n; ++z) {
            const double a = A.at(y, z);
            if (a == kInf) continue;
            const double* brow = B.cost.data() + z * n;
            double* crow = C.cost.data() + y * n;
            for (std::size_t x = 0; x < n; ++x) crow[x] = std::min(crow[x], a + brow[x]);
        }
    });
    return C;
}

GridFn minplus_apply(const MinPlusMatrix& C, const GridFn& u) {
    if (!u.periodic || u.n() != C.n)
        throw InvalidInput("minplus_apply: u must be periodic over the quotient grid");
    std::vector<double> fundamental(C.n, kInf);
    for (std::size_t x = 0; x < C.n; ++x) {
        double best = kInf;
        for (std::size_t y = 0; y < C.n; ++y) best = std::min(best, u.values[y] + C.at(y, x));
        fundamental[x] = best;
    }
    return make_periodic(std::move(fundamental), u.step, u.origin);
}

double eigenvalue_karp(const MinPlusMatrix& C) {
    const std::size_t n = C.n;
    if (n == 0) throw InvalidInput("eigenvalue_karp: empty matrix");
    for (double v : C.cost)
        if (!std::isfinite(v)) throw InvalidInput("eigenvalue_karp: non-finite entry");

    // D[k][v] = least weight of a k-arc walk from vertex 0 to v.
    std::vector<std::vector<double>> D(n + 1, std::vector<double>(n, kInf));
    D[0][0] = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
        for (std::size_t u = 0; u < n; ++u) {
            const double base = D[k - 1][u];
            if (base == kInf) continue;
            const double* row = C.cost.data() + u * n;
            for (std::size_t v = 0; v < n; ++v) D[k][v] = std::min(D[k][v], base + row[v]);
        }
    }

    double best = kInf;
    for (std::size_t v = 0; v < n; ++v) {
        if (D[n][v] == kInf) continue;
        double worst = -kInf;
        for (std::size_t k = 0; k < n; ++k) {
            if (D[k][v] == kInf) continue;
            worst = std::max(worst, (D[n][v] - D[k][v]) / static_cast<double>(n - k));
        }
        if (worst > -kInf) best = std::min(best, worst);
    }
    return best;
}

double fixed_point_residual(const GridFn& u, double h_bar, const HamiltonianSpec& spec,
                            const SchemeParams& params) {
    require_time_periodic(spec, "fixed_point_residual");
    const std::int64_t ell = steps_per_period(params, "fixed_point_residual");
    const Kernel kernel = build_kernel(spec, params);
    GridFn v = apply_one_period(u, spec, params, kernel, ell);
    double res = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j)
        res = std::max(res, std::abs(v.values[j] - u.values[j] - h_bar));
    return res;
}

std::optional<std::pair<std::int64_t, std::int64_t>> detect_eventual_periodicity(
    const EvolutionTrace& trace, double h_bar, double tol, std::int64_t step_modulus) {
    if (step_modulus < 1) throw InvalidInput("detect_eventual_periodicity: bad modulus");
    const std::size_t count = trace.snapshots.size();
    if (count < 2) return std::nullopt;
    const double t0 = trace.times.front();

    auto compensated_diff = [&](std::size_t a, std::size_t b) {
        const GridFn& ua = trace.snapshots[a];
        const GridFn& ub = trace.snapshots[b];
        const double ca = (trace.times[a] - t0) * h_bar;
        const double cb = (trace.times[b] - t0) * h_bar;
        double m = 0.0;
        for (std::size_t j = 0; j < ua.size(); ++j) {
            m = std::max(m, std::abs((ua.values[j] - ca) - (ub.values[j] - cb)));
            if (m >= tol) break;
        }
        return m;
    };

    for (std::size_t a = 0; a < count; ++a) {
        for (std::size_t b = a + 1; b < count; ++b) {
            const std::int64_t span = trace.snapshot_steps[b] - trace.snapshot_steps[a];
            if (span % step_modulus != 0) continue;
            if (compensated_diff(a, b) < tol)
                return std::make_pair(trace.snapshot_steps[a], span);
        }
    }
    return std::nullopt;
}

}  // namespace laxol
