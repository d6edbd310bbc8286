#include "laxol/scheme.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "laxol/errors.hpp"

namespace laxol {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_u_grid(const GridFn& u, const SchemeParams& params, const char* who) {
    validate(u, who);
    if (u.step != params.epsilon())
        throw InvalidInput(std::string(who) + ": u.step does not match params.epsilon()");
    if (u.periodic && u.n() != static_cast<std::size_t>(params.n_space))
        throw InvalidInput(std::string(who) + ": periodic u must hold one unit period");
}

double potential_time(double t, const SchemeParams& params) {
    return params.v_sampling == PotentialSampling::Arrival ? t + params.tau : t;
}

// Potential sampled per grid index; periodic functions reuse the fundamental
// index so the seam samples stay bit-identical.
double sample_coord(const GridFn& u, std::size_t j) {
    if (u.periodic && j >= u.n()) j -= u.n() * (j / u.n());
    return u.coord(j);
}

}  // namespace

void validate(const SchemeParams& params) {
    if (params.n_space < 1) throw InvalidInput("SchemeParams: n_space must be >= 1");
    if (!(params.tau > 0.0)) throw InvalidInput("SchemeParams: tau must be positive");
    if (params.eta < 0.0) throw InvalidInput("SchemeParams: eta must be >= 0");
    if (!(params.h0 > 0.0)) throw InvalidInput("SchemeParams: h0 must be positive");
    const double ratio = params.epsilon() / params.tau;
    if (ratio >= params.h0) {
        if (params.anti_cfl == AntiCflMode::Fail)
            throw InvalidInput("SchemeParams: epsilon/tau = " + std::to_string(ratio) +
                               " violates the bound epsilon/tau < h0 = " +
                               std::to_string(params.h0));
        std::fprintf(stderr, "laxol: warning: epsilon/tau = %g exceeds h0 = %g\n", ratio,
                     params.h0);
    }
}

Kernel build_kernel(const HamiltonianSpec& spec, const SchemeParams& params) {
    return build_kernel(spec.kinetic, params);
}

Kernel build_kernel(const Kinetic& kinetic, const SchemeParams& params) {
    validate(params);
    const int n = params.n_space;
    const double eps = params.epsilon();
    const double tau = params.tau;
    if (2 * n + 1 < 2) throw InvalidInput("build_kernel: window narrower than two samples");

    const std::int64_t center = std::llround(tau * kinetic.argmin_velocity() / eps);
    const std::int64_t first = center - n;  // window covers grid indices first..first+2n

    if (kinetic.kind == Kinetic::Kind::Tabulated) {
        const double v_lo = static_cast<double>(first) * eps / tau;
        const double v_hi = static_cast<double>(first + 2 * n) * eps / tau;
        if (v_lo < kinetic.v_min() || v_hi > kinetic.v_max())
            throw InvalidInput(
                "build_kernel: tabulated velocity window too narrow for the kernel support");
    }

    std::vector<double> vals(static_cast<std::size_t>(2 * n + 1));
    for (std::size_t i = 0; i < vals.size(); ++i) {
        const double x = static_cast<double>(first + static_cast<std::int64_t>(i)) * eps;
        vals[i] = tau * kinetic.kstar(x / tau);
    }

    if (kinetic.kind == Kinetic::Kind::Tabulated) {
        // Monotone repair of rounding-level slope wiggles inside affine spans,
        // then rebuild values so the window is exactly convex sample-wise.
        std::vector<double> sl(vals.size() - 1);
        for (std::size_t i = 0; i + 1 < vals.size(); ++i) sl[i] = vals[i + 1] - vals[i];
        for (std::size_t i = 1; i < sl.size(); ++i) sl[i] = std::max(sl[i], sl[i - 1]);
        for (std::size_t i = 0; i + 1 < vals.size(); ++i) vals[i + 1] = vals[i] + sl[i];
    }

    Kernel kern;
    kern.window = GridFn{std::move(vals), eps, static_cast<double>(first) * eps, false};
    std::size_t bad = 0;
    if (!is_convex(kern.window, &bad))
        throw InvalidInput("build_kernel: sampled window is not convex at segment " +
                           std::to_string(bad + 1));
    kern.center_index = center;
    std::size_t arg = 0;
    for (std::size_t i = 1; i < kern.window.size(); ++i)
        if (kern.window.values[i] < kern.window.values[arg]) arg = i;
    kern.argmin_index = static_cast<std::int64_t>(arg);
    kern.window_slopes = slopes(kern.window);
    return kern;
}

GridFn kinetic_convolve(const GridFn& u, const Kernel& kernel, double eta, ConvEngine engine,
                        std::int64_t* blocks) {
    const std::size_t half = kernel.window.n() / 2;  // = n_space
    const std::int64_t shift =
        static_cast<std::int64_t>(half) - kernel.center_index;  // u index j maps to conv index j+shift

    GridFn conv;
    if (engine == ConvEngine::Fast) {
        FastConvResult r = conv_fast(kernel.window, kernel.window_slopes, u, eta);
        conv = std::move(r.fn);
        if (blocks) *blocks = r.block_count;
    } else {
        conv = conv_naive(kernel.window, u);
        if (blocks) *blocks = static_cast<std::int64_t>(decompose(u, eta).blocks.size());
    }

    const auto& v = conv.values;
    std::vector<double> out(u.size(), kInf);
    if (u.periodic) {
        const std::int64_t period = static_cast<std::int64_t>(u.n());
        for (std::size_t j = 0; j < out.size(); ++j) {
            const std::int64_t base = static_cast<std::int64_t>(j) + shift;
            std::int64_t i = ((base % period) + period) % period;
            double best = kInf;
            for (; i < static_cast<std::int64_t>(v.size()); i += period)
                best = std::min(best, v[static_cast<std::size_t>(i)]);
            out[j] = best;
        }
    } else {
        for (std::size_t j = 0; j < out.size(); ++j) {
            const std::int64_t i = static_cast<std::int64_t>(j) + shift;
            if (i < 0 || i >= static_cast<std::int64_t>(v.size()))
                throw EvaluationError(
                    "kinetic_convolve: kernel window does not reach grid index " +
                    std::to_string(j));
            out[j] = v[static_cast<std::size_t>(i)];
        }
    }
    return GridFn{std::move(out), u.step, u.origin, u.periodic};
}

GridFn step_fully_discrete(const GridFn& u, double t, const HamiltonianSpec& spec,
                           const SchemeParams& params, const Kernel& kernel, ConvEngine engine,
                           StepStats* stats) {
    check_u_grid(u, params, "step_fully_discrete");
    std::int64_t blocks = 0;
    GridFn out = kinetic_convolve(u, kernel, params.eta, engine, &blocks);
    if (stats) stats->block_count = blocks;

    const double tv = potential_time(t, params);
    for (std::size_t j = 0; j < out.size(); ++j) {
        const double vx = spec.potential(tv, sample_coord(u, j));
        if (!std::isfinite(vx))
            throw EvaluationError("step_fully_discrete: potential sample is not finite");
        out.values[j] -= params.tau * vx;
    }
    return out;
}

GridFn step_semidiscrete(const GridFn& u, double t, const HamiltonianSpec& spec,
                         const SchemeParams& params, int quad_points) {
    if (quad_points < 1) throw InvalidInput("step_semidiscrete: quad_points must be >= 1");
    check_u_grid(u, params, "step_semidiscrete");
    const Kernel kernel = build_kernel(spec, params);
    const double tau = params.tau;
    const std::int64_t period = static_cast<std::int64_t>(u.n());
    const std::int64_t first =
        kernel.center_index - static_cast<std::int64_t>(kernel.window.n() / 2);
    const int q = quad_points;

    std::vector<double> out(u.size(), kInf);
    for (std::size_t j = 0; j < out.size(); ++j) {
        const double x = sample_coord(u, j);
        double best = kInf;
        for (std::size_t w = 0; w < kernel.window.size(); ++w) {
            const std::int64_t d = first + static_cast<std::int64_t>(w);
            const std::int64_t src = static_cast<std::int64_t>(j) - d;
            std::int64_t src_idx = src;
            if (u.periodic)
                src_idx = ((src % period) + period) % period;
            else if (src < 0 || src >= static_cast<std::int64_t>(u.size()))
                continue;
            const double y = x - static_cast<double>(d) * u.step;
            // trapezoid average of V along the straight segment from y to x
            double acc = 0.5 * (spec.potential(t, y) + spec.potential(t + tau, x));
            for (int r = 1; r < q; ++r) {
                const double frac = static_cast<double>(r) / static_cast<double>(q);
                acc += spec.potential(t + frac * tau, y + frac * (x - y));
            }
            const double integral = tau / static_cast<double>(q) * acc;
            const double cost = kernel.window.values[w] - integral;
            best = std::min(best, u.values[static_cast<std::size_t>(src_idx)] + cost);
        }
        if (best == kInf)
            throw EvaluationError("step_semidiscrete: no candidate source for grid index " +
                                  std::to_string(j));
        out[j] = best;
    }
    return GridFn{std::move(out), u.step, u.origin, u.periodic};
}

EvolutionTrace evolve(const GridFn& u0, double t0, std::int64_t steps,
                      const HamiltonianSpec& spec, const SchemeParams& params,
                      const EvolveOptions& options) {
    if (steps < 0) throw InvalidInput("evolve: steps must be >= 0");
    check_u_grid(u0, params, "evolve");
    const Kernel kernel = build_kernel(spec, params);

    std::int64_t stride = options.snapshot_stride;
    if (stride <= 0) stride = steps <= 1024 ? 1 : (steps + 1023) / 1024;

    std::vector<std::int64_t> capture = options.capture_steps;
    std::sort(capture.begin(), capture.end());

    auto keep = [&](std::int64_t step_idx) {
        if (step_idx == 0 || step_idx == steps) return true;
        if (step_idx % stride == 0) return true;
        return std::binary_search(capture.begin(), capture.end(), step_idx);
    };

    EvolutionTrace trace;
    trace.per_step.reserve(static_cast<std::size_t>(steps));
    GridFn u = u0;
    if (keep(0)) {
        trace.times.push_back(t0);
        trace.snapshot_steps.push_back(0);
        trace.snapshots.push_back(u);
    }

    const std::size_t fundamental = u0.periodic ? u0.n() : u0.size();
    for (std::int64_t i = 0; i < steps; ++i) {
        const double t = t0 + static_cast<double>(i) * params.tau;
        const auto started = std::chrono::steady_clock::now();
        StepStats stats;
        GridFn next = step_fully_discrete(u, t, spec, params, kernel, options.engine, &stats);
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;

        double drift = 0.0;
        bool finite = true;
        for (std::size_t j = 0; j < fundamental; ++j) {
            const double d = next.values[j] - u.values[j];
            drift += d;
            finite = finite && std::isfinite(next.values[j]);
        }
        drift /= static_cast<double>(fundamental);

        const double t_next = t0 + static_cast<double>(i + 1) * params.tau;
        trace.per_step.push_back({t_next, stats.block_count, drift, elapsed.count()});
        u = std::move(next);

        if (!finite) {
            trace.completed = false;
            trace.abort_reason = "non-finite value after step " + std::to_string(i + 1);
            trace.times.push_back(t_next);
            trace.snapshot_steps.push_back(i + 1);
            trace.snapshots.push_back(u);
            return trace;
        }
        if (keep(i + 1)) {
            trace.times.push_back(t_next);
            trace.snapshot_steps.push_back(i + 1);
            trace.snapshots.push_back(u);
        }
    }
    return trace;
}

}  // namespace laxol
