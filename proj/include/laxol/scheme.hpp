#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "laxol/grid_fn.hpp"
#include "laxol/hamiltonian.hpp"
#include "laxol/minplus.hpp"

namespace laxol {

enum class ConvEngine { Fast, Naive };
enum class PotentialSampling { Arrival, Departure };  // V sampled at t+tau or at t
enum class AntiCflMode { Fail, Warn };

struct SchemeParams {
    int n_space = 0;  // samples per unit length; epsilon = 1/n_space
    double tau = 0.0;
    double eta = 0.0;
    double h0 = 1.0;
    PotentialSampling v_sampling = PotentialSampling::Arrival;
    AntiCflMode anti_cfl = AntiCflMode::Fail;

    double epsilon() const { return 1.0 / static_cast<double>(n_space); }
};

// Checks n_space/tau/eta ranges and the epsilon/tau < h0 guard (throws or
// warns to stderr depending on anti_cfl).
void validate(const SchemeParams& params);

// Sampled kinetic cost x -> tau*kstar(x/tau) on a window of total width 2,
// centered on the conjugate's argmin snapped to the grid.
struct Kernel {
    GridFn window;
    std::int64_t argmin_index = 0;
    std::int64_t center_index = 0;  // grid index of the snapped window center
    std::vector<double> window_slopes;
};

Kernel build_kernel(const HamiltonianSpec& spec, const SchemeParams& params);
Kernel build_kernel(const Kinetic& kinetic, const SchemeParams& params);

struct StepStats {
    std::int64_t block_count = 0;
};

// Kinetic half of a step: min-plus convolution of u with the kernel window.
// Periodic u (one unit period) is reduced back to one period by taking the
// minimum over aliased indices; non-periodic u keeps its index range, the
// implicit +infinity outside acting as a wall.
GridFn kinetic_convolve(const GridFn& u, const Kernel& kernel, double eta,
                        ConvEngine engine = ConvEngine::Fast, std::int64_t* blocks = nullptr);

// One fully discrete step: kinetic convolution, then subtract tau*V at each
// grid point, V sampled at t+tau (Arrival) or t (Departure).
GridFn step_fully_discrete(const GridFn& u, double t, const HamiltonianSpec& spec,
                           const SchemeParams& params, const Kernel& kernel,
                           ConvEngine engine = ConvEngine::Fast, StepStats* stats = nullptr);

// Small-N reference step whose cost integrates V along the straight segment
// between source and target with the composite trapezoid rule.
GridFn step_semidiscrete(const GridFn& u, double t, const HamiltonianSpec& spec,
                         const SchemeParams& params, int quad_points);

struct StepRecord {
    double time = 0.0;  // time label of the state after the step
    std::int64_t blocks = 0;
    double drift = 0.0;  // mean of u_next - u over the fundamental domain
    double wall_seconds = 0.0;
};

struct EvolutionTrace {
    std::vector<double> times;
    std::vector<std::int64_t> snapshot_steps;
    std::vector<GridFn> snapshots;
    std::vector<StepRecord> per_step;
    bool completed = true;
    std::string abort_reason;
};

struct EvolveOptions {
    std::int64_t snapshot_stride = 0;  // 0: keep all up to 1024 steps, then thin
    ConvEngine engine = ConvEngine::Fast;
    std::vector<std::int64_t> capture_steps;  // extra step indices to keep
};

EvolutionTrace evolve(const GridFn& u0, double t0, std::int64_t steps,
                      const HamiltonianSpec& spec, const SchemeParams& params,
                      const EvolveOptions& options = {});

}  // namespace laxol
