#pragma once

#include <string>

#include "laxol/config.hpp"

namespace laxol {

struct CmdResult {
    int exit_code = 0;
    std::string message;
};

// Evolution driver: snapshots at the requested times as CSV, deterministic
// run summary as summary.json, wall-clock data as timings.json.
CmdResult cmd_evolve(const RunConfig& cfg);

// Error ladder against the exact cone/parabola solution of the kinetic-only
// problem; reports the observed order against epsilon/tau + tau.
CmdResult cmd_convergence(const RunConfig& cfg);

// Runs the same evolution across the configured eta list and reports the
// final-state deviation from the eta = 0 run together with block counts.
CmdResult cmd_tolerance_sweep(const RunConfig& cfg);

// Effective-Hamiltonian estimates (drift and, for small grids, the period
// matrix eigenvalue) across a discretization ladder.
CmdResult cmd_hbar(const RunConfig& cfg);

// Exact long-time solution of the kinetic-only cone problem, used by the
// convergence driver and its tests: min_y a|y - c| + (x-y)^2 / (2t).
double moreau_envelope_cone(double a, double center, double t, double x);

}  // namespace laxol
