#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "laxol/scheme.hpp"

namespace laxol {

struct EffectiveHEstimate {
    enum class Method { Drift, MatrixEigenvalue };
    double h_bar = 0.0;
    Method method = Method::Drift;
    std::int64_t n_steps = 0;
    double residual = 0.0;  // sup |T^1 u - u - h_bar| at termination
    bool converged = false;
};

// Dense one-period transition costs over the quotient grid; cost[y*n + x] is
// the cost of going from source y to target x in one unit of time.
struct MinPlusMatrix {
    std::size_t n = 0;
    std::vector<double> cost;

    double at(std::size_t y, std::size_t x) const { return cost[y * n + x]; }
    double& at(std::size_t y, std::size_t x) { return cost[y * n + x]; }
};

// Whole-period iteration of the fully discrete semigroup; h_bar is the mean
// per-period increment once successive increments agree to tol in sup norm.
// Requires a time-periodic (or autonomous) spec and tau = 1/l.
EffectiveHEstimate estimate_hbar_drift(const GridFn& u0, const HamiltonianSpec& spec,
                                       const SchemeParams& params, int max_periods, double tol);

// Min-plus product of the l per-step cost matrices over one time period,
// each quotient cost minimized over integer period shifts of the displacement.
MinPlusMatrix build_period_matrix(const HamiltonianSpec& spec, const SchemeParams& params);

// u_out[x] = min_y u[y] + C[y][x] over the quotient grid.
GridFn minplus_apply(const MinPlusMatrix& C, const GridFn& u);
MinPlusMatrix minplus_product(const MinPlusMatrix& A, const MinPlusMatrix& B);

// Minimum mean weight over directed cycles (Karp); the unique min-plus
// eigenvalue of a finite-entry matrix.
double eigenvalue_karp(const MinPlusMatrix& C);

// sup |T^1 u - u - h_bar| over the grid; zero exactly at a discrete
// weak-KAM solution.
double fixed_point_residual(const GridFn& u, double h_bar, const HamiltonianSpec& spec,
                            const SchemeParams& params);

// Searches drift-compensated snapshots w_n = u_n - n*tau*h_bar for the first
// pair i < j with |w_i - w_j| < tol and j - i divisible by step_modulus.
// Returns (preperiod, period) in step units, or nothing.
std::optional<std::pair<std::int64_t, std::int64_t>> detect_eventual_periodicity(
    const EvolutionTrace& trace, double h_bar, double tol = 1e-8,
    std::int64_t step_modulus = 1);

}  // namespace laxol
