#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "laxol/scheme.hpp"

namespace laxol {

// A parsed and validated run description. The resolved JSON echo (with all
// defaults filled in) is what gets hashed and embedded in summaries.
struct RunConfig {
    HamiltonianSpec spec;
    SchemeParams params;

    double window_lo = 0.0;  // non-periodic problems only
    double window_hi = 1.0;

    double t0 = 0.0;
    std::int64_t steps = 0;
    std::vector<double> snapshot_times;
    std::int64_t snapshot_stride = 0;
    std::uint64_t seed = 0;
    nlohmann::json u0_spec;

    std::string out_dir = "out";
    bool write_csv = true;
    bool write_json = true;
    bool rescale_left = false;

    struct Convergence {
        std::vector<double> tau_ladder;
        std::string epsilon_rule = "tau_squared";  // or "fixed_ratio"
        double ratio = 0.1;
        double t_final = 1.0;
        std::string reference = "exact";  // or "self" (fine-grid run, needs ref_tau)
        double ref_tau = 0.0;
        double eval_lo = -1.0;
        double eval_hi = 1.0;
    } convergence;

    struct TolSweep {
        std::vector<double> eta_list;
    } tolsweep;

    struct HbarPoint {
        int n_space = 0;
        double tau = 0.0;
    };
    struct HbarStudy {
        std::vector<HbarPoint> ladder;
        int max_periods = 400;
        double tol = 1e-6;
        bool use_matrix = true;
    } hbar;

    nlohmann::json resolved;
};

RunConfig parse_config_file(const std::string& path);
RunConfig parse_config(const nlohmann::json& j);

// Builds the initial state on the grid described by cfg (periodic unit period
// or the configured window).
GridFn build_u0(const RunConfig& cfg);
GridFn build_u0_on(const nlohmann::json& u0_spec, const SchemeParams& params, bool periodic,
                   double window_lo, double window_hi, std::uint64_t seed);

// FNV-1a over the canonical dump; stable across runs.
std::string config_hash(const nlohmann::json& canonical);

}  // namespace laxol
