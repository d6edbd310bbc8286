#include "laxol/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "laxol/errors.hpp"

namespace laxol {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
    if (!j.is_object()) throw InvalidInput("config: " + where + " must be an object");
    for (const auto& item : j.items()) {
        if (!allowed.count(item.key()))
            throw InvalidInput("config: unknown key \"" + item.key() + "\" in " + where);
    }
}

template <typename T>
T field(const json& j, const std::string& key, const T& fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw InvalidInput("config: bad value for \"" + key + "\"");
    }
}

template <typename T>
T required(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw InvalidInput("config: missing \"" + key + "\" in " + where);
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw InvalidInput("config: bad value for \"" + key + "\" in " + where);
    }
}

Kinetic parse_kinetic(const json& j) {
    reject_unknown_keys(j, {"type", "drift", "v0", "dv", "values"}, "problem.kinetic");
    const auto type = required<std::string>(j, "type", "problem.kinetic");
    if (type == "mechanical") return mechanical(field<double>(j, "drift", 0.0));
    if (type == "tabulated") {
        return tabulated(required<std::vector<double>>(j, "values", "problem.kinetic"),
                         required<double>(j, "v0", "problem.kinetic"),
                         required<double>(j, "dv", "problem.kinetic"));
    }
    throw InvalidInput("config: problem.kinetic.type must be mechanical or tabulated");
}

void validate_u0_spec(const json& u0) {
    reject_unknown_keys(u0, {"builtin", "value", "amplitude", "frequency", "slope", "center"},
                        "run.u0");
    const auto builtin = required<std::string>(u0, "builtin", "run.u0");
    if (builtin != "zero" && builtin != "const" && builtin != "cosine" && builtin != "abs" &&
        builtin != "random")
        throw InvalidInput("config: run.u0.builtin must be zero, const, cosine, abs or random");
}

Potential parse_potential(const json& j) {
    reject_unknown_keys(
        j, {"builtin", "value", "offset", "amplitude", "frequency", "time_modulation"},
        "problem.potential");
    const auto builtin = required<std::string>(j, "builtin", "problem.potential");
    if (builtin == "zero") return potential_zero();
    if (builtin == "const") return potential_const(required<double>(j, "value", "potential"));
    if (builtin == "cosine") {
        auto tmod = Potential::TimeMod::None;
        double omega = 0.0;
        if (j.contains("time_modulation")) {
            const json& tm = j.at("time_modulation");
            reject_unknown_keys(tm, {"type", "omega", "omega_turns"},
                                "problem.potential.time_modulation");
            const auto kind = required<std::string>(tm, "type", "time_modulation");
            if (kind == "sin")
                tmod = Potential::TimeMod::Sin;
            else if (kind == "cos")
                tmod = Potential::TimeMod::Cos;
            else if (kind != "none")
                throw InvalidInput("config: time_modulation.type must be none, sin or cos");
            if (tm.contains("omega_turns"))
                omega = 2.0 * std::numbers::pi * tm.at("omega_turns").get<double>();
            else
                omega = field<double>(tm, "omega", 1.0);
        }
        return potential_cosine(field<double>(j, "offset", 0.0),
                                field<double>(j, "amplitude", 1.0),
                                field<int>(j, "frequency", 1), tmod, omega);
    }
    throw InvalidInput("config: problem.potential.builtin must be zero, const or cosine");
}

}  // namespace

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("config: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("config: parse error: ") + e.what());
    }
    return parse_config(j);
}

RunConfig parse_config(const nlohmann::json& j) {
    reject_unknown_keys(j, {"problem", "discretization", "run", "output", "study"}, "top level");
    RunConfig cfg;

    const json problem = j.value("problem", json::object());
    reject_unknown_keys(problem,
                        {"kinetic", "potential", "space_periodic", "time_periodic", "window"},
                        "problem");
    Kinetic kinetic = problem.contains("kinetic") ? parse_kinetic(problem.at("kinetic"))
                                                  : mechanical(0.0);
    Potential potential = problem.contains("potential") ? parse_potential(problem.at("potential"))
                                                        : potential_zero();
    const bool space_periodic = field<bool>(problem, "space_periodic", true);
    bool time_periodic = field<bool>(problem, "time_periodic", !potential.time_dependent());
    cfg.spec = make_spec(std::move(kinetic), std::move(potential), space_periodic, time_periodic);
    if (!space_periodic) {
        const auto window = required<std::vector<double>>(problem, "window", "problem");
        if (window.size() != 2 || !(window[0] < window[1]))
            throw InvalidInput("config: problem.window must be [lo, hi] with lo < hi");
        cfg.window_lo = window[0];
        cfg.window_hi = window[1];
    }

    const json disc = j.value("discretization", json::object());
    reject_unknown_keys(disc,
                        {"n_space", "tau", "eta", "h0", "anti_cfl", "potential_sampling"},
                        "discretization");
    cfg.params.n_space = required<int>(disc, "n_space", "discretization");
    if (disc.contains("tau") && disc.at("tau").is_string()) {
        if (disc.at("tau").get<std::string>() != "sqrt_eps")
            throw InvalidInput("config: discretization.tau must be a number or \"sqrt_eps\"");
        cfg.params.tau = std::sqrt(1.0 / static_cast<double>(cfg.params.n_space));
    } else {
        cfg.params.tau = required<double>(disc, "tau", "discretization");
    }
    cfg.params.eta = field<double>(disc, "eta", 0.0);
    cfg.params.h0 = field<double>(disc, "h0", 1.0);
    const auto cfl = field<std::string>(disc, "anti_cfl", "fail");
    if (cfl == "warn")
        cfg.params.anti_cfl = AntiCflMode::Warn;
    else if (cfl != "fail")
        throw InvalidInput("config: discretization.anti_cfl must be fail or warn");
    const auto sampling = field<std::string>(disc, "potential_sampling", "arrival");
    if (sampling == "departure")
        cfg.params.v_sampling = PotentialSampling::Departure;
    else if (sampling != "arrival")
        throw InvalidInput("config: discretization.potential_sampling must be arrival or departure");
    validate(cfg.params);

    const json run = j.value("run", json::object());
    reject_unknown_keys(
        run, {"t0", "t_final", "steps", "u0", "snapshot_times", "snapshot_stride", "seed"}, "run");
    cfg.t0 = field<double>(run, "t0", 0.0);
    if (run.contains("steps") && run.contains("t_final"))
        throw InvalidInput("config: give run.steps or run.t_final, not both");
    if (run.contains("steps")) {
        cfg.steps = required<std::int64_t>(run, "steps", "run");
        if (cfg.steps < 0) throw InvalidInput("config: run.steps must be >= 0");
    } else if (run.contains("t_final")) {
        const double tf = required<double>(run, "t_final", "run");
        if (tf < 0.0) throw InvalidInput("config: run.t_final must be >= 0");
        cfg.steps = std::llround(tf / cfg.params.tau);
    }
    cfg.snapshot_times = field<std::vector<double>>(run, "snapshot_times", {});
    cfg.snapshot_stride = field<std::int64_t>(run, "snapshot_stride", 0);
    cfg.seed = field<std::uint64_t>(run, "seed", 0);
    cfg.u0_spec = run.value("u0", json{{"builtin", "zero"}});
    validate_u0_spec(cfg.u0_spec);

    const json output = j.value("output", json::object());
    reject_unknown_keys(output, {"dir", "formats", "rescale_left"}, "output");
    cfg.out_dir = field<std::string>(output, "dir", "out");
    if (output.contains("formats")) {
        cfg.write_csv = false;
        cfg.write_json = false;
        for (const auto& f : output.at("formats")) {
            const auto name = f.get<std::string>();
            if (name == "csv")
                cfg.write_csv = true;
            else if (name == "json")
                cfg.write_json = true;
            else
                throw InvalidInput("config: output.formats entries must be csv or json");
        }
    }
    cfg.rescale_left = field<bool>(output, "rescale_left", false);

    const json study = j.value("study", json::object());
    reject_unknown_keys(study, {"convergence", "tolsweep", "hbar"}, "study");
    if (study.contains("convergence")) {
        const json& c = study.at("convergence");
        reject_unknown_keys(
            c, {"tau_ladder", "epsilon_rule", "ratio", "t_final", "reference", "ref_tau",
                "eval_window"},
            "study.convergence");
        cfg.convergence.tau_ladder =
            required<std::vector<double>>(c, "tau_ladder", "study.convergence");
        cfg.convergence.epsilon_rule = field<std::string>(c, "epsilon_rule", "tau_squared");
        if (cfg.convergence.epsilon_rule != "tau_squared" &&
            cfg.convergence.epsilon_rule != "fixed_ratio")
            throw InvalidInput("config: epsilon_rule must be tau_squared or fixed_ratio");
        cfg.convergence.ratio = field<double>(c, "ratio", 0.1);
        cfg.convergence.t_final = field<double>(c, "t_final", 1.0);
        cfg.convergence.reference = field<std::string>(c, "reference", "exact");
        if (cfg.convergence.reference != "exact" && cfg.convergence.reference != "self")
            throw InvalidInput("config: convergence.reference must be exact or self");
        cfg.convergence.ref_tau = field<double>(c, "ref_tau", 0.0);
        if (cfg.convergence.reference == "self" && !(cfg.convergence.ref_tau > 0.0))
            throw InvalidInput("config: convergence.reference = self needs a positive ref_tau");
        if (c.contains("eval_window")) {
            const auto w = c.at("eval_window").get<std::vector<double>>();
            if (w.size() != 2) throw InvalidInput("config: eval_window must be [lo, hi]");
            cfg.convergence.eval_lo = w[0];
            cfg.convergence.eval_hi = w[1];
        }
    }
    if (study.contains("tolsweep")) {
        const json& s = study.at("tolsweep");
        reject_unknown_keys(s, {"eta_list"}, "study.tolsweep");
        cfg.tolsweep.eta_list = required<std::vector<double>>(s, "eta_list", "study.tolsweep");
        if (std::find(cfg.tolsweep.eta_list.begin(), cfg.tolsweep.eta_list.end(), 0.0) ==
            cfg.tolsweep.eta_list.end())
            throw InvalidInput("config: tolsweep.eta_list must contain 0");
    }
    if (study.contains("hbar")) {
        const json& h = study.at("hbar");
        reject_unknown_keys(h, {"ladder", "max_periods", "tol", "use_matrix"}, "study.hbar");
        for (const auto& p : h.value("ladder", json::array())) {
            reject_unknown_keys(p, {"n_space", "tau"}, "study.hbar.ladder entry");
            cfg.hbar.ladder.push_back({required<int>(p, "n_space", "hbar ladder"),
                                       required<double>(p, "tau", "hbar ladder")});
        }
        cfg.hbar.max_periods = field<int>(h, "max_periods", 400);
        cfg.hbar.tol = field<double>(h, "tol", 1e-6);
        cfg.hbar.use_matrix = field<bool>(h, "use_matrix", true);
    }

    // Canonical echo: the input with defaults the parser actually resolved.
    json resolved = j;
    resolved["discretization"]["n_space"] = cfg.params.n_space;
    resolved["discretization"]["tau"] = cfg.params.tau;
    resolved["discretization"]["eta"] = cfg.params.eta;
    resolved["discretization"]["h0"] = cfg.params.h0;
    resolved["run"]["steps"] = cfg.steps;
    resolved["run"]["seed"] = cfg.seed;
    resolved["run"]["u0"] = cfg.u0_spec;
    resolved["output"]["dir"] = cfg.out_dir;
    cfg.resolved = std::move(resolved);
    return cfg;
}

GridFn build_u0_on(const nlohmann::json& u0_spec, const SchemeParams& params, bool periodic,
                   double window_lo, double window_hi, std::uint64_t seed) {
    validate_u0_spec(u0_spec);
    const auto builtin = required<std::string>(u0_spec, "builtin", "run.u0");
    const double eps = params.epsilon();

    std::size_t count;
    double origin;
    if (periodic) {
        count = static_cast<std::size_t>(params.n_space);
        origin = 0.0;
    } else {
        const double width = window_hi - window_lo;
        const double cells = width / eps;
        if (std::abs(cells - std::round(cells)) > 1e-9)
            throw InvalidInput("config: window width must be a multiple of epsilon");
        count = static_cast<std::size_t>(std::llround(cells)) + 1;
        origin = window_lo;
    }

    std::vector<double> vals(count);
    auto coord = [&](std::size_t i) { return origin + static_cast<double>(i) * eps; };

    if (builtin == "zero") {
        // already zero
    } else if (builtin == "const") {
        const double c = required<double>(u0_spec, "value", "run.u0");
        std::fill(vals.begin(), vals.end(), c);
    } else if (builtin == "cosine") {
        const double a = field<double>(u0_spec, "amplitude", 1.0);
        const int k = field<int>(u0_spec, "frequency", 1);
        for (std::size_t i = 0; i < count; ++i)
            vals[i] = a * std::cos(static_cast<double>(k) * theta(coord(i)));
    } else if (builtin == "abs") {
        const double a = field<double>(u0_spec, "slope", 1.0);
        const double c = field<double>(u0_spec, "center", 0.0);
        for (std::size_t i = 0; i < count; ++i) vals[i] = a * std::abs(coord(i) - c);
    } else if (builtin == "random") {
        const double a = field<double>(u0_spec, "amplitude", 1.0);
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> dist(-a, a);
        for (double& v : vals) v = dist(rng);
    } else {
        throw InvalidInput("config: run.u0.builtin must be zero, const, cosine, abs or random");
    }

    return periodic ? make_periodic(std::move(vals), eps, origin)
                    : make_grid_fn(std::move(vals), eps, origin);
}

GridFn build_u0(const RunConfig& cfg) {
    return build_u0_on(cfg.u0_spec, cfg.params, cfg.spec.space_periodic, cfg.window_lo,
                       cfg.window_hi, cfg.seed);
}

std::string config_hash(const nlohmann::json& canonical) {
    const std::string dump = canonical.dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream out;
    out << std::hex << h;
    return out.str();
}

}  // namespace laxol
