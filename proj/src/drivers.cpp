#include "laxol/drivers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "laxol/analysis.hpp"
#include "laxol/errors.hpp"
#include "laxol/version.hpp"
#include "laxol/weakkam.hpp"

namespace laxol {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw InvalidInput("output: cannot create directory " + dir + ": " + ec.message());
}

void write_text(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("output: cannot open " + path);
    out << body;
    if (!out) throw InvalidInput("output: write failed for " + path);
}

void write_snapshot_csv(const std::string& path, const GridFn& u, bool rescale_left) {
    std::string body = "x,u\n";
    const double base = rescale_left ? u.values.front() : 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        body += fmt(u.coord(i)) + "," + fmt(u.values[i] - base) + "\n";
    write_text(path, body);
}

json summary_base(const RunConfig& cfg) {
    json j;
    j["config"] = cfg.resolved;
    j["config_hash"] = config_hash(cfg.resolved);
    j["version"] = kVersion;
    return j;
}

double wall_total(const EvolutionTrace& trace) {
    double total = 0.0;
    for (const auto& rec : trace.per_step) total += rec.wall_seconds;
    return total;
}

// Wall-clock data and the timestamp live apart from the deterministic outputs.
void write_timings(const RunConfig& cfg, json timings) {
    timings["unix_time"] =
        std::chrono::duration_cast<std::chrono::seconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count();
    if (cfg.write_json) write_text(cfg.out_dir + "/timings.json", timings.dump(2) + "\n");
}

struct BlockStats {
    double mean = 0.0;
    std::int64_t max = 0;
};

BlockStats block_stats(const EvolutionTrace& trace) {
    BlockStats s;
    if (trace.per_step.empty()) return s;
    for (const auto& rec : trace.per_step) {
        s.mean += static_cast<double>(rec.blocks);
        s.max = std::max(s.max, rec.blocks);
    }
    s.mean /= static_cast<double>(trace.per_step.size());
    return s;
}

}  // namespace

double moreau_envelope_cone(double a, double center, double t, double x) {
    const double r = x - center;
    if (std::abs(r) <= a * t) return r * r / (2.0 * t);
    return a * std::abs(r) - a * a * t / 2.0;
}

CmdResult cmd_evolve(const RunConfig& cfg) {
    ensure_dir(cfg.out_dir);
    const GridFn u0 = build_u0(cfg);

    EvolveOptions opts;
    opts.snapshot_stride = cfg.snapshot_stride;
    for (double time : cfg.snapshot_times) {
        const std::int64_t idx = std::llround((time - cfg.t0) / cfg.params.tau);
        if (idx < 0 || idx > cfg.steps)
            throw InvalidInput("cmd_evolve: snapshot time " + fmt(time) + " outside the run");
        opts.capture_steps.push_back(idx);
    }

    EvolutionTrace trace = evolve(u0, cfg.t0, cfg.steps, cfg.spec, cfg.params, opts);

    // Which snapshots to emit: the requested times, or first/last by default.
    std::vector<std::size_t> emit;
    if (cfg.snapshot_times.empty()) {
        emit.push_back(0);
        if (trace.snapshots.size() > 1) emit.push_back(trace.snapshots.size() - 1);
    } else {
        for (double time : cfg.snapshot_times) {
            const std::int64_t idx = std::llround((time - cfg.t0) / cfg.params.tau);
            for (std::size_t s = 0; s < trace.snapshot_steps.size(); ++s)
                if (trace.snapshot_steps[s] == idx) {
                    emit.push_back(s);
                    break;
                }
        }
    }

    json summary = summary_base(cfg);
    json snaps = json::array();
    for (std::size_t k = 0; k < emit.size(); ++k) {
        const std::size_t s = emit[k];
        char name[64];
        std::snprintf(name, sizeof(name), "snapshot_%03zu.csv", k);
        if (cfg.write_csv)
            write_snapshot_csv(cfg.out_dir + "/" + name, trace.snapshots[s], cfg.rescale_left);
        snaps.push_back({{"file", name},
                         {"time", trace.times[s]},
                         {"step", trace.snapshot_steps[s]}});
    }
    summary["snapshots"] = snaps;

    json drift = json::array(), blocks = json::array();
    for (const auto& rec : trace.per_step) {
        drift.push_back(rec.drift);
        blocks.push_back(rec.blocks);
    }
    summary["per_step"] = {{"drift", drift}, {"blocks", blocks}};

    json left = json::array(), left_times = json::array();
    for (std::size_t s = 0; s < trace.snapshots.size(); ++s) {
        left.push_back(trace.snapshots[s].values.front());
        left_times.push_back(trace.times[s]);
    }
    summary["left_values"] = {{"t", left_times}, {"u", left}};
    summary["completed"] = trace.completed;
    if (!trace.completed) summary["abort_reason"] = trace.abort_reason;

    if (cfg.write_json) write_text(cfg.out_dir + "/summary.json", summary.dump(2) + "\n");

    json timings;
    timings["wall_seconds_total"] = wall_total(trace);
    write_timings(cfg, timings);

    if (!trace.completed)
        return {3, "evolution aborted: " + trace.abort_reason + " (partial outputs retained)"};
    return {0, "evolved " + std::to_string(cfg.steps) + " steps"};
}

CmdResult cmd_convergence(const RunConfig& cfg) {
    ensure_dir(cfg.out_dir);
    const bool self_ref = cfg.convergence.reference == "self";
    if (!self_ref) {
        if (cfg.spec.potential.kind != Potential::Kind::Zero ||
            cfg.spec.kinetic.kind != Kinetic::Kind::Mechanical || cfg.spec.kinetic.drift != 0.0 ||
            cfg.spec.space_periodic)
            throw InvalidInput(
                "cmd_convergence: the exact reference needs V = 0, a drift-free mechanical "
                "kinetic part and a windowed domain");
        if (cfg.u0_spec.value("builtin", "") != "abs")
            throw InvalidInput("cmd_convergence: the exact reference needs run.u0.builtin \"abs\"");
    }
    if (cfg.convergence.tau_ladder.size() < 2)
        throw InvalidInput("cmd_convergence: tau_ladder needs at least two rungs");
    const double a = cfg.u0_spec.value("slope", 1.0);
    const double center = cfg.u0_spec.value("center", 0.0);
    const double t_final = cfg.convergence.t_final;

    auto eps_for = [&](double tau) {
        return cfg.convergence.epsilon_rule == "tau_squared" ? tau * tau
                                                             : cfg.convergence.ratio * tau;
    };
    auto run_point = [&](double tau, SchemeParams& params, double& wall) {
        params = cfg.params;
        params.n_space = static_cast<int>(std::llround(1.0 / eps_for(tau)));
        params.tau = tau;
        validate(params);
        const GridFn u0 = build_u0_on(cfg.u0_spec, params, cfg.spec.space_periodic,
                                      cfg.window_lo, cfg.window_hi, cfg.seed);
        const std::int64_t steps = std::llround(t_final / tau);
        const auto started = std::chrono::steady_clock::now();
        EvolveOptions opts;
        opts.snapshot_stride = std::max<std::int64_t>(steps, 1);  // endpoints only
        EvolutionTrace trace = evolve(u0, 0.0, steps, cfg.spec, params, opts);
        wall += std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        return trace;
    };

    struct Row {
        int n_space;
        double tau, epsilon, hsum, error;
    };
    std::vector<Row> rows;
    double wall = 0.0;

    GridFn reference;
    int n_ref = 0;
    if (self_ref) {
        SchemeParams params;
        EvolutionTrace trace = run_point(cfg.convergence.ref_tau, params, wall);
        if (!trace.completed) return {3, "reference run aborted: " + trace.abort_reason};
        reference = trace.snapshots.back();
        n_ref = params.n_space;
    }

    for (double tau : cfg.convergence.tau_ladder) {
        SchemeParams params;
        EvolutionTrace trace = run_point(tau, params, wall);
        if (!trace.completed) return {3, "convergence run aborted: " + trace.abort_reason};
        const GridFn& u = trace.snapshots.back();

        double err = 0.0;
        if (self_ref) {
            if (n_ref % params.n_space != 0)
                throw InvalidInput("cmd_convergence: ladder grids must nest into the reference");
            const std::size_t stride = static_cast<std::size_t>(n_ref / params.n_space);
            for (std::size_t i = 0; i < u.size(); ++i) {
                const double x = u.coord(i);
                if (x < cfg.convergence.eval_lo || x > cfg.convergence.eval_hi) continue;
                err = std::max(err, std::abs(u.values[i] - reference.values[i * stride]));
            }
        } else {
            for (std::size_t i = 0; i < u.size(); ++i) {
                const double x = u.coord(i);
                if (x < cfg.convergence.eval_lo || x > cfg.convergence.eval_hi) continue;
                err = std::max(err,
                               std::abs(u.values[i] - moreau_envelope_cone(a, center, t_final, x)));
            }
        }
        rows.push_back({params.n_space, tau, params.epsilon(), params.epsilon() / tau + tau, err});
    }

    std::vector<double> hs, errs;
    bool decreasing = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        hs.push_back(rows[i].hsum);
        errs.push_back(rows[i].error);
        if (i > 0 && !(rows[i].error < rows[i - 1].error)) decreasing = false;
    }
    const double order = fitted_order(hs, errs);

    if (cfg.write_csv) {
        std::string body = "n_space,tau,epsilon,eps_over_tau_plus_tau,sup_error\n";
        for (const Row& r : rows)
            body += std::to_string(r.n_space) + "," + fmt(r.tau) + "," + fmt(r.epsilon) + "," +
                    fmt(r.hsum) + "," + fmt(r.error) + "\n";
        write_text(cfg.out_dir + "/convergence.csv", body);
    }

    json report = summary_base(cfg);
    json jrows = json::array();
    for (const Row& r : rows)
        jrows.push_back({{"n_space", r.n_space},
                         {"tau", r.tau},
                         {"epsilon", r.epsilon},
                         {"eps_over_tau_plus_tau", r.hsum},
                         {"sup_error", r.error}});
    report["rows"] = jrows;
    report["fitted_order"] = order;
    report["monotone_decreasing"] = decreasing;
    report["reference"] = cfg.convergence.reference;
    if (cfg.write_json) write_text(cfg.out_dir + "/report.json", report.dump(2) + "\n");

    json timings;
    timings["wall_seconds_total"] = wall;
    write_timings(cfg, timings);

    return {0, "fitted order " + fmt(order) + (decreasing ? ", errors decreasing"
                                                          : ", errors NOT decreasing")};
}

CmdResult cmd_tolerance_sweep(const RunConfig& cfg) {
    ensure_dir(cfg.out_dir);
    if (cfg.tolsweep.eta_list.empty())
        throw InvalidInput("cmd_tolerance_sweep: study.tolsweep.eta_list is required");
    const GridFn u0 = build_u0(cfg);

    struct Row {
        double eta, deviation, mean_blocks;
        std::int64_t max_blocks;
        double wall;
    };
    std::vector<Row> rows;

    auto run_with_eta = [&](double eta) {
        SchemeParams params = cfg.params;
        params.eta = eta;
        EvolveOptions opts;
        opts.snapshot_stride = std::max<std::int64_t>(cfg.steps, 1);  // endpoints only
        return evolve(u0, cfg.t0, cfg.steps, cfg.spec, params, opts);
    };

    EvolutionTrace base = run_with_eta(0.0);
    if (!base.completed) return {3, "baseline run aborted: " + base.abort_reason};
    const BlockStats base_blocks = block_stats(base);
    rows.push_back({0.0, 0.0, base_blocks.mean, base_blocks.max, wall_total(base)});

    for (double eta : cfg.tolsweep.eta_list) {
        if (eta == 0.0) continue;
        if (eta < 0.0) throw InvalidInput("cmd_tolerance_sweep: eta must be >= 0");
        EvolutionTrace trace = run_with_eta(eta);
        if (!trace.completed) return {3, "sweep run aborted: " + trace.abort_reason};
        const BlockStats bs = block_stats(trace);
        const double dev = sup_dist(trace.snapshots.back(), base.snapshots.back());
        rows.push_back({eta, dev, bs.mean, bs.max, wall_total(trace)});
    }

    if (cfg.write_csv) {
        std::string body = "eta,final_deviation,mean_blocks,max_blocks\n";
        for (const Row& r : rows)
            body += fmt(r.eta) + "," + fmt(r.deviation) + "," + fmt(r.mean_blocks) + "," +
                    std::to_string(r.max_blocks) + "\n";
        write_text(cfg.out_dir + "/tolsweep.csv", body);
    }

    json report = summary_base(cfg);
    json jrows = json::array();
    json jwall = json::array();
    for (const Row& r : rows) {
        jrows.push_back({{"eta", r.eta},
                         {"final_deviation", r.deviation},
                         {"mean_blocks", r.mean_blocks},
                         {"max_blocks", r.max_blocks}});
        jwall.push_back(r.wall);
    }
    report["rows"] = jrows;
    if (cfg.write_json) write_text(cfg.out_dir + "/report.json", report.dump(2) + "\n");

    json timings;
    timings["per_eta_wall_seconds"] = jwall;
    write_timings(cfg, timings);

    return {0, std::to_string(rows.size()) + " sweep points"};
}

CmdResult cmd_hbar(const RunConfig& cfg) {
    ensure_dir(cfg.out_dir);
    if (cfg.hbar.ladder.empty())
        throw InvalidInput("cmd_hbar: study.hbar.ladder is required");
    if (!cfg.spec.space_periodic) throw InvalidInput("cmd_hbar: problem must be space-periodic");

    struct Row {
        int n_space;
        double tau, hsum, h_drift, residual;
        bool converged, has_matrix;
        std::int64_t n_steps;
        double h_karp, agreement;
        bool has_expected = false;
        double expected = 0.0;
        bool analytic_ok = true;
    };
    std::vector<Row> rows;
    double wall = 0.0;

    // For a potential that is constant in space and time the optimal move is
    // always the kernel argmin, so the discrete value is exact and checkable.
    const bool flat_potential = cfg.spec.potential.kind == Potential::Kind::Zero ||
                                cfg.spec.potential.kind == Potential::Kind::Const;
    const double flat_value =
        cfg.spec.potential.kind == Potential::Kind::Const ? cfg.spec.potential.value : 0.0;

    for (const RunConfig::HbarPoint& point : cfg.hbar.ladder) {
        SchemeParams params = cfg.params;
        params.n_space = point.n_space;
        params.tau = point.tau;
        validate(params);
        const GridFn u0 =
            build_u0_on(cfg.u0_spec, params, true, cfg.window_lo, cfg.window_hi, cfg.seed);

        const auto started = std::chrono::steady_clock::now();
        EffectiveHEstimate drift =
            estimate_hbar_drift(u0, cfg.spec, params, cfg.hbar.max_periods, cfg.hbar.tol);

        Row row{point.n_space,  point.tau,      params.epsilon() / point.tau + point.tau,
                drift.h_bar,    drift.residual, drift.converged,
                false,          drift.n_steps,  0.0,
                0.0};
        if (cfg.hbar.use_matrix && point.n_space <= 512) {
            const MinPlusMatrix C = build_period_matrix(cfg.spec, params);
            row.h_karp = eigenvalue_karp(C);
            row.agreement = std::abs(row.h_karp - drift.h_bar);
            row.has_matrix = true;
        }
        if (flat_potential) {
            const Kernel kern = build_kernel(cfg.spec, params);
            double min_sample = kern.window.values[static_cast<std::size_t>(kern.argmin_index)];
            row.expected = min_sample / params.tau - flat_value;
            row.has_expected = true;
            row.analytic_ok = std::abs(drift.h_bar - row.expected) <= 1e-10;
        }
        wall += std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        rows.push_back(row);
    }
    bool analytic_all_ok = true;
    for (const Row& r : rows) analytic_all_ok = analytic_all_ok && r.analytic_ok;

    if (cfg.write_csv) {
        std::string body =
            "n_space,tau,eps_over_tau_plus_tau,h_drift,converged,n_steps,residual,h_karp,"
            "agreement\n";
        for (const Row& r : rows) {
            body += std::to_string(r.n_space) + "," + fmt(r.tau) + "," + fmt(r.hsum) + "," +
                    fmt(r.h_drift) + "," + (r.converged ? "1" : "0") + "," +
                    std::to_string(r.n_steps) + "," + fmt(r.residual) + ",";
            body += r.has_matrix ? fmt(r.h_karp) : std::string("");
            body += ",";
            body += r.has_matrix ? fmt(r.agreement) : std::string("");
            body += "\n";
        }
        write_text(cfg.out_dir + "/hbar.csv", body);
    }

    json report = summary_base(cfg);
    json jrows = json::array();
    for (const Row& r : rows) {
        json jr = {{"n_space", r.n_space},       {"tau", r.tau},
                   {"eps_over_tau_plus_tau", r.hsum}, {"h_drift", r.h_drift},
                   {"converged", r.converged},   {"n_steps", r.n_steps},
                   {"residual", r.residual}};
        if (r.has_matrix) {
            jr["h_karp"] = r.h_karp;
            jr["agreement"] = r.agreement;
        }
        if (r.has_expected) {
            jr["expected_h"] = r.expected;
            jr["analytic_ok"] = r.analytic_ok;
        }
        jrows.push_back(jr);
    }
    report["rows"] = jrows;
    if (flat_potential) report["analytic_all_ok"] = analytic_all_ok;

    if (rows.size() >= 2) {
        std::vector<double> hs, vals;
        for (const Row& r : rows) {
            hs.push_back(r.hsum);
            vals.push_back(r.h_drift);
        }
        const LinearFit fit = linear_fit(hs, vals);
        report["extrapolated_h"] = fit.intercept;
    }
    if (cfg.write_json) write_text(cfg.out_dir + "/report.json", report.dump(2) + "\n");

    json timings;
    timings["wall_seconds_total"] = wall;
    write_timings(cfg, timings);

    if (flat_potential && !analytic_all_ok)
        return {3, "drift estimate misses the closed-form value (see report.json)"};
    return {0, std::to_string(rows.size()) + " ladder points"};
}

}  // namespace laxol
