#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "laxol/drivers.hpp"
#include "laxol/errors.hpp"
#include "laxol/parallel.hpp"
#include "laxol/version.hpp"

namespace {

int run_command(const std::string& name, const std::string& config_path,
                const std::string& out_override, int threads, bool rescale_left) {
    laxol::set_max_threads(threads);
    const char* log = std::getenv("LAXOL_LOG");
    const bool verbose = log != nullptr && std::string(log) != "quiet";

    laxol::RunConfig cfg = laxol::parse_config_file(config_path);
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (rescale_left) cfg.rescale_left = true;

    laxol::CmdResult result;
    if (name == "evolve")
        result = laxol::cmd_evolve(cfg);
    else if (name == "convergence")
        result = laxol::cmd_convergence(cfg);
    else if (name == "tolsweep")
        result = laxol::cmd_tolerance_sweep(cfg);
    else
        result = laxol::cmd_hbar(cfg);

    if (verbose || result.exit_code != 0)
        std::fprintf(stderr, "laxol %s: %s\n", name.c_str(), result.message.c_str());
    return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hamilton-Jacobi evolution via the discrete Lax-Oleinik semigroup"};
    app.set_version_flag("--version", laxol::kVersion);
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    int threads = 1;
    bool rescale_left = false;

    for (const char* name : {"evolve", "convergence", "tolsweep", "hbar"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--out", out_override, "output directory (overrides config)");
        sub->add_option("--threads", threads, "worker threads for block convolutions");
        if (std::string(name) == "evolve")
            sub->add_flag("--rescale-left", rescale_left,
                          "emit snapshots rescaled so u(t, left endpoint) = 0");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string name = app.get_subcommands().front()->get_name();

    try {
        return run_command(name, config_path, out_override, threads, rescale_left);
    } catch (const laxol::InvalidInput& e) {
        std::fprintf(stderr, "laxol: %s\n", e.what());
        return 2;
    } catch (const laxol::EvaluationError& e) {
        std::fprintf(stderr, "laxol: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "laxol: %s\n", e.what());
        return 2;
    }
}
