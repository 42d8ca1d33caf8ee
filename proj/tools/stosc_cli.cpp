#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "stosc/config.hpp"
#include "stosc/errors.hpp"
#include "stosc/experiment.hpp"

namespace {

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<std::string> out;
    std::optional<unsigned> threads;
};

void add_common(CLI::App* sub, Overrides& o) {
    sub->add_option("--config", o.config, "experiment config (JSON)")->required();
    sub->add_option("--seed", o.seed, "root seed");
    sub->add_option("--paths", o.paths, "number of paths");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--threads", o.threads, "worker threads");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic coupled-oscillator experiments"};
    app.set_version_flag("--version", std::string(stosc::kToolVersion));
    app.require_subcommand(1);

    Overrides o;
    using Command = int (*)(const stosc::ExperimentConfig&, std::ostream&);
    Command command = nullptr;
    const std::pair<const char*, Command> table[] = {
        {"simulate", stosc::cmd_simulate},
        {"verify-lil", stosc::cmd_verify_lil},
        {"compare-integrators", stosc::cmd_compare_integrators},
        {"sign-changes", stosc::cmd_sign_changes},
    };
    const char* help[] = {"write trajectory CSVs", "check the iterated-logarithm envelope",
                          "strong-error table for LL and EM", "count zero crossings"};
    for (std::size_t k = 0; k < std::size(table); ++k) {
        CLI::App* sub = app.add_subcommand(table[k].first, help[k]);
        add_common(sub, o);
        sub->callback([&command, fn = table[k].second] { command = fn; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : stosc::kExitConfig;
    }

    try {
        stosc::ExperimentConfig cfg = stosc::load_config(o.config);
        if (o.seed) cfg.seed = *o.seed;
        if (o.paths) {
            if (*o.paths < 1) throw stosc::ConfigError("--paths: must be >= 1");
            cfg.paths = *o.paths;
        }
        if (o.out) cfg.output_dir = *o.out;
        if (o.threads) cfg.threads = std::max(1u, *o.threads);
        return command(cfg, std::cerr);
    } catch (const stosc::ValidationError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return stosc::kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return stosc::kExitInternal;
    }
}
