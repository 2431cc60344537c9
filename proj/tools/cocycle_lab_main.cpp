#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "coclab/harness.hpp"

namespace {

struct CliOptions {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir;
};

void add_common(CLI::App* sub, CliOptions& opts) {
    sub->add_option("config", opts.config_path, "experiment config JSON")->required();
    sub->add_option("--seed", opts.seed, "override the config seed")
        ->each([&opts](const std::string&) { opts.seed_set = true; });
    sub->add_option("--out", opts.out_dir, "override the output directory");
}

coclab::ExperimentConfig load_with_overrides(const CliOptions& opts) {
    coclab::ExperimentConfig config = coclab::load_config_file(opts.config_path);
    if (opts.seed_set) {
        if (config.measure.seed == config.seed) config.measure.seed = opts.seed;
        config.seed = opts.seed;
    }
    if (!opts.out_dir.empty()) config.output_dir = opts.out_dir;
    return config;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cocycle-lab: Lyapunov exponents of matrix cocycles over hyperbolic base systems"};
    app.require_subcommand(1);
    CliOptions opts;

    auto* cmd_run = app.add_subcommand("run", "run the full experiment pipeline");
    auto* cmd_estimate = app.add_subcommand("estimate", "Monte-Carlo exponent estimation only");
    auto* cmd_periodic = app.add_subcommand("periodic", "periodic-orbit verification");
    auto* cmd_jsr = app.add_subcommand("jsr", "joint spectral radius bounds");
    auto* cmd_lyapnorm = app.add_subcommand("lyapnorm", "Lyapunov-norm diagnostics");
    auto* cmd_validate = app.add_subcommand("validate", "validate a config and exit");
    for (auto* sub : {cmd_run, cmd_estimate, cmd_periodic, cmd_jsr, cmd_lyapnorm, cmd_validate})
        add_common(sub, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n" << app.help();
        return 1;
    }

    try {
        const coclab::ExperimentConfig config = load_with_overrides(opts);
        if (cmd_validate->parsed()) {
            std::cerr << "config ok (hash " << coclab::config_hash(config) << ")\n";
            return 0;
        }
        coclab::StageSelection sel;
        if (cmd_run->parsed()) sel = coclab::StageSelection::all();
        if (cmd_estimate->parsed()) sel.estimate = true;
        if (cmd_periodic->parsed()) sel.periodic = true;
        if (cmd_lyapnorm->parsed()) sel.lyapnorm = true;
        if (cmd_jsr->parsed()) sel.jsr = true;
        const coclab::ResultBundle bundle = coclab::run_experiment(config, sel, true);
        std::cerr << "stages:";
        for (const auto& s : bundle.stages) std::cerr << ' ' << s;
        std::cerr << '\n';
        if (sel.estimate)
            std::cerr << "lambda_hat = " << bundle.exponents.upper.value << " +- "
                      << bundle.exponents.upper.stderr_v
                      << ", chi_hat = " << bundle.exponents.lower.value << " +- "
                      << bundle.exponents.lower.stderr_v << "\n";
        if (bundle.has_theorem)
            std::cerr << "periodic winner: k = " << bundle.theorem.winner.k
                      << ", residual = " << bundle.theorem.winner.residual
                      << (bundle.theorem.success ? " (success)" : " (tolerance not met)")
                      << "\n";
        if (bundle.has_jsr)
            std::cerr << "jsr bracket: [" << bundle.jsr_bb.lower << ", " << bundle.jsr_bb.upper
                      << "]\n";
        std::cerr << "outputs written to " << config.output_dir << "\n";
        return 0;
    } catch (const coclab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const coclab::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
