#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "scrible/cli.hpp"

namespace {

using scrible::cli::Settings;

struct CommonFlags {
    std::optional<std::string> config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> preset;
    std::optional<std::string> algorithms;
    std::optional<std::string> epsilon;
    std::optional<int> reps;
    std::optional<std::string> nu_mode;
    std::string out = ".";
};

void add_common(CLI::App* app, CommonFlags& f, bool with_out)
{
    app->add_option("--config", f.config, "Config file of key = value lines");
    app->add_option("--seed", f.seed, "Base seed (decimal 64-bit unsigned)");
    app->add_option("--preset", f.preset, "Parameter preset")->check(CLI::IsMember({"theorem", "section7"}));
    app->add_option("--algorithms,--algorithm", f.algorithms, "Comma list of lifted, classic, increasing_lr");
    app->add_option("--epsilon", f.epsilon, "Comma list of perturbation levels");
    app->add_option("--reps", f.reps, "Repetitions per (algorithm, epsilon)");
    app->add_option("--nu-mode", f.nu_mode, "nu used in the formulas")->check(CLI::IsMember({"effective", "literal"}));
    if (with_out)
        app->add_option("--out", f.out, "Output directory");
    app->allow_extras();
    app->footer("Any config key may also be given as --key=value.");
}

/// Config file first, then named flags, then --key=value overrides.
Settings collect(const CommonFlags& f, const std::vector<std::string>& extras)
{
    Settings s;
    if (f.config)
        s = scrible::cli::load_config_file(*f.config);
    auto put = [&](const char* k, const std::string& v) { s.emplace_back(k, v); };
    if (f.preset)
        put("preset", *f.preset);
    if (f.seed)
        put("seed", std::to_string(*f.seed));
    if (f.algorithms)
        put("algorithms", *f.algorithms);
    if (f.epsilon)
        put("epsilon", *f.epsilon);
    if (f.reps)
        put("repetitions", std::to_string(*f.reps));
    if (f.nu_mode)
        put("nu_mode", *f.nu_mode);
    for (const std::string& arg : extras) {
        const auto eq = arg.find('=');
        if (arg.rfind("--", 0) != 0 || eq == std::string::npos || eq == 2)
            throw scrible::cli::ConfigError("unrecognized argument '" + arg + "' (expected --key=value)");
        s.emplace_back(scrible::cli::normalize_key(arg.substr(2, eq - 2)), arg.substr(eq + 1));
    }
    return s;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Lifted SCRiBLe bandit learner: simulation, checks and bound evaluation"};
    app.require_subcommand(1);

    scrible::cli::ValidateOptions vopt;
    auto* validate = app.add_subcommand("validate", "Check barrier identities and sampler statistics");
    validate->add_option("--seed", vopt.seed, "Seed");
    validate->add_option("--trials", vopt.trials, "Random interior points for the barrier suite");
    validate->add_option("--draws", vopt.draws, "Sampler draws");
    validate->add_option("--barrier-scale", vopt.barrier_scale, "Barrier scale c")->group("");

    CommonFlags run_flags, sweep_flags, lb_flags, bounds_flags;
    auto* run = app.add_subcommand("run", "Run repetitions and write trace.csv and summary.csv");
    add_common(run, run_flags, true);
    auto* sweep = app.add_subcommand("sweep", "Sweep epsilon and write sweep.csv and sweep.svg");
    add_common(sweep, sweep_flags, true);
    auto* lower = app.add_subcommand("lowerbound", "Play against the spike oracle");
    add_common(lower, lb_flags, false);
    auto* bounds = app.add_subcommand("bounds", "Evaluate the regret bound formulas");
    add_common(bounds, bounds_flags, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : scrible::cli::kUsageError;
    }

    try {
        if (validate->parsed())
            return scrible::cli::cmd_validate(vopt, std::cout, std::cerr);
        if (run->parsed())
            return scrible::cli::cmd_run(collect(run_flags, run->remaining()), run_flags.out, std::cout, std::cerr);
        if (sweep->parsed())
            return scrible::cli::cmd_sweep(collect(sweep_flags, sweep->remaining()), sweep_flags.out, std::cout,
                                           std::cerr);
        if (lower->parsed())
            return scrible::cli::cmd_lowerbound(collect(lb_flags, lower->remaining()), std::cout, std::cerr);
        if (bounds->parsed())
            return scrible::cli::cmd_bounds(collect(bounds_flags, bounds->remaining()), std::cout, std::cerr);
    } catch (const scrible::cli::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return scrible::cli::kUsageError;
    }
    return scrible::cli::kUsageError;
}
