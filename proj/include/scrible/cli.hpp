#pragma once

#include <charconv>
#include <cstdlib>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "scrible/harness.hpp"
#include "scrible/report_io.hpp"
#include "scrible/validation.hpp"

namespace scrible::cli {

enum ExitCode : int { kSuccess = 0, kUsageError = 1, kRuntimeError = 2, kValidationFailure = 3 };

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Ordered key = value settings; later entries override earlier ones.
using Settings = std::vector<std::pair<std::string, std::string>>;

inline std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::string normalize_key(std::string key)
{
    for (char& c : key)
        if (c == '-')
            c = '_';
    return key;
}

/// Flat `key = value` lines; `#` starts a comment.
inline Settings parse_config_text(std::string_view text, std::string_view origin = "config")
{
    Settings out;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        const std::string body = trim(line);
        if (body.empty())
            continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError(std::string(origin) + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(std::string_view(body).substr(0, eq));
        if (key.empty())
            throw ConfigError(std::string(origin) + ":" + std::to_string(lineno) + ": empty key");
        out.emplace_back(normalize_key(std::move(key)), trim(std::string_view(body).substr(eq + 1)));
    }
    return out;
}

inline Settings load_config_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config file '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path.string());
}

namespace detail {

template <typename T>
T parse_number(const std::string& key, const std::string& value)
{
    T out{};
    const char* first = value.data();
    const char* last = value.data() + value.size();
    std::from_chars_result res;
    if constexpr (std::is_floating_point_v<T>) {
        char* end = nullptr;
        out = std::strtod(value.c_str(), &end);
        res.ptr = end;
        res.ec = (end == first) ? std::errc::invalid_argument : std::errc{};
    } else {
        res = std::from_chars(first, last, out);
    }
    if (res.ec != std::errc{} || res.ptr != last || value.empty())
        throw ConfigError("invalid value '" + value + "' for key '" + key + "'");
    return out;
}

inline std::vector<std::string> split_list(const std::string& value)
{
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(value);
    while (std::getline(in, cur, ','))
        if (auto t = trim(cur); !t.empty())
            parts.push_back(std::move(t));
    return parts;
}

inline Preset parse_preset(const std::string& v)
{
    if (v == "theorem")
        return Preset::theorem;
    if (v == "section7")
        return Preset::section7;
    throw ConfigError("invalid value '" + v + "' for key 'preset' (expected theorem or section7)");
}

inline NuMode parse_nu_mode(const std::string& v)
{
    if (v == "effective")
        return NuMode::effective;
    if (v == "literal")
        return NuMode::literal;
    throw ConfigError("invalid value '" + v + "' for key 'nu_mode' (expected effective or literal)");
}

} // namespace detail

/// Keys accepted by build_config beyond the experiment itself.
struct ExtraKeys {
    std::vector<std::string> names;
    bool accepts(const std::string& k) const { return std::find(names.begin(), names.end(), k) != names.end(); }
};

/// Applies a preset (from the `preset` key, default theorem) and then every setting in order.
inline ExperimentConfig build_config(const Settings& settings, std::map<std::string, std::string>* extras = nullptr,
                                     const ExtraKeys& allowed = {})
{
    Preset preset = Preset::theorem;
    for (const auto& [k, v] : settings)
        if (k == "preset")
            preset = detail::parse_preset(v);
    ExperimentConfig c = ExperimentConfig::for_preset(preset);

    using detail::parse_number;
    for (const auto& [k, v] : settings) {
        try {
            if (k == "preset") {
            } else if (k == "d") {
                c.d = parse_number<int>(k, v);
            } else if (k == "T") {
                c.T = parse_number<std::size_t>(k, v);
            } else if (k == "D") {
                c.D = parse_number<double>(k, v);
            } else if (k == "G") {
                c.G = parse_number<double>(k, v);
            } else if (k == "epsilon") {
                c.epsilons.clear();
                for (const auto& e : detail::split_list(v))
                    c.epsilons.push_back(parse_number<double>(k, e));
            } else if (k == "algorithms" || k == "algorithm") {
                c.algorithms.clear();
                for (const auto& a : detail::split_list(v))
                    c.algorithms.push_back(parse_algorithm(a));
            } else if (k == "repetitions" || k == "reps") {
                c.repetitions = parse_number<int>(k, v);
            } else if (k == "seed") {
                c.seed = parse_number<std::uint64_t>(k, v);
            } else if (k == "perturbation") {
                c.perturbation = parse_perturbation(v);
            } else if (k == "nu_mode") {
                c.nu_mode = detail::parse_nu_mode(v);
            } else if (k == "barrier_scale") {
                c.barrier.scale = parse_number<double>(k, v);
            } else if (k == "inner_nu") {
                c.barrier.inner_nu = parse_number<double>(k, v);
            } else if (k == "gamma") {
                c.gamma = parse_number<double>(k, v);
            } else if (k == "kappa") {
                c.schedule.growth = parse_number<double>(k, v);
            } else if (k == "lr_threshold") {
                c.schedule.threshold = parse_number<double>(k, v);
            } else if (k == "threads") {
                c.threads = parse_number<unsigned>(k, v);
            } else if (allowed.accepts(k)) {
                if (extras)
                    (*extras)[k] = v;
            } else {
                throw ConfigError("unknown config key '" + k + "'");
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const std::invalid_argument& e) {
            throw ConfigError("key '" + k + "': " + e.what());
        }
    }
    return c;
}

/// Validates the config and reports diagnostics; configuration problems become ConfigError.
inline ExperimentConfig finalize(ExperimentConfig c, std::ostream& err)
{
    try {
        for (const std::string& note : c.validate())
            err << "note: " << note << '\n';
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    for (double e : c.epsilons) {
        const LearnerParams p = c.params_for(e);
        if (!p.proximity_regime())
            err << "warning: epsilon " << fmt_short(e) << ": 4 d eta = " << fmt_short(4.0 * c.d * p.eta)
                << " is not below 1/2; the local-step bound is not checked\n";
    }
    if (c.G * c.D > 1.0)
        err << "note: G D = " << fmt_short(c.G * c.D) << " > 1, so |f| <= 1 is not guaranteed; see max_abs_f\n";
    return c;
}

inline void ensure_dir(const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
}

inline std::ofstream open_output(const std::filesystem::path& path)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot write '" + path.string() + "'");
    return os;
}

// ---------------------------------------------------------------------------
// Commands. Each returns an ExitCode and never throws.

struct ValidateOptions {
    std::uint64_t seed = 1;
    int trials = 100;
    int draws = 100000;
    int d = 5;
    double D = 5.0;
    double barrier_scale = 400.0; ///< test hook: inject an invalid scale
    double inner_nu = 1.0;
};

inline int cmd_validate(const ValidateOptions& opt, std::ostream& out, std::ostream& err)
{
    std::vector<CheckRow> rows;
    try {
        const BallActionSet set(opt.d, opt.D);
        SeededRng rng(opt.seed);
        std::unique_ptr<ConeBarrier> barrier;
        try {
            barrier = std::make_unique<ConeBarrier>(set, opt.barrier_scale, opt.inner_nu);
        } catch (const std::invalid_argument& e) {
            out << "FAIL barrier construction: " << e.what() << '\n';
            err << "validation failed: barrier invariant violated\n";
            return kValidationFailure;
        }
        SeededRng barrier_rng = rng.substream(0);
        SeededRng sampler_rng = rng.substream(1);
        for (CheckRow& r : barrier_suite(*barrier, barrier_rng, opt.trials))
            rows.push_back(std::move(r));
        for (CheckRow& r : sampler_suite(sampler_rng, opt.draws, opt.d))
            rows.push_back(std::move(r));
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeError;
    }

    bool ok = true;
    out << "status,check,value,tolerance\n";
    for (const CheckRow& r : rows) {
        out << (r.ok ? "PASS" : "FAIL") << ',' << r.name << ',' << fmt17(r.value) << ',' << fmt17(r.tolerance) << '\n';
        if (!r.ok) {
            ok = false;
            err << "validation failed: " << r.name << '\n';
        }
    }
    return ok ? kSuccess : kValidationFailure;
}

inline void report_failed_checks(const std::vector<GridCell>& cells, std::size_t T, std::ostream& err, bool& ok)
{
    for (const GridCell& c : cells) {
        const TraceChecks& k = c.report.checks;
        if (k.all_ok(T))
            continue;
        ok = false;
        err << "check failed: " << algorithm_name(c.algorithm) << " epsilon " << fmt_short(c.epsilon) << " repetition "
            << c.repetition << ':';
        if (!k.feasibility_ok())
            err << " feasibility(" << k.feasibility_excess << ")";
        if (!k.step_norm_ok())
            err << " unit-step(" << k.step_norm_error << ")";
        if (!k.dual_identity_ok())
            err << " estimator-dual-norm(" << k.dual_identity_error << ")";
        if (!k.proximity_ok())
            err << " local-step(" << k.proximity_ratio << ")";
        if (!k.ftrl_ok(T))
            err << " ftrl-inequality(" << k.ftrl_residual << ")";
        if (!k.distance_ok())
            err << " local-distance(" << k.distance_ratio << ")";
        err << '\n';
    }
}

inline int cmd_run(const Settings& settings, const std::filesystem::path& out_dir, std::ostream& out, std::ostream& err)
{
    ExperimentConfig config;
    try {
        config = finalize(build_config(settings), err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    }
    try {
        const std::vector<GridCell> cells = run_grid(config);
        ensure_dir(out_dir);
        {
            auto os = open_output(out_dir / "trace.csv");
            write_trace_csv(os, cells);
        }
        {
            auto os = open_output(out_dir / "summary.csv");
            write_summary_csv(os, cells);
        }
        bool ok = true;
        report_failed_checks(cells, config.T, err, ok);
        out << "wrote " << (out_dir / "trace.csv").string() << " and " << (out_dir / "summary.csv").string() << " ("
            << cells.size() << " runs)\n";
        return ok ? kSuccess : kValidationFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
}

inline int cmd_sweep(const Settings& settings, const std::filesystem::path& out_dir, std::ostream& out,
                     std::ostream& err)
{
    ExperimentConfig config;
    try {
        config = finalize(build_config(settings), err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    }
    try {
        const std::vector<GridCell> cells = run_grid(config);
        const std::vector<SweepRow> rows = aggregate(config, cells);
        ensure_dir(out_dir);
        {
            auto os = open_output(out_dir / "sweep.csv");
            write_sweep_csv(os, rows);
        }
        {
            auto os = open_output(out_dir / "sweep.svg");
            write_sweep_svg(os, rows, config.algorithms);
        }
        bool ok = true;
        report_failed_checks(cells, config.T, err, ok);
        for (const SweepRow& r : rows)
            out << algorithm_name(r.algorithm) << " epsilon=" << fmt_short(r.epsilon)
                << " mean_cum_loss=" << fmt_short(r.mean_cum_loss) << " std=" << fmt_short(r.std_cum_loss) << '\n';
        return ok ? kSuccess : kValidationFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
}

inline int cmd_lowerbound(const Settings& settings, std::ostream& out, std::ostream& err)
{
    ExperimentConfig config;
    try {
        config = finalize(build_config(settings), err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    }
    try {
        for (Algorithm a : config.algorithms) {
            for (double e : config.epsilons) {
                const LowerBoundReport r = run_lowerbound(config, a, e, config.seed);
                out << "algorithm=" << algorithm_name(a) << " epsilon=" << fmt_exact(e) << " T=" << r.T
                    << " loss_sum=" << fmt_exact(r.cum_loss) << " optimum=" << fmt_exact(r.optimum)
                    << " regret=" << fmt_exact(r.regret) << " gap=" << fmt_exact(r.gap) << '\n';
            }
        }
        return kSuccess;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
}

inline int cmd_bounds(const Settings& settings, std::ostream& out, std::ostream& err)
{
    ExperimentConfig config;
    std::map<std::string, std::string> extras;
    try {
        config = build_config(settings, &extras, ExtraKeys{{"nu"}});
        config.validate();
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    }
    try {
        double nu = config.formula_nu();
        if (auto it = extras.find("nu"); it != extras.end())
            nu = detail::parse_number<double>("nu", it->second);
        const double T = static_cast<double>(config.T);
        int status = kSuccess;
        for (double e : config.epsilons) {
            LearnerParams p = default_params(e, config.T, config.d, nu, config.G, config.D,
                                             config.preset == Preset::section7 ? EtaFormula::experimental
                                                                               : EtaFormula::theorem);
            const double b1 = theorem1_bound(config.d, T, nu, p.delta, e, config.G, config.D);
            out << "epsilon=" << fmt_exact(e) << " nu=" << fmt_exact(nu) << " delta=" << fmt_exact(p.delta) << " eta=" << fmt_exact(p.eta)
                << " four_d_eta=" << fmt_exact(4.0 * config.d * p.eta) << '\n'
                << "  theorem1_bound=" << fmt_exact(b1) << '\n';
            try {
                const double C = theorem2_constant(T, config.G, config.D);
                const double b2 = theorem2_bound(config.d, T, nu, p.delta, e, config.G, config.D, config.gamma);
                out << "  C=" << fmt_exact(C) << " gamma=" << fmt_exact(config.gamma) << " theorem2_bound=" << fmt_exact(b2) << '\n';
            } catch (const std::domain_error& ex) {
                err << "error: " << ex.what() << '\n';
                status = kRuntimeError;
            }
        }
        return status;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
}

} // namespace scrible::cli
