#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "scrible/adversary.hpp"
#include "scrible/algorithms.hpp"
#include "scrible/barrier.hpp"
#include "scrible/geometry.hpp"
#include "scrible/sampling.hpp"

namespace scrible {

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double v)
    {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// ---------------------------------------------------------------------------
// Bound calculators

inline double theorem1_bound(int d, double T, double nu, double delta, double epsilon, double G, double D)
{
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("theorem1_bound: delta must lie in (0,1)");
    const double dd = static_cast<double>(d);
    return 4.0 * dd * std::sqrt(nu * T * std::log(1.0 / delta))
         + 2.0 * dd * T * (nu + 2.0 * std::sqrt(nu)) * ((1.0 - delta) / delta) * epsilon
         + delta * G * D * T
         + 2.0 * T * epsilon;
}

/// ceil(ln GD) * ceil(ln((GD)^2 T)).
inline double theorem2_constant(double T, double G, double D)
{
    const double first = std::ceil(std::log(G * D));
    if (!(first > 0.0))
        throw std::domain_error("theorem2_bound: ceil(ln GD) <= 0, the high-probability bound degenerates for GD <= 1");
    return first * std::ceil(std::log(G * D * G * D * T));
}

inline double theorem2_bound(int d, double T, double nu, double delta, double epsilon, double G, double D, double gamma)
{
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("theorem2_bound: gamma must lie in (0,1)");
    const double C = theorem2_constant(T, G, D);
    const double lg = std::log(C / gamma);
    return theorem1_bound(d, T, nu, delta, epsilon, G, D)
         + C * (2.0 * G * D * lg + (1.0 + epsilon) * std::sqrt(8.0 * T * lg));
}

// ---------------------------------------------------------------------------
// Configuration

enum class Preset { theorem, section7 };
enum class NuMode { effective, literal };

inline constexpr double kEpsilonCeiling = 1.0 - 1e-9;

struct ExperimentConfig {
    int d = 5;
    std::size_t T = 2000;
    double D = 5.0;
    double G = 1.0;
    std::vector<double> epsilons{0.0};
    std::vector<Algorithm> algorithms{Algorithm::lifted};
    int repetitions = 10;
    std::uint64_t seed = 1;
    PerturbationKind perturbation = PerturbationKind::sinusoidal;
    Preset preset = Preset::theorem;
    NuMode nu_mode = NuMode::effective;
    BarrierConfig barrier;
    double gamma = 0.1;
    RateSchedule schedule;
    unsigned threads = 0; ///< 0: hardware concurrency

    static ExperimentConfig theorem_preset() { return {}; }

    static ExperimentConfig section7_preset()
    {
        ExperimentConfig c;
        c.preset = Preset::section7;
        c.nu_mode = NuMode::literal;
        c.epsilons = {0.0, 0.25, 0.5, 0.75, 1.0};
        c.algorithms = {Algorithm::lifted, Algorithm::classic, Algorithm::increasing_lr};
        c.repetitions = 10;
        c.perturbation = PerturbationKind::sinusoidal;
        return c;
    }

    static ExperimentConfig for_preset(Preset p) { return p == Preset::section7 ? section7_preset() : theorem_preset(); }

    /// Homogeneity parameter of the configured barrier.
    double effective_nu() const { return 2.0 * barrier.scale * barrier.inner_nu; }

    /// The nu entering the learning-rate and bound formulas.
    double formula_nu() const { return nu_mode == NuMode::effective ? effective_nu() : 1.0; }

    BallActionSet action_set() const { return BallActionSet(d, D); }

    LearnerParams params_for(double epsilon) const
    {
        LearnerParams p = default_params(epsilon, T, d, formula_nu(), G, D,
                                         preset == Preset::section7 ? EtaFormula::experimental : EtaFormula::theorem);
        p.barrier = barrier;
        return p;
    }

    /// Throws on invalid values; epsilon = 1 is clamped below 1 with a diagnostic.
    std::vector<std::string> validate()
    {
        std::vector<std::string> notes;
        if (d < 1)
            throw std::invalid_argument("config: d must be >= 1");
        if (T < 1)
            throw std::invalid_argument("config: T must be >= 1");
        if (!(D >= 1.0))
            throw std::invalid_argument("config: D must be >= 1");
        if (!(G >= 0.0))
            throw std::invalid_argument("config: G must be >= 0");
        if (repetitions < 1)
            throw std::invalid_argument("config: repetitions must be >= 1");
        if (epsilons.empty())
            throw std::invalid_argument("config: epsilon list is empty");
        if (algorithms.empty())
            throw std::invalid_argument("config: algorithm list is empty");
        if (!(barrier.scale > 0.0) || !(barrier.inner_nu >= 1.0))
            throw std::invalid_argument("config: barrier_scale must be > 0 and inner_nu >= 1");
        for (double& e : epsilons) {
            if (e == 1.0) {
                e = kEpsilonCeiling;
                notes.push_back("epsilon = 1 clamped to 1 - 1e-9 (epsilon must be < 1)");
            } else if (!(e >= 0.0 && e < 1.0)) {
                throw std::invalid_argument("config: epsilon values must lie in [0,1), got " + std::to_string(e));
            }
        }
        return notes;
    }
};

// ---------------------------------------------------------------------------
// Single runs

struct TraceRow {
    double loss = 0.0;
    double cum_loss = 0.0;
    double lin_regret = 0.0;
    double step_norm = 0.0;
    double g_dual_norm = 0.0;
};

/// Worst-case residuals of the per-round and whole-run invariants.
struct TraceChecks {
    double feasibility_excess = 0.0;     ///< max(|y_t| - D)
    double step_norm_error = 0.0;        ///< max |step_norm - 1|
    double dual_identity_error = 0.0;    ///< max relative error of |g|* = d |f|
    bool proximity_applicable = false;   ///< 4 d eta < 1/2 and a constant rate
    double proximity_ratio = 0.0;        ///< max move_norm / (4 d eta)
    bool ftrl_applicable = false;        ///< constant learning rate
    double ftrl_residual = -std::numeric_limits<double>::infinity(); ///< lhs - rhs of the FTRL inequality
    double distance_ratio = 0.0;         ///< max |x'_t - h|_{x'_t} / (2 (1/delta - 1)(nu + 2 sqrt nu))

    static constexpr double kFeasibilityTol = 1e-9;
    static constexpr double kStepNormTol = 1e-8;
    static constexpr double kDualIdentityTol = 1e-8;

    double ftrl_tolerance(std::size_t T) const { return 1e-6 * static_cast<double>(T); }

    bool feasibility_ok() const { return feasibility_excess <= kFeasibilityTol; }
    bool step_norm_ok() const { return step_norm_error <= kStepNormTol; }
    bool dual_identity_ok() const { return dual_identity_error <= kDualIdentityTol; }
    bool proximity_ok() const { return !proximity_applicable || proximity_ratio < 1.0; }
    bool ftrl_ok(std::size_t T) const { return !ftrl_applicable || ftrl_residual <= ftrl_tolerance(T); }
    bool distance_ok() const { return distance_ratio <= 1.0; }

    bool all_ok(std::size_t T) const
    {
        return feasibility_ok() && step_norm_ok() && dual_identity_ok() && proximity_ok() && ftrl_ok(T)
            && distance_ok();
    }
};

struct RegretReport {
    Algorithm algorithm = Algorithm::lifted;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    LearnerParams params;
    std::vector<TraceRow> trace;
    double cum_loss = 0.0;
    double cum_linear_loss = 0.0;
    double lin_regret = 0.0;
    double bracket_low = 0.0;  ///< lin_regret - 2 eps T
    double bracket_high = 0.0; ///< lin_regret + 2 eps T
    double max_abs_loss = 0.0;
    std::size_t normalization_violations = 0;
    Vector comparator;         ///< argmin over K of the summed linear losses
    double bound_thm1 = 0.0;
    double bound_thm2 = std::numeric_limits<double>::quiet_NaN();
    TraceChecks checks;
    double seconds = 0.0;
};

class RunError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline TraceChecks check_trace(std::span<const RoundRecord> recs, const Learner& learner, const Vector& comparator,
                               double D, bool constant_rate)
{
    TraceChecks c;
    const LearnerParams& p = learner.params();
    const ConeBarrier& barrier = learner.barrier();
    const double d = p.dimension;
    const double nu = barrier.effective_nu();
    const double radius_bound = 2.0 * (1.0 / p.delta - 1.0) * (nu + 2.0 * std::sqrt(nu));
    const LiftedPoint h(comparator * (1.0 - p.delta));
    const Vector hf = h.full();

    c.proximity_applicable = constant_rate && p.proximity_regime();
    c.ftrl_applicable = constant_rate;

    CompensatedSum lhs, rhs;
    for (const RoundRecord& r : recs) {
        c.feasibility_excess = std::max(c.feasibility_excess, r.played.norm() - D);
        c.step_norm_error = std::max(c.step_norm_error, std::abs(r.step_norm - 1.0));
        const double target = d * std::abs(r.loss);
        const double err = std::abs(r.estimate_dual_norm - target);
        c.dual_identity_error = std::max(c.dual_identity_error, target > 0.0 ? err / target : err);
        c.proximity_ratio = std::max(c.proximity_ratio, r.move_norm / (4.0 * d * p.eta));

        const Vector xf = r.iterate.full();
        const Matrix H = barrier.eval(xf).hessian;
        c.distance_ratio = std::max(c.distance_ratio, local_norm(H, Vector(xf - hf)) / radius_bound);

        lhs.add(r.estimate.dot(xf) - r.estimate.dot(hf));
        rhs.add(r.estimate.dot(xf) - r.estimate.dot(r.next_iterate.full()));
    }
    if (!recs.empty() && c.ftrl_applicable) {
        const double reg = (barrier.value(hf) - barrier.value(recs.front().iterate.full())) / p.eta;
        c.ftrl_residual = lhs.value() - (rhs.value() + reg);
    }
    return c;
}

} // namespace detail

/// Plays `algorithm` for T rounds against the oblivious sequence derived from `seed`.
///
/// The seed feeds two independent substreams: one for the loss sequence and
/// perturbation, one for the learner's sampling.
inline RegretReport run_once(const ExperimentConfig& config, Algorithm algorithm, double epsilon, std::uint64_t seed)
{
    const auto started = std::chrono::steady_clock::now();
    const BallActionSet set = config.action_set();
    const SeededRng root(seed);
    SeededRng adversary_rng = root.substream(0);
    SeededRng learner_rng = root.substream(1);

    LinearSequence linear = gen_oblivious(config.T, config.d, config.G, adversary_rng);
    PerturbationRule rule = PerturbationRule::make(config.perturbation, epsilon, set, adversary_rng);
    const LossSequence losses(std::move(linear), std::move(rule));

    RegretReport rep;
    rep.algorithm = algorithm;
    rep.epsilon = epsilon;
    rep.seed = seed;
    rep.params = config.params_for(epsilon);
    std::unique_ptr<Learner> learner = make_learner(algorithm, set, rep.params, config.schedule);

    std::vector<RoundRecord> records;
    records.reserve(config.T);
    rep.trace.reserve(config.T);
    CompensatedSum cum, cum_linear;
    Vector theta_sum = Vector::Zero(config.d);

    for (std::size_t t = 0; t < config.T; ++t) {
        try {
            const Vector y = learner->act(learner_rng);
            const double f = losses.loss(t, y);
            records.push_back(learner->update(f));
        } catch (const std::exception& e) {
            throw RunError("round " + std::to_string(t + 1) + ": " + e.what());
        }
        const RoundRecord& r = records.back();
        const Vector& theta = losses.linear().theta[t];
        cum.add(r.loss);
        cum_linear.add(theta.dot(r.played));
        theta_sum += theta;
        const Vector best = linear_optimum(theta_sum, set);
        rep.max_abs_loss = std::max(rep.max_abs_loss, std::abs(r.loss));
        rep.trace.push_back({r.loss, cum.value(), cum_linear.value() - theta_sum.dot(best), r.step_norm,
                             r.estimate_dual_norm});
    }

    rep.comparator = linear_optimum(theta_sum, set);
    rep.cum_loss = cum.value();
    rep.cum_linear_loss = cum_linear.value();
    rep.lin_regret = rep.cum_linear_loss - theta_sum.dot(rep.comparator);
    const double T = static_cast<double>(config.T);
    rep.bracket_low = rep.lin_regret - 2.0 * epsilon * T;
    rep.bracket_high = rep.lin_regret + 2.0 * epsilon * T;
    rep.normalization_violations = learner->normalization_violations();

    const double nu = config.formula_nu();
    rep.bound_thm1 = theorem1_bound(config.d, T, nu, rep.params.delta, epsilon, config.G, config.D);
    try {
        rep.bound_thm2 = theorem2_bound(config.d, T, nu, rep.params.delta, epsilon, config.G, config.D, config.gamma);
    } catch (const std::domain_error&) {
        rep.bound_thm2 = std::numeric_limits<double>::quiet_NaN();
    }

    rep.checks = detail::check_trace(records, *learner, rep.comparator, config.D, algorithm != Algorithm::increasing_lr);
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return rep;
}

// ---------------------------------------------------------------------------
// Grids, sweeps and statistics

struct GridCell {
    Algorithm algorithm;
    double epsilon;
    int repetition;
    RegretReport report;
};

/// Runs fn(i) for i in [0, n) on up to `threads` workers; the first exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn)
{
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n && !failed; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true))
                        failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
}

/// Every (algorithm, epsilon, repetition) cell, ordered algorithm-major; repetition r uses seed + r.
inline std::vector<GridCell> run_grid(const ExperimentConfig& config)
{
    std::vector<GridCell> cells;
    for (Algorithm a : config.algorithms)
        for (double e : config.epsilons)
            for (int r = 0; r < config.repetitions; ++r)
                cells.push_back({a, e, r, {}});
    parallel_for(cells.size(), config.threads, [&](std::size_t i) {
        GridCell& c = cells[i];
        c.report = run_once(config, c.algorithm, c.epsilon, config.seed + static_cast<std::uint64_t>(c.repetition));
    });
    return cells;
}

struct SampleStats {
    double mean = 0.0;
    double stddev = 0.0; ///< sample standard deviation, 0 for a single value
};

inline SampleStats sample_stats(std::span<const double> xs)
{
    if (xs.empty())
        throw std::invalid_argument("sample_stats: no values");
    SampleStats s;
    s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs)
            ss += (x - s.mean) * (x - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return s;
}

struct SweepRow {
    Algorithm algorithm;
    double epsilon;
    double mean_cum_loss;
    double std_cum_loss;
    double mean_lin_regret;
};

inline std::vector<SweepRow> aggregate(const ExperimentConfig& config, std::span<const GridCell> cells)
{
    std::vector<SweepRow> rows;
    for (Algorithm a : config.algorithms) {
        for (double e : config.epsilons) {
            std::vector<double> losses, regrets;
            for (const GridCell& c : cells) {
                if (c.algorithm == a && c.epsilon == e) {
                    losses.push_back(c.report.cum_loss);
                    regrets.push_back(c.report.lin_regret);
                }
            }
            const SampleStats l = sample_stats(losses);
            rows.push_back({a, e, l.mean, l.stddev, sample_stats(regrets).mean});
        }
    }
    return rows;
}

inline std::vector<SweepRow> sweep_epsilon(const ExperimentConfig& config)
{
    const std::vector<GridCell> cells = run_grid(config);
    return aggregate(config, cells);
}

/// Least-squares slope of log(regret) against log(T).
inline double fit_scaling_exponent(std::span<const double> horizons, std::span<const double> mean_regrets)
{
    if (horizons.size() != mean_regrets.size())
        throw std::invalid_argument("fit_scaling_exponent: length mismatch");
    if (horizons.size() < 3)
        throw std::invalid_argument("fit_scaling_exponent: need at least 3 horizons");
    const std::size_t n = horizons.size();
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(horizons[i] > 0.0))
            throw std::invalid_argument("fit_scaling_exponent: horizons must be positive");
        if (!(mean_regrets[i] > 0.0))
            throw std::invalid_argument("fit_scaling_exponent: regret " + std::to_string(mean_regrets[i])
                                        + " is not positive, log undefined");
        lx[i] = std::log(horizons[i]);
        ly[i] = std::log(mean_regrets[i]);
    }
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    if (!(sxx > 0.0))
        throw std::invalid_argument("fit_scaling_exponent: horizons must not all be equal");
    return sxy / sxx;
}

/// Nearest-rank quantile.
inline double empirical_quantile(std::vector<double> values, double q)
{
    if (values.empty())
        throw std::invalid_argument("empirical_quantile: no values");
    if (!(q > 0.0 && q < 1.0))
        throw std::invalid_argument("empirical_quantile: q must lie in (0,1)");
    std::sort(values.begin(), values.end());
    const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
    return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

inline double empirical_quantile(std::span<const RegretReport> reports, double q)
{
    std::vector<double> regrets;
    regrets.reserve(reports.size());
    for (const RegretReport& r : reports)
        regrets.push_back(r.lin_regret);
    return empirical_quantile(std::move(regrets), q);
}

// ---------------------------------------------------------------------------
// Lower-bound harness

struct LowerBoundReport {
    Algorithm algorithm = Algorithm::lifted;
    double epsilon = 0.0;
    std::size_t T = 0;
    double cum_loss = 0.0;  ///< sum of observed losses, eps T
    double optimum = 0.0;   ///< T f(z) = -eps T at the hidden point
    double regret = 0.0;    ///< 2 eps T
    double gap = 0.0;       ///< f(x_hat) - min f = 2 eps
    Vector recommendation;
};

/// Plays a learner against the spike oracle and evaluates the deferred optimum.
inline LowerBoundReport run_lowerbound(const ExperimentConfig& config, Algorithm algorithm, double epsilon,
                                       std::uint64_t seed)
{
    const BallActionSet set = config.action_set();
    const SeededRng root(seed);
    SeededRng learner_rng = root.substream(1);
    SeededRng oracle_rng = root.substream(2);

    SpikeOracle oracle(set, epsilon);
    std::unique_ptr<Learner> learner = make_learner(algorithm, set, config.params_for(epsilon), config.schedule);
    std::vector<RoundRecord> records;
    records.reserve(config.T);
    CompensatedSum cum;
    for (std::size_t t = 0; t < config.T; ++t) {
        const Vector y = learner->act(learner_rng);
        records.push_back(learner->update(oracle.query(y)));
        cum.add(records.back().loss);
    }

    LowerBoundReport rep;
    rep.algorithm = algorithm;
    rep.epsilon = epsilon;
    rep.T = config.T;
    rep.recommendation = recommend(records);
    rep.gap = oracle.gap(rep.recommendation, oracle_rng);
    CompensatedSum best;
    for (std::size_t t = 0; t < config.T; ++t)
        best.add(oracle.value(*oracle.hidden_point()));
    rep.cum_loss = cum.value();
    rep.optimum = best.value();
    rep.regret = rep.cum_loss - rep.optimum;
    return rep;
}

} // namespace scrible
