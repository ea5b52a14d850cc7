#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "scrible/barrier.hpp"
#include "scrible/ftrl_solver.hpp"
#include "scrible/geometry.hpp"
#include "scrible/sampling.hpp"

namespace scrible {

/// Learning-rate formula used by default_params.
enum class EtaFormula {
    theorem,       ///< sqrt(nu ln(1/delta)) / (2 d sqrt(T))
    experimental,  ///< 20 sqrt(ln(1/delta)) / (4 d sqrt(T))
};

struct BarrierConfig {
    double scale = 400.0;
    double inner_nu = 1.0;
};

struct LearnerParams {
    double eta = 0.0;
    double delta = 0.5;
    int dimension = 1;
    std::size_t horizon = 1;
    BarrierConfig barrier;

    /// 4 d eta < 1/2, the step-size regime in which iterates provably stay
    /// within local distance 4 d eta of each other.
    bool proximity_regime() const { return 4.0 * dimension * eta < 0.5; }
};

/// delta = 1/T^2 (epsilon = 0) or sqrt(epsilon), and the matching learning rate.
inline LearnerParams default_params(double epsilon, std::size_t T, int d, double nu, double G, double D,
                                    EtaFormula formula = EtaFormula::theorem)
{
    (void)G;
    (void)D;
    if (T < 1)
        throw std::invalid_argument("default_params: T must be >= 1");
    if (d < 1)
        throw std::invalid_argument("default_params: d must be >= 1");
    if (!(nu >= 1.0))
        throw std::invalid_argument("default_params: nu must be >= 1");
    if (!(epsilon >= 0.0))
        throw std::invalid_argument("default_params: epsilon must be >= 0");
    if (!(epsilon < 1.0))
        throw std::invalid_argument("default_params: epsilon must be < 1, got " + std::to_string(epsilon));

    const double Td = static_cast<double>(T);
    LearnerParams p;
    p.dimension = d;
    p.horizon = T;
    p.delta = epsilon == 0.0 ? 1.0 / (Td * Td) : std::sqrt(epsilon);
    const double log_inv_delta = -std::log(p.delta);
    if (formula == EtaFormula::theorem)
        p.eta = std::sqrt(nu * log_inv_delta) / (2.0 * d * std::sqrt(Td));
    else
        p.eta = 20.0 * std::sqrt(log_inv_delta) / (4.0 * d * std::sqrt(Td));
    return p;
}

/// One completed act/update cycle.
struct RoundRecord {
    std::size_t round = 0;     ///< zero-based
    LiftedPoint iterate;       ///< x'_t
    LiftedPoint next_iterate;  ///< x'_{t+1}
    Vector direction;          ///< mu_t
    Vector played;             ///< y_t
    double loss = 0.0;         ///< f_t(y_t)
    Vector estimate;           ///< g_t, length d + 1 (zero last entry for the unlifted learner)
    double step_norm = 0.0;    ///< local norm of y'_t - x'_t at x'_t
    double estimate_dual_norm = 0.0;
    double move_norm = 0.0;    ///< local norm of x'_{t+1} - x'_t at x'_t
    double eta = 0.0;          ///< learning rate used in this round's update
    int solver_iterations = 0;
};

class LearnerError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Three-phase bandit learner: act, then the caller evaluates the loss, then update.
class Learner {
public:
    virtual ~Learner() = default;

    virtual std::string_view name() const = 0;
    /// Draws and returns the point to play this round.
    virtual Vector act(SeededRng& rng) = 0;
    /// Consumes the observed loss of the pending point.
    virtual RoundRecord update(double loss) = 0;

    virtual const LiftedPoint& iterate() const = 0;
    virtual const ConeBarrier& barrier() const = 0;
    virtual const LearnerParams& params() const = 0;
    /// Number of losses outside [-1, 1] seen so far.
    virtual std::size_t normalization_violations() const = 0;
};

inline constexpr double kLossSlack = 1e-9;

/// SCRiBLe over the lifted slice with an optional increasing learning rate.
///
/// With growth == 1 this is the plain lifted algorithm; otherwise the rate is
/// multiplied by growth each time the local distance between consecutive
/// iterates exceeds move_threshold.
class LiftedScrible : public Learner {
public:
    LiftedScrible(const BallActionSet& set, const LearnerParams& params, double growth = 1.0,
                  double move_threshold = 0.0, std::string name = "lifted")
        : params_(params), barrier_(set, params.barrier.scale, params.barrier.inner_nu), growth_(growth),
          move_threshold_(move_threshold), name_(std::move(name))
    {
        if (!(params.eta > 0.0))
            throw std::invalid_argument("LiftedScrible: eta must be > 0");
        if (!(params.delta > 0.0 && params.delta < 1.0))
            throw std::invalid_argument("LiftedScrible: delta must lie in (0,1)");
        if (!(growth >= 1.0))
            throw std::invalid_argument("LiftedScrible: growth factor must be >= 1");
        iterate_ = initial_iterate(barrier_);
        previous_ = iterate_;
        solved_eta_ = params.eta;
        estimate_sum_ = Vector::Zero(set.dimension() + 1);
    }

    std::string_view name() const override { return name_; }
    const LiftedPoint& iterate() const override { return iterate_; }
    const ConeBarrier& barrier() const override { return barrier_; }
    const LearnerParams& params() const override { return params_; }
    std::size_t normalization_violations() const override { return violations_; }

    int rate_exponent() const noexcept { return rate_exponent_; }
    double current_eta() const { return params_.eta * std::pow(growth_, rate_exponent_); }

    Vector act(SeededRng& rng) override
    {
        if (pending_)
            throw LearnerError("act: previous round has not been updated");
        const int d = barrier_.dimension();
        const Vector x = iterate_.full();
        Pending p;
        p.hessian = barrier_.eval(x).hessian;
        p.root.emplace(p.hessian);
        const Vector axis = p.root->inv_sqrt().col(d);
        p.direction = sample_sphere_orthogonal(axis, rng);
        p.step = p.root->apply(p.direction);
        Vector lifted = x + p.step;
        lifted(d) = 1.0;
        p.played = lifted.head(d);
        pending_ = std::move(p);
        return pending_->played;
    }

    RoundRecord update(double loss) override
    {
        if (!pending_)
            throw LearnerError("update: no pending round");
        if (std::abs(loss) > 1.0 + kLossSlack)
            ++violations_;
        const int d = barrier_.dimension();
        Pending& p = *pending_;

        RoundRecord rec;
        rec.round = round_;
        rec.iterate = iterate_;
        rec.direction = p.direction;
        rec.played = p.played;
        rec.loss = loss;
        rec.step_norm = local_norm(p.hessian, p.step);
        rec.estimate = (static_cast<double>(d) * loss) * p.root->solve(p.direction);
        rec.estimate_dual_norm = dual_local_norm(p.hessian, rec.estimate);

        if (round_ > 0) {
            const Vector moved = iterate_.full() - previous_.full();
            if (local_norm(p.hessian, moved) > move_threshold_)
                ++rate_exponent_;
        }
        rec.eta = current_eta();

        LiftedPoint next = iterate_;
        // a zero estimate at an unchanged rate leaves the objective, and so its minimizer, unchanged
        if (!rec.estimate.isZero(0.0) || rec.eta != solved_eta_) {
            estimate_sum_ += rec.estimate;
            FtrlObjective obj{&barrier_, rec.eta * estimate_sum_, params_.delta};
            const SolverResult res = minimize(obj, iterate_);
            next = res.point;
            rec.solver_iterations = res.iterations;
            solved_eta_ = rec.eta;
        }
        rec.next_iterate = next;
        rec.move_norm = local_norm(p.hessian, next.full() - iterate_.full());

        previous_ = iterate_;
        iterate_ = std::move(next);
        pending_.reset();
        ++round_;
        return rec;
    }

private:
    struct Pending {
        Matrix hessian;
        std::optional<HessianRoot> root;
        Vector direction;
        Vector step;
        Vector played;
    };

    LearnerParams params_;
    ConeBarrier barrier_;
    double growth_;
    double move_threshold_;
    std::string name_;
    LiftedPoint iterate_;
    LiftedPoint previous_;
    Vector estimate_sum_;
    std::optional<Pending> pending_;
    std::size_t round_ = 0;
    int rate_exponent_ = 0;
    double solved_eta_ = 0.0;
    std::size_t violations_ = 0;
};

/// SCRiBLe directly on K with the ball barrier -c log(1 - |x|^2 / D^2),
/// Dikin steps drawn from the full unit sphere of R^d.
class ClassicScrible : public Learner {
public:
    ClassicScrible(const BallActionSet& set, const LearnerParams& params)
        : params_(params), barrier_(set, params.barrier.scale, params.barrier.inner_nu)
    {
        if (!(params.eta > 0.0))
            throw std::invalid_argument("ClassicScrible: eta must be > 0");
        if (!(params.delta > 0.0 && params.delta < 1.0))
            throw std::invalid_argument("ClassicScrible: delta must lie in (0,1)");
        iterate_ = initial_iterate(barrier_);
        estimate_sum_ = Vector::Zero(set.dimension());
    }

    std::string_view name() const override { return "classic"; }
    const LiftedPoint& iterate() const override { return iterate_; }
    const ConeBarrier& barrier() const override { return barrier_; }
    const LearnerParams& params() const override { return params_; }
    std::size_t normalization_violations() const override { return violations_; }

    Vector act(SeededRng& rng) override
    {
        if (pending_)
            throw LearnerError("act: previous round has not been updated");
        Pending p;
        p.hessian = barrier_.eval_slice(iterate_.spatial()).hessian;
        p.root.emplace(p.hessian);
        p.direction = sample_sphere(barrier_.dimension(), rng);
        p.step = p.root->apply(p.direction);
        p.played = iterate_.spatial() + p.step;
        pending_ = std::move(p);
        return pending_->played;
    }

    RoundRecord update(double loss) override
    {
        if (!pending_)
            throw LearnerError("update: no pending round");
        if (std::abs(loss) > 1.0 + kLossSlack)
            ++violations_;
        const int d = barrier_.dimension();
        Pending& p = *pending_;

        RoundRecord rec;
        rec.round = round_;
        rec.iterate = iterate_;
        rec.direction = p.direction;
        rec.played = p.played;
        rec.loss = loss;
        rec.step_norm = local_norm(p.hessian, p.step);
        const Vector g = (static_cast<double>(d) * loss) * p.root->solve(p.direction);
        rec.estimate = Vector::Zero(d + 1);
        rec.estimate.head(d) = g;
        rec.estimate_dual_norm = dual_local_norm(p.hessian, g);
        rec.eta = params_.eta;

        LiftedPoint next = iterate_;
        if (!g.isZero(0.0)) {
            estimate_sum_ += g;
            FtrlObjective obj{&barrier_, params_.eta * estimate_sum_, params_.delta};
            const SolverResult res = minimize(obj, iterate_);
            next = res.point;
            rec.solver_iterations = res.iterations;
        }
        rec.next_iterate = next;
        rec.move_norm = local_norm(p.hessian, Vector(next.spatial() - iterate_.spatial()));

        iterate_ = std::move(next);
        pending_.reset();
        ++round_;
        return rec;
    }

private:
    struct Pending {
        Matrix hessian;
        std::optional<HessianRoot> root;
        Vector direction;
        Vector step;
        Vector played;
    };

    LearnerParams params_;
    ConeBarrier barrier_;
    LiftedPoint iterate_;
    Vector estimate_sum_;
    std::optional<Pending> pending_;
    std::size_t round_ = 0;
    std::size_t violations_ = 0;
};

enum class Algorithm { lifted, classic, increasing_lr };

inline std::string_view algorithm_name(Algorithm a)
{
    switch (a) {
    case Algorithm::lifted: return "lifted";
    case Algorithm::classic: return "classic";
    case Algorithm::increasing_lr: return "increasing_lr";
    }
    return "?";
}

inline Algorithm parse_algorithm(std::string_view s)
{
    if (s == "lifted")
        return Algorithm::lifted;
    if (s == "classic")
        return Algorithm::classic;
    if (s == "increasing_lr")
        return Algorithm::increasing_lr;
    throw std::invalid_argument("unknown algorithm '" + std::string(s) + "' (expected lifted, classic, increasing_lr)");
}

/// Schedule of the increasing-learning-rate baseline; unset fields take
/// growth = exp(1 / (d ln T)) and threshold = 2 d eta.
struct RateSchedule {
    std::optional<double> growth;
    std::optional<double> threshold;
};

inline std::unique_ptr<Learner> make_learner(Algorithm algorithm, const BallActionSet& set,
                                             const LearnerParams& params, const RateSchedule& schedule = {})
{
    switch (algorithm) {
    case Algorithm::lifted:
        return std::make_unique<LiftedScrible>(set, params);
    case Algorithm::classic:
        return std::make_unique<ClassicScrible>(set, params);
    case Algorithm::increasing_lr: {
        const double lnT = std::log(static_cast<double>(std::max<std::size_t>(params.horizon, 2)));
        const double growth = schedule.growth.value_or(std::exp(1.0 / (params.dimension * lnT)));
        const double threshold = schedule.threshold.value_or(2.0 * params.dimension * params.eta);
        return std::make_unique<LiftedScrible>(set, params, growth, threshold, "increasing_lr");
    }
    }
    throw std::invalid_argument("make_learner: unknown algorithm");
}

/// Played point of minimal observed loss; ties go to the earliest round.
inline Vector recommend(std::span<const RoundRecord> records)
{
    if (records.empty())
        throw std::invalid_argument("recommend: no rounds recorded");
    std::size_t best = 0;
    for (std::size_t i = 1; i < records.size(); ++i)
        if (records[i].loss < records[best].loss)
            best = i;
    return records[best].played;
}

} // namespace scrible
