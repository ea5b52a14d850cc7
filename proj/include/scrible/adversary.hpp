#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "scrible/geometry.hpp"
#include "scrible/sampling.hpp"

namespace scrible {

/// Oblivious linear loss vectors theta_1..theta_T, fixed before play.
struct LinearSequence {
    std::vector<Vector> theta;
    double norm_cap = 0.0;

    std::size_t size() const noexcept { return theta.size(); }
};

/// Uniform direction scaled by a radius uniform in [0, G].
inline LinearSequence gen_oblivious(std::size_t T, int d, double G, SeededRng& rng)
{
    if (T < 1)
        throw std::invalid_argument("gen_oblivious: T must be >= 1");
    if (d < 1)
        throw std::invalid_argument("gen_oblivious: d must be >= 1");
    if (!(G >= 0.0))
        throw std::invalid_argument("gen_oblivious: G must be >= 0");
    LinearSequence seq;
    seq.norm_cap = G;
    seq.theta.reserve(T);
    for (std::size_t t = 0; t < T; ++t) {
        const Vector dir = sample_sphere(d, rng);
        const double r = G * rng.uniform();
        seq.theta.push_back(r * dir);
    }
    return seq;
}

enum class PerturbationKind { zero, sinusoidal, constant_sign, adversarial_sign };

inline std::string_view perturbation_name(PerturbationKind k)
{
    switch (k) {
    case PerturbationKind::zero: return "zero";
    case PerturbationKind::sinusoidal: return "sinusoidal";
    case PerturbationKind::constant_sign: return "constant-sign";
    case PerturbationKind::adversarial_sign: return "adversarial-sign";
    }
    return "?";
}

inline PerturbationKind parse_perturbation(std::string_view s)
{
    if (s == "zero")
        return PerturbationKind::zero;
    if (s == "sinusoidal")
        return PerturbationKind::sinusoidal;
    if (s == "constant-sign")
        return PerturbationKind::constant_sign;
    if (s == "adversarial-sign")
        return PerturbationKind::adversarial_sign;
    throw std::invalid_argument("unknown perturbation '" + std::string(s)
                                + "' (expected zero, sinusoidal, constant-sign, adversarial-sign)");
}

/// sigma(y), bounded by epsilon in absolute value on K.
struct PerturbationRule {
    PerturbationKind kind = PerturbationKind::zero;
    double epsilon = 0.0;
    Vector direction; ///< l, used by the sinusoidal rule

    static PerturbationRule zero() { return {}; }

    static PerturbationRule constant_sign(double epsilon)
    {
        check_epsilon(epsilon);
        return {PerturbationKind::constant_sign, epsilon, {}};
    }

    static PerturbationRule adversarial_sign(double epsilon)
    {
        check_epsilon(epsilon);
        return {PerturbationKind::adversarial_sign, epsilon, {}};
    }

    static PerturbationRule sinusoidal(double epsilon, Vector direction)
    {
        check_epsilon(epsilon);
        return {PerturbationKind::sinusoidal, epsilon, std::move(direction)};
    }

    /// l with entries uniform in [-1/(D sqrt d), 1/(D sqrt d)], so |y.l| <= 1 on K.
    static PerturbationRule sinusoidal(double epsilon, const BallActionSet& set, SeededRng& rng)
    {
        const int d = set.dimension();
        const double bound = 1.0 / (set.radius() * std::sqrt(static_cast<double>(d)));
        Vector l(d);
        for (int i = 0; i < d; ++i)
            l(i) = rng.uniform(-bound, bound);
        return sinusoidal(epsilon, std::move(l));
    }

    static PerturbationRule make(PerturbationKind kind, double epsilon, const BallActionSet& set, SeededRng& rng)
    {
        switch (kind) {
        case PerturbationKind::zero: return zero();
        case PerturbationKind::sinusoidal: return sinusoidal(epsilon, set, rng);
        case PerturbationKind::constant_sign: return constant_sign(epsilon);
        case PerturbationKind::adversarial_sign: return adversarial_sign(epsilon);
        }
        throw std::invalid_argument("PerturbationRule::make: unknown kind");
    }

private:
    static void check_epsilon(double epsilon)
    {
        if (!(epsilon >= 0.0 && epsilon < 1.0))
            throw std::invalid_argument("perturbation: epsilon must lie in [0,1), got " + std::to_string(epsilon));
    }
};

inline double perturb(const PerturbationRule& rule, const Vector& y, const Vector& theta)
{
    switch (rule.kind) {
    case PerturbationKind::zero:
        return 0.0;
    case PerturbationKind::sinusoidal:
        return rule.epsilon * std::sin(y.dot(rule.direction) * std::numbers::pi);
    case PerturbationKind::constant_sign:
        return rule.epsilon;
    case PerturbationKind::adversarial_sign: {
        // reference point is the center of K
        const double s = theta.dot(y);
        return s > 0.0 ? rule.epsilon : (s < 0.0 ? -rule.epsilon : 0.0);
    }
    }
    return 0.0;
}

/// The epsilon-approximately linear losses f_t(y) = theta_t . y + sigma(y).
class LossSequence {
public:
    LossSequence(LinearSequence linear, PerturbationRule rule) : linear_(std::move(linear)), rule_(std::move(rule)) {}

    const LinearSequence& linear() const noexcept { return linear_; }
    const PerturbationRule& rule() const noexcept { return rule_; }
    std::size_t horizon() const noexcept { return linear_.size(); }

    /// f_t(y) for zero-based round t.
    double loss(std::size_t t, const Vector& y) const
    {
        if (t >= linear_.size())
            throw std::invalid_argument("loss: round " + std::to_string(t) + " out of range [0, "
                                        + std::to_string(linear_.size()) + ")");
        const Vector& theta = linear_.theta[t];
        if (theta.size() != y.size())
            throw std::invalid_argument("loss: dimension mismatch");
        return theta.dot(y) + perturb(rule_, y, theta);
    }

private:
    LinearSequence linear_;
    PerturbationRule rule_;
};

/// Black-box function equal to epsilon everywhere except -epsilon at one hidden point.
///
/// The hidden point is chosen only when the gap is evaluated, away from every
/// queried point, so no algorithm can ever observe it.
class SpikeOracle {
public:
    SpikeOracle(BallActionSet set, double epsilon) : set_(set), epsilon_(epsilon)
    {
        if (!(epsilon >= 0.0 && epsilon < 1.0))
            throw std::invalid_argument("SpikeOracle: epsilon must lie in [0,1)");
    }

    double epsilon() const noexcept { return epsilon_; }
    const std::vector<Vector>& queries() const noexcept { return log_; }
    const std::optional<Vector>& hidden_point() const noexcept { return hidden_; }

    double query(const Vector& x)
    {
        require_dimension(set_, x, "SpikeOracle::query");
        log_.push_back(x);
        return value(x);
    }

    /// f(x_hat) - min_x f(x), resolving the hidden point if needed.
    double gap(const Vector& x_hat, SeededRng& rng)
    {
        require_dimension(set_, x_hat, "SpikeOracle::gap");
        if (!hidden_) {
            for (;;) {
                Vector z = sample_ball(set_.dimension(), set_.radius(), rng);
                if (!near(z, x_hat) && std::none_of(log_.begin(), log_.end(), [&](const Vector& q) { return near(z, q); })) {
                    hidden_ = std::move(z);
                    break;
                }
            }
        }
        return value(x_hat) - value(*hidden_);
    }

    /// The function itself; before the hidden point exists every point evaluates to epsilon.
    double value(const Vector& x) const { return hidden_ && near(x, *hidden_) ? -epsilon_ : epsilon_; }

private:
    static bool near(const Vector& a, const Vector& b) { return (a - b).norm() <= 1e-12; }

    BallActionSet set_;
    double epsilon_;
    std::vector<Vector> log_;
    std::optional<Vector> hidden_;
};

} // namespace scrible
