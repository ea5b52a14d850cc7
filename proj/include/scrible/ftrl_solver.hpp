#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "scrible/barrier.hpp"
#include "scrible/geometry.hpp"

namespace scrible {

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

struct SolverOptions {
    int max_iterations = 200;
    double gradient_tolerance = 1e-8; ///< relative to 1 + |linear_term|
    double armijo = 1e-4;
    int max_halvings = 60;
    double boundary_pullback = 1e-9;  ///< interior iterates are kept within radius (1 - pullback) rho
};

/// eta * (sum of estimates) . x' + R(x') over the slice K'_delta.
struct FtrlObjective {
    const ConeBarrier* barrier = nullptr;
    Vector linear_term; ///< length d + 1 (lifted) or d; only the spatial part affects the minimizer
    double delta = 0.5;

    double radius() const { return (1.0 - delta) * barrier->set().radius(); }
    Vector spatial_linear() const { return linear_term.head(barrier->dimension()); }

    double value(const Vector& x) const
    {
        const Eigen::Index d = barrier->dimension();
        double v = linear_term.head(d).dot(x) + barrier->slice_value(x);
        if (linear_term.size() == d + 1)
            v += linear_term(d);
        return v;
    }
};

struct SolverResult {
    LiftedPoint point;
    int iterations = 0;
    bool on_boundary = false;
    double residual = 0.0; ///< stationarity (interior) or tangential KKT residual (boundary)
    double multiplier = 0.0;
};

namespace detail {

/// Minimizer of the objective on the sphere |x| = rho. The barrier is constant on
/// that sphere, so only the linear part matters.
inline Vector sphere_minimizer(const Vector& ell, double rho)
{
    const double n = ell.norm();
    return (-rho / n) * ell;
}

/// Unconstrained minimizer of ell.x - c log(1 - |x|^2 / D^2): the barrier is radial, so
/// x = -r ell / |ell| with r the positive root of |ell| r^2 + 2 c r - |ell| D^2 = 0.
inline Vector radial_minimizer(const Vector& ell, double c, double D)
{
    const double n = ell.norm();
    if (n == 0.0)
        return Vector::Zero(ell.size());
    const double r = n * D * D / (c + std::sqrt(c * c + n * n * D * D));
    return (-r / n) * ell;
}

} // namespace detail

/// Damped Newton on the slice with single-ball active-set handling.
inline SolverResult minimize(const FtrlObjective& obj, const LiftedPoint& warm_start, const SolverOptions& opt = {})
{
    if (obj.barrier == nullptr)
        throw std::invalid_argument("minimize: objective has no barrier");
    const ConeBarrier& barrier = *obj.barrier;
    const Eigen::Index d = barrier.dimension();
    if (obj.linear_term.size() != d && obj.linear_term.size() != d + 1)
        throw std::invalid_argument("minimize: linear term has wrong length");
    if (!(obj.delta > 0.0 && obj.delta < 1.0))
        throw std::invalid_argument("minimize: delta must lie in (0,1)");
    if (warm_start.dimension() != d)
        throw std::invalid_argument("minimize: warm start has wrong dimension");

    const double rho = obj.radius();
    const double inner = rho * (1.0 - opt.boundary_pullback);
    const Vector ell = obj.spatial_linear();
    const double ell_norm = ell.norm();
    const double tol = opt.gradient_tolerance * (1.0 + ell_norm);

    Vector x = warm_start.spatial();
    const double start_norm = x.norm();
    if (start_norm > rho * (1.0 + 1e-12))
        throw std::invalid_argument("minimize: warm start lies outside K_delta");
    if (start_norm > inner)
        x *= inner / start_norm;

    // far from the warm start (large steps of the rate or the estimate sum) the
    // damped phase of Newton is slow; seed with the radial solution when it is better
    Vector seed = detail::radial_minimizer(ell, barrier.scale(), barrier.set().radius());
    if (seed.norm() > inner)
        seed *= inner / seed.norm();
    if (obj.value(seed) < obj.value(x))
        x = seed;

    double residual = 0.0;
    for (int it = 0; it < opt.max_iterations; ++it) {
        const BarrierEval ev = barrier.eval_slice(x);
        const Vector grad = ell + ev.gradient;
        residual = grad.norm();
        if (residual <= tol)
            return {LiftedPoint(x), it, false, residual, 0.0};

        const Vector step = -ev.hessian.llt().solve(grad);
        const double slope = grad.dot(step);

        double t = 1.0;
        Vector trial = x + step;
        if (trial.norm() > rho && ell_norm > 0.0) {
            const Vector xb = detail::sphere_minimizer(ell, rho);
            const Vector gb = ell + barrier.eval_slice(xb).gradient;
            const double lambda = -gb.dot(xb) / rho;
            const double kkt = (gb + (lambda / rho) * xb).norm();
            if (lambda >= 0.0 && kkt <= tol)
                return {LiftedPoint(xb), it + 1, true, kkt, lambda};
            // optimum is interior: cap the step inside the pulled-back ball
            const double a = step.squaredNorm();
            const double b = x.dot(step);
            const double c = x.squaredNorm() - inner * inner;
            const double tmax = (-b + std::sqrt(b * b - a * c)) / a;
            t = std::min(1.0, tmax);
            trial = x + t * step;
        }

        if (-slope <= 1e-20 * (1.0 + std::abs(ev.value))) {
            // newton decrement at roundoff level; line search cannot resolve descent
            x = trial;
            continue;
        }

        const double f0 = obj.value(x);
        bool accepted = false;
        for (int h = 0; h < opt.max_halvings; ++h) {
            if (barrier.interior(LiftedPoint(trial).full())) {
                const double f1 = obj.value(trial);
                if (f1 <= f0 + opt.armijo * t * slope) {
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
            trial = x + t * step;
        }
        if (!accepted)
            throw ConvergenceError("minimize: line search failed (residual " + std::to_string(residual) + ")",
                                   residual);
        x = trial;
    }

    const Vector grad = ell + barrier.eval_slice(x).gradient;
    residual = grad.norm();
    if (residual <= tol)
        return {LiftedPoint(x), opt.max_iterations, false, residual, 0.0};
    throw ConvergenceError("minimize: no convergence in " + std::to_string(opt.max_iterations)
                               + " damped Newton steps (residual " + std::to_string(residual) + ")",
                           residual);
}

/// Initial iterate argmin_{x' in K'_delta} R(x').
inline LiftedPoint initial_iterate(const ConeBarrier& barrier) { return LiftedPoint(Vector::Zero(barrier.dimension())); }

} // namespace scrible
