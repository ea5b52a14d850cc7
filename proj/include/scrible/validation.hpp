#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "scrible/barrier.hpp"
#include "scrible/sampling.hpp"

namespace scrible {

struct CheckRow {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool ok = false;
};

/// Interior point of the cone: b in [0.5, 2], |x| / (b D) in [0, max_fraction].
inline Vector random_cone_point(const ConeBarrier& barrier, SeededRng& rng, double max_fraction = 0.95)
{
    const int d = barrier.dimension();
    const double b = rng.uniform(0.5, 2.0);
    const double r = max_fraction * rng.uniform() * b * barrier.set().radius();
    Vector p(d + 1);
    p.head(d) = r * sample_sphere(d, rng);
    p(d) = b;
    return p;
}

/// Relative error of the analytic gradient and Hessian against central differences.
struct FiniteDifferenceError {
    double gradient = 0.0;
    double hessian = 0.0;
};

inline FiniteDifferenceError finite_difference_error(const ConeBarrier& barrier, const Vector& p, double step = 1e-5)
{
    const BarrierEval at = barrier.eval(p);
    const Eigen::Index n = p.size();
    Vector fd_grad(n);
    Matrix fd_hess(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Vector hi = p, lo = p;
        hi(i) += step;
        lo(i) -= step;
        fd_grad(i) = (barrier.value(hi) - barrier.value(lo)) / (2.0 * step);
        fd_hess.col(i) = (barrier.eval(hi).gradient - barrier.eval(lo).gradient) / (2.0 * step);
    }
    return {(fd_grad - at.gradient).norm() / std::max(1.0, at.gradient.norm()),
            (fd_hess - at.hessian).norm() / std::max(1.0, at.hessian.norm())};
}

/// Normal-barrier identities, derivative accuracy, H^{-1/2} and Dikin containment at `trials` random points.
inline std::vector<CheckRow> barrier_suite(const ConeBarrier& barrier, SeededRng& rng, int trials)
{
    double homog = 0, self = 0, ident = 0, bound = -1, grad = 0, hess = 0, root = 0, dikin = -1;
    const int d = barrier.dimension();
    for (int i = 0; i < trials; ++i) {
        const Vector p = random_cone_point(barrier, rng);
        const double t = rng.uniform(0.5, 2.0);
        const ValidationReport r = validate_normal_barrier(barrier, p, t, rng);
        homog = std::max(homog, r.homogeneity);
        self = std::max(self, r.self_norm);
        ident = std::max(ident, r.hessian_identity);
        bound = std::max(bound, r.gradient_bound);

        const FiniteDifferenceError fd = finite_difference_error(barrier, p);
        grad = std::max(grad, fd.gradient);
        hess = std::max(hess, fd.hessian);

        const Matrix H = barrier.eval(p).hessian;
        const Matrix A = inv_sqrt_hessian(barrier, p);
        const Matrix I = Matrix::Identity(d + 1, d + 1);
        root = std::max(root, (A * H * A - I).cwiseAbs().maxCoeff());

        // Dikin ellipsoid on the slice: unit local-norm step with zero last coordinate
        Vector x(d + 1);
        x.head(d) = p.head(d) / p(d);
        x(d) = 1.0;
        Vector h = Vector::Zero(d + 1);
        h.head(d) = sample_sphere(d, rng);
        h /= local_norm(barrier.eval(x).hessian, h);
        dikin = std::max(dikin, (x + h).head(d).norm() - barrier.set().radius());
    }
    return {
        {"homogeneity R(tz) = R(z) - nu ln t", homog, 1e-8, homog <= 1e-8},
        {"self norm |z|_z^2 = nu", self, 1e-8, self <= 1e-8},
        {"hessian identity H z = -grad", ident, 1e-8, ident <= 1e-8},
        {"gradient bound |grad.h| <= sqrt(nu) |h|_z", bound, 1e-8, bound <= 1e-8},
        {"gradient vs finite differences", grad, 1e-5, grad <= 1e-5},
        {"hessian vs finite differences", hess, 1e-5, hess <= 1e-5},
        {"inverse square root |A H A - I|_max", root, 1e-8, root <= 1e-8},
        {"dikin ellipsoid containment excess", dikin, 1e-9, dikin <= 1e-9},
    };
}

/// Kolmogorov-Smirnov statistic of samples against the uniform law on [lo, hi].
inline double ks_uniform(std::vector<double> xs, double lo, double hi)
{
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double stat = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double F = std::clamp((xs[i] - lo) / (hi - lo), 0.0, 1.0);
        stat = std::max({stat, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
    }
    return stat;
}

/// Statistical checks of the constrained-sphere sampler.
inline std::vector<CheckRow> sampler_suite(SeededRng& rng, int draws = 100000, int d = 5)
{
    const Eigen::Index n = d + 1;
    const Vector v = sample_sphere(n, rng) * rng.uniform(0.5, 3.0);

    // orthonormal pair spanning part of v^perp
    Vector u1 = sample_sphere_orthogonal(v, rng);
    Vector u2 = rng.gaussian_vector(n);
    u2 -= (u2.dot(v) / v.squaredNorm()) * v;
    u2 -= u2.dot(u1) * u1;
    u2.normalize();

    double unit = 0, ortho = 0;
    Vector mean = Vector::Zero(n);
    std::vector<double> angles;
    angles.reserve(static_cast<std::size_t>(draws));
    for (int i = 0; i < draws; ++i) {
        const Vector mu = sample_sphere_orthogonal(v, rng);
        unit = std::max(unit, std::abs(mu.norm() - 1.0));
        ortho = std::max(ortho, std::abs(mu.dot(v)) / v.norm());
        mean += mu;
        angles.push_back(std::atan2(mu.dot(u2), mu.dot(u1)));
    }
    mean /= static_cast<double>(draws);
    const double mean_max = mean.cwiseAbs().maxCoeff();
    const double mean_tol = 4.0 / std::sqrt(static_cast<double>(draws));
    const double ks = ks_uniform(std::move(angles), -std::numbers::pi, std::numbers::pi);

    // planar case: circle in the first two axes of R^3
    const Vector e3 = Vector::Unit(3, 2);
    Matrix cov = Matrix::Zero(3, 3);
    for (int i = 0; i < draws; ++i) {
        const Vector mu = sample_sphere_orthogonal(e3, rng);
        cov += mu * mu.transpose();
    }
    cov /= static_cast<double>(draws);
    Matrix expected = Matrix::Zero(3, 3);
    expected(0, 0) = expected(1, 1) = 0.5;
    const double cov_err = (cov - expected).cwiseAbs().maxCoeff();

    return {
        {"sampler unit norm", unit, 1e-12, unit <= 1e-12},
        {"sampler orthogonality / |v|", ortho, 1e-10, ortho <= 1e-10},
        {"sampler per-axis mean", mean_max, mean_tol, mean_max <= mean_tol},
        {"sampler planar angle KS statistic", ks, 0.01, ks <= 0.01},
        {"sampler circle covariance", cov_err, 0.02, cov_err <= 0.02},
    };
}

} // namespace scrible
