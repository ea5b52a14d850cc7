#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "scrible/geometry.hpp"
#include "scrible/sampling.hpp"

namespace scrible {

/// Smallest admissible value of 1 - |x|^2 / (b D)^2 before evaluation is refused.
inline constexpr double kBoundaryGuard = 1e-14;
/// Smallest admissible Hessian eigenvalue for the inverse square root.
inline constexpr double kMinEigenvalue = 1e-14;

class BarrierDomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class IllConditionedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct BarrierEval {
    double value = 0.0;
    Vector gradient;
    Matrix hessian;
};

/// Logarithmically homogeneous barrier on the cone over a ball,
///
///     R(x, b) = c * ( -log(1 - |x|^2 / (b^2 D^2)) - 2 * inner_nu * log b ),
///
/// defined for b > 0 and |x| < b D. Its homogeneity parameter is 2 c inner_nu.
/// On the slice b = 1 it coincides with the scaled ball barrier
/// -c log(1 - |x|^2 / D^2).
class ConeBarrier {
public:
    explicit ConeBarrier(BallActionSet set, double scale = 400.0, double inner_nu = 1.0)
        : set_(set), scale_(scale), inner_nu_(inner_nu)
    {
        if (!(scale > 0.0))
            throw std::invalid_argument("ConeBarrier: scale c must be > 0, got " + std::to_string(scale));
        if (!(inner_nu >= 1.0))
            throw std::invalid_argument("ConeBarrier: inner_nu must be >= 1, got " + std::to_string(inner_nu));
    }

    const BallActionSet& set() const noexcept { return set_; }
    int dimension() const noexcept { return set_.dimension(); }
    double scale() const noexcept { return scale_; }
    double inner_nu() const noexcept { return inner_nu_; }
    double effective_nu() const noexcept { return 2.0 * scale_ * inner_nu_; }

    /// Value, gradient and Hessian at p = (x, b).
    BarrierEval eval(const Vector& p) const
    {
        const auto [b, s, u] = coordinates(p);
        const int d = dimension();
        const auto x = p.head(d);
        const double c = scale_;
        const double bD2 = b * b * set_.radius() * set_.radius();

        BarrierEval out;
        out.value = c * (-std::log1p(-s) - 2.0 * inner_nu_ * std::log(b));

        out.gradient.resize(d + 1);
        out.gradient.head(d) = (2.0 * c / (bD2 * u)) * x;
        out.gradient(d) = -c * (2.0 * s / (b * u) + 2.0 * inner_nu_ / b);

        out.hessian.resize(d + 1, d + 1);
        out.hessian.topLeftCorner(d, d) = (2.0 * c / (bD2 * u)) * Matrix::Identity(d, d)
                                         + (4.0 * c / (bD2 * bD2 * u * u)) * (x * x.transpose());
        const Vector cross = (-4.0 * c / (b * bD2 * u * u)) * x;
        out.hessian.topRightCorner(d, 1) = cross;
        out.hessian.bottomLeftCorner(1, d) = cross.transpose();
        out.hessian(d, d) = c * ((6.0 * s * u + 4.0 * s * s) / (b * b * u * u) + 2.0 * inner_nu_ / (b * b));
        return out;
    }

    double value(const Vector& p) const
    {
        const auto [b, s, u] = coordinates(p);
        (void)u;
        return scale_ * (-std::log1p(-s) - 2.0 * inner_nu_ * std::log(b));
    }

    /// R(x, 1) with its spatial gradient and Hessian (the top-left d x d block).
    BarrierEval eval_slice(const Vector& x) const
    {
        require_dimension(set_, x, "ConeBarrier::eval_slice");
        const double D2 = set_.radius() * set_.radius();
        const double s = x.squaredNorm() / D2;
        const double u = 1.0 - s;
        if (!(u > kBoundaryGuard))
            throw BarrierDomainError("barrier: |x| < D violated on the slice b = 1 (1 - |x|^2/D^2 = "
                                     + std::to_string(u) + ")");
        const double c = scale_;
        const int d = dimension();
        BarrierEval out;
        out.value = -c * std::log1p(-s);
        out.gradient = (2.0 * c / (D2 * u)) * x;
        out.hessian = (2.0 * c / (D2 * u)) * Matrix::Identity(d, d) + (4.0 * c / (D2 * D2 * u * u)) * (x * x.transpose());
        return out;
    }

    double slice_value(const Vector& x) const { return eval_slice(x).value; }

    /// True iff p lies strictly inside the evaluable region of the cone.
    bool interior(const Vector& p) const
    {
        if (p.size() != dimension() + 1)
            return false;
        const double b = p(dimension());
        if (!(b > 0.0))
            return false;
        const double s = p.head(dimension()).squaredNorm() / (b * b * set_.radius() * set_.radius());
        return 1.0 - s > kBoundaryGuard;
    }

private:
    struct Coords {
        double b, s, u;
    };

    Coords coordinates(const Vector& p) const
    {
        const int d = dimension();
        if (p.size() != d + 1)
            throw std::invalid_argument("barrier: expected point of length " + std::to_string(d + 1) + ", got "
                                        + std::to_string(p.size()));
        const double b = p(d);
        if (!(b > 0.0))
            throw BarrierDomainError("barrier: b > 0 violated (b = " + std::to_string(b) + ")");
        const double s = p.head(d).squaredNorm() / (b * b * set_.radius() * set_.radius());
        const double u = 1.0 - s;
        if (!(u > kBoundaryGuard))
            throw BarrierDomainError("barrier: |x| < b D violated (1 - |x|^2/(b D)^2 = " + std::to_string(u) + ")");
        return {b, s, u};
    }

    BallActionSet set_;
    double scale_;
    double inner_nu_;
};

/// Spectral factorization of a Hessian giving H^{-1/2}, its action and its inverse action.
class HessianRoot {
public:
    explicit HessianRoot(const Matrix& hessian)
    {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(hessian);
        if (eig.info() != Eigen::Success)
            throw IllConditionedError("inv_sqrt_hessian: eigendecomposition failed");
        const double lo = eig.eigenvalues().minCoeff();
        if (!(lo >= kMinEigenvalue))
            throw IllConditionedError("inv_sqrt_hessian: Hessian eigenvalue " + std::to_string(lo)
                                      + " below 1e-14; point is numerically on the boundary");
        basis_ = eig.eigenvectors();
        root_ = eig.eigenvalues().cwiseSqrt();
        inv_sqrt_ = basis_ * root_.cwiseInverse().asDiagonal() * basis_.transpose();
        inv_sqrt_ = 0.5 * (inv_sqrt_ + inv_sqrt_.transpose());
    }

    /// A = H^{-1/2}, symmetric.
    const Matrix& inv_sqrt() const noexcept { return inv_sqrt_; }

    Vector apply(const Vector& v) const { return inv_sqrt_ * v; }

    /// Solves A z = v through the eigenbasis.
    Vector solve(const Vector& v) const { return basis_ * root_.cwiseProduct(basis_.transpose() * v); }

private:
    Matrix basis_;
    Vector root_;
    Matrix inv_sqrt_;
};

inline HessianRoot hessian_root(const ConeBarrier& barrier, const Vector& p)
{
    return HessianRoot(barrier.eval(p).hessian);
}

inline Matrix inv_sqrt_hessian(const ConeBarrier& barrier, const Vector& p)
{
    return hessian_root(barrier, p).inv_sqrt();
}

inline double local_norm(const Matrix& hessian, const Vector& h)
{
    return std::sqrt(std::max(0.0, h.dot(hessian * h)));
}

inline double dual_local_norm(const Matrix& hessian, const Vector& h)
{
    const Vector z = hessian.ldlt().solve(h);
    return std::sqrt(std::max(0.0, h.dot(z)));
}

inline double local_norm(const ConeBarrier& barrier, const Vector& p, const Vector& h)
{
    return local_norm(barrier.eval(p).hessian, h);
}

inline double dual_local_norm(const ConeBarrier& barrier, const Vector& p, const Vector& h)
{
    return dual_local_norm(barrier.eval(p).hessian, h);
}

/// Relative residuals of the normal-barrier identities at one point.
struct ValidationReport {
    double homogeneity = 0.0;      ///< |R(t p) - R(p) + nu ln t| / (1 + |R(p)|)
    double self_norm = 0.0;        ///< | |p|_p^2 - nu | / nu
    double hessian_identity = 0.0; ///< |H p + grad| / (1 + |grad|)
    double gradient_bound = 0.0;   ///< max_h (|grad.h| - sqrt(nu) |h|_p) / (sqrt(nu) |h|_p), should be <= 0

    bool passed(double tolerance) const
    {
        return homogeneity <= tolerance && self_norm <= tolerance && hessian_identity <= tolerance
            && gradient_bound <= tolerance;
    }
};

inline ValidationReport validate_normal_barrier(const ConeBarrier& barrier, const Vector& p, double t, SeededRng& rng,
                                                int directions = 10)
{
    if (!(t > 0.0))
        throw std::invalid_argument("validate_normal_barrier: t must be > 0");
    const double nu = barrier.effective_nu();
    const BarrierEval at = barrier.eval(p);
    const double scaled = barrier.value(t * p);

    ValidationReport r;
    r.homogeneity = std::abs(scaled - at.value + nu * std::log(t)) / (1.0 + std::abs(at.value));
    r.self_norm = std::abs(p.dot(at.hessian * p) - nu) / nu;
    r.hessian_identity = (at.hessian * p + at.gradient).norm() / (1.0 + at.gradient.norm());
    r.gradient_bound = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < directions; ++i) {
        const Vector h = sample_sphere(p.size(), rng);
        const double bound = std::sqrt(nu) * local_norm(at.hessian, h);
        r.gradient_bound = std::max(r.gradient_bound, (std::abs(at.gradient.dot(h)) - bound) / bound);
    }
    return r;
}

} // namespace scrible
