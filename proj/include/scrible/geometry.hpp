#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace scrible {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Absolute slack on the norm comparison in membership tests.
inline constexpr double kMembershipTolerance = 1e-12;

/// Closed Euclidean ball of radius D in R^d, centered at the origin.
class BallActionSet {
public:
    BallActionSet(int dimension, double radius) : dim_(dimension), radius_(radius)
    {
        if (dimension < 1)
            throw std::invalid_argument("BallActionSet: dimension must be >= 1, got " + std::to_string(dimension));
        if (!(radius >= 1.0))
            throw std::invalid_argument("BallActionSet: radius must be >= 1 (the set must contain the unit ball), got "
                                        + std::to_string(radius));
    }

    int dimension() const noexcept { return dim_; }
    double radius() const noexcept { return radius_; }

private:
    int dim_;
    double radius_;
};

inline void require_dimension(const BallActionSet& set, const Vector& x, const char* where)
{
    if (x.size() != set.dimension())
        throw std::invalid_argument(std::string(where) + ": expected vector of length " + std::to_string(set.dimension())
                                    + ", got " + std::to_string(x.size()));
}

inline bool contains(const BallActionSet& set, const Vector& x, double tolerance = kMembershipTolerance)
{
    require_dimension(set, x, "contains");
    return x.norm() <= set.radius() + tolerance;
}

/// K_delta = (1 - delta) K.
class ShrunkSet {
public:
    ShrunkSet(BallActionSet parent, double delta) : parent_(parent), delta_(delta)
    {
        if (!(delta > 0.0 && delta < 1.0))
            throw std::invalid_argument("ShrunkSet: delta must lie in (0,1), got " + std::to_string(delta));
    }

    const BallActionSet& parent() const noexcept { return parent_; }
    double delta() const noexcept { return delta_; }
    double radius() const noexcept { return (1.0 - delta_) * parent_.radius(); }

    bool contains(const Vector& x, double tolerance = kMembershipTolerance) const
    {
        require_dimension(parent_, x, "ShrunkSet::contains");
        return x.norm() <= radius() + tolerance;
    }

private:
    BallActionSet parent_;
    double delta_;
};

/// A point (x, 1) of the slice b = 1 of the cone over K.
class LiftedPoint {
public:
    LiftedPoint() = default;
    explicit LiftedPoint(Vector spatial) : spatial_(std::move(spatial)) {}

    const Vector& spatial() const noexcept { return spatial_; }
    Vector& spatial() noexcept { return spatial_; }
    static constexpr double last() noexcept { return 1.0; }
    Eigen::Index dimension() const noexcept { return spatial_.size(); }

    /// The full (d+1)-vector.
    Vector full() const
    {
        Vector p(spatial_.size() + 1);
        p.head(spatial_.size()) = spatial_;
        p(spatial_.size()) = 1.0;
        return p;
    }

    friend bool operator==(const LiftedPoint& a, const LiftedPoint& b)
    {
        return a.spatial_.size() == b.spatial_.size() && a.spatial_ == b.spatial_;
    }

private:
    Vector spatial_;
};

inline LiftedPoint lift(const Vector& x) { return LiftedPoint(x); }

inline Vector drop_lift(const LiftedPoint& p) { return p.spatial(); }

/// argmin_{x in K} theta_sum . x; the center when theta_sum = 0.
inline Vector linear_optimum(const Vector& theta_sum, const BallActionSet& set)
{
    require_dimension(set, theta_sum, "linear_optimum");
    const double n = theta_sum.norm();
    if (n == 0.0)
        return Vector::Zero(set.dimension());
    return (-set.radius() / n) * theta_sum;
}

} // namespace scrible
