#include <gtest/gtest.h>

#include "scrible/geometry.hpp"
#include "scrible/sampling.hpp"

using namespace scrible;

TEST(BallActionSet, RejectsInvalidShape)
{
    EXPECT_THROW(BallActionSet(0, 5.0), std::invalid_argument);
    EXPECT_THROW(BallActionSet(3, 0.5), std::invalid_argument);
    EXPECT_NO_THROW(BallActionSet(1, 1.0));
}

TEST(Contains, CenterBoundaryAndOutside)
{
    const BallActionSet K(4, 5.0);
    EXPECT_TRUE(contains(K, Vector::Zero(4)));
    Vector x = Vector::Zero(4);
    x(0) = 5.0;
    EXPECT_TRUE(contains(K, x));
    x(0) = 5.0 + 1e-6;
    EXPECT_FALSE(contains(K, x));
}

TEST(Contains, DimensionMismatchThrows)
{
    const BallActionSet K(3, 5.0);
    EXPECT_THROW(contains(K, Vector::Zero(2)), std::invalid_argument);
}

TEST(ShrunkSet, MembershipMatchesShrunkRadius)
{
    const BallActionSet K(3, 5.0);
    const ShrunkSet Kd(K, 0.2);
    SeededRng rng(11);
    for (int i = 0; i < 1000; ++i) {
        const Vector dir = sample_sphere(3, rng);
        const double r = rng.uniform(0.0, 6.0);
        const Vector x = r * dir;
        if (x.norm() <= 4.0)
            EXPECT_TRUE(Kd.contains(x));
        else if (x.norm() > 4.0 + 1e-12)
            EXPECT_FALSE(Kd.contains(x));
    }
    EXPECT_THROW(ShrunkSet(K, 0.0), std::invalid_argument);
    EXPECT_THROW(ShrunkSet(K, 1.0), std::invalid_argument);
}

TEST(Lift, AppendsUnitCoordinate)
{
    const LiftedPoint a = lift(Vector::Zero(2));
    EXPECT_EQ(a.full(), (Vector(3) << 0, 0, 1).finished());
    const LiftedPoint b = lift((Vector(2) << 3, 4).finished());
    EXPECT_EQ(b.full(), (Vector(3) << 3, 4, 1).finished());
    EXPECT_EQ(LiftedPoint::last(), 1.0);
}

TEST(Lift, DropLiftRoundTrip)
{
    SeededRng rng(3);
    for (int i = 0; i < 100; ++i) {
        const Vector x = rng.gaussian_vector(1 + i % 7) * 10.0;
        EXPECT_EQ(drop_lift(lift(x)), x);
    }
}

TEST(LinearOptimum, Examples)
{
    const BallActionSet K5(2, 5.0);
    EXPECT_EQ(linear_optimum((Vector(2) << 1, 0).finished(), K5), (Vector(2) << -5, 0).finished());
    EXPECT_EQ(linear_optimum(Vector::Zero(2), K5), Vector::Zero(2));
    const BallActionSet K1(2, 1.0);
    const Vector x = linear_optimum((Vector(2) << 3, 4).finished(), K1);
    EXPECT_NEAR(x(0), -0.6, 1e-15);
    EXPECT_NEAR(x(1), -0.8, 1e-15);
}

TEST(LinearOptimum, BeatsRandomFeasiblePoints)
{
    const BallActionSet K(5, 5.0);
    SeededRng rng(7);
    for (int rep = 0; rep < 10; ++rep) {
        const Vector s = rng.gaussian_vector(5);
        const Vector best = linear_optimum(s, K);
        EXPECT_TRUE(contains(K, best));
        for (int i = 0; i < 1000; ++i) {
            const Vector x = sample_ball(5, 5.0, rng);
            EXPECT_LE(s.dot(best), s.dot(x) + 1e-12);
        }
    }
}
