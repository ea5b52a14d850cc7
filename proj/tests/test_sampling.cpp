#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "scrible/sampling.hpp"
#include "scrible/validation.hpp"

using namespace scrible;

TEST(SeededRng, EqualSeedsGiveEqualStreams)
{
    SeededRng a(42), b(42), c(43);
    for (int i = 0; i < 1000; ++i) {
        const double x = a.normal();
        EXPECT_EQ(x, b.normal());
        if (i == 0)
            EXPECT_NE(x, c.normal());
    }
}

TEST(SeededRng, SubstreamsAreDeterministicAndDistinct)
{
    const SeededRng root(9);
    SeededRng s0 = root.substream(0), s0b = root.substream(0), s1 = root.substream(1);
    EXPECT_EQ(s0.next_u64(), s0b.next_u64());
    EXPECT_NE(root.substream(0).next_u64(), s1.next_u64());
}

TEST(SeededRng, UniformInUnitInterval)
{
    SeededRng rng(1);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / 100000, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / 100000));
}

TEST(SampleSphereOrthogonal, BasisVectorComplement)
{
    SeededRng rng(5);
    const Vector e = Vector::Unit(6, 5);
    for (int i = 0; i < 1000; ++i) {
        const Vector mu = sample_sphere_orthogonal(e, rng);
        EXPECT_NEAR(mu.norm(), 1.0, 1e-12);
        EXPECT_LE(std::abs(mu(5)), 1e-10);
    }
}

TEST(SampleSphereOrthogonal, RejectsZeroAndTinyAmbientSpace)
{
    SeededRng rng(5);
    EXPECT_THROW(sample_sphere_orthogonal(Vector::Zero(3), rng), std::invalid_argument);
    EXPECT_THROW(sample_sphere_orthogonal(Vector::Ones(1), rng), std::invalid_argument);
}

TEST(SampleSphereOrthogonal, ExactConstraintsForArbitraryV)
{
    SeededRng rng(17);
    for (int i = 0; i < 2000; ++i) {
        const Vector v = rng.gaussian_vector(2 + i % 6) * std::pow(10.0, rng.uniform(-3.0, 3.0));
        const Vector mu = sample_sphere_orthogonal(v, rng);
        ASSERT_NEAR(mu.norm(), 1.0, 1e-12);
        ASSERT_LE(std::abs(mu.dot(v)), 1e-10 * v.norm());
    }
}

TEST(SampleSphereOrthogonal, ZeroMeanAndCircleCovariance)
{
    SeededRng rng(21);
    constexpr int n = 100000;
    const Vector e3 = Vector::Unit(3, 2);
    Vector mean = Vector::Zero(3);
    Matrix cov = Matrix::Zero(3, 3);
    for (int i = 0; i < n; ++i) {
        const Vector mu = sample_sphere_orthogonal(e3, rng);
        mean += mu;
        cov += mu * mu.transpose();
    }
    mean /= n;
    cov /= n;
    for (int i = 0; i < 3; ++i)
        EXPECT_LE(std::abs(mean(i)), 4.0 / std::sqrt(double(n)));
    EXPECT_NEAR(cov(0, 0), 0.5, 0.02);
    EXPECT_NEAR(cov(1, 1), 0.5, 0.02);
    EXPECT_NEAR(cov(2, 2), 0.0, 1e-20);
    EXPECT_NEAR(cov(0, 1), 0.0, 0.02);
}

TEST(SampleSphereOrthogonal, PlanarAngleIsUniform)
{
    SeededRng rng(23);
    const Vector v = (Vector(4) << 1, -2, 0.5, 3).finished();
    Vector u1 = sample_sphere_orthogonal(v, rng);
    Vector u2 = sample_sphere_orthogonal(v, rng);
    u2 -= u2.dot(u1) * u1;
    u2.normalize();
    std::vector<double> angles;
    for (int i = 0; i < 100000; ++i) {
        const Vector mu = sample_sphere_orthogonal(v, rng);
        angles.push_back(std::atan2(mu.dot(u2), mu.dot(u1)));
    }
    EXPECT_LE(ks_uniform(angles, -std::numbers::pi, std::numbers::pi), 0.01);
}

TEST(KsUniform, DetectsNonUniformData)
{
    std::vector<double> skewed;
    for (int i = 0; i < 1000; ++i)
        skewed.push_back(0.25 * i / 1000.0);
    EXPECT_GT(ks_uniform(skewed, 0.0, 1.0), 0.7);
}

TEST(SampleBall, StaysInsideAndFillsRadially)
{
    SeededRng rng(8);
    int outer = 0;
    for (int i = 0; i < 20000; ++i) {
        const Vector x = sample_ball(3, 2.0, rng);
        ASSERT_LE(x.norm(), 2.0);
        if (x.norm() > 2.0 * std::cbrt(0.5))
            ++outer;
    }
    // half the volume lies beyond radius 2 * 0.5^(1/3)
    EXPECT_NEAR(outer / 20000.0, 0.5, 0.02);
}
