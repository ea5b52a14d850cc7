#include <cmath>

#include <gtest/gtest.h>

#include "scrible/barrier.hpp"
#include "scrible/validation.hpp"

using namespace scrible;

namespace {

const BallActionSet kSet(5, 5.0);

Vector center(int d)
{
    Vector p = Vector::Zero(d + 1);
    p(d) = 1.0;
    return p;
}

// Independent oracle: central differences of the closed-form value, written without the class.
double closed_form(const Vector& p, double c, double inner_nu, double D)
{
    const Eigen::Index d = p.size() - 1;
    const double b = p(d);
    return c * (-std::log(1.0 - p.head(d).squaredNorm() / (b * b * D * D)) - 2.0 * inner_nu * std::log(b));
}

Vector fd_gradient(const Vector& p, double c, double inner_nu, double D, double h = 1e-5)
{
    Vector g(p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        Vector a = p, b = p;
        a(i) += h;
        b(i) -= h;
        g(i) = (closed_form(a, c, inner_nu, D) - closed_form(b, c, inner_nu, D)) / (2 * h);
    }
    return g;
}

} // namespace

TEST(ConeBarrier, InvariantsOnConstruction)
{
    EXPECT_THROW(ConeBarrier(kSet, -1.0), std::invalid_argument);
    EXPECT_THROW(ConeBarrier(kSet, 0.0), std::invalid_argument);
    EXPECT_THROW(ConeBarrier(kSet, 400.0, 0.5), std::invalid_argument);
    EXPECT_DOUBLE_EQ(ConeBarrier(kSet).effective_nu(), 800.0);
    EXPECT_DOUBLE_EQ(ConeBarrier(kSet, 10.0, 3.0).effective_nu(), 60.0);
}

TEST(ConeBarrier, EvalAtCenter)
{
    const ConeBarrier R(kSet);
    const BarrierEval e = R.eval(center(5));
    EXPECT_EQ(e.value, 0.0);
    Vector g = Vector::Zero(6);
    g(5) = -800.0;
    EXPECT_LE((e.gradient - g).norm(), 1e-12);
    Matrix H = Matrix::Zero(6, 6);
    H.diagonal() << 32, 32, 32, 32, 32, 800;
    EXPECT_LE((e.hessian - H).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(ConeBarrier, DomainErrorsNameTheConstraint)
{
    const ConeBarrier R(kSet);
    Vector p = center(5);
    p(5) = 0.0;
    try {
        R.eval(p);
        FAIL();
    } catch (const BarrierDomainError& e) {
        EXPECT_NE(std::string(e.what()).find("b > 0"), std::string::npos);
    }
    p = center(5);
    p(0) = 5.0;
    try {
        R.eval(p);
        FAIL();
    } catch (const BarrierDomainError& e) {
        EXPECT_NE(std::string(e.what()).find("|x| < b D"), std::string::npos);
    }
    EXPECT_THROW(R.eval(Vector::Ones(3)), std::invalid_argument);
    EXPECT_FALSE(R.interior(p));
}

TEST(ConeBarrier, HomogeneityProperty)
{
    const ConeBarrier R(kSet);
    SeededRng rng(1);
    for (int i = 0; i < 200; ++i) {
        const Vector p = random_cone_point(R, rng);
        const double t = rng.uniform(0.5, 2.0);
        const double v = R.value(p);
        EXPECT_LE(std::abs(R.value(t * p) - v + 800.0 * std::log(t)), 1e-8 * (1.0 + std::abs(v)));
    }
}

TEST(ConeBarrier, GradientAndHessianMatchFiniteDifferences)
{
    for (double inner : {1.0, 2.5}) {
        const ConeBarrier R(kSet, 400.0, inner);
        SeededRng rng(2);
        for (int i = 0; i < 100; ++i) {
            const Vector p = random_cone_point(R, rng);
            const BarrierEval e = R.eval(p);
            const Vector fd = fd_gradient(p, 400.0, inner, 5.0);
            EXPECT_LE((fd - e.gradient).norm(), 1e-5 * std::max(1.0, e.gradient.norm()));
            Matrix fdH(6, 6);
            for (int j = 0; j < 6; ++j) {
                Vector a = p, b = p;
                a(j) += 1e-5;
                b(j) -= 1e-5;
                fdH.col(j) = (R.eval(a).gradient - R.eval(b).gradient) / 2e-5;
            }
            EXPECT_LE((fdH - e.hessian).norm(), 1e-5 * std::max(1.0, e.hessian.norm()));
            EXPECT_LE((e.hessian - e.hessian.transpose()).norm(), 1e-10 * e.hessian.norm());
            EXPECT_GT(Eigen::SelfAdjointEigenSolver<Matrix>(e.hessian).eigenvalues().minCoeff(), 0.0);
        }
    }
}

TEST(ConeBarrier, SliceEvaluationIsTopLeftBlock)
{
    const ConeBarrier R(kSet);
    SeededRng rng(3);
    for (int i = 0; i < 50; ++i) {
        const Vector x = sample_ball(5, 4.9, rng);
        const BarrierEval s = R.eval_slice(x);
        const BarrierEval f = R.eval(lift(x).full());
        EXPECT_NEAR(s.value, f.value, 1e-12 * (1 + std::abs(f.value)));
        EXPECT_LE((s.gradient - f.gradient.head(5)).norm(), 1e-12 * (1 + f.gradient.norm()));
        EXPECT_LE((s.hessian - f.hessian.topLeftCorner(5, 5)).norm(), 1e-12 * f.hessian.norm());
    }
}

TEST(ConeBarrier, SelfNormEqualsNuEverywhere)
{
    const ConeBarrier R(kSet);
    SeededRng rng(4);
    for (int i = 0; i < 100; ++i) {
        const Vector p = random_cone_point(R, rng);
        EXPECT_NEAR(local_norm(R, p, p) * local_norm(R, p, p), 800.0, 800.0 * 1e-8);
    }
}

TEST(ConeBarrier, MidpointConvexAlongChords)
{
    const ConeBarrier R(kSet);
    SeededRng rng(5);
    for (int i = 0; i < 200; ++i) {
        const Vector a = random_cone_point(R, rng), b = random_cone_point(R, rng);
        const double mid = R.value(0.5 * (a + b));
        EXPECT_LE(mid, 0.5 * (R.value(a) + R.value(b)) + 1e-9 * (1 + std::abs(mid)));
    }
}

TEST(ConeBarrier, DikinEllipsoidStaysInSlice)
{
    const ConeBarrier R(kSet);
    SeededRng rng(6);
    for (int i = 0; i < 500; ++i) {
        const Vector x = sample_ball(5, 4.99, rng);
        const Vector p = lift(x).full();
        Vector h = Vector::Zero(6);
        h.head(5) = sample_sphere(5, rng);
        h /= local_norm(R, p, h);
        EXPECT_TRUE(contains(kSet, Vector((p + h).head(5)), 1e-9));
    }
}

TEST(InvSqrtHessian, DiagonalAtCenter)
{
    const ConeBarrier R(kSet);
    const Matrix A = inv_sqrt_hessian(R, center(5));
    Matrix expect = Matrix::Zero(6, 6);
    expect.diagonal() << Vector::Constant(5, 1.0 / std::sqrt(32.0)), 1.0 / std::sqrt(800.0);
    EXPECT_LE((A - expect).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(InvSqrtHessian, DefiningPropertiesAtRandomPoints)
{
    const ConeBarrier R(kSet);
    SeededRng rng(7);
    for (int i = 0; i < 100; ++i) {
        const Vector p = random_cone_point(R, rng);
        const Matrix H = R.eval(p).hessian;
        const HessianRoot root(H);
        const Matrix& A = root.inv_sqrt();
        EXPECT_LE((A - A.transpose()).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LE((A * H * A - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-8);
        const Matrix Hinv = H.inverse();
        EXPECT_LE((A * A - Hinv).cwiseAbs().maxCoeff(), 1e-8 * std::max(1.0, Hinv.cwiseAbs().maxCoeff()));
        const Vector v = rng.gaussian_vector(6);
        EXPECT_LE((A * root.solve(v) - v).norm(), 1e-10 * v.norm());
    }
}

TEST(InvSqrtHessian, TinyEigenvalueIsIllConditioned)
{
    Matrix H = Matrix::Identity(3, 3);
    H(2, 2) = 1e-16;
    EXPECT_THROW(HessianRoot{H}, IllConditionedError);
}

TEST(LocalNorms, Identities)
{
    const ConeBarrier R(kSet);
    const Vector c = center(5);
    EXPECT_EQ(local_norm(R, c, Vector::Zero(6)), 0.0);
    EXPECT_NEAR(local_norm(R, c, c), std::sqrt(800.0), 1e-12);
    SeededRng rng(8);
    for (int i = 0; i < 100; ++i) {
        const Vector p = random_cone_point(R, rng);
        const Vector h = rng.gaussian_vector(6);
        const Matrix H = R.eval(p).hessian;
        const double primal = local_norm(H, h);
        EXPECT_NEAR(dual_local_norm(H, Vector(H * h)), primal, 1e-8 * primal);
        EXPECT_NEAR(local_norm(H, Vector(-3.0 * h)), 3.0 * primal, 1e-12 * primal);
        EXPECT_GT(dual_local_norm(H, h), 0.0);
    }
}

TEST(ValidateNormalBarrier, CenterExamples)
{
    const ConeBarrier R(kSet);
    SeededRng rng(9);
    const Vector c = center(5);
    EXPECT_NEAR(R.value(2.0 * c), -800.0 * std::log(2.0), 1e-10);
    const ValidationReport r = validate_normal_barrier(R, c, 2.0, rng);
    EXPECT_LE(r.homogeneity, 1e-14);
    EXPECT_LE(r.self_norm, 1e-15);
    EXPECT_LE(r.hessian_identity, 1e-15);
    EXPECT_LE(r.gradient_bound, 1e-12);
}

TEST(ValidateNormalBarrier, RandomInteriorPoints)
{
    const ConeBarrier R(kSet);
    SeededRng rng(10);
    for (int i = 0; i < 100; ++i) {
        const Vector p = random_cone_point(R, rng);
        const ValidationReport r = validate_normal_barrier(R, p, rng.uniform(0.5, 2.0), rng);
        EXPECT_TRUE(r.passed(1e-8)) << r.homogeneity << ' ' << r.self_norm << ' ' << r.hessian_identity << ' '
                                    << r.gradient_bound;
    }
}

TEST(ValidateNormalBarrier, RejectsNonpositiveScale)
{
    const ConeBarrier R(kSet);
    SeededRng rng(1);
    EXPECT_THROW(validate_normal_barrier(R, center(5), 0.0, rng), std::invalid_argument);
}
