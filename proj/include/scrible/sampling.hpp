#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>

#include "scrible/geometry.hpp"

namespace scrible {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Reproducible generator with derivable independent substreams.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The standard's distribution objects are implementation-defined,
/// so the uniform and normal transforms are written out here to keep sample
/// sequences identical across toolchains.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

    std::uint64_t seed() const noexcept { return seed_; }

    /// A generator for substream `stream`, independent of this one's state.
    SeededRng substream(std::uint64_t stream) const
    {
        return SeededRng(splitmix64(seed_ ^ splitmix64(stream + 0x632be59bd9b4e019ULL)));
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via the Marsaglia polar method.
    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

    Vector gaussian_vector(Eigen::Index n)
    {
        Vector g(n);
        for (Eigen::Index i = 0; i < n; ++i)
            g(i) = normal();
        return g;
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

inline constexpr double kDegenerateProjection = 1e-9;

/// Uniform draw from the unit sphere of R^n.
inline Vector sample_sphere(Eigen::Index n, SeededRng& rng)
{
    if (n < 1)
        throw std::invalid_argument("sample_sphere: dimension must be >= 1");
    for (;;) {
        Vector g = rng.gaussian_vector(n);
        const double norm = g.norm();
        if (norm >= kDegenerateProjection)
            return g / norm;
    }
}

/// Uniform draw from the unit sphere intersected with the hyperplane v^perp.
inline Vector sample_sphere_orthogonal(const Vector& v, SeededRng& rng)
{
    if (v.size() < 2)
        throw std::invalid_argument("sample_sphere_orthogonal: ambient dimension must be >= 2");
    const double vv = v.squaredNorm();
    if (!(vv > 0.0))
        throw std::invalid_argument("sample_sphere_orthogonal: v must be nonzero");
    for (;;) {
        Vector w = rng.gaussian_vector(v.size());
        w -= (w.dot(v) / vv) * v;
        const double norm = w.norm();
        if (norm < kDegenerateProjection)
            continue;
        w /= norm;
        // second pass removes the residual component left by rounding
        w -= (w.dot(v) / vv) * v;
        return w / w.norm();
    }
}

/// Uniform draw from the closed ball of radius r in R^n.
inline Vector sample_ball(Eigen::Index n, double r, SeededRng& rng)
{
    Vector dir = sample_sphere(n, rng);
    return dir * (r * std::pow(rng.uniform(), 1.0 / static_cast<double>(n)));
}

} // namespace scrible
