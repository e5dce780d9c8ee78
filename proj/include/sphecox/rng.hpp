#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace sphecox {

// Deterministic random stream. All draws go through this wrapper rather than
// the std distributions so that simulation output is bit-identical across
// standard library implementations. split() derives an independent stream
// from the *original* seed and a key, so chunked parallel reductions can hand
// each chunk its own stream regardless of how many draws the parent has made.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed)
        : seed_(seed), engine_(seed), have_cached_(false), cached_(0.0) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    // uniform on [0, 1) with 53 random bits
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double a, double b) {
        return a + (b - a) * uniform();
    }

    // standard normal via Box-Muller; pairs are cached
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    // Independent stream keyed off the original seed. Stateless: does not
    // consume or depend on draws already made from this stream.
    RandomStream split(std::uint64_t key) const {
        std::uint64_t z = seed_ + 0x9e3779b97f4a7c15ULL * (key + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z = z ^ (z >> 31);
        return RandomStream(z);
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    bool have_cached_;
    double cached_;
};

// Poisson draw valid for any mu >= 0; Knuth for small mu, PTRS rejection for
// large mu (std::poisson_distribution is not reproducible across platforms).
inline long long poisson_draw(RandomStream& rng, double mu) {
    if (!(mu >= 0.0))
        return 0;
    if (mu == 0.0)
        return 0;
    if (mu < 30.0) {
        const double limit = std::exp(-mu);
        long long k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= rng.uniform();
        } while (p > limit);
        return k - 1;
    }
    // Hormann's PTRS transformed rejection
    const double smu = std::sqrt(mu);
    const double b = 0.931 + 2.53 * smu;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        double u = rng.uniform() - 0.5;
        double v = rng.uniform();
        const double us = 0.5 - std::abs(u);
        const double k = std::floor((2.0 * a / us + b) * u + mu + 0.43);
        if (us >= 0.07 && v <= v_r)
            return static_cast<long long>(k);
        if (k < 0.0 || (us < 0.013 && v > us))
            continue;
        const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
        const double rhs = -mu + k * std::log(mu) - std::lgamma(k + 1.0);
        if (lhs <= rhs)
            return static_cast<long long>(k);
    }
}

}
