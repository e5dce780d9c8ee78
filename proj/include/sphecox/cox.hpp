#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "sphecox/field.hpp"
#include "sphecox/rng.hpp"
#include "sphecox/sphere.hpp"

namespace sphecox {

struct Event {
    double t;
    SpherePoint z;
};

// Point pattern on [t0, t1] x S^2, events sorted by time
struct PointPattern {
    double t0 = 0.0;
    double t1 = 10.0;
    std::vector<Event> events;

    std::size_t size() const { return events.size(); }
    double span() const { return t1 - t0; }
};

// Cox sampling by thinning: propose a Poisson number of uniform candidates at
// the dominating rate field_max_bound and keep each with probability
// intensity/bound. The candidate budget guards against runaway bounds from
// large variance_scale.
inline PointPattern sample_pattern(const FieldRealization& f, RandomStream& rng,
                                   double candidate_cap = 1e7) {
    const double span = f.grid.t1 - f.grid.t0;
    const double bound = field_max_bound(f);
    const double mu = bound * four_pi * span;
    if (!(mu <= candidate_cap))
        throw std::runtime_error(
            "sample_pattern: dominating intensity wants more candidates than the cap; "
            "reduce variance_scale or raise the cap");
    const long long n_cand = poisson_draw(rng, mu);
    PointPattern p;
    p.t0 = f.grid.t0;
    p.t1 = f.grid.t1;
    p.events.reserve(static_cast<std::size_t>(n_cand / 8 + 16));
    for (long long i = 0; i < n_cand; ++i) {
        const double t = rng.uniform(f.grid.t0, f.grid.t1);
        const SpherePoint z = sample_uniform_sphere(rng);
        const double u = rng.uniform();
        if (u * bound < eval_intensity(f, t, z))
            p.events.push_back(Event{t, z});
    }
    std::sort(p.events.begin(), p.events.end(),
              [](const Event& a, const Event& b) { return a.t < b.t; });
    return p;
}

inline long long count_in(const PointPattern& p, double a, double b) {
    long long c = 0;
    for (const Event& e : p.events)
        if (e.t >= a && e.t <= b)
            ++c;
    return c;
}

// Cumulative ordered-pair counts: cell (i, j) holds the number of ordered
// pairs with geodesic distance <= thetas[i] and time gap <= ts[j]. Pairs
// farther than the last node in either axis are dropped.
inline Eigen::MatrixXd pairwise_histogram(const PointPattern& p,
                                          const std::vector<double>& thetas,
                                          const std::vector<double>& ts) {
    if (thetas.empty() || ts.empty())
        throw std::invalid_argument("pairwise_histogram: empty node list");
    const std::size_t n = p.events.size();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(thetas.size()),
                                              static_cast<Eigen::Index>(ts.size()));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = geodesic_distance(p.events[i].z, p.events[j].z);
            const double dt = std::abs(p.events[i].t - p.events[j].t);
            const auto it = std::lower_bound(thetas.begin(), thetas.end(), d);
            const auto jt = std::lower_bound(ts.begin(), ts.end(), dt);
            if (it == thetas.end() || jt == ts.end())
                continue;
            h(it - thetas.begin(), jt - ts.begin()) += 2.0;
        }
    for (Eigen::Index i = 0; i < h.rows(); ++i)
        for (Eigen::Index j = 1; j < h.cols(); ++j)
            h(i, j) += h(i, j - 1);
    for (Eigen::Index j = 0; j < h.cols(); ++j)
        for (Eigen::Index i = 1; i < h.rows(); ++i)
            h(i, j) += h(i - 1, j);
    return h;
}

}
