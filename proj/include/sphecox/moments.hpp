#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sphecox/covariance.hpp"
#include "sphecox/sphere.hpp"

namespace sphecox {

// Argument tuple of an n-order product density
struct Configuration {
    std::vector<double> times;
    std::vector<SpherePoint> points;

    void validate() const {
        if (times.empty() || times.size() != points.size())
            throw std::invalid_argument(
                "Configuration: need equal, nonempty time and point lists");
    }
    std::size_t order() const { return times.size(); }
};

// first-order intensity of the log-Gaussian Cox process
inline double intensity(const CovarianceModel& m) {
    return std::exp(0.5 * spacetime_kernel(m, 0.0, 1.0));
}

// log of the n-order product density; pair terms run over unordered pairs
inline double log_product_density(const CovarianceModel& m, const Configuration& c) {
    c.validate();
    const std::size_t n = c.order();
    double s = static_cast<double>(n) * 0.5 * spacetime_kernel(m, 0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double u = c.points[i].dot(c.points[j]);
            if (u > 1.0) u = 1.0;
            if (u < -1.0) u = -1.0;
            s += spacetime_kernel(m, c.times[i] - c.times[j], u);
        }
    return s;
}

// per-scale intensity rho_q = exp(b_q(0)/2)
inline double per_scale_intensity(const CovarianceModel& m, int q) {
    return std::exp(0.5 * scale_coefficient(m, q, 0.0));
}

// per-scale n-order product density rho_q^(n)
inline double per_scale_density(const CovarianceModel& m, int q, const Configuration& c) {
    c.validate();
    const std::size_t n = c.order();
    double s = static_cast<double>(n) * 0.5 * scale_coefficient(m, q, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double u = c.points[i].dot(c.points[j]);
            if (u > 1.0) u = 1.0;
            if (u < -1.0) u = -1.0;
            s += scale_coefficient(m, q, c.times[i] - c.times[j]) * legendre_eval(q, u);
        }
    return std::exp(s);
}

// pair correlation g_tau(u) = rho^(2)/rho^2
inline double pair_correlation(const CovarianceModel& m, double tau, double u) {
    return std::exp(spacetime_kernel(m, tau, u));
}

}
