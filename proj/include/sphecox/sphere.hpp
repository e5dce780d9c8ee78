#pragma once

#include <cmath>
#include <stdexcept>

#include "sphecox/rng.hpp"

namespace sphecox {

inline constexpr double pi = 3.14159265358979323846264338327950288;
inline constexpr double four_pi = 4.0 * pi;

// Point on the unit sphere S^2, stored as a normalized 3-vector.
struct SpherePoint {
    double x, y, z;

    SpherePoint() : x(0.0), y(0.0), z(1.0) {}

    SpherePoint(double px, double py, double pz) {
        const double n = std::sqrt(px * px + py * py + pz * pz);
        if (!(n > 1e-300))
            throw std::invalid_argument("SpherePoint: vector has (near) zero norm");
        x = px / n;
        y = py / n;
        z = pz / n;
    }

    // adopt coordinates that already sit on the sphere without renormalizing,
    // so points read back from a file keep their exact bits
    static SpherePoint from_unit(double px, double py, double pz) {
        const double n2 = px * px + py * py + pz * pz;
        if (!(std::abs(n2 - 1.0) < 1e-6))
            throw std::invalid_argument("SpherePoint: coordinates are not unit length");
        SpherePoint p;
        p.x = px;
        p.y = py;
        p.z = pz;
        return p;
    }

    double dot(const SpherePoint& o) const { return x * o.x + y * o.y + z * o.z; }
};

// geodesic (great-circle) distance in [0, pi]
inline double geodesic_distance(const SpherePoint& a, const SpherePoint& b) {
    double c = a.dot(b);
    if (c > 1.0) c = 1.0;
    if (c < -1.0) c = -1.0;
    return std::acos(c);
}

enum class MeasureConvention { geometric, probabilistic };

// total surface measure of S^2 under the chosen convention
inline double sphere_measure(MeasureConvention conv = MeasureConvention::geometric) {
    return conv == MeasureConvention::geometric ? four_pi : 1.0;
}

// measure of a spherical cap of geodesic radius theta
inline double cap_measure(double theta,
                          MeasureConvention conv = MeasureConvention::geometric) {
    if (!(theta >= 0.0) || theta > pi)
        throw std::invalid_argument("cap_measure: radius must lie in [0, pi]");
    const double frac = 0.5 * (1.0 - std::cos(theta));
    return conv == MeasureConvention::geometric ? four_pi * frac : frac;
}

// uniform point on S^2 (z uniform on [-1,1], longitude uniform)
inline SpherePoint sample_uniform_sphere(RandomStream& rng) {
    const double z = rng.uniform(-1.0, 1.0);
    const double phi = rng.uniform(0.0, 2.0 * pi);
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    SpherePoint p;
    p.x = s * std::cos(phi);
    p.y = s * std::sin(phi);
    p.z = z;
    return p;
}

}
