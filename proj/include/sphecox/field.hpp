#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "sphecox/covariance.hpp"
#include "sphecox/rng.hpp"
#include "sphecox/sphere.hpp"

namespace sphecox {

// Uniform grid of time nodes on [t0, t1]; coefficient paths are simulated at
// the nodes and interpolated linearly in between.
struct TimeGrid {
    double t0 = 0.0;
    double t1 = 10.0;
    int nodes = 100;

    void validate() const {
        if (!(t1 > t0))
            throw std::invalid_argument("TimeGrid: t1 must exceed t0");
        if (nodes < 2)
            throw std::invalid_argument("TimeGrid: need at least 2 nodes");
    }

    double dt() const { return (t1 - t0) / (nodes - 1); }
    double node(int k) const { return t0 + k * dt(); }
};

struct ClampStats {
    long long clamped = 0;
};

// One realization of the log-intensity field: a uniformly drawn pole U and
// per-degree Gaussian coefficient paths V_l over the time grid. The field at
// (t, z) is sum_l w_l V_l(t) P_l(<z, U>) with w_l = field_basis_weight, which
// makes the field covariance equal spacetime_kernel at the grid nodes.
struct FieldRealization {
    CovarianceModel model;
    TimeGrid grid;
    Eigen::MatrixXd coeffs;   // (truncation+1) x nodes, row l = path of V_l
    SpherePoint pole;
    std::uint64_t seed = 0;
    double jitter_used = 0.0; // largest diagonal jitter any degree needed
};

// Draws the pole, then for each degree factorizes the temporal covariance at
// the grid nodes and colors i.i.d. normals. If a factorization fails, a small
// diagonal jitter is escalated; degrees are independent across l.
inline FieldRealization simulate_coefficients(const CovarianceModel& model,
                                              const TimeGrid& grid,
                                              RandomStream& rng) {
    model.validate();
    grid.validate();
    FieldRealization f;
    f.model = model;
    f.grid = grid;
    f.seed = rng.seed();
    f.pole = sample_uniform_sphere(rng);
    const int n = grid.nodes;
    const int m = model.truncation;
    f.coeffs.resize(m + 1, n);

    static const double jitter_ladder[] = {0.0, 1e-14, 1e-12, 1e-10, 1e-8, 1e-6};

    Eigen::MatrixXd cov(n, n);
    Eigen::VectorXd z(n);
    for (int l = 0; l <= m; ++l) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j <= i; ++j) {
                const double v = coef_cov(model, l, grid.node(i) - grid.node(j));
                cov(i, j) = v;
                cov(j, i) = v;
            }
        Eigen::LLT<Eigen::MatrixXd> llt;
        bool ok = false;
        for (double jit : jitter_ladder) {
            Eigen::MatrixXd c = cov;
            if (jit > 0.0)
                c.diagonal().array() += jit;
            llt.compute(c);
            if (llt.info() == Eigen::Success) {
                if (jit > f.jitter_used)
                    f.jitter_used = jit;
                ok = true;
                break;
            }
        }
        if (!ok)
            throw std::runtime_error(
                "simulate_coefficients: covariance factorization failed at degree " +
                std::to_string(l));
        for (int i = 0; i < n; ++i)
            z(i) = rng.normal();
        f.coeffs.row(l) = (llt.matrixL() * z).transpose();
    }
    return f;
}

// log-intensity at (t, z); t must lie in [t0, t1]
inline double eval_field(const FieldRealization& f, double t, const SpherePoint& z) {
    if (!(t >= f.grid.t0 && t <= f.grid.t1))
        throw std::out_of_range("eval_field: time outside the grid span");
    const int n = f.grid.nodes;
    int k = static_cast<int>((t - f.grid.t0) / f.grid.dt());
    if (k > n - 2)
        k = n - 2;
    const double w1 = (t - f.grid.node(k)) / f.grid.dt();
    const double w0 = 1.0 - w1;

    const double u = f.pole.dot(z);
    const int m = f.model.truncation;
    double uc = u;
    if (uc > 1.0) uc = 1.0;
    if (uc < -1.0) uc = -1.0;

    double s = 0.0;
    double pm1 = 1.0, p = uc;
    for (int l = 0; l <= m; ++l) {
        const double pl = (l == 0) ? 1.0 : p;
        if (l >= 1 && l < m) {
            const double next = ((2.0 * (l + 1) - 1.0) * uc * p - static_cast<double>(l) * pm1) /
                                (l + 1.0);
            pm1 = p;
            p = next;
        }
        const double v = w0 * f.coeffs(l, k) + w1 * f.coeffs(l, k + 1);
        s += field_basis_weight(f.model, l) * v * pl;
    }
    return s;
}

// intensity exp(field), with the exponent clamped to +-700 to avoid overflow
inline double eval_intensity(const FieldRealization& f, double t, const SpherePoint& z,
                             ClampStats* stats = nullptr) {
    double x = eval_field(f, t, z);
    if (x > 700.0 || x < -700.0) {
        x = x > 700.0 ? 700.0 : -700.0;
        if (stats)
            ++stats->clamped;
    }
    return std::exp(x);
}

// Upper bound for the intensity over the whole window: |P_l| <= 1 and linear
// interpolation cannot exceed the node values, so sum_l w_l max_k |V_l(t_k)|
// dominates the field everywhere.
inline double field_max_bound(const FieldRealization& f) {
    double s = 0.0;
    for (int l = 0; l <= f.model.truncation; ++l) {
        const double mx = f.coeffs.row(l).cwiseAbs().maxCoeff();
        s += field_basis_weight(f.model, l) * mx;
    }
    return s > 700.0 ? std::exp(700.0) : std::exp(s);
}

}
