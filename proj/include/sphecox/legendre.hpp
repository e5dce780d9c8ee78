#pragma once

#include <stdexcept>
#include <vector>

namespace sphecox {

inline constexpr int legendre_max_degree = 64;

namespace detail {
inline void check_degree(int l) {
    if (l < 0 || l > legendre_max_degree)
        throw std::invalid_argument("legendre: degree out of [0, 64]");
}
inline void check_argument(double u) {
    if (!(u >= -1.0 && u <= 1.0))
        throw std::invalid_argument("legendre: argument outside [-1, 1]");
}
}

// Legendre polynomial P_l(u) via the three-term Bonnet recurrence
inline double legendre_eval(int l, double u) {
    detail::check_degree(l);
    detail::check_argument(u);
    if (l == 0)
        return 1.0;
    double pm1 = 1.0;
    double p = u;
    for (int k = 2; k <= l; ++k) {
        const double next = ((2.0 * k - 1.0) * u * p - (k - 1.0) * pm1) / k;
        pm1 = p;
        p = next;
    }
    return p;
}

// all P_0(u) .. P_lmax(u) in one recurrence pass; out gets lmax+1 entries
inline void legendre_all(int lmax, double u, std::vector<double>& out) {
    detail::check_degree(lmax);
    detail::check_argument(u);
    out.resize(static_cast<std::size_t>(lmax) + 1);
    out[0] = 1.0;
    if (lmax == 0)
        return;
    out[1] = u;
    for (int k = 2; k <= lmax; ++k)
        out[k] = ((2.0 * k - 1.0) * u * out[k - 1] - (k - 1.0) * out[k - 2]) / k;
}

struct JacobiParams {
    double alpha;
    double beta;
};

// Jacobi polynomial P_n^(alpha,beta)(u), alpha,beta > -1
inline double jacobi_eval(int n, JacobiParams par, double u) {
    if (n < 0 || n > legendre_max_degree)
        throw std::invalid_argument("jacobi: degree out of [0, 64]");
    if (!(par.alpha > -1.0) || !(par.beta > -1.0))
        throw std::invalid_argument("jacobi: parameters must exceed -1");
    detail::check_argument(u);
    const double a = par.alpha;
    const double b = par.beta;
    if (n == 0)
        return 1.0;
    double pm1 = 1.0;
    double p = 0.5 * (a - b + (a + b + 2.0) * u);
    for (int k = 2; k <= n; ++k) {
        const double c1 = 2.0 * k * (k + a + b) * (2.0 * k + a + b - 2.0);
        const double c2 = (2.0 * k + a + b - 1.0) * (a * a - b * b);
        const double c3 = (2.0 * k + a + b - 2.0) * (2.0 * k + a + b - 1.0) *
                          (2.0 * k + a + b);
        const double c4 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * (2.0 * k + a + b);
        const double next = ((c2 + c3 * u) * p - c4 * pm1) / c1;
        pm1 = p;
        p = next;
    }
    return p;
}

}
