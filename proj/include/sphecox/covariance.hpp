#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sphecox/legendre.hpp"
#include "sphecox/sphere.hpp"

namespace sphecox {

// Which normalization the per-scale coefficient b_q carries. "weighted"
// multiplies the temporal coefficient B_q by (2q+1)/(4pi), the natural
// spectral weight on the sphere; "raw" uses B_q as is.
enum class BqConvention { weighted, raw };

// Parametric space-time covariance family for the log-intensity field. The
// temporal coefficient of degree l at lag tau is
//   B_l(tau) = variance_scale * (1/2) (l+1)^{-2-|tau|} / (1+tau^2)^{theta*beta_l}
// with beta_l = 0.8 (l+1) / sqrt((l+1)^2 + 1). Small theta gives slow decay
// in the lag (long-range dependence), large theta fast decay.
struct CovarianceModel {
    double theta = 1.0;
    int truncation = 5;          // kernel keeps degrees 0..truncation
    double variance_scale = 1.0;
    BqConvention convention = BqConvention::weighted;

    void validate() const {
        if (!(theta > 0.0))
            throw std::invalid_argument("CovarianceModel: theta must be positive");
        if (truncation < 0 || truncation > legendre_max_degree)
            throw std::invalid_argument("CovarianceModel: truncation out of [0, 64]");
        if (!(variance_scale >= 0.0))
            throw std::invalid_argument("CovarianceModel: variance_scale must be >= 0");
    }
};

inline double beta_of_l(int l) {
    if (l < 0)
        throw std::invalid_argument("beta_of_l: negative degree");
    const double lp1 = static_cast<double>(l) + 1.0;
    return 0.8 * lp1 / std::sqrt(lp1 * lp1 + 1.0);
}

// B_l formula evaluated for any degree in [0, 64], ignoring the truncation.
// The family is defined for every degree; the truncation only selects how
// many terms the simulated field and the kernel carry.
inline double coef_cov_extended(const CovarianceModel& m, int l, double tau) {
    if (l < 0 || l > legendre_max_degree)
        throw std::invalid_argument("coef_cov_extended: degree out of [0, 64]");
    m.validate();
    const double lp1 = static_cast<double>(l) + 1.0;
    const double at = std::abs(tau);
    const double num = 0.5 * std::pow(lp1, -2.0 - at);
    const double den = std::pow(1.0 + tau * tau, m.theta * beta_of_l(l));
    return m.variance_scale * num / den;
}

// B_l(tau) for a degree the model actually carries
inline double coef_cov(const CovarianceModel& m, int l, double tau) {
    if (l > m.truncation)
        throw std::invalid_argument("coef_cov: degree exceeds model truncation");
    return coef_cov_extended(m, l, tau);
}

inline double scale_coefficient_extended(const CovarianceModel& m, int q, double tau) {
    const double B = coef_cov_extended(m, q, tau);
    return m.convention == BqConvention::weighted
               ? B * (2.0 * q + 1.0) / four_pi
               : B;
}

// b_q(tau) for a scale the model carries
inline double scale_coefficient(const CovarianceModel& m, int q, double tau) {
    if (q > m.truncation)
        throw std::invalid_argument("scale_coefficient: scale exceeds model truncation");
    return scale_coefficient_extended(m, q, tau);
}

// r_tau(u) = sum_{l=0}^{M} b_l(tau) P_l(u)
inline double spacetime_kernel(const CovarianceModel& m, double tau, double u) {
    m.validate();
    std::vector<double> p;
    legendre_all(m.truncation, u, p);
    double s = 0.0;
    for (int l = 0; l <= m.truncation; ++l)
        s += scale_coefficient(m, l, tau) * p[static_cast<std::size_t>(l)];
    return s;
}

inline CovarianceModel with_truncation(const CovarianceModel& m, int truncation) {
    CovarianceModel out = m;
    out.truncation = truncation;
    out.validate();
    return out;
}

// Weight applied to the degree-l coefficient path when evaluating the field,
// chosen so the sampled field's covariance reproduces spacetime_kernel exactly
// under a uniformly random pole: E[P_l(<a,U>) P_l(<b,U>)] = P_l(<a,b>)/(2l+1),
// so the squared weight must equal (2l+1) * (b_l/B_l).
inline double field_basis_weight(const CovarianceModel& m, int l) {
    if (l < 0 || l > m.truncation)
        throw std::invalid_argument("field_basis_weight: degree out of model range");
    const double mult = m.convention == BqConvention::weighted
                            ? (2.0 * l + 1.0) / four_pi
                            : 1.0;
    return std::sqrt((2.0 * l + 1.0) * mult);
}

}
