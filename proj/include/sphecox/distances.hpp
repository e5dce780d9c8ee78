#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "sphecox/covariance.hpp"
#include "sphecox/legendre.hpp"
#include "sphecox/rng.hpp"
#include "sphecox/sphere.hpp"

namespace sphecox {

enum class IntegrationMethod { monte_carlo, trapezoid };

// How a distance integral is evaluated. The domain is [t0,t1]^n x (S^2)^n.
struct IntegrationSpec {
    IntegrationMethod method = IntegrationMethod::monte_carlo;
    long long samples = 1000;  // MC sample count
    int nodes_per_axis = 8;    // trapezoid nodes per axis
    std::uint64_t seed = 0;
    int order_n = 2;           // configuration order n
    int workers = 1;
    double t0 = 0.0;
    double t1 = 10.0;

    void validate() const {
        if (method == IntegrationMethod::monte_carlo && samples < 100)
            throw std::invalid_argument("IntegrationSpec: need at least 100 MC samples");
        if (method == IntegrationMethod::trapezoid && nodes_per_axis < 4)
            throw std::invalid_argument("IntegrationSpec: need at least 4 nodes per axis");
        if (order_n < 1 || order_n > 3)
            throw std::invalid_argument("IntegrationSpec: order must be 1, 2 or 3");
        if (workers < 1)
            throw std::invalid_argument("IntegrationSpec: workers must be >= 1");
        if (!(t1 > t0))
            throw std::invalid_argument("IntegrationSpec: empty time window");
        if (method == IntegrationMethod::trapezoid && order_n == 3 &&
            std::pow(static_cast<double>(nodes_per_axis), 9) > 1e8)
            throw std::invalid_argument(
                "IntegrationSpec: trapezoid grid for order 3 exceeds the evaluation budget");
    }
};

// One distance in three conventions. "value" normalizes both densities to
// probability measures on the domain (divergence of shapes; 0 for the null
// model and invariant to the domain volume). "value_rel" keeps the density
// mass but divides out the domain volume factor; "value_raw" is the plain
// unnormalized integral, which carries the volume factor (|T| 4 pi)^n.
struct DistanceEstimate {
    double value = 0.0;
    double std_error = 0.0;
    double value_rel = 0.0;
    double se_rel = 0.0;
    double value_raw = 0.0;
    double se_raw = 0.0;
};

struct ScaleDistances {
    int q = 0;
    DistanceEstimate shannon;
    std::vector<DistanceEstimate> renyi; // parallel to DistanceTable::h_orders
};

struct DistanceTable {
    std::vector<double> h_orders;
    std::vector<ScaleDistances> rows;
};

namespace detail {

// raw accumulator over evaluation points for one scale:
// A = e^{S/2}, W = e^{S/2} S/2, C_h = e^{h S/2}
struct DistAccum {
    double sA = 0, sA2 = 0, sW = 0, sW2 = 0, sAW = 0;
    std::vector<double> sC, sC2, sAC;

    explicit DistAccum(std::size_t nh = 0) : sC(nh, 0.0), sC2(nh, 0.0), sAC(nh, 0.0) {}

    void add(double weight, double e, const std::vector<double>& hs) {
        const double a = std::exp(e);
        const double w = a * e;
        sA += weight * a;
        sA2 += weight * a * a;
        sW += weight * w;
        sW2 += weight * w * w;
        sAW += weight * a * w;
        for (std::size_t k = 0; k < hs.size(); ++k) {
            const double c = std::exp(hs[k] * e);
            sC[k] += weight * c;
            sC2[k] += weight * c * c;
            sAC[k] += weight * a * c;
        }
    }

    void merge(const DistAccum& o) {
        sA += o.sA;
        sA2 += o.sA2;
        sW += o.sW;
        sW2 += o.sW2;
        sAW += o.sAW;
        for (std::size_t k = 0; k < sC.size(); ++k) {
            sC[k] += o.sC[k];
            sC2[k] += o.sC2[k];
            sAC[k] += o.sAC[k];
        }
    }

    // turn raw MC sums into means; dividing once keeps N/N == 1 exact
    void divide_by(double n) {
        sA /= n;
        sA2 /= n;
        sW /= n;
        sW2 /= n;
        sAW /= n;
        for (std::size_t k = 0; k < sC.size(); ++k) {
            sC[k] /= n;
            sC2[k] /= n;
            sAC[k] /= n;
        }
    }
};

// per-scale constants for fast coefficient evaluation:
// b_q(tau) = mult * exp(-(2+|tau|) log(q+1) - theta beta_q log(1+tau^2))
struct ScaleConsts {
    double log_qp1;
    double theta_beta;
    double mult;
};

inline std::vector<ScaleConsts> make_scale_consts(const CovarianceModel& m,
                                                  const std::vector<int>& qs) {
    std::vector<ScaleConsts> out;
    out.reserve(qs.size());
    for (int q : qs) {
        if (q < 0 || q > legendre_max_degree)
            throw std::invalid_argument("distances: scale out of [0, 64]");
        ScaleConsts c;
        c.log_qp1 = std::log(static_cast<double>(q) + 1.0);
        c.theta_beta = m.theta * beta_of_l(q);
        c.mult = m.variance_scale * 0.5;
        if (m.convention == BqConvention::weighted)
            c.mult *= (2.0 * q + 1.0) / four_pi;
        out.push_back(c);
    }
    return out;
}

inline double scale_coef_fast(const ScaleConsts& c, double abs_tau, double log1p_tau2) {
    return c.mult * std::exp(-(2.0 + abs_tau) * c.log_qp1 - c.theta_beta * log1p_tau2);
}

// turn the accumulated moments (total weight 1) into the three conventions
inline DistanceEstimate finalize_shannon(const DistAccum& ac, double n_eff,
                                         double rho_q_n, double volume_n) {
    DistanceEstimate d;
    const double A = ac.sA;
    const double W = ac.sW;
    d.value_rel = rho_q_n * W;
    d.value_raw = volume_n * d.value_rel;
    d.value = W / A - std::log(A);
    if (n_eff > 1.5) {
        const double bess = n_eff / (n_eff - 1.0);
        const double varW = std::max(0.0, (ac.sW2 - W * W) * bess);
        const double varA = std::max(0.0, (ac.sA2 - A * A) * bess);
        const double covAW = (ac.sAW - A * W) * bess;
        d.se_rel = rho_q_n * std::sqrt(varW / n_eff);
        d.se_raw = volume_n * d.se_rel;
        const double gA = -W / (A * A) - 1.0 / A;
        const double gW = 1.0 / A;
        const double v =
            gA * gA * varA + 2.0 * gA * gW * covAW + gW * gW * varW;
        d.std_error = std::sqrt(std::max(0.0, v) / n_eff);
    }
    return d;
}

inline DistanceEstimate finalize_renyi(const DistAccum& ac, std::size_t k, double h,
                                       double n_eff, double rho_q_n, double volume_n) {
    DistanceEstimate d;
    const double A = ac.sA;
    const double C = ac.sC[k];
    const double hm1 = h - 1.0;
    d.value_rel = std::log(rho_q_n * C) / hm1;
    d.value_raw = std::log(volume_n * rho_q_n * C) / hm1;
    d.value = (std::log(C) - h * std::log(A)) / hm1;
    if (n_eff > 1.5) {
        const double bess = n_eff / (n_eff - 1.0);
        const double varC = std::max(0.0, (ac.sC2[k] - C * C) * bess);
        const double varA = std::max(0.0, (ac.sA2 - A * A) * bess);
        const double covAC = (ac.sAC[k] - A * C) * bess;
        d.se_rel = std::sqrt(varC / n_eff) / (std::abs(hm1) * C);
        d.se_raw = d.se_rel;
        const double gA = -h / (hm1 * A);
        const double gC = 1.0 / (hm1 * C);
        const double v =
            gA * gA * varA + 2.0 * gA * gC * covAC + gC * gC * varC;
        d.std_error = std::sqrt(std::max(0.0, v) / n_eff);
    }
    return d;
}

// normalized trapezoid weights for one axis; includes the density factor
inline std::vector<double> trap_weights(const std::vector<double>& nodes,
                                        const std::vector<double>& density) {
    const std::size_t k = nodes.size();
    std::vector<double> w(k, 0.0);
    for (std::size_t i = 0; i + 1 < k; ++i) {
        const double hstep = nodes[i + 1] - nodes[i];
        w[i] += 0.5 * hstep * density[i];
        w[i + 1] += 0.5 * hstep * density[i + 1];
    }
    double tot = 0.0;
    for (double x : w)
        tot += x;
    if (!(tot > 0.0))
        throw std::runtime_error("distances: degenerate quadrature weights");
    for (double& x : w)
        x /= tot;
    return w;
}

inline std::vector<double> linspace(double a, double b, int k) {
    std::vector<double> v(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i)
        v[static_cast<std::size_t>(i)] = a + (b - a) * i / (k - 1.0);
    return v;
}

}

// Per-scale Shannon and Renyi distances between the model's per-scale
// n-order product density and the homogeneous Poisson one, for all requested
// scales and Renyi orders in one pass over a shared sample set. Scales beyond
// the model truncation are evaluated with the coefficient family extended to
// that degree.
inline DistanceTable compute_distances(const CovarianceModel& model,
                                       const std::vector<int>& qs,
                                       const std::vector<double>& h_orders,
                                       const IntegrationSpec& spec) {
    model.validate();
    spec.validate();
    if (qs.empty())
        throw std::invalid_argument("compute_distances: no scales requested");
    for (double h : h_orders) {
        if (!(h > 0.0))
            throw std::invalid_argument("compute_distances: Renyi order must be positive");
        if (h == 1.0)
            throw std::invalid_argument(
                "compute_distances: Renyi order 1 is the Shannon limit; use shannon_distance");
    }
    const std::size_t nq = qs.size();
    const std::size_t nh = h_orders.size();
    const int n = spec.order_n;
    const double span = spec.t1 - spec.t0;
    const double volume_n = std::pow(span * four_pi, n);
    const auto consts = detail::make_scale_consts(model, qs);
    int qmax = 0;
    for (int q : qs)
        qmax = std::max(qmax, q);

    std::vector<detail::DistAccum> total(nq, detail::DistAccum(nh));
    double n_eff = 0.0;

    if (n == 1) {
        // order 1 has no pairs: the integrand is identically zero and both
        // integrators are exact (summing N copies of 1/N would drift off 1)
        for (std::size_t k = 0; k < nq; ++k)
            total[k].add(1.0, 0.0, h_orders);
    } else if (spec.method == IntegrationMethod::monte_carlo) {
        n_eff = static_cast<double>(spec.samples);
        const long long chunk_size = 65536;
        const long long n_chunks = (spec.samples + chunk_size - 1) / chunk_size;
        std::vector<std::vector<detail::DistAccum>> per_chunk(
            static_cast<std::size_t>(n_chunks),
            std::vector<detail::DistAccum>(nq, detail::DistAccum(nh)));
        const RandomStream base(spec.seed);

        std::atomic<long long> next_chunk{0};
        auto worker = [&]() {
            std::vector<double> pleg(static_cast<std::size_t>(qmax) + 1);
            const int n_pairs = n * (n - 1) / 2;
            std::vector<double> taus(static_cast<std::size_t>(std::max(n_pairs, 1)));
            std::vector<double> l1p(taus.size());
            std::vector<std::vector<double>> pq(
                taus.size(), std::vector<double>(nq));
            std::vector<double> tt(static_cast<std::size_t>(n));
            std::vector<SpherePoint> zz(static_cast<std::size_t>(n));
            for (;;) {
                const long long c = next_chunk.fetch_add(1);
                if (c >= n_chunks)
                    break;
                RandomStream rng = base.split(static_cast<std::uint64_t>(c));
                auto& acc = per_chunk[static_cast<std::size_t>(c)];
                const long long lo = c * chunk_size;
                const long long hi = std::min(spec.samples, lo + chunk_size);
                for (long long s = lo; s < hi; ++s) {
                    for (int i = 0; i < n; ++i)
                        tt[static_cast<std::size_t>(i)] = rng.uniform(spec.t0, spec.t1);
                    for (int i = 0; i < n; ++i)
                        zz[static_cast<std::size_t>(i)] = sample_uniform_sphere(rng);
                    int p = 0;
                    for (int i = 0; i < n; ++i)
                        for (int j = i + 1; j < n; ++j, ++p) {
                            const double tau = std::abs(tt[i] - tt[j]);
                            taus[static_cast<std::size_t>(p)] = tau;
                            l1p[static_cast<std::size_t>(p)] = std::log1p(tau * tau);
                            double u = zz[i].dot(zz[j]);
                            if (u > 1.0) u = 1.0;
                            if (u < -1.0) u = -1.0;
                            legendre_all(qmax, u, pleg);
                            for (std::size_t k = 0; k < nq; ++k)
                                pq[static_cast<std::size_t>(p)][k] =
                                    pleg[static_cast<std::size_t>(qs[k])];
                        }
                    for (std::size_t k = 0; k < nq; ++k) {
                        double e = 0.0; // S/2 = sum over unordered pairs of b_q P_q
                        for (int pp = 0; pp < n_pairs; ++pp)
                            e += detail::scale_coef_fast(consts[k],
                                                         taus[static_cast<std::size_t>(pp)],
                                                         l1p[static_cast<std::size_t>(pp)]) *
                                 pq[static_cast<std::size_t>(pp)][k];
                        acc[k].add(1.0, e, h_orders);
                    }
                }
            }
        };
        if (spec.workers == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (int w = 0; w < spec.workers; ++w)
                pool.emplace_back(worker);
            for (auto& th : pool)
                th.join();
        }
        for (auto& chunk : per_chunk)
            for (std::size_t k = 0; k < nq; ++k)
                total[k].merge(chunk[k]);
        for (std::size_t k = 0; k < nq; ++k)
            total[k].divide_by(n_eff);
    } else if (n == 2) {
        // reduce to (lag, cos-distance): lag density 2(T-tau)/T^2, u uniform
        const int kt = spec.nodes_per_axis;
        const int ku = 2 * spec.nodes_per_axis - 1;
        const auto taus = detail::linspace(0.0, span, kt);
        std::vector<double> dens(taus.size());
        for (std::size_t i = 0; i < taus.size(); ++i)
            dens[i] = 2.0 * (span - taus[i]) / (span * span);
        const auto wt = detail::trap_weights(taus, dens);
        const auto us = detail::linspace(-1.0, 1.0, ku);
        const auto wu = detail::trap_weights(us, std::vector<double>(us.size(), 0.5));
        std::vector<double> pleg;
        for (int j = 0; j < ku; ++j) {
            legendre_all(qmax, us[static_cast<std::size_t>(j)], pleg);
            for (int i = 0; i < kt; ++i) {
                const double w = wt[static_cast<std::size_t>(i)] * wu[static_cast<std::size_t>(j)];
                const double tau = taus[static_cast<std::size_t>(i)];
                const double l1p = std::log1p(tau * tau);
                for (std::size_t k = 0; k < nq; ++k) {
                    const double e = detail::scale_coef_fast(consts[k], tau, l1p) *
                                     pleg[static_cast<std::size_t>(qs[k])];
                    total[k].add(w, e, h_orders);
                }
            }
        }
    } else {
        // order 3: grid over (t1,t2,t3, u1,u2,u3, phi2,phi3); the first
        // longitude is pinned by rotational symmetry about the pole axis
        const int K = spec.nodes_per_axis;
        const auto tn = detail::linspace(spec.t0, spec.t1, K);
        const auto wt = detail::trap_weights(tn, std::vector<double>(tn.size(), 1.0 / span));
        const auto un = detail::linspace(-1.0, 1.0, K);
        const auto wu = detail::trap_weights(un, std::vector<double>(un.size(), 0.5));
        const double wphi = 1.0 / K;

        // b_q at every time-pair lag, P_q at every (u_a, u_b, delta-phi)
        std::vector<std::vector<double>> blag(nq,
            std::vector<double>(static_cast<std::size_t>(K) * K));
        for (int i = 0; i < K; ++i)
            for (int j = 0; j < K; ++j) {
                const double tau = std::abs(tn[static_cast<std::size_t>(i)] -
                                            tn[static_cast<std::size_t>(j)]);
                const double l1p = std::log1p(tau * tau);
                for (std::size_t k = 0; k < nq; ++k)
                    blag[k][static_cast<std::size_t>(i) * K + j] =
                        detail::scale_coef_fast(consts[k], tau, l1p);
            }
        std::vector<std::vector<double>> ptab(nq,
            std::vector<double>(static_cast<std::size_t>(K) * K * K));
        std::vector<double> pleg;
        for (int a = 0; a < K; ++a)
            for (int b = 0; b < K; ++b) {
                const double ua = un[static_cast<std::size_t>(a)];
                const double ub = un[static_cast<std::size_t>(b)];
                const double sa = std::sqrt(std::max(0.0, 1.0 - ua * ua));
                const double sb = std::sqrt(std::max(0.0, 1.0 - ub * ub));
                for (int d = 0; d < K; ++d) {
                    double dot = ua * ub + sa * sb * std::cos(2.0 * pi * d / K);
                    if (dot > 1.0) dot = 1.0;
                    if (dot < -1.0) dot = -1.0;
                    legendre_all(qmax, dot, pleg);
                    for (std::size_t k = 0; k < nq; ++k)
                        ptab[k][(static_cast<std::size_t>(a) * K + b) * K + d] =
                            pleg[static_cast<std::size_t>(qs[k])];
                }
            }

        for (int i1 = 0; i1 < K; ++i1)
            for (int i2 = 0; i2 < K; ++i2)
                for (int i3 = 0; i3 < K; ++i3) {
                    const double wt123 = wt[static_cast<std::size_t>(i1)] *
                                         wt[static_cast<std::size_t>(i2)] *
                                         wt[static_cast<std::size_t>(i3)];
                    const std::size_t l12 = static_cast<std::size_t>(i1) * K + i2;
                    const std::size_t l13 = static_cast<std::size_t>(i1) * K + i3;
                    const std::size_t l23 = static_cast<std::size_t>(i2) * K + i3;
                    for (int j1 = 0; j1 < K; ++j1)
                        for (int j2 = 0; j2 < K; ++j2)
                            for (int j3 = 0; j3 < K; ++j3) {
                                const double wu123 = wu[static_cast<std::size_t>(j1)] *
                                                     wu[static_cast<std::size_t>(j2)] *
                                                     wu[static_cast<std::size_t>(j3)];
                                const std::size_t b12 = static_cast<std::size_t>(j1) * K + j2;
                                const std::size_t b13 = static_cast<std::size_t>(j1) * K + j3;
                                const std::size_t b23 = static_cast<std::size_t>(j2) * K + j3;
                                for (int k2 = 0; k2 < K; ++k2)
                                    for (int k3 = 0; k3 < K; ++k3) {
                                        const int dk = (k2 - k3 + K) % K;
                                        const double w =
                                            wt123 * wu123 * wphi * wphi;
                                        for (std::size_t k = 0; k < nq; ++k) {
                                            const double e =
                                                blag[k][l12] * ptab[k][b12 * static_cast<std::size_t>(K) + k2] +
                                                blag[k][l13] * ptab[k][b13 * static_cast<std::size_t>(K) + k3] +
                                                blag[k][l23] * ptab[k][b23 * static_cast<std::size_t>(K) + dk];
                                            total[k].add(w, e, h_orders);
                                        }
                                    }
                            }
                }
    }

    DistanceTable out;
    out.h_orders = h_orders;
    out.rows.resize(nq);
    for (std::size_t k = 0; k < nq; ++k) {
        ScaleDistances& row = out.rows[k];
        row.q = qs[k];
        const double rho_q = std::exp(0.5 * scale_coefficient_extended(model, qs[k], 0.0));
        const double rho_q_n = std::pow(rho_q, n);
        row.shannon = detail::finalize_shannon(total[k], n_eff, rho_q_n, volume_n);
        row.renyi.resize(nh);
        for (std::size_t j = 0; j < nh; ++j)
            row.renyi[j] = detail::finalize_renyi(total[k], j, h_orders[j], n_eff,
                                                  rho_q_n, volume_n);
    }
    return out;
}

inline DistanceEstimate shannon_distance(const CovarianceModel& model, int q,
                                         const IntegrationSpec& spec) {
    return compute_distances(model, std::vector<int>{q}, {}, spec).rows[0].shannon;
}

inline DistanceEstimate renyi_distance(const CovarianceModel& model, int q, double h,
                                       const IntegrationSpec& spec) {
    if (h == 1.0)
        throw std::invalid_argument(
            "renyi_distance: order 1 is the Shannon limit; use shannon_distance");
    return compute_distances(model, std::vector<int>{q}, std::vector<double>{h}, spec)
        .rows[0]
        .renyi[0];
}

inline double clustering_index(double renyi_value) { return std::exp(renyi_value); }

enum class Classification { aggregation, regular, inhibition };

inline const char* to_string(Classification c) {
    switch (c) {
    case Classification::aggregation: return "aggregation";
    case Classification::inhibition: return "inhibition";
    default: return "regular";
    }
}

// three-way call on a distance estimate against its error bar
inline Classification classify_scale(double value, double std_error, double z = 3.0) {
    if (!(std_error >= 0.0))
        throw std::invalid_argument("classify_scale: negative std_error");
    if (value > z * std_error)
        return Classification::aggregation;
    if (value < -z * std_error)
        return Classification::inhibition;
    return Classification::regular;
}

struct PolyFit {
    std::vector<double> coeffs; // ascending powers
    double residual_norm = 0.0;
};

// least-squares polynomial through (xs, ys) with column-scaled QR
inline PolyFit polyfit_smooth(const std::vector<double>& xs, const std::vector<double>& ys,
                              int degree = 5) {
    if (degree < 0)
        throw std::invalid_argument("polyfit_smooth: negative degree");
    const std::size_t npts = xs.size();
    if (npts != ys.size() || npts < static_cast<std::size_t>(degree) + 1)
        throw std::invalid_argument("polyfit_smooth: need at least degree+1 points");
    const Eigen::Index rows = static_cast<Eigen::Index>(npts);
    const Eigen::Index cols = degree + 1;
    Eigen::MatrixXd v(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        double p = 1.0;
        for (Eigen::Index j = 0; j < cols; ++j) {
            v(i, j) = p;
            p *= xs[static_cast<std::size_t>(i)];
        }
    }
    Eigen::VectorXd scale(cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        const double s = v.col(j).cwiseAbs().maxCoeff();
        scale(j) = s > 0.0 ? s : 1.0;
    }
    const Eigen::MatrixXd vs = v * scale.cwiseInverse().asDiagonal();
    Eigen::VectorXd y(rows);
    for (Eigen::Index i = 0; i < rows; ++i)
        y(i) = ys[static_cast<std::size_t>(i)];
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(vs);
    if (qr.rank() < cols)
        throw std::runtime_error("polyfit_smooth: design matrix is rank deficient");
    const Eigen::VectorXd cs = qr.solve(y);
    PolyFit out;
    out.coeffs.resize(static_cast<std::size_t>(cols));
    for (Eigen::Index j = 0; j < cols; ++j)
        out.coeffs[static_cast<std::size_t>(j)] = cs(j) / scale(j);
    out.residual_norm = (vs * cs - y).norm();
    return out;
}

}
