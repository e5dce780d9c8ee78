#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

#include "sphecox/cox.hpp"
#include "sphecox/covariance.hpp"
#include "sphecox/distances.hpp"
#include "sphecox/legendre.hpp"
#include "sphecox/moments.hpp"
#include "sphecox/rng.hpp"
#include "sphecox/sphere.hpp"

namespace sphecox {

// Space-time K summary on a (geodesic distance x time gap) node grid;
// values and per-node MC standard errors (zero for closed forms and
// single-pattern empirical estimates).
struct KGrid {
    std::vector<double> thetas;
    std::vector<double> ts;
    Eigen::MatrixXd values;
    Eigen::MatrixXd std_errors;
};

inline std::vector<double> default_theta_nodes() {
    std::vector<double> v(15);
    for (int i = 0; i < 15; ++i)
        v[static_cast<std::size_t>(i)] = pi * i / 14.0;
    return v;
}

inline std::vector<double> default_time_nodes(double t_max = 10.0) {
    std::vector<double> v(15);
    for (int i = 0; i < 15; ++i)
        v[static_cast<std::size_t>(i)] = t_max * i / 14.0;
    return v;
}

// homogeneous Poisson K, in the published closed form
inline double k_pois(double t, double theta) {
    if (!(t >= 0.0) || !(theta >= 0.0) || theta > pi)
        throw std::invalid_argument("k_pois: arguments out of range");
    return 2.0 * t * pi * (1.0 - std::cos(theta));
}

// Degenerate (unit pair correlation) value of the model-side K integral over
// the bounded window: carries the temporal edge attenuation (2t - t^2/T)
// instead of the unbounded-window 2t, so the null model sits exactly on it.
inline double k_null_selfconsistent(double t, double theta, double t_span) {
    if (!(t >= 0.0) || !(theta >= 0.0) || theta > pi || !(t_span > 0.0))
        throw std::invalid_argument("k_null_selfconsistent: arguments out of range");
    const double tc = std::min(t, t_span);
    return 2.0 * pi * (1.0 - std::cos(theta)) * (2.0 * tc - tc * tc / t_span);
}

enum class Baseline { selfconsistent, paper };

inline KGrid null_kgrid(const std::vector<double>& thetas, const std::vector<double>& ts,
                        double t_span, Baseline baseline = Baseline::selfconsistent) {
    KGrid g;
    g.thetas = thetas;
    g.ts = ts;
    g.values.resize(static_cast<Eigen::Index>(thetas.size()),
                    static_cast<Eigen::Index>(ts.size()));
    g.std_errors = Eigen::MatrixXd::Zero(g.values.rows(), g.values.cols());
    for (Eigen::Index i = 0; i < g.values.rows(); ++i)
        for (Eigen::Index j = 0; j < g.values.cols(); ++j)
            g.values(i, j) = baseline == Baseline::selfconsistent
                                 ? k_null_selfconsistent(ts[static_cast<std::size_t>(j)],
                                                         thetas[static_cast<std::size_t>(i)],
                                                         t_span)
                                 : k_pois(ts[static_cast<std::size_t>(j)],
                                          thetas[static_cast<std::size_t>(i)]);
    return g;
}

namespace detail {

enum class KIntegrand { model_g, scale_g, scale_g_minus_one };

// One MC pass for a family of K summaries: pairs are drawn uniformly on the
// window, the integrand is binned at its (distance, gap) cell, and the grid
// is completed by a cumulative prefix sum. All requested scales share the
// sample set. Deterministic for fixed seed regardless of worker count.
inline std::vector<KGrid> k_mc_pass(const CovarianceModel& model,
                                    const std::vector<int>& qs, KIntegrand kind,
                                    const std::vector<double>& thetas,
                                    const std::vector<double>& ts, double t_span,
                                    const IntegrationSpec& spec) {
    model.validate();
    spec.validate();
    if (thetas.empty() || ts.empty())
        throw std::invalid_argument("k summaries: empty node list");
    const std::size_t nq = kind == KIntegrand::model_g ? 1 : qs.size();
    if (nq == 0)
        throw std::invalid_argument("k summaries: no scales requested");
    const Eigen::Index nr = static_cast<Eigen::Index>(thetas.size());
    const Eigen::Index nc = static_cast<Eigen::Index>(ts.size());

    std::vector<int> ql = qs;
    if (kind == KIntegrand::model_g)
        ql.assign(1, 0);
    int qmax = 0;
    for (int q : ql)
        qmax = std::max(qmax, q);
    if (kind == KIntegrand::model_g)
        qmax = model.truncation;
    const auto consts = detail::make_scale_consts(
        model, kind == KIntegrand::model_g ? [&] {
            std::vector<int> all(static_cast<std::size_t>(model.truncation) + 1);
            for (int l = 0; l <= model.truncation; ++l)
                all[static_cast<std::size_t>(l)] = l;
            return all;
        }() : ql);

    const long long chunk_size = 65536;
    const long long n_chunks = (spec.samples + chunk_size - 1) / chunk_size;
    struct CellSums {
        std::vector<Eigen::MatrixXd> g, g2;
    };
    std::vector<CellSums> per_chunk(static_cast<std::size_t>(n_chunks));
    const RandomStream base(spec.seed);

    std::atomic<long long> next_chunk{0};
    auto worker = [&]() {
        std::vector<double> pleg(static_cast<std::size_t>(qmax) + 1);
        for (;;) {
            const long long c = next_chunk.fetch_add(1);
            if (c >= n_chunks)
                break;
            RandomStream rng = base.split(static_cast<std::uint64_t>(c));
            CellSums& cs = per_chunk[static_cast<std::size_t>(c)];
            cs.g.assign(nq, Eigen::MatrixXd::Zero(nr, nc));
            cs.g2.assign(nq, Eigen::MatrixXd::Zero(nr, nc));
            const long long lo = c * chunk_size;
            const long long hi = std::min(spec.samples, lo + chunk_size);
            for (long long s = lo; s < hi; ++s) {
                const double t1 = rng.uniform(0.0, t_span);
                const double t2 = rng.uniform(0.0, t_span);
                const SpherePoint z1 = sample_uniform_sphere(rng);
                const SpherePoint z2 = sample_uniform_sphere(rng);
                const double dt = std::abs(t1 - t2);
                double u = z1.dot(z2);
                if (u > 1.0) u = 1.0;
                if (u < -1.0) u = -1.0;
                const double d = std::acos(u);
                const auto it = std::lower_bound(thetas.begin(), thetas.end(), d);
                const auto jt = std::lower_bound(ts.begin(), ts.end(), dt);
                if (it == thetas.end() || jt == ts.end())
                    continue;
                const Eigen::Index bi = it - thetas.begin();
                const Eigen::Index bj = jt - ts.begin();
                legendre_all(qmax, u, pleg);
                const double l1p = std::log1p(dt * dt);
                if (kind == KIntegrand::model_g) {
                    double e = 0.0;
                    for (int l = 0; l <= model.truncation; ++l)
                        e += detail::scale_coef_fast(consts[static_cast<std::size_t>(l)],
                                                     dt, l1p) *
                             pleg[static_cast<std::size_t>(l)];
                    const double g = std::exp(e);
                    cs.g[0](bi, bj) += g;
                    cs.g2[0](bi, bj) += g * g;
                } else {
                    for (std::size_t k = 0; k < nq; ++k) {
                        const double e = detail::scale_coef_fast(consts[k], dt, l1p) *
                                         pleg[static_cast<std::size_t>(ql[k])];
                        const double g = kind == KIntegrand::scale_g
                                             ? std::exp(e)
                                             : std::expm1(e);
                        cs.g[k](bi, bj) += g;
                        cs.g2[k](bi, bj) += g * g;
                    }
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

    std::vector<Eigen::MatrixXd> sum_g(nq, Eigen::MatrixXd::Zero(nr, nc));
    std::vector<Eigen::MatrixXd> sum_g2(nq, Eigen::MatrixXd::Zero(nr, nc));
    for (auto& cs : per_chunk) {
        if (cs.g.empty())
            continue;
        for (std::size_t k = 0; k < nq; ++k) {
            sum_g[k] += cs.g[k];
            sum_g2[k] += cs.g2[k];
        }
    }

    const double n_eff = static_cast<double>(spec.samples);
    const double vol = t_span * four_pi;
    std::vector<KGrid> out(nq);
    for (std::size_t k = 0; k < nq; ++k) {
        // cumulative over both axes
        for (Eigen::Index i = 0; i < nr; ++i)
            for (Eigen::Index j = 1; j < nc; ++j) {
                sum_g[k](i, j) += sum_g[k](i, j - 1);
                sum_g2[k](i, j) += sum_g2[k](i, j - 1);
            }
        for (Eigen::Index j = 0; j < nc; ++j)
            for (Eigen::Index i = 1; i < nr; ++i) {
                sum_g[k](i, j) += sum_g[k](i - 1, j);
                sum_g2[k](i, j) += sum_g2[k](i - 1, j);
            }
        KGrid& g = out[k];
        g.thetas = thetas;
        g.ts = ts;
        g.values.resize(nr, nc);
        g.std_errors.resize(nr, nc);
        for (Eigen::Index i = 0; i < nr; ++i)
            for (Eigen::Index j = 0; j < nc; ++j) {
                const double m = sum_g[k](i, j) / n_eff;
                const double m2 = sum_g2[k](i, j) / n_eff;
                g.values(i, j) = vol * m;
                g.std_errors(i, j) =
                    vol * std::sqrt(std::max(0.0, (m2 - m * m) / n_eff));
            }
    }
    return out;
}

}

// model K over the grid (pair correlation from the full kernel)
inline KGrid k_model(const CovarianceModel& model, const std::vector<double>& thetas,
                     const std::vector<double>& ts, double t_span,
                     const IntegrationSpec& spec) {
    return detail::k_mc_pass(model, {}, detail::KIntegrand::model_g, thetas, ts,
                             t_span, spec)[0];
}

// per-scale K_q; scales beyond the truncation use the extended coefficient
inline KGrid k_scale(const CovarianceModel& model, int q, const std::vector<double>& thetas,
                     const std::vector<double>& ts, double t_span,
                     const IntegrationSpec& spec) {
    return detail::k_mc_pass(model, std::vector<int>{q}, detail::KIntegrand::scale_g,
                             thetas, ts, t_span, spec)[0];
}

// Coupled estimator of K_q minus the self-consistent null on shared samples:
// integrates g_q - 1 directly, so the tiny high-scale differences are not
// drowned by the O(1) indicator noise of two separate estimates.
inline std::vector<KGrid> k_scale_minus_null_multi(const CovarianceModel& model,
                                                   const std::vector<int>& qs,
                                                   const std::vector<double>& thetas,
                                                   const std::vector<double>& ts,
                                                   double t_span,
                                                   const IntegrationSpec& spec) {
    return detail::k_mc_pass(model, qs, detail::KIntegrand::scale_g_minus_one, thetas,
                             ts, t_span, spec);
}

inline KGrid k_scale_minus_null(const CovarianceModel& model, int q,
                                const std::vector<double>& thetas,
                                const std::vector<double>& ts, double t_span,
                                const IntegrationSpec& spec) {
    return k_scale_minus_null_multi(model, std::vector<int>{q}, thetas, ts, t_span,
                                    spec)[0];
}

// empirical K with the plug-in intensity n/(|T| nu)
inline KGrid k_empirical(const PointPattern& p, const std::vector<double>& thetas,
                         const std::vector<double>& ts) {
    if (p.size() < 2)
        throw std::invalid_argument("k_empirical: need at least 2 events");
    const double n = static_cast<double>(p.size());
    const double vol = p.span() * four_pi;
    KGrid g;
    g.thetas = thetas;
    g.ts = ts;
    g.values = pairwise_histogram(p, thetas, ts) * (vol / (n * n));
    g.std_errors = Eigen::MatrixXd::Zero(g.values.rows(), g.values.cols());
    return g;
}

// empirical K when the true intensity is known (no plug-in bias)
inline KGrid k_empirical(const PointPattern& p, const std::vector<double>& thetas,
                         const std::vector<double>& ts, double rho_known) {
    if (p.size() < 2)
        throw std::invalid_argument("k_empirical: need at least 2 events");
    if (!(rho_known > 0.0))
        throw std::invalid_argument("k_empirical: intensity must be positive");
    const double vol = p.span() * four_pi;
    KGrid g;
    g.thetas = thetas;
    g.ts = ts;
    g.values = pairwise_histogram(p, thetas, ts) / (rho_known * rho_known * vol);
    g.std_errors = Eigen::MatrixXd::Zero(g.values.rows(), g.values.cols());
    return g;
}

// nearest-neighbour G surface: per event, the spatial and temporal nearest
// neighbours are found independently of each other
inline KGrid g_empirical(const PointPattern& p, const std::vector<double>& thetas,
                         const std::vector<double>& ts) {
    const std::size_t n = p.size();
    if (n < 2)
        throw std::invalid_argument("g_empirical: need at least 2 events");
    KGrid g;
    g.thetas = thetas;
    g.ts = ts;
    const Eigen::Index nr = static_cast<Eigen::Index>(thetas.size());
    const Eigen::Index nc = static_cast<Eigen::Index>(ts.size());
    Eigen::MatrixXd hist = Eigen::MatrixXd::Zero(nr, nc);
    for (std::size_t i = 0; i < n; ++i) {
        double dmin = pi;
        double tmin = p.span();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i)
                continue;
            dmin = std::min(dmin, geodesic_distance(p.events[i].z, p.events[j].z));
            tmin = std::min(tmin, std::abs(p.events[i].t - p.events[j].t));
        }
        const auto it = std::lower_bound(thetas.begin(), thetas.end(), dmin);
        const auto jt = std::lower_bound(ts.begin(), ts.end(), tmin);
        if (it == thetas.end() || jt == ts.end())
            continue;
        hist(it - thetas.begin(), jt - ts.begin()) += 1.0;
    }
    for (Eigen::Index i = 0; i < nr; ++i)
        for (Eigen::Index j = 1; j < nc; ++j)
            hist(i, j) += hist(i, j - 1);
    for (Eigen::Index j = 0; j < nc; ++j)
        for (Eigen::Index i = 1; i < nr; ++i)
            hist(i, j) += hist(i - 1, j);
    g.values = hist / static_cast<double>(n);
    g.std_errors = Eigen::MatrixXd::Zero(nr, nc);
    return g;
}

// Call on a whole K surface against a baseline: aggregation when at least
// the given fraction of cells sit above +z sigma and none below -z sigma,
// inhibition symmetrically, otherwise regular.
inline Classification classify_from_k(const KGrid& k, const KGrid& null_grid,
                                      double z = 3.0, double frac = 0.8) {
    if (k.thetas != null_grid.thetas || k.ts != null_grid.ts ||
        k.values.rows() != null_grid.values.rows() ||
        k.values.cols() != null_grid.values.cols())
        throw std::invalid_argument("classify_from_k: grid mismatch");
    long long up = 0, down = 0;
    const long long total = k.values.rows() * k.values.cols();
    for (Eigen::Index i = 0; i < k.values.rows(); ++i)
        for (Eigen::Index j = 0; j < k.values.cols(); ++j) {
            const double diff = k.values(i, j) - null_grid.values(i, j);
            const double s = std::sqrt(k.std_errors(i, j) * k.std_errors(i, j) +
                                       null_grid.std_errors(i, j) *
                                           null_grid.std_errors(i, j));
            if (diff > z * s)
                ++up;
            else if (diff < -z * s)
                ++down;
        }
    const double need = frac * static_cast<double>(total) - 1e-9;
    if (static_cast<double>(up) >= need && down == 0)
        return Classification::aggregation;
    if (static_cast<double>(down) >= need && up == 0)
        return Classification::inhibition;
    return Classification::regular;
}

}
