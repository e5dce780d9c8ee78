#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "sphecox/covariance.hpp"
#include "sphecox/field.hpp"
#include "sphecox/legendre.hpp"
#include "sphecox/rng.hpp"
#include "sphecox/sphere.hpp"

namespace sphecox {

// Equal-area spherical lattice: bands uniform in the z-coordinate, uniform
// longitudes, nodes at cell centers.
struct SphereGrid {
    int n_bands = 48;
    int n_lon = 96;

    void validate() const {
        if (n_bands < 1 || n_lon < 1)
            throw std::invalid_argument("SphereGrid: need positive band/longitude counts");
    }

    int size() const { return n_bands * n_lon; }

    SpherePoint node(int band, int lon) const {
        const double u = -1.0 + (2.0 * band + 1.0) / n_bands;
        const double phi = 2.0 * pi * (lon + 0.5) / n_lon;
        const double s = std::sqrt(std::max(0.0, 1.0 - u * u));
        SpherePoint p;
        p.x = s * std::cos(phi);
        p.y = s * std::sin(phi);
        p.z = u;
        return p;
    }

    SpherePoint node_flat(int k) const { return node(k / n_lon, k % n_lon); }
};

// field values at every (time node, lattice node); row k = time node k
inline Eigen::MatrixXd lattice_field_values(const FieldRealization& f,
                                            const SphereGrid& sg) {
    sg.validate();
    const int m = f.model.truncation;
    const int nn = sg.size();
    Eigen::MatrixXd p(m + 1, nn);
    std::vector<double> pleg;
    for (int k = 0; k < nn; ++k) {
        double u = f.pole.dot(sg.node_flat(k));
        if (u > 1.0) u = 1.0;
        if (u < -1.0) u = -1.0;
        legendre_all(m, u, pleg);
        for (int l = 0; l <= m; ++l)
            p(l, k) = pleg[static_cast<std::size_t>(l)];
    }
    for (int l = 0; l <= m; ++l)
        p.row(l) *= field_basis_weight(f.model, l);
    return f.coeffs.transpose() * p;
}

// Empirical temporal covariance coefficients: row l holds B-hat_l at the
// requested lags.
struct CoefCovTable {
    std::vector<double> lags;
    Eigen::MatrixXd bhat;
};

// Streaming estimator of B_l(tau) from replicated lattice field values.
// Products between seeded random node pairs are averaged per time lag into
// cos-distance bins (enforcing isotropy); finalize() projects the binned
// covariance curve onto the Legendre basis. Replicates are consumed one at a
// time, so arbitrarily many fit in constant memory.
class CoefCovAccumulator {
  public:
    CoefCovAccumulator(const TimeGrid& tg, const SphereGrid& sg, int l_max,
                       const std::vector<int>& lag_indices, int n_pairs = 2000,
                       int n_bins = 64, std::uint64_t seed = 12345)
        : tg_(tg), l_max_(l_max), lag_indices_(lag_indices), n_bins_(n_bins),
          nn_(sg.size()) {
        tg.validate();
        sg.validate();
        if (l_max < 0 || l_max > legendre_max_degree)
            throw std::invalid_argument("empirical_coef_cov: degree out of [0, 64]");
        if (lag_indices.empty())
            throw std::invalid_argument("empirical_coef_cov: no lags requested");
        for (int L : lag_indices)
            if (L < 0 || L >= tg.nodes)
                throw std::invalid_argument("empirical_coef_cov: lag index outside the grid");
        if (n_pairs < 1 || n_bins < 2)
            throw std::invalid_argument("empirical_coef_cov: bad pair/bin counts");
        if (nn_ < 2)
            throw std::invalid_argument("empirical_coef_cov: lattice too small");

        RandomStream rng(seed);
        pi_idx_.resize(static_cast<std::size_t>(n_pairs));
        pj_idx_.resize(static_cast<std::size_t>(n_pairs));
        pbin_.resize(static_cast<std::size_t>(n_pairs));
        for (int p = 0; p < n_pairs; ++p) {
            int i = 0, j = 0;
            do {
                i = static_cast<int>(rng.uniform() * nn_);
                j = static_cast<int>(rng.uniform() * nn_);
                if (i >= nn_) i = nn_ - 1;
                if (j >= nn_) j = nn_ - 1;
            } while (i == j);
            pi_idx_[static_cast<std::size_t>(p)] = i;
            pj_idx_[static_cast<std::size_t>(p)] = j;
            const double u = sg.node_flat(i).dot(sg.node_flat(j));
            int b = static_cast<int>((u + 1.0) * 0.5 * n_bins);
            if (b < 0) b = 0;
            if (b >= n_bins) b = n_bins - 1;
            pbin_[static_cast<std::size_t>(p)] = b;
        }
        const std::size_t nlag = lag_indices.size();
        acc_.assign(nlag, std::vector<double>(static_cast<std::size_t>(n_bins), 0.0));
        cnt_.assign(nlag, std::vector<double>(static_cast<std::size_t>(n_bins), 0.0));
    }

    void add(const Eigen::MatrixXd& values) {
        if (values.rows() != tg_.nodes || values.cols() != nn_)
            throw std::invalid_argument("empirical_coef_cov: replicate shape mismatch");
        for (std::size_t p = 0; p < pi_idx_.size(); ++p) {
            const int i = pi_idx_[p];
            const int j = pj_idx_[p];
            const int b = pbin_[p];
            for (std::size_t li = 0; li < lag_indices_.size(); ++li) {
                const int lag = lag_indices_[li];
                const int len = tg_.nodes - lag;
                const double s =
                    values.col(i).head(len).dot(values.col(j).tail(len)) +
                    values.col(j).head(len).dot(values.col(i).tail(len));
                acc_[li][static_cast<std::size_t>(b)] += s;
                cnt_[li][static_cast<std::size_t>(b)] += 2.0 * len;
            }
        }
        ++n_reps_;
    }

    std::size_t count() const { return n_reps_; }

    CoefCovTable finalize() const {
        if (n_reps_ < 50)
            throw std::invalid_argument("empirical_coef_cov: need at least 50 replicates");
        const std::size_t nlag = lag_indices_.size();
        CoefCovTable table;
        table.lags.resize(nlag);
        table.bhat.resize(l_max_ + 1, static_cast<Eigen::Index>(nlag));
        const double du = 2.0 / n_bins_;
        std::vector<std::vector<double>> pmid(static_cast<std::size_t>(n_bins_));
        for (int b = 0; b < n_bins_; ++b) {
            const double umid = -1.0 + (b + 0.5) * du;
            legendre_all(l_max_, umid, pmid[static_cast<std::size_t>(b)]);
        }
        for (std::size_t li = 0; li < nlag; ++li) {
            table.lags[li] = lag_indices_[li] * tg_.dt();
            for (int b = 0; b < n_bins_; ++b)
                if (!(cnt_[li][static_cast<std::size_t>(b)] > 0.0))
                    throw std::runtime_error(
                        "empirical_coef_cov: empty cos-distance bin; increase n_pairs");
            for (int l = 0; l <= l_max_; ++l) {
                double s = 0.0;
                for (int b = 0; b < n_bins_; ++b)
                    s += acc_[li][static_cast<std::size_t>(b)] /
                         cnt_[li][static_cast<std::size_t>(b)] *
                         pmid[static_cast<std::size_t>(b)][static_cast<std::size_t>(l)] * du;
                table.bhat(l, static_cast<Eigen::Index>(li)) = 2.0 * pi * s;
            }
        }
        return table;
    }

  private:
    TimeGrid tg_;
    int l_max_;
    std::vector<int> lag_indices_;
    int n_bins_;
    int nn_;
    std::size_t n_reps_ = 0;
    std::vector<int> pi_idx_, pj_idx_, pbin_;
    std::vector<std::vector<double>> acc_, cnt_;
};

inline CoefCovTable empirical_coef_cov(const std::vector<Eigen::MatrixXd>& reps,
                                       const TimeGrid& tg, const SphereGrid& sg,
                                       int l_max, const std::vector<int>& lag_indices,
                                       int n_pairs = 2000, int n_bins = 64,
                                       std::uint64_t seed = 12345) {
    CoefCovAccumulator acc(tg, sg, l_max, lag_indices, n_pairs, n_bins, seed);
    for (const auto& v : reps)
        acc.add(v);
    return acc.finalize();
}

struct FitResult {
    double theta_hat = 1.0;
    double residual = 0.0;
};

namespace detail {
inline double fit_objective(const CoefCovTable& table, const CovarianceModel& family,
                            int l_max, double theta) {
    CovarianceModel m = family;
    m.theta = theta;
    double s = 0.0;
    for (int l = 0; l <= l_max; ++l)
        for (std::size_t li = 0; li < table.lags.size(); ++li) {
            const double r = table.bhat(l, static_cast<Eigen::Index>(li)) -
                             coef_cov_extended(m, l, table.lags[li]);
            s += r * r;
        }
    if (!std::isfinite(s))
        throw std::runtime_error("fit_theta: non-finite residual in the search bracket");
    return s;
}
}

// Least-squares recovery of theta over log theta in [log 1e-4, log 1e4]:
// coarse scan to bracket the global minimum, then golden-section refinement.
inline FitResult fit_theta(const CoefCovTable& table, const CovarianceModel& family,
                           int l_max) {
    if (table.bhat.rows() < 2 || l_max < 1)
        throw std::invalid_argument("fit_theta: need at least 2 degrees");
    if (l_max + 1 > table.bhat.rows())
        throw std::invalid_argument("fit_theta: table does not cover l_max");
    if (table.lags.size() < 5)
        throw std::invalid_argument("fit_theta: need at least 5 lags");

    const double xlo = std::log(1e-4), xhi = std::log(1e4);
    auto obj = [&](double x) {
        return detail::fit_objective(table, family, l_max, std::exp(x));
    };

    const int scan = 256;
    int best = 0;
    double best_v = obj(xlo);
    for (int i = 1; i < scan; ++i) {
        const double x = xlo + (xhi - xlo) * i / (scan - 1.0);
        const double v = obj(x);
        if (v < best_v) {
            best_v = v;
            best = i;
        }
    }
    double a = xlo + (xhi - xlo) * std::max(0, best - 1) / (scan - 1.0);
    double b = xlo + (xhi - xlo) * std::min(scan - 1, best + 1) / (scan - 1.0);

    const double gr = 0.6180339887498949;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = obj(c), fd = obj(d);
    for (int it = 0; it < 200 && (b - a) > 1e-13; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = obj(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = obj(d);
        }
    }
    FitResult r;
    const double x = 0.5 * (a + b);
    r.theta_hat = std::exp(x);
    r.residual = obj(x);
    return r;
}

}
