#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "sphecox/field.hpp"
#include "sphecox/summaries.hpp"

using namespace sphecox;

namespace {

IntegrationSpec k_spec(long long samples, std::uint64_t seed) {
    IntegrationSpec s;
    s.samples = samples;
    s.seed = seed;
    return s;
}

PointPattern tripod_pattern() {
    // three events, all pairwise geodesic distances pi/2, gaps 1, 5, 4
    PointPattern p;
    p.t0 = 0.0;
    p.t1 = 10.0;
    p.events.push_back(Event{0.0, SpherePoint(0, 0, 1)});
    p.events.push_back(Event{1.0, SpherePoint(1, 0, 0)});
    p.events.push_back(Event{5.0, SpherePoint(0, 1, 0)});
    return p;
}

} // namespace

TEST_CASE("Poisson K has the closed form", "[summaries]") {
    CHECK(k_pois(0.0, pi / 2) == 0.0);
    CHECK(k_pois(3.0, 0.0) == 0.0);
    CHECK(k_pois(5.0, pi / 2) == Catch::Approx(10.0 * pi).margin(1e-12));
    CHECK(k_pois(1.0, pi) == Catch::Approx(4.0 * pi).margin(1e-12));
    CHECK_THROWS_AS(k_pois(-1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(k_pois(1.0, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(k_pois(1.0, 4.0), std::invalid_argument);
}

TEST_CASE("the self-consistent null carries the window edge", "[summaries]") {
    const double T = 10.0;
    // full-range corner equals the whole window volume
    CHECK(k_null_selfconsistent(T, pi, T) ==
          Catch::Approx(T * four_pi).margin(1e-10));
    CHECK(k_null_selfconsistent(12.0, pi, T) ==
          k_null_selfconsistent(T, pi, T)); // clamped past the span
    CHECK(k_null_selfconsistent(1.0, pi / 2, T) ==
          Catch::Approx(2.0 * pi * (2.0 - 0.1)).margin(1e-12));
    // two-sided lag counting: (2 - t/T) times the one-sided form, so the
    // short-range end sits just under twice k_pois and meets it at t = T
    CHECK(k_null_selfconsistent(0.1, 1.0, T) ==
          Catch::Approx(1.99 * k_pois(0.1, 1.0)).margin(1e-12));
    CHECK(k_null_selfconsistent(T, 1.0, T) ==
          Catch::Approx(k_pois(T, 1.0)).margin(1e-10));
    CHECK_THROWS_AS(k_null_selfconsistent(1.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("null grids tabulate the chosen baseline", "[summaries]") {
    const auto thetas = default_theta_nodes();
    const auto ts = default_time_nodes();
    REQUIRE(thetas.size() == 15);
    REQUIRE(ts.size() == 15);
    CHECK(thetas.front() == 0.0);
    CHECK(thetas.back() == Catch::Approx(pi).margin(1e-15));
    CHECK(ts.front() == 0.0);
    CHECK(ts.back() == 10.0);

    const KGrid self = null_kgrid(thetas, ts, 10.0);
    const KGrid plain = null_kgrid(thetas, ts, 10.0, Baseline::paper);
    CHECK(self.values(7, 7) ==
          k_null_selfconsistent(ts[7], thetas[7], 10.0));
    CHECK(plain.values(7, 7) == k_pois(ts[7], thetas[7]));
    CHECK(self.std_errors.cwiseAbs().maxCoeff() == 0.0);
    // the two baselines meet at the full-window corner and split inside
    CHECK(plain.values(14, 14) == Catch::Approx(self.values(14, 14)).margin(1e-10));
    CHECK(plain.values(7, 7) < self.values(7, 7));
}

TEST_CASE("the degenerate model sits on the self-consistent null",
          "[summaries]") {
    CovarianceModel m;
    m.variance_scale = 0.0;
    const auto thetas = default_theta_nodes();
    const auto ts = default_time_nodes();
    const KGrid k = k_model(m, thetas, ts, 10.0, k_spec(20000, 4));
    const KGrid null_g = null_kgrid(thetas, ts, 10.0);
    for (Eigen::Index i = 0; i < k.values.rows(); ++i)
        for (Eigen::Index j = 0; j < k.values.cols(); ++j) {
            INFO("node (" << i << "," << j << ")");
            CHECK(std::abs(k.values(i, j) - null_g.values(i, j)) <=
                  4.0 * k.std_errors(i, j) + 1e-12);
        }
}

TEST_CASE("K surfaces are monotone in both arguments", "[summaries]") {
    const CovarianceModel m;
    const auto thetas = default_theta_nodes();
    const auto ts = default_time_nodes();
    const KGrid k = k_model(m, thetas, ts, 10.0, k_spec(20000, 8));
    for (Eigen::Index i = 0; i < k.values.rows(); ++i)
        for (Eigen::Index j = 1; j < k.values.cols(); ++j)
            CHECK(k.values(i, j) >= k.values(i, j - 1));
    for (Eigen::Index j = 0; j < k.values.cols(); ++j)
        for (Eigen::Index i = 1; i < k.values.rows(); ++i)
            CHECK(k.values(i, j) >= k.values(i - 1, j));
}

TEST_CASE("k summaries validate their inputs", "[summaries]") {
    const CovarianceModel m;
    const auto thetas = default_theta_nodes();
    const auto ts = default_time_nodes();
    CHECK_THROWS_AS(k_scale(m, 65, thetas, ts, 10.0, k_spec(1000, 0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(k_scale_minus_null_multi(m, {}, thetas, ts, 10.0,
                                             k_spec(1000, 0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(k_model(m, {}, ts, 10.0, k_spec(1000, 0)),
                    std::invalid_argument);
    CHECK_NOTHROW(k_scale(m, 30, {pi}, {10.0}, 10.0, k_spec(1000, 0)));
}

TEST_CASE("coupled and uncoupled scale differences agree", "[summaries]") {
    const CovarianceModel m;
    const auto thetas = default_theta_nodes();
    const auto ts = default_time_nodes();
    const KGrid coupled =
        k_scale_minus_null(m, 1, thetas, ts, 10.0, k_spec(200000, 15));
    const KGrid raw = k_scale(m, 1, thetas, ts, 10.0, k_spec(200000, 16));
    const KGrid null_g = null_kgrid(thetas, ts, 10.0);
    for (Eigen::Index i : {3, 7, 14})
        for (Eigen::Index j : {3, 7, 14}) {
            const double unc = raw.values(i, j) - null_g.values(i, j);
            const double s = std::sqrt(
                coupled.std_errors(i, j) * coupled.std_errors(i, j) +
                raw.std_errors(i, j) * raw.std_errors(i, j));
            INFO("node (" << i << "," << j << ")");
            CHECK(std::abs(coupled.values(i, j) - unc) <= 3.0 * s + 1e-12);
        }
    // away from the corner the indicator noise dominates the raw estimate,
    // so the coupled error bars are far tighter there
    CHECK(coupled.std_errors(7, 7) < 0.1 * raw.std_errors(7, 7));
}

TEST_CASE("empirical K hits the exact corner value", "[summaries]") {
    const PointPattern p = tripod_pattern();
    const double vol = 10.0 * four_pi;
    const std::vector<double> thetas = {pi / 4, pi};
    const std::vector<double> ts = {0.5, 10.0};
    const KGrid plug = k_empirical(p, thetas, ts);
    // corner counts every ordered pair: n(n-1) / n^2 * volume
    CHECK(plug.values(1, 1) == Catch::Approx(vol * 6.0 / 9.0).margin(1e-10));
    CHECK(plug.values(0, 0) == 0.0);
    const KGrid known = k_empirical(p, thetas, ts, 2.0);
    CHECK(known.values(1, 1) == Catch::Approx(6.0 / (4.0 * vol)).margin(1e-14));

    PointPattern tiny;
    tiny.t0 = 0.0;
    tiny.t1 = 1.0;
    tiny.events.push_back(Event{0.5, SpherePoint(0, 0, 1)});
    CHECK_THROWS_AS(k_empirical(tiny, thetas, ts), std::invalid_argument);
    CHECK_THROWS_AS(k_empirical(p, thetas, ts, 0.0), std::invalid_argument);
}

TEST_CASE("empirical K of Poisson patterns matches the null on average",
          "[summaries]") {
    CovarianceModel m;
    m.variance_scale = 0.0; // unit intensity
    const TimeGrid grid{0.0, 10.0, 5};
    const auto thetas = default_theta_nodes();
    const auto ts = default_time_nodes();
    const int reps = 200;
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(15, 15);
    Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(15, 15);
    RandomStream rng(60);
    for (int r = 0; r < reps; ++r) {
        RandomStream sub = rng.split(static_cast<std::uint64_t>(r));
        const FieldRealization f = simulate_coefficients(m, grid, sub);
        const PointPattern p = sample_pattern(f, sub);
        const KGrid k = k_empirical(p, thetas, ts, 1.0);
        s += k.values;
        s2 += k.values.cwiseProduct(k.values);
    }
    const KGrid null_g = null_kgrid(thetas, ts, 10.0);
    for (Eigen::Index i : {1, 4, 7, 10, 14})
        for (Eigen::Index j : {1, 4, 7, 10, 14}) {
            const double mean = s(i, j) / reps;
            const double sd = std::sqrt(
                std::max(0.0, s2(i, j) / reps - mean * mean));
            INFO("node (" << i << "," << j << ")");
            CHECK(std::abs(mean - null_g.values(i, j)) <=
                  4.0 * sd / std::sqrt(static_cast<double>(reps)) + 1e-9);
        }
}

TEST_CASE("nearest-neighbour surfaces count events once", "[summaries]") {
    const PointPattern p = tripod_pattern();
    const std::vector<double> thetas = {pi / 4, pi / 2, pi};
    const std::vector<double> ts = {0.5, 1.0, 4.0};
    const KGrid g = g_empirical(p, thetas, ts);
    // every nearest distance is pi/2; nearest gaps are 1, 1, 4
    CHECK(g.values(0, 2) == 0.0);
    CHECK(g.values(1, 0) == 0.0);
    CHECK(g.values(1, 1) == Catch::Approx(2.0 / 3.0).margin(1e-14));
    CHECK(g.values(1, 2) == Catch::Approx(1.0).margin(1e-14));
    CHECK(g.values(2, 2) == Catch::Approx(1.0).margin(1e-14));
    for (Eigen::Index i = 0; i < 3; ++i)
        for (Eigen::Index j = 0; j < 3; ++j) {
            CHECK(g.values(i, j) >= 0.0);
            CHECK(g.values(i, j) <= 1.0);
        }
}

TEST_CASE("surface classification needs a dominant one-sided excess",
          "[summaries]") {
    const auto thetas = default_theta_nodes();
    const auto ts = default_time_nodes();
    const KGrid null_g = null_kgrid(thetas, ts, 10.0);
    CHECK(classify_from_k(null_g, null_g) == Classification::regular);

    KGrid up = null_g;
    up.values.array() += 1.0;
    CHECK(classify_from_k(up, null_g) == Classification::aggregation);
    KGrid down = null_g;
    down.values.array() -= 1.0;
    CHECK(classify_from_k(down, null_g) == Classification::inhibition);

    // one opposite-signed cell vetoes the call
    KGrid mixed = up;
    mixed.values(0, 0) = null_g.values(0, 0) - 1.0;
    CHECK(classify_from_k(mixed, null_g) == Classification::regular);

    // cells inside the error band do not count toward the fraction
    KGrid faint = up;
    faint.std_errors.setConstant(10.0);
    CHECK(classify_from_k(faint, null_g) == Classification::regular);

    // exactly 80 percent of cells above clears the default threshold
    KGrid partial = null_g;
    const Eigen::Index cells = partial.values.size();
    const Eigen::Index lift = (cells * 4) / 5;
    for (Eigen::Index k = 0; k < lift; ++k)
        partial.values(k / 15, k % 15) += 1.0;
    CHECK(classify_from_k(partial, null_g) == Classification::aggregation);

    KGrid other = null_g;
    other.ts[3] += 0.5;
    CHECK_THROWS_AS(classify_from_k(other, null_g), std::invalid_argument);
}
