#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "sphecox/distances.hpp"

using namespace sphecox;

namespace {

IntegrationSpec mc_spec(long long samples, std::uint64_t seed, int n = 2) {
    IntegrationSpec s;
    s.method = IntegrationMethod::monte_carlo;
    s.samples = samples;
    s.seed = seed;
    s.order_n = n;
    return s;
}

IntegrationSpec trap_spec(int nodes, int n = 2) {
    IntegrationSpec s;
    s.method = IntegrationMethod::trapezoid;
    s.nodes_per_axis = nodes;
    s.order_n = n;
    return s;
}

} // namespace

TEST_CASE("order-one distances vanish identically", "[distances]") {
    for (double theta : {0.01, 1.0, 100.0}) {
        CovarianceModel m;
        m.theta = theta;
        for (const IntegrationSpec& spec :
             {mc_spec(1000, 5, 1), trap_spec(8, 1)}) {
            const DistanceTable t =
                compute_distances(m, {0, 3, 30}, {0.5, 2.0}, spec);
            for (const ScaleDistances& row : t.rows) {
                CHECK(row.shannon.value == 0.0);
                CHECK(row.shannon.value_rel == 0.0);
                CHECK(row.shannon.value_raw == 0.0);
                for (const DistanceEstimate& r : row.renyi)
                    CHECK(r.value == 0.0);
            }
        }
    }
}

TEST_CASE("the degenerate model is exactly null at every order", "[distances]") {
    CovarianceModel m;
    m.variance_scale = 0.0;
    for (int n : {1, 2, 3}) {
        const IntegrationSpec spec = mc_spec(500, 11, n);
        const DistanceTable t = compute_distances(m, {0, 2}, {2.0}, spec);
        const double span_vol = std::log(10.0 * four_pi);
        for (const ScaleDistances& row : t.rows) {
            CHECK(row.shannon.value == 0.0);
            CHECK(row.shannon.value_rel == 0.0);
            CHECK(row.shannon.value_raw == 0.0);
            CHECK(row.renyi[0].value == 0.0);
            CHECK(row.renyi[0].value_rel == 0.0);
            // the plain integral keeps the domain volume factor
            CHECK(row.renyi[0].value_raw ==
                  Catch::Approx(n * span_vol / (2.0 - 1.0)).margin(1e-12));
        }
    }
}

TEST_CASE("invalid requests are rejected", "[distances]") {
    const CovarianceModel m;
    const IntegrationSpec ok = mc_spec(1000, 0);
    CHECK_THROWS_AS(compute_distances(m, {0}, {1.0}, ok), std::invalid_argument);
    CHECK_THROWS_AS(compute_distances(m, {0}, {-0.5}, ok), std::invalid_argument);
    CHECK_THROWS_AS(compute_distances(m, {}, {2.0}, ok), std::invalid_argument);
    CHECK_THROWS_AS(compute_distances(m, {65}, {2.0}, ok), std::invalid_argument);
    CHECK_THROWS_AS(renyi_distance(m, 0, 1.0, ok), std::invalid_argument);

    IntegrationSpec bad = ok;
    bad.samples = 50;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = trap_spec(3);
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = ok;
    bad.order_n = 4;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = ok;
    bad.workers = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = ok;
    bad.t1 = bad.t0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = trap_spec(8, 3); // 8^9 node evaluations is past the budget
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    CHECK_NOTHROW(trap_spec(7, 3).validate());
}

TEST_CASE("Monte Carlo agrees with quadrature", "[distances]") {
    const CovarianceModel m;
    const DistanceTable mc =
        compute_distances(m, {0, 3}, {2.0}, mc_spec(100000, 21));
    const DistanceTable tr = compute_distances(m, {0, 3}, {2.0}, trap_spec(32));
    for (std::size_t k = 0; k < mc.rows.size(); ++k) {
        INFO("scale " << mc.rows[k].q);
        CHECK(std::abs(mc.rows[k].shannon.value_rel -
                       tr.rows[k].shannon.value_rel) <
              4.0 * mc.rows[k].shannon.se_rel + 1e-6);
        CHECK(std::abs(mc.rows[k].renyi[0].value - tr.rows[k].renyi[0].value) <
              4.0 * mc.rows[k].renyi[0].std_error + 1e-6);
    }
}

TEST_CASE("Renyi distances approach the Shannon one near order 1",
          "[distances]") {
    const CovarianceModel m;
    // shared samples make the h -> 1 limit exact up to O(h-1)
    const DistanceTable t =
        compute_distances(m, {0, 3}, {1.001}, mc_spec(200000, 33));
    for (const ScaleDistances& row : t.rows) {
        INFO("scale " << row.q);
        const double sh = row.shannon.value;
        const double re = row.renyi[0].value;
        CHECK(std::abs(re - sh) <= 2e-2 * std::max(std::abs(sh), 1e-6));
    }
}

TEST_CASE("standard errors shrink like the square root of the sample count",
          "[distances]") {
    const CovarianceModel m;
    const DistanceEstimate a = shannon_distance(m, 0, mc_spec(10000, 101));
    const DistanceEstimate b = shannon_distance(m, 0, mc_spec(20000, 202));
    REQUIRE(b.se_rel > 0.0);
    const double ratio = a.se_rel / b.se_rel;
    CHECK(ratio > 1.30);
    CHECK(ratio < 1.55);
}

TEST_CASE("results are deterministic and worker-count invariant",
          "[distances]") {
    const CovarianceModel m;
    const IntegrationSpec s1 = mc_spec(70000, 9);
    IntegrationSpec s2 = s1;
    s2.workers = 2;
    const DistanceTable a = compute_distances(m, {0, 4}, {0.5, 2.0}, s1);
    const DistanceTable b = compute_distances(m, {0, 4}, {0.5, 2.0}, s1);
    const DistanceTable c = compute_distances(m, {0, 4}, {0.5, 2.0}, s2);
    for (std::size_t k = 0; k < a.rows.size(); ++k) {
        CHECK(a.rows[k].shannon.value == b.rows[k].shannon.value);
        CHECK(a.rows[k].shannon.value == c.rows[k].shannon.value);
        CHECK(a.rows[k].shannon.std_error == c.rows[k].shannon.std_error);
        for (std::size_t j = 0; j < a.rows[k].renyi.size(); ++j) {
            CHECK(a.rows[k].renyi[j].value == b.rows[k].renyi[j].value);
            CHECK(a.rows[k].renyi[j].value == c.rows[k].renyi[j].value);
        }
    }
}

TEST_CASE("single-scale wrappers match the table", "[distances]") {
    const CovarianceModel m;
    const IntegrationSpec spec = mc_spec(5000, 77);
    const DistanceTable t = compute_distances(m, {2}, {3.0}, spec);
    const DistanceEstimate sh = shannon_distance(m, 2, spec);
    const DistanceEstimate re = renyi_distance(m, 2, 3.0, spec);
    CHECK(sh.value == t.rows[0].shannon.value);
    CHECK(sh.se_rel == t.rows[0].shannon.se_rel);
    CHECK(re.value == t.rows[0].renyi[0].value);
    CHECK(re.std_error == t.rows[0].renyi[0].std_error);
}

TEST_CASE("distance mass decays across scales", "[distances]") {
    const CovarianceModel m;
    const DistanceTable t =
        compute_distances(m, {0, 5}, {}, mc_spec(1000000, 3));
    const DistanceEstimate& d0 = t.rows[0].shannon;
    const DistanceEstimate& d5 = t.rows[1].shannon;
    CHECK(d0.value_rel > 1000.0 * d0.se_rel);     // strong signal at scale 0
    CHECK(d0.value_rel > 100.0 * std::abs(d5.value_rel));
    CHECK(std::abs(d5.value_rel) < 5.0 * d5.se_rel); // scale 5 is nearly null
}

TEST_CASE("classification thresholds and the clustering index", "[distances]") {
    CHECK(classify_scale(1.0, 0.1) == Classification::aggregation);
    CHECK(classify_scale(-1.0, 0.1) == Classification::inhibition);
    CHECK(classify_scale(0.2, 0.1) == Classification::regular);
    CHECK(classify_scale(0.0, 0.0) == Classification::regular);
    CHECK(classify_scale(0.5, 0.1, 4.0) == Classification::aggregation);
    CHECK(classify_scale(0.35, 0.1, 4.0) == Classification::regular);
    CHECK_THROWS_AS(classify_scale(0.0, -1.0), std::invalid_argument);
    CHECK(std::string(to_string(Classification::aggregation)) == "aggregation");
    CHECK(std::string(to_string(Classification::regular)) == "regular");
    CHECK(std::string(to_string(Classification::inhibition)) == "inhibition");
    CHECK(clustering_index(0.0) == 1.0);
    CHECK(clustering_index(std::log(2.0)) == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("polynomial smoothing recovers exact low-order data", "[distances]") {
    std::vector<double> xs, ys;
    for (int i = 0; i <= 8; ++i) {
        const double x = 0.25 * i;
        xs.push_back(x);
        ys.push_back(1.0 - 2.0 * x + 0.5 * x * x * x);
    }
    const PolyFit f = polyfit_smooth(xs, ys, 3);
    REQUIRE(f.coeffs.size() == 4);
    CHECK(f.coeffs[0] == Catch::Approx(1.0).margin(1e-10));
    CHECK(f.coeffs[1] == Catch::Approx(-2.0).margin(1e-10));
    CHECK(f.coeffs[2] == Catch::Approx(0.0).margin(1e-10));
    CHECK(f.coeffs[3] == Catch::Approx(0.5).margin(1e-10));
    CHECK(f.residual_norm < 1e-10);

    const PolyFit g = polyfit_smooth(xs, ys); // default degree still nails it
    CHECK(g.residual_norm < 1e-9);

    CHECK_THROWS_AS(polyfit_smooth({0.0, 1.0}, {0.0, 1.0}, 3),
                    std::invalid_argument);
    CHECK_THROWS_AS(polyfit_smooth({1.0, 1.0, 1.0}, {0.0, 0.0, 0.0}, 1),
                    std::runtime_error);
    CHECK_THROWS_AS(polyfit_smooth(xs, ys, -1), std::invalid_argument);
}
