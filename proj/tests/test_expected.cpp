#include <doctest.h>

#include <random>

#include "psot/exact.hpp"
#include "psot/expected.hpp"
#include "psot/fixtures.hpp"
#include "psot/pivot.hpp"

using namespace psot;

namespace {

DiscreteMeasure random_cloud(int n, int d, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Mat pts(n, d);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < d; ++k) pts(i, k) = g(rng);
    return DiscreteMeasure::uniform(std::move(pts));
}

}  // namespace

TEST_CASE("lifted plan on the vertical segment is the product coupling") {
    auto f = fixtures::vseg();
    SparsePlan plan = lifted_plan(f.mu, f.mu, f.theta);
    REQUIRE(plan.entries.size() == 4);
    for (const auto& e : plan.entries) CHECK(e.mass == doctest::Approx(0.25));
    CHECK(plan.cost_sq(f.mu, f.mu) == doctest::Approx(0.5));
    CHECK(ls_theta_sq(f.mu, f.mu, f.theta) == doctest::Approx(0.5));
}

TEST_CASE("tie-free lifted plan is the quantile matching") {
    std::mt19937_64 rng(3);
    auto mu = random_cloud(7, 2, rng);
    auto nu = random_cloud(7, 2, rng);
    Vec theta(2);
    theta << 0.8, -0.6;
    SparsePlan plan = lifted_plan(mu, nu, theta);
    REQUIRE(plan.entries.size() == 7);
    for (const auto& e : plan.entries) CHECK(e.mass == doctest::Approx(1.0 / 7));
    CHECK(ls_theta_sq(mu, nu, theta) ==
          doctest::Approx(ps_theta(mu, nu, theta).value_sq).epsilon(1e-10));
}

TEST_CASE("ls cost matches an explicit plan-cost evaluation") {
    std::mt19937_64 rng(5);
    auto mu = random_cloud(6, 3, rng);
    auto nu = random_cloud(9, 3, rng);
    // snap one coordinate to force ties
    for (int i = 0; i < mu.size(); ++i) mu.points(i, 0) = static_cast<double>(i % 2);
    for (int j = 0; j < nu.size(); ++j) nu.points(j, 0) = static_cast<double>(j % 3);
    Vec theta = Vec::Zero(3);
    theta[0] = 1.0;
    SparsePlan plan = lifted_plan(mu, nu, theta);
    CHECK_NOTHROW(plan.validate_marginals(mu.weights, nu.weights, 1e-9));
    CHECK(ls_theta_sq(mu, nu, theta) ==
          doctest::Approx(plan.cost_sq(mu, nu)).epsilon(1e-10));
}

TEST_CASE("ls dominates ps which dominates w2") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        auto mu = random_cloud(5, 2, rng);
        auto nu = random_cloud(5, 2, rng);
        std::mt19937_64 dir_rng(trial);
        Vec theta = sample_sphere(1, 2, dir_rng)[0];
        double ls = ls_theta_sq(mu, nu, theta);
        double ps = ps_theta(mu, nu, theta).value_sq;
        double w2 = w2_exact(mu, nu).cost;
        CHECK(ls >= ps - 1e-9);
        CHECK(ps >= w2 - 1e-9);
    }
}

TEST_CASE("expected plan mixes lifted plans and matches its cost") {
    std::mt19937_64 rng(11);
    auto mu = random_cloud(6, 2, rng);
    auto nu = random_cloud(6, 2, rng);
    std::mt19937_64 dir_rng(0);
    auto dirs = sample_sphere(8, 2, dir_rng);
    ESResult es = expected_sliced(mu, nu, dirs);
    CHECK_NOTHROW(es.plan.validate_marginals(mu.weights, nu.weights, 1e-9));
    double manual = 0.0;
    for (const auto& th : dirs) manual += ls_theta_sq(mu, nu, th) / dirs.size();
    CHECK(es.value_sq == doctest::Approx(manual).epsilon(1e-10));
    // mixture cost equals the average of the component costs
    CHECK(es.plan.cost_sq(mu, nu) == doctest::Approx(manual).epsilon(1e-10));
}

TEST_CASE("es self-distance can be positive under ties") {
    auto f = fixtures::vseg();
    std::vector<Vec> dirs{f.theta};
    CHECK(expected_sliced(f.mu, f.mu, dirs).value_sq == doctest::Approx(0.5));
}

TEST_CASE("barycentric projection of a permutation plan recovers the match") {
    std::mt19937_64 rng(13);
    auto mu = random_cloud(5, 2, rng);
    auto nu = random_cloud(5, 2, rng);
    Vec theta(2);
    theta << 1, 0;
    SparsePlan plan = lifted_plan(mu, nu, theta);
    Mat bary = barycentric_projection(plan, mu, nu);
    for (const auto& e : plan.entries)
        CHECK((bary.row(e.i) - nu.points.row(e.j)).norm() < 1e-12);
}

TEST_CASE("barycentric projection averages inside tie blocks") {
    auto f = fixtures::vseg();
    SparsePlan plan = lifted_plan(f.mu, f.mu, f.theta);
    Mat bary = barycentric_projection(plan, f.mu, f.mu);
    // every row maps to the mean of the two atoms
    for (int i = 0; i < 2; ++i) {
        CHECK(bary(i, 0) == doctest::Approx(0.0));
        CHECK(bary(i, 1) == doctest::Approx(0.5));
    }
}

TEST_CASE("disk self lifted cost approaches the quadrature value") {
    double oracle = fixtures::disk_within_slice_variance_quadrature();
    CHECK(oracle == doctest::Approx(0.5).epsilon(1e-6));
    auto d1 = fixtures::disk(4000, 101);
    auto d2 = fixtures::disk(4000, 202);
    Vec theta(2);
    theta << 1, 0;
    double ls = ls_theta_sq(d1, d2, theta);
    CHECK(ls == doctest::Approx(oracle).epsilon(0.05));
}
