#include <doctest.h>

#include <random>

#include "psot/ot1d.hpp"

using namespace psot;

namespace {

// O(n^2 m^2)-ish reference: 1D OT cost via discretized quantile functions.
double quantile_oracle(const Vec& xs, const Vec& a, const Vec& ys, const Vec& b,
                       int grid = 200000) {
    std::vector<std::pair<double, double>> mx, my;
    for (int i = 0; i < xs.size(); ++i) mx.emplace_back(xs[i], a[i]);
    for (int j = 0; j < ys.size(); ++j) my.emplace_back(ys[j], b[j]);
    std::sort(mx.begin(), mx.end());
    std::sort(my.begin(), my.end());
    auto quantile = [](const std::vector<std::pair<double, double>>& m, double u) {
        double acc = 0.0;
        for (const auto& [v, w] : m) {
            acc += w;
            if (u <= acc + 1e-15) return v;
        }
        return m.back().first;
    };
    double c = 0.0;
    for (int k = 0; k < grid; ++k) {
        double u = (k + 0.5) / grid;
        double d = quantile(mx, u) - quantile(my, u);
        c += d * d;
    }
    return c / grid;
}

}  // namespace

TEST_CASE("quantile coupling: two equal uniform atoms match monotonically") {
    Vec xs(2), ys(2), w = Vec::Constant(2, 0.5);
    xs << 3.0, 1.0;
    ys << 0.0, 2.0;
    Coupling1D c = quantile_coupling(xs, w, ys, w);
    REQUIRE(c.entries.size() == 2);
    // sorted orders: x (1,3) -> y (0,2)
    CHECK(c.entries[0].i == 1);
    CHECK(c.entries[0].j == 0);
    CHECK(c.cost_sq == doctest::Approx(0.5 * 1.0 + 0.5 * 1.0));
}

TEST_CASE("quantile coupling handles unequal weights by splitting") {
    Vec xs(1), ys(2);
    xs << 0.0;
    Vec a(1);
    a << 1.0;
    ys << -1.0, 1.0;
    Vec b(2);
    b << 0.25, 0.75;
    Coupling1D c = quantile_coupling(xs, a, ys, b);
    REQUIRE(c.entries.size() == 2);
    CHECK(c.entries[0].mass == doctest::Approx(0.25));
    CHECK(c.cost_sq == doctest::Approx(0.25 * 1.0 + 0.75 * 1.0));
}

TEST_CASE("1D W2 against the quantile-function oracle on random instances") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 10; ++trial) {
        int n = 2 + static_cast<int>(rng() % 6), m = 2 + static_cast<int>(rng() % 6);
        Vec xs(n), ys(m), a(n), b(m);
        for (int i = 0; i < n; ++i) {
            xs[i] = u(rng);
            a[i] = 0.1 + std::abs(u(rng));
        }
        for (int j = 0; j < m; ++j) {
            ys[j] = u(rng);
            b[j] = 0.1 + std::abs(u(rng));
        }
        a /= a.sum();
        b /= b.sum();
        double got = w2sq_1d(xs, a, ys, b);
        double want = quantile_oracle(xs, a, ys, b);
        CHECK(got == doctest::Approx(want).epsilon(1e-3));
    }
}

TEST_CASE("quantile coupling marginals are exact") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int n = 9, m = 5;
    Vec xs(n), ys(m), a(n), b(m);
    for (int i = 0; i < n; ++i) {
        xs[i] = u(rng);
        a[i] = 0.05 + u(rng);
    }
    for (int j = 0; j < m; ++j) {
        ys[j] = u(rng);
        b[j] = 0.05 + u(rng);
    }
    a /= a.sum();
    b /= b.sum();
    Coupling1D c = quantile_coupling(xs, a, ys, b);
    Vec ra = Vec::Zero(n), rb = Vec::Zero(m);
    for (const auto& e : c.entries) {
        ra[e.i] += e.mass;
        rb[e.j] += e.mass;
    }
    CHECK((ra - a).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((rb - b).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("projected middle: two-point uniform example") {
    // x projections (-1, 1), y projections (0, 5) under e1
    Mat xp(2, 2), yp(2, 2);
    xp << -1, 7, 1, -3;
    yp << 0, 2, 5, 2;
    auto mu = DiscreteMeasure::uniform(xp);
    auto nu = DiscreteMeasure::uniform(yp);
    Vec theta(2);
    theta << 1, 0;
    auto mid = projected_middle(mu, nu, theta);
    REQUIRE(mid.size() == 2);
    CHECK(mid.points(0, 0) == doctest::Approx(-0.5));
    CHECK(mid.points(1, 0) == doctest::Approx(3.0));
    CHECK(mid.points.col(1).cwiseAbs().maxCoeff() == 0.0);  // on the line R*theta
    CHECK(mid.weights[0] == doctest::Approx(0.5));
}

TEST_CASE("projected middle merges coincident atoms") {
    // both clouds project to the same two values; middles coincide pairwise
    Mat xp(2, 2), yp(2, 2);
    xp << 0, 1, 2, 1;
    yp << 0, -1, 2, -1;
    Vec theta(2);
    theta << 1, 0;
    auto mid = projected_middle(DiscreteMeasure::uniform(xp),
                                DiscreteMeasure::uniform(yp), theta);
    CHECK(mid.size() == 2);
    CHECK(mid.weights.sum() == doctest::Approx(1.0));
}
