#include <doctest.h>

#include <random>

#include "psot/lp.hpp"

using namespace psot;

TEST_CASE("simplex solves a tiny known LP") {
    // min -x - 2y  s.t.  x + y <= 4, x <= 2, x,y >= 0 -> (2, 2), value -6? no:
    // optimum is x=0,y=4 -> -8; with x <= 2 and x+y <= 4, best is (0,4): -8
    LinearProgram lp;
    lp.c = Vec(2);
    lp.c << -1, -2;
    lp.A_ub = Mat(2, 2);
    lp.A_ub << 1, 1, 1, 0;
    lp.b_ub = Vec(2);
    lp.b_ub << 4, 2;
    LPResult r = lp_solve(lp);
    REQUIRE(r.status == LPStatus::Optimal);
    CHECK(r.value == doctest::Approx(-8.0));
    CHECK(r.x[0] == doctest::Approx(0.0));
    CHECK(r.x[1] == doctest::Approx(4.0));
}

TEST_CASE("simplex handles equality constraints") {
    // min x + y  s.t.  x + 2y = 3, x >= 0, y >= 0 -> (0, 1.5)
    LinearProgram lp;
    lp.c = Vec(2);
    lp.c << 1, 1;
    lp.A_eq = Mat(1, 2);
    lp.A_eq << 1, 2;
    lp.b_eq = Vec(1);
    lp.b_eq << 3;
    LPResult r = lp_solve(lp);
    REQUIRE(r.status == LPStatus::Optimal);
    CHECK(r.value == doctest::Approx(1.5));
}

TEST_CASE("simplex detects infeasibility") {
    LinearProgram lp;
    lp.c = Vec::Ones(1);
    lp.A_eq = Mat(2, 1);
    lp.A_eq << 1, 1;
    lp.b_eq = Vec(2);
    lp.b_eq << 1, 2;
    CHECK(lp_solve(lp).status == LPStatus::Infeasible);
}

TEST_CASE("simplex detects unboundedness") {
    LinearProgram lp;
    lp.c = Vec(1);
    lp.c << -1;
    lp.A_ub = Mat(1, 1);
    lp.A_ub << -1;
    lp.b_ub = Vec(1);
    lp.b_ub << 0;
    CHECK(lp_solve(lp).status == LPStatus::Unbounded);
}

TEST_CASE("simplex tolerates redundant equality rows") {
    // x + y = 1 stated twice
    LinearProgram lp;
    lp.c = Vec(2);
    lp.c << 2, 1;
    lp.A_eq = Mat(2, 2);
    lp.A_eq << 1, 1, 1, 1;
    lp.b_eq = Vec(2);
    lp.b_eq << 1, 1;
    LPResult r = lp_solve(lp);
    REQUIRE(r.status == LPStatus::Optimal);
    CHECK(r.value == doctest::Approx(1.0));
}

TEST_CASE("simplex returns vertices of the transportation polytope") {
    // random 4x4 transportation LPs: basic solutions have <= n+m-1 entries
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 4, m = 4;
        Vec a(n), b(m);
        for (int i = 0; i < n; ++i) a[i] = u(rng);
        for (int j = 0; j < m; ++j) b[j] = u(rng);
        a /= a.sum();
        b /= b.sum();
        LinearProgram lp;
        lp.c = Vec(n * m);
        for (int k = 0; k < n * m; ++k) lp.c[k] = u(rng);
        lp.A_eq = Mat::Zero(n + m, n * m);
        lp.b_eq = Vec(n + m);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) {
                lp.A_eq(i, i * m + j) = 1.0;
                lp.A_eq(n + j, i * m + j) = 1.0;
            }
        lp.b_eq.head(n) = a;
        lp.b_eq.tail(m) = b;
        LPResult r = lp_solve(lp);
        REQUIRE(r.status == LPStatus::Optimal);
        int support = 0;
        for (int k = 0; k < n * m; ++k)
            if (r.x[k] > 1e-10) ++support;
        CHECK(support <= n + m - 1);
        // marginals
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < m; ++j) s += r.x[i * m + j];
            CHECK(s == doctest::Approx(a[i]));
        }
    }
}

TEST_CASE("simplex agrees with brute force on random small LPs") {
    // min c.x over the simplex {x >= 0, sum x = 1}: optimum is min_i c_i
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        int n = 3 + static_cast<int>(rng() % 5);
        LinearProgram lp;
        lp.c = Vec(n);
        for (int i = 0; i < n; ++i) lp.c[i] = u(rng);
        lp.A_eq = Mat::Ones(1, n);
        lp.b_eq = Vec::Ones(1);
        LPResult r = lp_solve(lp);
        REQUIRE(r.status == LPStatus::Optimal);
        CHECK(r.value == doctest::Approx(lp.c.minCoeff()));
    }
}
