#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "psot/measure.hpp"

using namespace psot;

TEST_CASE("measure validation") {
    Mat pts(2, 2);
    pts << 0, 0, 1, 1;

    SUBCASE("uniform weights sum to one") {
        auto mu = DiscreteMeasure::uniform(pts);
        CHECK(mu.weights.sum() == doctest::Approx(1.0));
        CHECK(mu.size() == 2);
        CHECK(mu.dim() == 2);
    }
    SUBCASE("zero weight atoms are rejected") {
        Vec w(2);
        w << 1.0, 0.0;
        CHECK_THROWS_AS(DiscreteMeasure::weighted(pts, w), std::invalid_argument);
    }
    SUBCASE("negative weights are rejected") {
        Vec w(2);
        w << 1.5, -0.5;
        CHECK_THROWS_AS(DiscreteMeasure::weighted(pts, w), std::invalid_argument);
    }
    SUBCASE("weights must normalize") {
        Vec w(2);
        w << 0.7, 0.7;
        CHECK_THROWS_AS(DiscreteMeasure::weighted(pts, w), std::invalid_argument);
    }
    SUBCASE("non-finite coordinates are rejected") {
        Mat bad = pts;
        bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(DiscreteMeasure::uniform(bad), std::invalid_argument);
    }
}

TEST_CASE("plan marginal validation") {
    SparsePlan plan;
    plan.rows = 2;
    plan.cols = 2;
    plan.entries = {{0, 0, 0.5}, {1, 1, 0.5}};
    Vec half = Vec::Constant(2, 0.5);
    CHECK_NOTHROW(plan.validate_marginals(half, half));

    plan.entries[1].mass = 0.4;
    CHECK_THROWS_AS(plan.validate_marginals(half, half), std::invalid_argument);
}

TEST_CASE("plan prune drops dust and renormalizes") {
    SparsePlan plan;
    plan.rows = plan.cols = 2;
    plan.entries = {{0, 0, 0.5}, {1, 1, 0.5}, {0, 1, 1e-16}};
    plan.prune();
    CHECK(plan.entries.size() == 2);
    double total = 0.0;
    for (const auto& e : plan.entries) total += e.mass;
    CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("direction utilities") {
    Vec v(3);
    v << 3, 0, 4;
    CHECK(normalize_direction(v).norm() == doctest::Approx(1.0));
    CHECK_THROWS_AS(normalize_direction(Vec::Zero(3)), std::invalid_argument);

    std::mt19937_64 rng(1);
    auto dirs = sample_sphere(64, 5, rng);
    CHECK(dirs.size() == 64);
    for (const auto& th : dirs) CHECK(th.norm() == doctest::Approx(1.0));

    // deterministic given the seed
    std::mt19937_64 rng2(1);
    auto dirs2 = sample_sphere(64, 5, rng2);
    CHECK((dirs[10] - dirs2[10]).norm() == 0.0);
}

TEST_CASE("tie groups") {
    Vec vals(6);
    vals << 1.0, 0.0, 1.0 + 1e-12, 2.0, 0.0, 2.0;
    TieGroups g = tie_groups(vals, 1e-9);
    CHECK(g.num_groups() == 3);
    CHECK(g.group_of[1] == g.group_of[4]);  // both zeros
    CHECK(g.group_of[0] == g.group_of[2]);  // 1 and 1+1e-12
    CHECK(g.group_of[3] == g.group_of[5]);
    CHECK(g.spans[0].second - g.spans[0].first == 2);

    // distinct values: all singletons
    Vec d(3);
    d << 3, 1, 2;
    TieGroups gd = tie_groups(d, 1e-9);
    CHECK(gd.num_groups() == 3);
    CHECK(gd.order == std::vector<int>{1, 2, 0});
}

TEST_CASE("default tie tolerance scales with the data") {
    Vec small(2), big(2);
    small << 0.0, 1.0;
    big << 0.0, 1e6;
    CHECK(default_tie_tol(small) == doctest::Approx(2e-9));
    CHECK(default_tie_tol(big) > 1e-4);
}

TEST_CASE("measure CSV round trip") {
    namespace fs = std::filesystem;
    auto path = (fs::temp_directory_path() / "psot_measure_rt.csv").string();
    Mat pts(3, 2);
    pts << 0.125, -1, 2, 3.5, -0.25, 7;
    Vec w(3);
    w << 0.2, 0.3, 0.5;
    auto mu = DiscreteMeasure::weighted(pts, w);
    write_measure_csv(path, mu);
    auto back = read_measure_csv(path);
    CHECK((back.points - mu.points).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.weights - mu.weights).cwiseAbs().maxCoeff() == 0.0);
    std::remove(path.c_str());
}

TEST_CASE("measure CSV without weight column is uniform") {
    namespace fs = std::filesystem;
    auto path = (fs::temp_directory_path() / "psot_measure_uni.csv").string();
    {
        std::ofstream out(path);
        out << "x0,x1\n1,2\n3,4\n";
    }
    auto mu = read_measure_csv(path);
    CHECK(mu.weights[0] == doctest::Approx(0.5));
    std::remove(path.c_str());
}

TEST_CASE("measure CSV failures raise IOError") {
    CHECK_THROWS_AS(read_measure_csv("/nonexistent/psot.csv"), IOError);

    namespace fs = std::filesystem;
    auto path = (fs::temp_directory_path() / "psot_measure_bad.csv").string();
    {
        std::ofstream out(path);
        out << "x0,x1\n1,oops\n";
    }
    CHECK_THROWS_AS(read_measure_csv(path), IOError);
    std::remove(path.c_str());
}

TEST_CASE("plan CSV round trip") {
    namespace fs = std::filesystem;
    auto path = (fs::temp_directory_path() / "psot_plan_rt.csv").string();
    SparsePlan plan;
    plan.rows = plan.cols = 2;
    plan.entries = {{0, 1, 0.5}, {1, 0, 0.5}};
    write_plan_csv(path, plan);
    SparsePlan back = read_plan_csv(path, 2, 2);
    REQUIRE(back.entries.size() == 2);
    CHECK(back.entries[0].j == 1);
    CHECK(back.entries[1].mass == doctest::Approx(0.5));
    std::remove(path.c_str());
}
