#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "psot/flow.hpp"
#include "psot/pivot.hpp"

using namespace psot;

namespace {

Mat gaussian_cloud(int n, int d, std::mt19937_64& rng, double shift = 0.0) {
    std::normal_distribution<double> g(0.0, 1.0);
    Mat pts(n, d);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < d; ++k) pts(i, k) = g(rng) + shift;
    return pts;
}

// matching loss sum_ij (w_ij / a_i) ||x_i - y_j||^2 with the plan frozen
double fd_loss(const Mat& X, const DiscreteMeasure& target, const SparsePlan& plan) {
    const double a = 1.0 / X.rows();
    double loss = 0.0;
    for (const auto& e : plan.entries)
        loss += (e.mass / a) * (X.row(e.i) - target.points.row(e.j)).squaredNorm();
    return loss;
}

}  // namespace

TEST_CASE("plan gradient matches central finite differences") {
    std::mt19937_64 rng(1);
    Mat X = gaussian_cloud(6, 2, rng);
    auto target = DiscreteMeasure::uniform(gaussian_cloud(6, 2, rng, 1.0));

    FlowConfig cfg;
    cfg.functional = Functional::PS_FIXED_THETA;
    cfg.theta = Vec(2);
    cfg.theta << 0.6, 0.8;
    std::mt19937_64 grng(0);
    GradientResult g = step_gradient(X, target, cfg, grng);

    SparsePlan plan = ps_theta(DiscreteMeasure::uniform(X), target, cfg.theta).plan;
    CHECK(g.loss == doctest::Approx(fd_loss(X, target, plan)));

    const double h = 1e-6;
    for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < 2; ++k) {
            Mat Xp = X, Xm = X;
            Xp(i, k) += h;
            Xm(i, k) -= h;
            double fd = (fd_loss(Xp, target, plan) - fd_loss(Xm, target, plan)) / (2 * h);
            CHECK(g.grad(i, k) == doctest::Approx(fd).epsilon(1e-5));
        }
    }
}

TEST_CASE("one SGD step on SW with lr <= 1 does not increase the fixed-plan loss") {
    std::mt19937_64 rng(3);
    Mat X = gaussian_cloud(12, 2, rng);
    auto target = DiscreteMeasure::uniform(gaussian_cloud(12, 2, rng, 2.0));
    FlowConfig cfg;
    cfg.functional = Functional::SW;
    cfg.num_directions = 10;
    for (double lr : {0.1, 0.5, 1.0}) {
        std::mt19937_64 g1(7), g2(7);
        GradientResult before = step_gradient(X, target, cfg, g1);
        Mat X2 = X - lr * before.grad;
        // same seed, hence same directions; the re-derived matching can only
        // be cheaper than the frozen one, so the comparison still certifies
        // the quadratic contraction along each direction
        GradientResult after = step_gradient(X2, target, cfg, g2);
        CHECK(after.loss <= before.loss + 1e-9);
    }
}

TEST_CASE("adam flow on min-ps converges on a small instance") {
    std::mt19937_64 rng(5);
    Mat X = gaussian_cloud(20, 2, rng);
    auto target = DiscreteMeasure::uniform(gaussian_cloud(20, 2, rng, 1.5));
    FlowConfig cfg;
    cfg.functional = Functional::MIN_PS;
    cfg.iters = 400;
    cfg.num_directions = 30;
    cfg.lr = 0.02;
    cfg.seed = 11;
    cfg.stop_tol = 0.0;
    cfg.w2_every = 50;
    FlowResult r = run_flow(X, target, cfg);
    REQUIRE(!r.trace.empty());
    CHECK(r.trace.back().loss < 1e-2 * r.trace.front().loss);
    CHECK(r.trace.front().w2sq > r.trace.back().w2sq);
}

TEST_CASE("trace CSV has the expected header and rows") {
    namespace fs = std::filesystem;
    auto path = (fs::temp_directory_path() / "psot_trace.csv").string();
    std::vector<FlowTraceRow> trace{{0, 1.0, 2.0, 0.1}, {1, 0.5, 1.0, 0.2}};
    write_trace_csv(path, trace);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "iter,loss,w2sq,seconds");
    int rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 2);
    std::remove(path.c_str());
}

TEST_CASE("flow rejects bad configuration") {
    std::mt19937_64 rng(1);
    Mat X = gaussian_cloud(4, 2, rng);
    auto target = DiscreteMeasure::uniform(gaussian_cloud(4, 2, rng));
    FlowConfig cfg;
    cfg.iters = 0;
    CHECK_THROWS_AS(run_flow(X, target, cfg), std::invalid_argument);
    cfg.iters = 5;
    cfg.functional = Functional::PS_FIXED_THETA;  // theta missing
    CHECK_THROWS_AS(run_flow(X, target, cfg), std::invalid_argument);
}
