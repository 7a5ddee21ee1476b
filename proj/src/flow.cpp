#include "psot/flow.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include "psot/exact.hpp"
#include "psot/expected.hpp"
#include "psot/ot1d.hpp"
#include "psot/pivot.hpp"

namespace psot {

namespace {

GradientResult plan_gradient(const Mat& X, const DiscreteMeasure& target,
                             const SparsePlan& plan, double value_sq) {
    const int n = static_cast<int>(X.rows());
    const double a = 1.0 / n;
    GradientResult out;
    out.grad = Mat::Zero(n, X.cols());
    out.loss = 0.0;
    out.value_sq = value_sq;
    for (const auto& e : plan.entries) {
        Eigen::RowVectorXd diff = X.row(e.i) - target.points.row(e.j);
        out.grad.row(e.i) += 2.0 * (e.mass / a) * diff;
        out.loss += (e.mass / a) * diff.squaredNorm();
    }
    return out;
}

}  // namespace

GradientResult step_gradient(const Mat& X, const DiscreteMeasure& target,
                             const FlowConfig& cfg, std::mt19937_64& rng) {
    const int n = static_cast<int>(X.rows());
    DiscreteMeasure src = DiscreteMeasure::uniform(X);

    switch (cfg.functional) {
        case Functional::SW: {
            auto dirs = sample_sphere(cfg.num_directions, static_cast<int>(X.cols()), rng);
            GradientResult out;
            out.grad = Mat::Zero(n, X.cols());
            out.loss = 0.0;
            out.value_sq = 0.0;
            const double wdir = 1.0 / static_cast<double>(dirs.size());
            const double a = 1.0 / n;
            for (const auto& th : dirs) {
                Vec px = X * th;
                Vec py = target.points * th;
                Coupling1D cpl = quantile_coupling(px, src.weights, py, target.weights);
                for (const auto& e : cpl.entries) {
                    double diff = px[e.i] - py[e.j];
                    out.grad.row(e.i) += wdir * 2.0 * (e.mass / a) * diff * th.transpose();
                    out.loss += wdir * (e.mass / a) * diff * diff;
                    out.value_sq += wdir * e.mass * diff * diff;
                }
            }
            return out;
        }
        case Functional::PS_FIXED_THETA: {
            if (cfg.theta.size() != X.cols())
                throw std::invalid_argument("flow: PS_FIXED_THETA requires a direction");
            PSResult ps = ps_theta(src, target, cfg.theta, cfg.tie_tol);
            return plan_gradient(X, target, ps.plan, ps.value_sq);
        }
        case Functional::MIN_PS: {
            MinPSOptions opts;
            opts.num_directions = cfg.num_directions;
            opts.seed = rng();
            opts.refine = cfg.refine;
            opts.tie_tol = cfg.tie_tol;
            MinPSResult mp = min_ps(src, target, opts);
            return plan_gradient(X, target, mp.plan, mp.value_sq);
        }
        case Functional::ES: {
            auto dirs = sample_sphere(cfg.num_directions, static_cast<int>(X.cols()), rng);
            ESResult es = expected_sliced(src, target, dirs, cfg.tie_tol);
            return plan_gradient(X, target, es.plan, es.value_sq);
        }
    }
    throw std::logic_error("flow: unknown functional");
}

FlowResult run_flow(Mat X0, const DiscreteMeasure& target, const FlowConfig& cfg) {
    target.validate();
    if (cfg.iters <= 0 || cfg.lr <= 0.0)
        throw std::invalid_argument("flow: iters and lr must be positive");
    std::mt19937_64 rng(cfg.seed);
    const int n = static_cast<int>(X0.rows());
    const int d = static_cast<int>(X0.cols());

    Mat M = Mat::Zero(n, d), V = Mat::Zero(n, d);
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;

    FlowResult out;
    out.trace.reserve(cfg.iters);
    double prev_loss = std::numeric_limits<double>::quiet_NaN();
    int flat = 0;
    auto t0 = std::chrono::steady_clock::now();

    for (int it = 0; it < cfg.iters; ++it) {
        GradientResult g = step_gradient(X0, target, cfg, rng);

        double w2sq = std::numeric_limits<double>::quiet_NaN();
        if (cfg.w2_every > 0 && (it % cfg.w2_every == 0 || it == cfg.iters - 1)) {
            double cells = static_cast<double>(n) * target.size();
            if (cells <= 1e6)
                w2sq = w2_exact(DiscreteMeasure::uniform(X0), target).cost;
        }
        double secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0).count();
        out.trace.push_back({it, g.value_sq, w2sq, secs});

        if (cfg.optimizer == Optimizer::ADAM) {
            M = b1 * M + (1.0 - b1) * g.grad;
            V = b2 * V + (1.0 - b2) * g.grad.cwiseProduct(g.grad);
            double c1 = 1.0 - std::pow(b1, it + 1);
            double c2 = 1.0 - std::pow(b2, it + 1);
            Mat mhat = M / c1;
            Mat vhat = V / c2;
            X0 -= cfg.lr * (mhat.array() / (vhat.array().sqrt() + eps)).matrix();
        } else {
            X0 -= cfg.lr * g.grad;
        }

        if (cfg.stop_tol > 0.0 && it > 0) {
            if (std::abs(g.value_sq - prev_loss) <= cfg.stop_tol * std::max(1.0, std::abs(prev_loss)))
                ++flat;
            else
                flat = 0;
            if (flat >= 10) break;
        }
        prev_loss = g.value_sq;
    }
    out.X = std::move(X0);
    return out;
}

void write_trace_csv(const std::string& path, const std::vector<FlowTraceRow>& trace) {
    std::ofstream out(path);
    if (!out) throw IOError("cannot write " + path);
    out.precision(12);
    out << "iter,loss,w2sq,seconds\n";
    for (const auto& r : trace)
        out << r.iter << "," << r.loss << "," << r.w2sq << "," << r.seconds << "\n";
    if (!out) throw IOError("write failed: " + path);
}

}  // namespace psot
