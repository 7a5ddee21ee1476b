#include "psot/pivot.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "psot/lp.hpp"
#include "psot/ot1d.hpp"

namespace psot {

namespace {

double resolve_tol(const Vec& px, const Vec& py, double tie_tol) {
    if (tie_tol >= 0.0) return tie_tol;
    Vec all(px.size() + py.size());
    all << px, py;
    return default_tie_tol(all);
}

bool all_singleton(const TieGroups& g) {
    return g.num_groups() == static_cast<int>(g.order.size());
}

// Pairing cost when both projected orders are unambiguous: expand the 1D
// monotone coupling to full-dimensional squared distances.
double tie_free_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                     const Coupling1D& cpl) {
    double c = 0.0;
    for (const auto& e : cpl.entries)
        c += e.mass * (mu.points.row(e.i) - nu.points.row(e.j)).squaredNorm();
    return c;
}

}  // namespace

PSResult ps_theta(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                  const Vec& theta, double tie_tol) {
    mu.validate();
    nu.validate();
    Vec th = normalize_direction(theta);
    Vec px = project(mu.points, th);
    Vec py = project(nu.points, th);
    double tol = resolve_tol(px, py, tie_tol);
    TieGroups gx = tie_groups(px, tol);
    TieGroups gy = tie_groups(py, tol);

    PSResult out;
    out.theta = th;
    out.plan.rows = mu.size();
    out.plan.cols = nu.size();

    if (all_singleton(gx) && all_singleton(gy)) {
        Coupling1D cpl = quantile_coupling(px, mu.weights, py, nu.weights);
        out.plan.entries = cpl.entries;
        out.value_sq = tie_free_cost(mu, nu, cpl);
        return out;
    }

    // group-level monotone coupling fixes the mass each block must carry
    Vec A = Vec::Zero(gx.num_groups());
    Vec B = Vec::Zero(gy.num_groups());
    for (int i = 0; i < mu.size(); ++i) A[gx.group_of[i]] += mu.weights[i];
    for (int j = 0; j < nu.size(); ++j) B[gy.group_of[j]] += nu.weights[j];
    Coupling1D blocks = quantile_coupling(gx.group_value, A, gy.group_value, B);

    Vec row_left = mu.weights;
    Vec col_left = nu.weights;
    std::vector<std::tuple<int, int, double>> open;  // (block a, block b, mass)
    for (const auto& e : blocks.entries) {
        auto [xb, xe] = gx.spans[e.i];
        auto [yb, ye] = gy.spans[e.j];
        if (xe - xb == 1 && ye - yb == 1) {
            int i = gx.order[xb], j = gy.order[yb];
            out.plan.entries.push_back({i, j, e.mass});
            row_left[i] -= e.mass;
            col_left[j] -= e.mass;
        } else {
            open.emplace_back(e.i, e.j, e.mass);
        }
    }

    if (!open.empty()) {
        // LP over the ambiguous blocks only
        std::vector<std::tuple<int, int>> vars;  // (i, j)
        std::vector<int> var_block;
        std::vector<int> rows_used, cols_used;
        std::vector<int> row_id(mu.size(), -1), col_id(nu.size(), -1);
        for (size_t b = 0; b < open.size(); ++b) {
            auto [ga, gb, mass] = open[b];
            auto [xb, xe] = gx.spans[ga];
            auto [yb, ye] = gy.spans[gb];
            for (int p = xb; p < xe; ++p) {
                int i = gx.order[p];
                if (row_id[i] < 0) {
                    row_id[i] = static_cast<int>(rows_used.size());
                    rows_used.push_back(i);
                }
                for (int q = yb; q < ye; ++q) {
                    int j = gy.order[q];
                    if (col_id[j] < 0) {
                        col_id[j] = static_cast<int>(cols_used.size());
                        cols_used.push_back(j);
                    }
                    vars.emplace_back(i, j);
                    var_block.push_back(static_cast<int>(b));
                }
            }
        }
        if (vars.size() > 10000)
            throw SizeGuardError("ps_theta: ambiguous tie blocks exceed 1e4 LP variables");

        const int N = static_cast<int>(vars.size());
        const int nb = static_cast<int>(open.size());
        const int nr = static_cast<int>(rows_used.size());
        const int nc = static_cast<int>(cols_used.size());
        LinearProgram lp;
        lp.c = Vec::Zero(N);
        lp.A_eq = Mat::Zero(nb + nr + nc, N);
        lp.b_eq = Vec::Zero(nb + nr + nc);
        for (int v = 0; v < N; ++v) {
            auto [i, j] = vars[v];
            lp.c[v] = (mu.points.row(i) - nu.points.row(j)).squaredNorm();
            lp.A_eq(var_block[v], v) = 1.0;
            lp.A_eq(nb + row_id[i], v) = 1.0;
            lp.A_eq(nb + nr + col_id[j], v) = 1.0;
        }
        for (int b = 0; b < nb; ++b) lp.b_eq[b] = std::get<2>(open[b]);
        for (int r = 0; r < nr; ++r) lp.b_eq[nb + r] = row_left[rows_used[r]];
        for (int c = 0; c < nc; ++c) lp.b_eq[nb + nr + c] = col_left[cols_used[c]];

        LPResult sol = lp_solve(lp);
        if (sol.status != LPStatus::Optimal)
            throw std::runtime_error("ps_theta: tie-block LP failed");
        for (int v = 0; v < N; ++v)
            if (sol.x[v] > 1e-14) {
                auto [i, j] = vars[v];
                out.plan.entries.push_back({i, j, sol.x[v]});
            }
    }

    out.value_sq = out.plan.cost_sq(mu, nu);
    return out;
}

double ps_theta_monge_oracle(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                             const Vec& theta, double tie_tol) {
    mu.validate();
    nu.validate();
    const int n = mu.size();
    if (nu.size() != n)
        throw std::invalid_argument("monge oracle: sizes must match");
    for (int i = 0; i < n; ++i)
        if (std::abs(mu.weights[i] - 1.0 / n) > 1e-12 ||
            std::abs(nu.weights[i] - 1.0 / n) > 1e-12)
            throw std::invalid_argument("monge oracle: weights must be uniform");

    Vec th = normalize_direction(theta);
    Vec px = project(mu.points, th);
    Vec py = project(nu.points, th);
    double tol = resolve_tol(px, py, tie_tol);
    TieGroups gx = tie_groups(px, tol);
    TieGroups gy = tie_groups(py, tol);

    auto factorial = [](int k) {
        double f = 1.0;
        for (int t = 2; t <= k; ++t) f *= t;
        return f;
    };
    double combos = 1.0;
    for (auto [b, e] : gx.spans) combos *= factorial(e - b);
    for (auto [b, e] : gy.spans) combos *= factorial(e - b);
    if (combos > 1e6)
        throw SizeGuardError("monge oracle: enumeration exceeds 1e6 order pairs");

    // enumerate all tie-compatible sorted orders of one side
    auto enumerate = [](const TieGroups& g) {
        std::vector<std::vector<int>> all;
        std::vector<int> cur = g.order;
        // odometer over per-group permutations
        std::vector<std::vector<int>> groups;
        for (auto [b, e] : g.spans) {
            std::vector<int> ids(cur.begin() + b, cur.begin() + e);
            std::sort(ids.begin(), ids.end());
            groups.push_back(ids);
        }
        std::vector<std::vector<int>> perms(groups.size());
        for (size_t t = 0; t < groups.size(); ++t) perms[t] = groups[t];
        std::vector<bool> done(groups.size(), false);
        for (;;) {
            std::vector<int> order;
            for (const auto& p : perms) order.insert(order.end(), p.begin(), p.end());
            all.push_back(order);
            size_t t = 0;
            while (t < perms.size() && !std::next_permutation(perms[t].begin(), perms[t].end()))
                ++t;
            if (t == perms.size()) break;
        }
        return all;
    };

    auto ox = enumerate(gx);
    auto oy = enumerate(gy);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& sx : ox)
        for (const auto& sy : oy) {
            double c = 0.0;
            for (int k = 0; k < n; ++k)
                c += (mu.points.row(sx[k]) - nu.points.row(sy[k])).squaredNorm();
            best = std::min(best, c / n);
        }
    return best;
}

namespace {

// Fast PS_theta^2 evaluation used inside the direction search; falls back to
// the LP path when ties are present.
double ps_cost_for_direction(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                             const Vec& th, double tie_tol,
                             std::vector<int>& sx, std::vector<int>& sy,
                             Vec& px, Vec& py) {
    px.noalias() = mu.points * th;
    py.noalias() = nu.points * th;
    double tol = resolve_tol(px, py, tie_tol);
    std::iota(sx.begin(), sx.end(), 0);
    std::iota(sy.begin(), sy.end(), 0);
    std::sort(sx.begin(), sx.end(), [&](int a, int b) { return px[a] < px[b]; });
    std::sort(sy.begin(), sy.end(), [&](int a, int b) { return py[a] < py[b]; });
    bool ties = false;
    for (size_t k = 1; k < sx.size() && !ties; ++k)
        if (px[sx[k]] - px[sx[k - 1]] <= tol) ties = true;
    for (size_t k = 1; k < sy.size() && !ties; ++k)
        if (py[sy[k]] - py[sy[k - 1]] <= tol) ties = true;

    // uniform equal-n fast path requires uniform weights too
    const int n = static_cast<int>(sx.size());
    bool uniform = sx.size() == sy.size();
    for (int i = 0; i < n && uniform; ++i)
        uniform = std::abs(mu.weights[i] - 1.0 / n) < 1e-12 &&
                  std::abs(nu.weights[i] - 1.0 / n) < 1e-12;

    if (ties || !uniform) {
        if (uniform) {
            // Incidental near-coincidences on large clouds can make the
            // tie-aware program huge; the sorted matching costs at most
            // O(tol) more there, so use it instead of giving up.
            try {
                return ps_theta(mu, nu, th, tie_tol).value_sq;
            } catch (const SizeGuardError&) {
            }
        } else {
            return ps_theta(mu, nu, th, tie_tol).value_sq;
        }
    }

    double c = 0.0;
    for (int k = 0; k < n; ++k)
        c += (mu.points.row(sx[k]) - nu.points.row(sy[k])).squaredNorm();
    return c / n;
}

}  // namespace

MinPSResult min_ps(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                   const MinPSOptions& opts) {
    mu.validate();
    nu.validate();
    if (opts.num_directions <= 0)
        throw std::invalid_argument("min_ps: need at least one direction");
    std::mt19937_64 rng(opts.seed);
    std::vector<Vec> dirs = sample_sphere(opts.num_directions, mu.dim(), rng);

    const int L = static_cast<int>(dirs.size());
    std::vector<double> costs(L);
    int threads = std::min(num_threads(), L);
    if (threads <= 1) {
        std::vector<int> sx(mu.size()), sy(nu.size());
        Vec px(mu.size()), py(nu.size());
        for (int l = 0; l < L; ++l)
            costs[l] = ps_cost_for_direction(mu, nu, dirs[l], opts.tie_tol, sx, sy, px, py);
    } else {
        std::atomic<int> next{0};
        auto worker = [&]() {
            std::vector<int> sx(mu.size()), sy(nu.size());
            Vec px(mu.size()), py(nu.size());
            for (;;) {
                int l = next.fetch_add(1);
                if (l >= L) break;
                costs[l] = ps_cost_for_direction(mu, nu, dirs[l], opts.tie_tol, sx, sy, px, py);
            }
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    int best = 0;
    for (int l = 1; l < L; ++l)
        if (costs[l] < costs[best]) best = l;

    MinPSResult out;
    out.theta = dirs[best];
    out.value_sq = costs[best];

    if (opts.refine) {
        std::mt19937_64 es_rng(opts.seed ^ 0xda3e39cb94b95bdbULL);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::vector<int> sx(mu.size()), sy(nu.size());
        Vec px(mu.size()), py(nu.size());
        double scale = 0.5;
        int fails = 0;
        for (int it = 0; it < opts.refine_iters && scale > 1e-12; ++it) {
            Vec cand = out.theta;
            for (int k = 0; k < cand.size(); ++k) cand[k] += scale * gauss(es_rng);
            double nrm = cand.norm();
            if (nrm < 1e-12) continue;
            cand /= nrm;
            double c = ps_cost_for_direction(mu, nu, cand, opts.tie_tol, sx, sy, px, py);
            if (c < out.value_sq) {
                out.value_sq = c;
                out.theta = cand;
                fails = 0;
            } else if (++fails >= 20) {
                scale *= 0.5;
                fails = 0;
            }
        }
    }

    if (opts.want_plan) {
        PSResult ps = ps_theta(mu, nu, out.theta, opts.tie_tol);
        out.plan = std::move(ps.plan);
        out.value_sq = ps.value_sq;
    }
    return out;
}

bool order_pair_realizable(const Mat& X, const Mat& Y,
                           const std::vector<int>& sx, const std::vector<int>& sy) {
    const int d = static_cast<int>(X.cols());
    const int rows = static_cast<int>(sx.size()) - 1 + static_cast<int>(sy.size()) - 1;
    // variables: theta = p - q (p, q >= 0), margin t; maximize t
    const int N = 2 * d + 1;
    LinearProgram lp;
    lp.c = Vec::Zero(N);
    lp.c[2 * d] = -1.0;  // maximize t
    lp.A_ub = Mat::Zero(rows + 1, N);
    lp.b_ub = Vec::Zero(rows + 1);
    int r = 0;
    auto add = [&](const Eigen::RowVectorXd& delta) {
        // -theta . delta + t <= 0
        lp.A_ub.block(r, 0, 1, d) = -delta;
        lp.A_ub.block(r, d, 1, d) = delta;
        lp.A_ub(r, 2 * d) = 1.0;
        ++r;
    };
    for (size_t k = 0; k + 1 < sx.size(); ++k)
        add(X.row(sx[k + 1]) - X.row(sx[k]));
    for (size_t k = 0; k + 1 < sy.size(); ++k)
        add(Y.row(sy[k + 1]) - Y.row(sy[k]));
    // ||theta||_1 <= 1 keeps the program bounded
    lp.A_ub.block(rows, 0, 1, 2 * d).setOnes();
    lp.b_ub[rows] = 1.0;

    LPResult sol = lp_solve(lp);
    return sol.status == LPStatus::Optimal && -sol.value > 1e-9;
}

bool verify_full_permutation_coverage(const Mat& X, const Mat& Y) {
    const int n = static_cast<int>(X.rows());
    if (Y.rows() != n)
        throw std::invalid_argument("coverage check: sizes must match");
    double pairs = 1.0;
    for (int k = 2; k <= n; ++k) pairs *= k;
    pairs *= pairs;
    if (pairs > 1e4)
        throw SizeGuardError("coverage check: too many permutation pairs");

    std::vector<int> sx(n), sy(n);
    std::iota(sx.begin(), sx.end(), 0);
    do {
        std::iota(sy.begin(), sy.end(), 0);
        do {
            if (!order_pair_realizable(X, Y, sx, sy)) return false;
        } while (std::next_permutation(sy.begin(), sy.end()));
    } while (std::next_permutation(sx.begin(), sx.end()));
    return true;
}

}  // namespace psot
