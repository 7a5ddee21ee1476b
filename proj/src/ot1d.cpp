#include "psot/ot1d.hpp"

#include <algorithm>
#include <numeric>

namespace psot {

Coupling1D quantile_coupling(const Vec& xs, const Vec& a, const Vec& ys, const Vec& b) {
    const int n = static_cast<int>(xs.size());
    const int m = static_cast<int>(ys.size());
    std::vector<int> sx(n), sy(m);
    std::iota(sx.begin(), sx.end(), 0);
    std::iota(sy.begin(), sy.end(), 0);
    std::stable_sort(sx.begin(), sx.end(), [&](int u, int v) { return xs[u] < xs[v]; });
    std::stable_sort(sy.begin(), sy.end(), [&](int u, int v) { return ys[u] < ys[v]; });

    Coupling1D out;
    out.entries.reserve(static_cast<size_t>(n) + m);
    int i = 0, j = 0;
    double ra = a[sx[0]], rb = b[sy[0]];
    while (i < n && j < m) {
        double mass = std::min(ra, rb);
        double diff = xs[sx[i]] - ys[sy[j]];
        out.entries.push_back({sx[i], sy[j], mass});
        out.cost_sq += mass * diff * diff;
        ra -= mass;
        rb -= mass;
        // advance whichever side is exhausted; on exact ties advance both
        if (ra <= 1e-15 * mass || ra == 0.0) {
            ++i;
            if (i < n) ra = a[sx[i]];
        }
        if (rb <= 1e-15 * mass || rb == 0.0) {
            ++j;
            if (j < m) rb = b[sy[j]];
        }
    }
    return out;
}

double w2sq_1d(const Vec& xs, const Vec& a, const Vec& ys, const Vec& b) {
    return quantile_coupling(xs, a, ys, b).cost_sq;
}

DiscreteMeasure projected_middle(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                 const Vec& theta, double tol) {
    Vec px = project(mu.points, theta);
    Vec py = project(nu.points, theta);
    Coupling1D cpl = quantile_coupling(px, mu.weights, py, nu.weights);

    // midpoints along the line, sorted by construction (monotone coupling)
    std::vector<double> vals;
    std::vector<double> masses;
    if (tol < 0.0) {
        Vec all(px.size() + py.size());
        all << px, py;
        tol = default_tie_tol(all);
    }
    for (const auto& e : cpl.entries) {
        double v = 0.5 * (px[e.i] + py[e.j]);
        if (!vals.empty() && v - vals.back() <= tol) {
            // merge with previous atom (mass-weighted position)
            double w = masses.back();
            vals.back() = (w * vals.back() + e.mass * v) / (w + e.mass);
            masses.back() += e.mass;
        } else {
            vals.push_back(v);
            masses.push_back(e.mass);
        }
    }
    const int k = static_cast<int>(vals.size());
    Mat pts(k, theta.size());
    Vec w(k);
    for (int t = 0; t < k; ++t) {
        pts.row(t) = vals[t] * theta.transpose();
        w[t] = masses[t];
    }
    w /= w.sum();
    return DiscreteMeasure::weighted(std::move(pts), std::move(w));
}

}  // namespace psot
