#pragma once

#include "psot/measure.hpp"

namespace psot {

// Monotone (northwest-corner) coupling between two weighted 1D samples.
// Entries refer to the original (unsorted) indices. Ties are broken by
// original index order, which does not affect the cost.
struct Coupling1D {
    std::vector<PlanEntry> entries;
    double cost_sq = 0.0;  // sum mass * (x_i - y_j)^2
};

Coupling1D quantile_coupling(const Vec& xs, const Vec& a, const Vec& ys, const Vec& b);

// Squared 2-Wasserstein distance on the line.
double w2sq_1d(const Vec& xs, const Vec& a, const Vec& ys, const Vec& b);

// 1D Wasserstein-2 mean of the projections of mu and nu along theta,
// embedded on the line R*theta: atoms ((theta.x + theta.y)/2) * theta with
// the masses of the monotone coupling. Atoms closer than tol are merged.
DiscreteMeasure projected_middle(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                 const Vec& theta, double tol = -1.0);

}  // namespace psot
