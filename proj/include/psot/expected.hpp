#pragma once

#include "psot/measure.hpp"

namespace psot {

// Lifted plan along theta: couple the tie blocks of the projections by the
// 1D monotone coupling and distribute mass independently inside each block,
// w_ij = a_i b_j / (A_a B_b) * Q_ab. Tie-free projections give the plain
// quantile matching. Throws SizeGuardError above 2e7 entries.
SparsePlan lifted_plan(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                       const Vec& theta, double tie_tol = -1.0);

// Squared lifted-sliced discrepancy: full-dimensional cost of the lifted plan.
double ls_theta_sq(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                   const Vec& theta, double tie_tol = -1.0);

struct ESResult {
    double value_sq = 0.0;  // average of ls_theta_sq over the directions
    SparsePlan plan;        // mixture of the lifted plans
};

// Expected sliced discrepancy over explicit directions.
ESResult expected_sliced(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                         const std::vector<Vec>& directions, double tie_tol = -1.0);

// Convenience overload: L uniform directions from the given seed.
ESResult expected_sliced(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                         int L, std::uint64_t seed, double tie_tol = -1.0);

// Conditional-mean map of a plan: row i of the result is
// sum_j w_ij y_j / a_i.
Mat barycentric_projection(const SparsePlan& plan, const DiscreteMeasure& mu,
                           const DiscreteMeasure& nu);

}  // namespace psot
