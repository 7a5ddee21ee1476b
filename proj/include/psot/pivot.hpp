#pragma once

#include "psot/measure.hpp"

namespace psot {

struct PSResult {
    double value_sq = 0.0;
    SparsePlan plan;
    Vec theta;
};

// Pivot-sliced discrepancy along theta: optimal coupling among those whose
// projection onto theta is the 1D monotone coupling. Tie groups in the
// projections are resolved by an exact LP over the ambiguous blocks; the
// tie-free case reduces to the 1D quantile coupling. tie_tol < 0 selects the
// default scale-relative tolerance.
PSResult ps_theta(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                  const Vec& theta, double tie_tol = -1.0);

// Brute-force oracle for uniform equal-n inputs: enumerates sorted orders
// compatible with the tie groups on both sides and returns the cheapest
// pairing cost. Throws SizeGuardError when the enumeration exceeds 1e6
// order pairs.
double ps_theta_monge_oracle(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                             const Vec& theta, double tie_tol = -1.0);

struct MinPSOptions {
    int num_directions = 100;
    std::uint64_t seed = 0;
    bool refine = false;
    int refine_iters = 2000;
    double tie_tol = -1.0;
    bool want_plan = true;
};

struct MinPSResult {
    double value_sq = 0.0;
    Vec theta;
    SparsePlan plan;
};

// Minimum of ps_theta over sampled directions, with optional (1+1)-ES
// refinement of the best direction (Gaussian perturbations; the step scale
// halves after 20 consecutive rejections).
MinPSResult min_ps(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                   const MinPSOptions& opts);

// Whether some direction sorts X in the order sx and Y in the order sy
// simultaneously, with strict separation (checked by LP feasibility with a
// positive margin).
bool order_pair_realizable(const Mat& X, const Mat& Y,
                           const std::vector<int>& sx, const std::vector<int>& sy);

// True when every pair of sorted orders of X and Y is realizable by some
// direction (holds for points in general position when 2n <= d+1). Throws
// SizeGuardError when (n!)^2 exceeds 1e4 pairs.
bool verify_full_permutation_coverage(const Mat& X, const Mat& Y);

}  // namespace psot
