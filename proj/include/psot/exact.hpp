#pragma once

#include "psot/lp.hpp"
#include "psot/measure.hpp"

namespace psot {

struct TransportResult {
    double cost = 0.0;
    SparsePlan plan;  // basic solution: at most n+m-1 entries
};

// Exact transportation problem min <C, P> over couplings of (a, b), solved
// with a network (transportation) simplex. Returns a vertex of the polytope.
TransportResult transport_exact(const Mat& C, const Vec& a, const Vec& b);

// Squared 2-Wasserstein distance with optimal plan. Throws SizeGuardError
// when n*m exceeds the desk-scale guard (1e6 cells).
TransportResult w2_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

struct ThreePlanEntry {
    int k;  // pivot atom
    int i;  // mu1 atom
    int j;  // mu2 atom
    double mass;
};

struct WnuResult {
    double value_sq = 0.0;
    std::vector<ThreePlanEntry> plan;
    SparsePlan coupling;  // (i, j) bi-marginal of the 3-plan
};

// Pivot-constrained Wasserstein: min sum ||x_i - y_j||^2 rho_kij over 3-plans
// whose (nu, mu1) and (nu, mu2) bi-marginals are W2-optimal couplings. The
// optimality requirement is encoded as two linear cost constraints. Throws
// SizeGuardError when |nu| * n * m exceeds 2e5 variables.
WnuResult w_nu_lp(const DiscreteMeasure& nu, const DiscreteMeasure& mu1,
                  const DiscreteMeasure& mu2);

// Disintegration route: value = sum_k nu_k * W2^2(gamma1^k, gamma2^k) with
// the conditional measures of the optimal couplings. Only valid when both
// couplings are unique; uniqueness is probed by re-solving with a randomly
// perturbed cost, and std::runtime_error is thrown when it fails.
double w_nu_disintegration(const DiscreteMeasure& nu, const DiscreteMeasure& mu1,
                           const DiscreteMeasure& mu2);

// Squared-distance cost matrix.
Mat cost_matrix_sq(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

}  // namespace psot
