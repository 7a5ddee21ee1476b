#pragma once

#include "psot/measure.hpp"

namespace psot {

// min c^T x  s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  x >= 0.
// Either constraint block may be empty (0 rows).
struct LinearProgram {
    Vec c;
    Mat A_eq;
    Vec b_eq;
    Mat A_ub;
    Vec b_ub;
};

enum class LPStatus { Optimal, Infeasible, Unbounded };

struct LPResult {
    LPStatus status = LPStatus::Infeasible;
    double value = 0.0;
    Vec x;                    // a vertex of the feasible polytope when Optimal
    std::vector<int> basis;   // basic variable indices (standard-form solver)
};

// Two-phase dense simplex with Bland's pivoting rule (deterministic,
// cycle-free). Returns basic solutions, i.e. vertices.
LPResult lp_solve(const LinearProgram& lp);

}  // namespace psot
