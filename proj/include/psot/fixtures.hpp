#pragma once

#include "psot/measure.hpp"

namespace psot {
namespace fixtures {

// Two-point planar triple violating the triangle inequality along e1.
struct Tri {
    DiscreteMeasure mu1, mu2, mu3;
    Vec theta;  // (1, 0)
};
Tri tri();

// Pivot-based distance discontinuity instance: nu on the vertical axis,
// mu1(n) converging to mu1_limit, and a fixed mu2.
struct WnuInstance {
    DiscreteMeasure nu, mu1, mu2;
};
WnuInstance wnu_limit();          // value 2.0
WnuInstance wnu_at(int n);        // n = 2 gives 9.78125

// Vertical two-point measure whose self lifted-sliced cost along e1 is 1/2.
struct VSeg {
    DiscreteMeasure mu;
    Vec theta;
};
VSeg vseg();

// Equal measures whose projections fully tie along e1; sorted-order matching
// is ambiguous but the tie-aware coupling has zero cost.
struct Ambiguity {
    DiscreteMeasure mu1, mu2;
    Vec theta;
};
Ambiguity swgg_ambiguity();

// Ten-point measures: the tri() configurations replicated under 5 rotations
// (angles k*pi/5). The triangle defect of min-PS is strictly negative.
struct Rot5 {
    DiscreteMeasure mu1, mu2, mu3;
};
Rot5 rot5();

// m uniform samples of the unit disk.
DiscreteMeasure disk(int m, std::uint64_t seed);

// Within-slice variance integral of the uniform unit disk (the continuous
// self lifted-sliced cost), evaluated by composite Simpson quadrature.
double disk_within_slice_variance_quadrature(int panels = 2000);

}  // namespace fixtures
}  // namespace psot
