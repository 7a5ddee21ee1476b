#pragma once

#include "psot/measure.hpp"

namespace psot {

enum class Functional { SW, PS_FIXED_THETA, MIN_PS, ES };
enum class Optimizer { ADAM, SGD };

struct FlowConfig {
    Functional functional = Functional::MIN_PS;
    Optimizer optimizer = Optimizer::ADAM;
    double lr = 0.02;
    int iters = 500;
    int num_directions = 50;
    std::uint64_t seed = 0;
    bool refine = false;      // MIN_PS only
    Vec theta;                // PS_FIXED_THETA only
    double tie_tol = -1.0;
    double stop_tol = 1e-6;   // relative loss change for early stop; <=0 disables
    int w2_every = 0;         // record exact W2^2 every k iterations (0 = never)
};

struct FlowTraceRow {
    int iter;
    double loss;     // squared discrepancy of the functional at this iterate
    double w2sq;     // exact squared W2 (NaN when not recorded)
    double seconds;  // cumulative wall time
};

struct FlowResult {
    Mat X;  // final particle positions
    std::vector<FlowTraceRow> trace;
};

// Per-particle gradient of the fixed-plan matching loss
// sum_ij (w_ij / a_i) ||x_i - y_j||^2 (for SW: averaged over directions,
// applied to the per-direction monotone couplings). Also returns the loss
// whose gradient this is, matching a central finite difference.
struct GradientResult {
    Mat grad;          // n x d
    double loss;       // matching loss differentiated by grad
    double value_sq;   // the functional's squared discrepancy
};

GradientResult step_gradient(const Mat& X, const DiscreteMeasure& target,
                             const FlowConfig& cfg, std::mt19937_64& rng);

FlowResult run_flow(Mat X0, const DiscreteMeasure& target, const FlowConfig& cfg);

void write_trace_csv(const std::string& path, const std::vector<FlowTraceRow>& trace);

}  // namespace psot
