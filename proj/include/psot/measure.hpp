#pragma once

#include <Eigen/Dense>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace psot {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Thrown when an input exceeds the exact-solver size guards.
struct SizeGuardError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown on malformed files / unreadable paths.
struct IOError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Finite weighted point cloud. Weights are strictly positive and sum to 1.
struct DiscreteMeasure {
    Mat points;   // n x d
    Vec weights;  // n

    int size() const { return static_cast<int>(points.rows()); }
    int dim() const { return static_cast<int>(points.cols()); }

    // Throws std::invalid_argument on empty support, non-finite data,
    // non-positive weights, or weights not summing to 1 (within 1e-9).
    void validate() const;

    static DiscreteMeasure uniform(Mat pts);
    static DiscreteMeasure weighted(Mat pts, Vec w);  // validates
};

struct PlanEntry {
    int i;
    int j;
    double mass;
};

// Sparse coupling between two discrete measures.
struct SparsePlan {
    int rows = 0;
    int cols = 0;
    std::vector<PlanEntry> entries;

    Vec row_marginal() const;
    Vec col_marginal() const;

    // Sum of mass * ||x_i - y_j||^2 over entries.
    double cost_sq(const DiscreteMeasure& mu, const DiscreteMeasure& nu) const;

    // Throws std::invalid_argument if marginals deviate from (a, b) by more
    // than tol in max norm, or any entry is negative / out of range.
    void validate_marginals(const Vec& a, const Vec& b, double tol = 1e-9) const;

    // Drop entries below floor, then rescale to unit total mass.
    void prune(double floor = 1e-15);
};

// Normalizes v to unit length; throws std::invalid_argument when ||v|| is
// too small to define a direction.
Vec normalize_direction(Vec v);

// L i.i.d. uniform directions on S^{d-1}.
std::vector<Vec> sample_sphere(int L, int d, std::mt19937_64& rng);

// Projected values theta^T x_i.
Vec project(const Mat& points, const Vec& theta);

// Default tolerance for deciding that two projected values tie.
double default_tie_tol(const Vec& values);

// Partition of indices into groups of equal value (within tol), ordered by
// increasing value. order lists all indices sorted by value; spans[g] is the
// half-open range of positions in order belonging to group g.
struct TieGroups {
    std::vector<int> order;
    std::vector<std::pair<int, int>> spans;
    std::vector<int> group_of;  // original index -> group id
    Vec group_value;            // representative (first) value per group

    int num_groups() const { return static_cast<int>(spans.size()); }
};

TieGroups tie_groups(const Vec& values, double tol);

// --- file I/O -------------------------------------------------------------

// CSV point cloud: header x0,...,x{d-1}[,weight]; weight column optional.
DiscreteMeasure read_measure_csv(const std::string& path);
void write_measure_csv(const std::string& path, const DiscreteMeasure& mu);

// Plan CSV: header i,j,mass with 0-based indices.
void write_plan_csv(const std::string& path, const SparsePlan& plan);
SparsePlan read_plan_csv(const std::string& path, int rows, int cols);

// Number of worker threads: PSOT_THREADS env var if set, else hardware count.
int num_threads();

}  // namespace psot
