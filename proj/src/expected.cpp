#include "psot/expected.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "psot/ot1d.hpp"

namespace psot {

namespace {

struct BlockStructure {
    TieGroups gx, gy;
    Vec A, B;               // group masses
    Coupling1D blocks;      // monotone coupling of the group values
};

BlockStructure block_structure(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                               const Vec& theta, double tie_tol) {
    Vec px = project(mu.points, theta);
    Vec py = project(nu.points, theta);
    double tol = tie_tol;
    if (tol < 0.0) {
        Vec all(px.size() + py.size());
        all << px, py;
        tol = default_tie_tol(all);
    }
    BlockStructure bs;
    bs.gx = tie_groups(px, tol);
    bs.gy = tie_groups(py, tol);
    bs.A = Vec::Zero(bs.gx.num_groups());
    bs.B = Vec::Zero(bs.gy.num_groups());
    for (int i = 0; i < mu.size(); ++i) bs.A[bs.gx.group_of[i]] += mu.weights[i];
    for (int j = 0; j < nu.size(); ++j) bs.B[bs.gy.group_of[j]] += nu.weights[j];
    bs.blocks = quantile_coupling(bs.gx.group_value, bs.A, bs.gy.group_value, bs.B);
    return bs;
}

}  // namespace

SparsePlan lifted_plan(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                       const Vec& theta, double tie_tol) {
    mu.validate();
    nu.validate();
    Vec th = normalize_direction(theta);
    BlockStructure bs = block_structure(mu, nu, th, tie_tol);

    double entry_count = 0.0;
    for (const auto& e : bs.blocks.entries) {
        auto [xb, xe] = bs.gx.spans[e.i];
        auto [yb, ye] = bs.gy.spans[e.j];
        entry_count += static_cast<double>(xe - xb) * (ye - yb);
    }
    if (entry_count > 2e7)
        throw SizeGuardError("lifted_plan: plan exceeds 2e7 entries");

    SparsePlan plan;
    plan.rows = mu.size();
    plan.cols = nu.size();
    plan.entries.reserve(static_cast<size_t>(entry_count));
    for (const auto& e : bs.blocks.entries) {
        auto [xb, xe] = bs.gx.spans[e.i];
        auto [yb, ye] = bs.gy.spans[e.j];
        double denom = bs.A[e.i] * bs.B[e.j];
        for (int p = xb; p < xe; ++p) {
            int i = bs.gx.order[p];
            for (int q = yb; q < ye; ++q) {
                int j = bs.gy.order[q];
                plan.entries.push_back({i, j, mu.weights[i] * nu.weights[j] / denom * e.mass});
            }
        }
    }
    return plan;
}

double ls_theta_sq(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                   const Vec& theta, double tie_tol) {
    mu.validate();
    nu.validate();
    Vec th = normalize_direction(theta);
    BlockStructure bs = block_structure(mu, nu, th, tie_tol);

    // cost per block pair via first/second moments of the group members:
    // sum_ij w_i w_j |x_i - y_j|^2 / (A B) = <|x|^2>_A + <|y|^2>_B - 2 <x>_A . <y>_B
    const int ngx = bs.gx.num_groups(), ngy = bs.gy.num_groups();
    Mat mean_x = Mat::Zero(ngx, mu.dim());
    Vec sq_x = Vec::Zero(ngx);
    for (int i = 0; i < mu.size(); ++i) {
        int g = bs.gx.group_of[i];
        mean_x.row(g) += mu.weights[i] * mu.points.row(i);
        sq_x[g] += mu.weights[i] * mu.points.row(i).squaredNorm();
    }
    Mat mean_y = Mat::Zero(ngy, nu.dim());
    Vec sq_y = Vec::Zero(ngy);
    for (int j = 0; j < nu.size(); ++j) {
        int g = bs.gy.group_of[j];
        mean_y.row(g) += nu.weights[j] * nu.points.row(j);
        sq_y[g] += nu.weights[j] * nu.points.row(j).squaredNorm();
    }
    double total = 0.0;
    for (const auto& e : bs.blocks.entries) {
        double A = bs.A[e.i], B = bs.B[e.j];
        double c = sq_x[e.i] / A + sq_y[e.j] / B -
                   2.0 * mean_x.row(e.i).dot(mean_y.row(e.j)) / (A * B);
        total += e.mass * c;
    }
    return total;
}

ESResult expected_sliced(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                         const std::vector<Vec>& directions, double tie_tol) {
    if (directions.empty())
        throw std::invalid_argument("expected_sliced: need at least one direction");
    ESResult out;
    out.plan.rows = mu.size();
    out.plan.cols = nu.size();
    std::unordered_map<long long, double> acc;
    const double w = 1.0 / static_cast<double>(directions.size());
    for (const auto& th : directions) {
        SparsePlan p = lifted_plan(mu, nu, th, tie_tol);
        out.value_sq += w * p.cost_sq(mu, nu);
        for (const auto& e : p.entries)
            acc[static_cast<long long>(e.i) * nu.size() + e.j] += w * e.mass;
        if (acc.size() > 2e7)
            throw SizeGuardError("expected_sliced: mixture plan exceeds 2e7 entries");
    }
    out.plan.entries.reserve(acc.size());
    for (const auto& [key, mass] : acc) {
        int i = static_cast<int>(key / nu.size());
        int j = static_cast<int>(key % nu.size());
        out.plan.entries.push_back({i, j, mass});
    }
    std::sort(out.plan.entries.begin(), out.plan.entries.end(),
              [](const PlanEntry& a, const PlanEntry& b) {
                  return a.i != b.i ? a.i < b.i : a.j < b.j;
              });
    return out;
}

ESResult expected_sliced(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                         int L, std::uint64_t seed, double tie_tol) {
    std::mt19937_64 rng(seed);
    return expected_sliced(mu, nu, sample_sphere(L, mu.dim(), rng), tie_tol);
}

Mat barycentric_projection(const SparsePlan& plan, const DiscreteMeasure& mu,
                           const DiscreteMeasure& nu) {
    Mat out = Mat::Zero(mu.size(), nu.dim());
    Vec mass = Vec::Zero(mu.size());
    for (const auto& e : plan.entries) {
        out.row(e.i) += e.mass * nu.points.row(e.j);
        mass[e.i] += e.mass;
    }
    for (int i = 0; i < mu.size(); ++i) {
        if (mass[i] > 0.0)
            out.row(i) /= mass[i];
        else
            out.row(i) = mu.points.row(i);
    }
    return out;
}

}  // namespace psot
