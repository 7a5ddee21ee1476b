#include "psot/lp.hpp"

#include <cmath>
#include <limits>

namespace psot {

namespace {

constexpr double kPivotTol = 1e-10;

// Bland's rule on an explicit tableau. cost_row is the index of the row
// holding reduced costs; columns in [0, ncols) are eligible unless barred.
// Returns false when no entering column exists (optimal).
bool simplex_iterate(Mat& T, std::vector<int>& basis, int ncols,
                     const std::vector<bool>& barred, double rc_tol) {
    const int m = static_cast<int>(T.rows()) - 1;
    for (;;) {
        int enter = -1;
        for (int j = 0; j < ncols; ++j) {
            if (barred[j]) continue;
            if (T(m, j) < -rc_tol) { enter = j; break; }  // Bland: first index
        }
        if (enter < 0) return true;

        int leave = -1;
        double best_ratio = std::numeric_limits<double>::infinity();
        int best_basic = std::numeric_limits<int>::max();
        const int rhs = static_cast<int>(T.cols()) - 1;
        for (int r = 0; r < m; ++r) {
            double a = T(r, enter);
            if (a <= kPivotTol) continue;
            double ratio = T(r, rhs) / a;
            if (ratio < best_ratio - 1e-12 ||
                (ratio < best_ratio + 1e-12 && basis[r] < best_basic)) {
                best_ratio = ratio;
                best_basic = basis[r];
                leave = r;
            }
        }
        if (leave < 0) return false;  // unbounded along enter

        double piv = T(leave, enter);
        T.row(leave) /= piv;
        for (int r = 0; r <= m; ++r) {
            if (r == leave) continue;
            double f = T(r, enter);
            if (f != 0.0) T.row(r) -= f * T.row(leave);
        }
        basis[leave] = enter;
    }
}

}  // namespace

LPResult lp_solve(const LinearProgram& lp) {
    const int n = static_cast<int>(lp.c.size());
    const int me = static_cast<int>(lp.A_eq.rows());
    const int mu = static_cast<int>(lp.A_ub.rows());
    const int m = me + mu;
    const int nslack = mu;
    const int nart = m;
    const int total = n + nslack + nart;

    // rows: [A_eq | 0 | I_art], [A_ub | I_slack | I_art], rhs >= 0
    Mat T = Mat::Zero(m + 2, total + 1);  // last two rows: phase2 cost, phase1 cost
    for (int r = 0; r < me; ++r) {
        T.block(r, 0, 1, n) = lp.A_eq.row(r);
        T(r, total) = lp.b_eq[r];
    }
    for (int r = 0; r < mu; ++r) {
        T.block(me + r, 0, 1, n) = lp.A_ub.row(r);
        T(me + r, n + r) = 1.0;
        T(me + r, total) = lp.b_ub[r];
    }
    for (int r = 0; r < m; ++r) {
        if (T(r, total) < 0.0) T.row(r) = -T.row(r);
        T(r, n + nslack + r) = 1.0;
    }
    T.block(m, 0, 1, n) = lp.c.transpose();

    // phase-1 objective: sum of artificials, expressed in non-basic terms
    for (int r = 0; r < m; ++r) T.row(m + 1) -= T.row(r);
    T.block(m + 1, n + nslack, 1, nart).setZero();

    std::vector<int> basis(m);
    for (int r = 0; r < m; ++r) basis[r] = n + nslack + r;

    LPResult res;

    {
        // phase 1: minimize the sum of artificials
        Mat work(m + 1, total + 1);
        work.topRows(m) = T.topRows(m);
        work.row(m) = T.row(m + 1);
        std::vector<bool> barred(total, false);
        double rc_tol = 1e-9;
        if (!simplex_iterate(work, basis, total, barred, rc_tol)) {
            res.status = LPStatus::Unbounded;  // cannot happen in phase 1
            return res;
        }
        if (work(m, total) < -1e-7) {
            res.status = LPStatus::Infeasible;
            return res;
        }
        T.topRows(m) = work.topRows(m);
    }

    // drive artificials out of the basis where possible
    for (int r = 0; r < m; ++r) {
        if (basis[r] < n + nslack) continue;
        int piv_col = -1;
        for (int j = 0; j < n + nslack; ++j)
            if (std::abs(T(r, j)) > 1e-8) { piv_col = j; break; }
        if (piv_col < 0) continue;  // redundant row; artificial stays basic at 0
        double piv = T(r, piv_col);
        T.row(r) /= piv;
        for (int rr = 0; rr < m; ++rr) {
            if (rr == r) continue;
            double f = T(rr, piv_col);
            if (f != 0.0) T.row(rr) -= f * T.row(r);
        }
        basis[r] = piv_col;
    }

    // phase 2: restate the cost row in terms of the current basis
    {
        Mat work(m + 1, total + 1);
        work.topRows(m) = T.topRows(m);
        work.row(m).setZero();
        work.block(m, 0, 1, n) = lp.c.transpose();
        for (int r = 0; r < m; ++r) {
            double f = work(m, basis[r]);
            if (f != 0.0) work.row(m) -= f * work.row(r);
        }
        std::vector<bool> barred(total, false);
        for (int j = n + nslack; j < total; ++j) barred[j] = true;
        double rc_tol = 1e-9 * (1.0 + lp.c.cwiseAbs().maxCoeff());
        if (!simplex_iterate(work, basis, n + nslack, barred, rc_tol)) {
            res.status = LPStatus::Unbounded;
            return res;
        }
        res.x = Vec::Zero(n);
        for (int r = 0; r < m; ++r)
            if (basis[r] < n) res.x[basis[r]] = work(r, total);
        res.value = lp.c.dot(res.x);
        res.basis = basis;
        res.status = LPStatus::Optimal;
    }
    return res;
}

}  // namespace psot
