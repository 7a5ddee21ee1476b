#include "psot/exact.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>

namespace psot {

Mat cost_matrix_sq(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    const int n = mu.size(), m = nu.size();
    Mat C(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            C(i, j) = (mu.points.row(i) - nu.points.row(j)).squaredNorm();
    return C;
}

namespace {

struct BasicCell {
    int i, j;
    double flow;
};

// Transportation simplex over the bipartite spanning-tree basis.
class TransportSimplex {
  public:
    TransportSimplex(const Mat& C, const Vec& a, const Vec& b)
        : C_(C), n_(static_cast<int>(a.size())), m_(static_cast<int>(b.size())) {
        in_basis_.assign(static_cast<size_t>(n_) * m_, 0);
        northwest_start(a, b);
    }

    void solve() {
        const double rc_tol = 1e-12 * (1.0 + C_.cwiseAbs().maxCoeff());
        const long bland_after = 200L * (n_ + m_) + 1000;
        long iter = 0;
        for (;;) {
            ++iter;
            bool bland = iter > bland_after;
            auto [ei, ej, rc] = find_entering(bland, rc_tol);
            if (ei < 0) break;
            pivot(ei, ej);
        }
    }

    TransportResult result() const {
        TransportResult out;
        out.plan.rows = n_;
        out.plan.cols = m_;
        for (const auto& c : cells_) {
            if (c.flow <= 0.0) continue;
            out.plan.entries.push_back({c.i, c.j, c.flow});
            out.cost += c.flow * C_(c.i, c.j);
        }
        return out;
    }

  private:
    void northwest_start(const Vec& a, const Vec& b) {
        int i = 0, j = 0;
        double ra = a[0], rb = b[0];
        for (;;) {
            double f = std::min(ra, rb);
            add_cell(i, j, f);
            if (i == n_ - 1 && j == m_ - 1) break;
            if (ra <= rb && i < n_ - 1) {
                rb -= ra;
                ++i;
                ra = a[i];
            } else if (j < m_ - 1) {
                ra -= rb;
                ++j;
                rb = b[j];
            } else {
                rb -= ra;
                ++i;
                ra = a[i];
            }
        }
    }

    void add_cell(int i, int j, double f) {
        int id = static_cast<int>(cells_.size());
        cells_.push_back({i, j, f});
        row_adj_.resize(n_);
        col_adj_.resize(m_);
        row_adj_[i].push_back(id);
        col_adj_[j].push_back(id);
        in_basis_[key(i, j)] = 1;
    }

    size_t key(int i, int j) const { return static_cast<size_t>(i) * m_ + j; }

    void compute_duals(Vec& u, Vec& v) const {
        u.setConstant(n_, std::numeric_limits<double>::quiet_NaN());
        v.setConstant(m_, std::numeric_limits<double>::quiet_NaN());
        std::deque<int> queue;  // node ids: rows [0,n), cols [n, n+m)
        u[0] = 0.0;
        queue.push_back(0);
        while (!queue.empty()) {
            int node = queue.front();
            queue.pop_front();
            if (node < n_) {
                for (int id : row_adj_[node]) {
                    int j = cells_[id].j;
                    if (std::isnan(v[j])) {
                        v[j] = C_(node, j) - u[node];
                        queue.push_back(n_ + j);
                    }
                }
            } else {
                int j = node - n_;
                for (int id : col_adj_[j]) {
                    int i = cells_[id].i;
                    if (std::isnan(u[i])) {
                        u[i] = C_(i, j) - v[j];
                        queue.push_back(i);
                    }
                }
            }
        }
    }

    std::tuple<int, int, double> find_entering(bool bland, double rc_tol) {
        Vec u(n_), v(m_);
        compute_duals(u, v);
        int bi = -1, bj = -1;
        double best = -rc_tol;
        for (int i = 0; i < n_; ++i) {
            for (int j = 0; j < m_; ++j) {
                if (in_basis_[key(i, j)]) continue;
                double rc = C_(i, j) - u[i] - v[j];
                if (rc < best) {
                    best = rc;
                    bi = i;
                    bj = j;
                    if (bland) return {bi, bj, best};  // first negative index
                }
            }
        }
        return {bi, bj, best};
    }

    void pivot(int ei, int ej) {
        // unique tree path from row node ei to col node ej
        const int nodes = n_ + m_;
        std::vector<int> parent_cell(nodes, -1), parent_node(nodes, -1);
        std::vector<char> seen(nodes, 0);
        std::deque<int> queue;
        seen[ei] = 1;
        queue.push_back(ei);
        while (!queue.empty()) {
            int node = queue.front();
            queue.pop_front();
            if (node == n_ + ej) break;
            const auto& adj = node < n_ ? row_adj_[node] : col_adj_[node - n_];
            for (int id : adj) {
                const auto& c = cells_[id];
                int next = node < n_ ? n_ + c.j : c.i;
                if (seen[next]) continue;
                seen[next] = 1;
                parent_cell[next] = id;
                parent_node[next] = node;
                queue.push_back(next);
            }
        }

        // cycle cells alternate -,+,-,... walking back from ej
        std::vector<int> minus, plus;
        int node = n_ + ej;
        bool is_minus = true;
        while (node != ei) {
            (is_minus ? minus : plus).push_back(parent_cell[node]);
            node = parent_node[node];
            is_minus = !is_minus;
        }

        double t = std::numeric_limits<double>::infinity();
        int leave = -1;
        for (int id : minus) {
            if (cells_[id].flow < t ||
                (cells_[id].flow == t && leave >= 0 &&
                 key(cells_[id].i, cells_[id].j) < key(cells_[leave].i, cells_[leave].j))) {
                t = cells_[id].flow;
                leave = id;
            }
        }
        for (int id : minus) cells_[id].flow -= t;
        for (int id : plus) cells_[id].flow += t;

        // swap leaving cell out, entering cell in (reuse the slot)
        auto& lc = cells_[leave];
        in_basis_[key(lc.i, lc.j)] = 0;
        std::erase(row_adj_[lc.i], leave);
        std::erase(col_adj_[lc.j], leave);
        lc = {ei, ej, t};
        row_adj_[ei].push_back(leave);
        col_adj_[ej].push_back(leave);
        in_basis_[key(ei, ej)] = 1;
    }

    const Mat& C_;
    int n_, m_;
    std::vector<BasicCell> cells_;
    std::vector<std::vector<int>> row_adj_, col_adj_;
    std::vector<char> in_basis_;
};

}  // namespace

TransportResult transport_exact(const Mat& C, const Vec& a, const Vec& b) {
    if (std::abs(a.sum() - b.sum()) > 1e-9)
        throw std::invalid_argument("transport: supply/demand mismatch");
    TransportSimplex ts(C, a, b);
    ts.solve();
    return ts.result();
}

TransportResult w2_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    mu.validate();
    nu.validate();
    if (mu.dim() != nu.dim())
        throw std::invalid_argument("w2_exact: dimension mismatch");
    double cells = static_cast<double>(mu.size()) * nu.size();
    if (cells > 1e6)
        throw SizeGuardError("w2_exact: problem exceeds 1e6 cells; use sliced variants");
    Mat C = cost_matrix_sq(mu, nu);
    return transport_exact(C, mu.weights, nu.weights);
}

WnuResult w_nu_lp(const DiscreteMeasure& nu, const DiscreteMeasure& mu1,
                  const DiscreteMeasure& mu2) {
    nu.validate();
    mu1.validate();
    mu2.validate();
    const int K = nu.size(), n = mu1.size(), m = mu2.size();
    double nvars = static_cast<double>(K) * n * m;
    if (nvars > 2e5)
        throw SizeGuardError("w_nu_lp: 3-plan exceeds 2e5 variables");

    Mat C1 = cost_matrix_sq(nu, mu1);
    Mat C2 = cost_matrix_sq(nu, mu2);
    Mat C12 = cost_matrix_sq(mu1, mu2);
    double w1 = transport_exact(C1, nu.weights, mu1.weights).cost;
    double w2 = transport_exact(C2, nu.weights, mu2.weights).cost;

    auto idx = [&](int k, int i, int j) { return (k * n + i) * m + j; };
    const int N = K * n * m;
    LinearProgram lp;
    lp.c = Vec::Zero(N);
    lp.A_eq = Mat::Zero(K + n + m, N);
    lp.b_eq = Vec::Zero(K + n + m);
    lp.A_ub = Mat::Zero(2, N);
    lp.b_ub = Vec::Zero(2);
    for (int k = 0; k < K; ++k) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < m; ++j) {
                int col = idx(k, i, j);
                lp.c[col] = C12(i, j);
                lp.A_eq(k, col) = 1.0;
                lp.A_eq(K + i, col) = 1.0;
                lp.A_eq(K + n + j, col) = 1.0;
                lp.A_ub(0, col) = C1(k, i);
                lp.A_ub(1, col) = C2(k, j);
            }
        }
    }
    lp.b_eq.head(K) = nu.weights;
    lp.b_eq.segment(K, n) = mu1.weights;
    lp.b_eq.tail(m) = mu2.weights;
    lp.b_ub[0] = w1 + 1e-12 * (1.0 + w1);
    lp.b_ub[1] = w2 + 1e-12 * (1.0 + w2);

    LPResult sol = lp_solve(lp);
    if (sol.status != LPStatus::Optimal)
        throw std::runtime_error("w_nu_lp: solver failed on the 3-plan program");

    WnuResult out;
    out.value_sq = sol.value;
    out.coupling.rows = n;
    out.coupling.cols = m;
    Mat P = Mat::Zero(n, m);
    for (int k = 0; k < K; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) {
                double v = sol.x[idx(k, i, j)];
                if (v > 1e-14) {
                    out.plan.push_back({k, i, j, v});
                    P(i, j) += v;
                }
            }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            if (P(i, j) > 0.0) out.coupling.entries.push_back({i, j, P(i, j)});
    return out;
}

namespace {

// Support of the optimal plan changes under a tiny random cost perturbation
// iff the plan is not unique (up to numerical tolerance).
bool plan_is_unique(const Mat& C, const Vec& a, const Vec& b,
                    const SparsePlan& base) {
    std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> u(0.5, 1.0);
    double scale = 1e-7 * (1.0 + C.cwiseAbs().maxCoeff());
    Mat Cp = C;
    for (int i = 0; i < C.rows(); ++i)
        for (int j = 0; j < C.cols(); ++j) Cp(i, j) += scale * u(rng);
    SparsePlan alt = transport_exact(Cp, a, b).plan;
    auto support = [](const SparsePlan& p) {
        std::vector<std::pair<int, int>> s;
        for (const auto& e : p.entries)
            if (e.mass > 1e-12) s.emplace_back(e.i, e.j);
        std::sort(s.begin(), s.end());
        return s;
    };
    return support(base) == support(alt);
}

}  // namespace

double w_nu_disintegration(const DiscreteMeasure& nu, const DiscreteMeasure& mu1,
                           const DiscreteMeasure& mu2) {
    nu.validate();
    mu1.validate();
    mu2.validate();
    Mat C1 = cost_matrix_sq(nu, mu1);
    Mat C2 = cost_matrix_sq(nu, mu2);
    SparsePlan g1 = transport_exact(C1, nu.weights, mu1.weights).plan;
    SparsePlan g2 = transport_exact(C2, nu.weights, mu2.weights).plan;
    if (!plan_is_unique(C1, nu.weights, mu1.weights, g1) ||
        !plan_is_unique(C2, nu.weights, mu2.weights, g2))
        throw std::runtime_error(
            "w_nu_disintegration: optimal coupling is not unique; use w_nu_lp");

    double total = 0.0;
    for (int k = 0; k < nu.size(); ++k) {
        auto conditional = [&](const SparsePlan& g, const DiscreteMeasure& mu) {
            std::vector<int> ids;
            std::vector<double> w;
            for (const auto& e : g.entries)
                if (e.i == k && e.mass > 0.0) {
                    ids.push_back(e.j);
                    w.push_back(e.mass);
                }
            Mat pts(ids.size(), mu.dim());
            Vec wv(ids.size());
            for (size_t t = 0; t < ids.size(); ++t) {
                pts.row(static_cast<int>(t)) = mu.points.row(ids[t]);
                wv[static_cast<int>(t)] = w[t];
            }
            wv /= wv.sum();
            return DiscreteMeasure::weighted(std::move(pts), std::move(wv));
        };
        DiscreteMeasure c1 = conditional(g1, mu1);
        DiscreteMeasure c2 = conditional(g2, mu2);
        total += nu.weights[k] * w2_exact(c1, c2).cost;
    }
    return total;
}

}  // namespace psot
