#include "psot/measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

namespace psot {

void DiscreteMeasure::validate() const {
    if (points.rows() == 0 || points.cols() == 0)
        throw std::invalid_argument("measure: empty support");
    if (weights.size() != points.rows())
        throw std::invalid_argument("measure: weight/point count mismatch");
    if (!points.allFinite() || !weights.allFinite())
        throw std::invalid_argument("measure: non-finite data");
    for (int i = 0; i < weights.size(); ++i)
        if (weights[i] <= 0.0)
            throw std::invalid_argument("measure: weights must be strictly positive");
    if (std::abs(weights.sum() - 1.0) > 1e-9)
        throw std::invalid_argument("measure: weights must sum to 1");
}

DiscreteMeasure DiscreteMeasure::uniform(Mat pts) {
    DiscreteMeasure mu;
    mu.weights = Vec::Constant(pts.rows(), 1.0 / static_cast<double>(pts.rows()));
    mu.points = std::move(pts);
    mu.validate();
    return mu;
}

DiscreteMeasure DiscreteMeasure::weighted(Mat pts, Vec w) {
    DiscreteMeasure mu;
    mu.points = std::move(pts);
    mu.weights = std::move(w);
    mu.validate();
    return mu;
}

Vec SparsePlan::row_marginal() const {
    Vec a = Vec::Zero(rows);
    for (const auto& e : entries) a[e.i] += e.mass;
    return a;
}

Vec SparsePlan::col_marginal() const {
    Vec b = Vec::Zero(cols);
    for (const auto& e : entries) b[e.j] += e.mass;
    return b;
}

double SparsePlan::cost_sq(const DiscreteMeasure& mu, const DiscreteMeasure& nu) const {
    double c = 0.0;
    for (const auto& e : entries)
        c += e.mass * (mu.points.row(e.i) - nu.points.row(e.j)).squaredNorm();
    return c;
}

void SparsePlan::validate_marginals(const Vec& a, const Vec& b, double tol) const {
    if (a.size() != rows || b.size() != cols)
        throw std::invalid_argument("plan: marginal size mismatch");
    for (const auto& e : entries) {
        if (e.i < 0 || e.i >= rows || e.j < 0 || e.j >= cols)
            throw std::invalid_argument("plan: index out of range");
        if (e.mass < -tol)
            throw std::invalid_argument("plan: negative mass");
    }
    if ((row_marginal() - a).cwiseAbs().maxCoeff() > tol)
        throw std::invalid_argument("plan: row marginal mismatch");
    if ((col_marginal() - b).cwiseAbs().maxCoeff() > tol)
        throw std::invalid_argument("plan: column marginal mismatch");
}

void SparsePlan::prune(double floor) {
    std::erase_if(entries, [&](const PlanEntry& e) { return e.mass < floor; });
    double total = 0.0;
    for (const auto& e : entries) total += e.mass;
    if (total > 0.0)
        for (auto& e : entries) e.mass /= total;
}

Vec normalize_direction(Vec v) {
    double n = v.norm();
    if (n < 1e-12) throw std::invalid_argument("direction: norm too small");
    return v / n;
}

std::vector<Vec> sample_sphere(int L, int d, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Vec> dirs;
    dirs.reserve(L);
    while (static_cast<int>(dirs.size()) < L) {
        Vec v(d);
        for (int k = 0; k < d; ++k) v[k] = gauss(rng);
        double n = v.norm();
        if (n < 1e-12) continue;
        dirs.push_back(v / n);
    }
    return dirs;
}

Vec project(const Mat& points, const Vec& theta) {
    return points * theta;
}

double default_tie_tol(const Vec& values) {
    return 1e-9 * (values.cwiseAbs().maxCoeff() + 1.0);
}

TieGroups tie_groups(const Vec& values, double tol) {
    const int n = static_cast<int>(values.size());
    TieGroups g;
    g.order.resize(n);
    std::iota(g.order.begin(), g.order.end(), 0);
    std::stable_sort(g.order.begin(), g.order.end(),
                     [&](int a, int b) { return values[a] < values[b]; });
    g.group_of.assign(n, -1);
    std::vector<double> reps;
    int begin = 0;
    for (int p = 0; p < n; ++p) {
        // new group when the gap to the previous sorted value exceeds tol
        if (p > 0 && values[g.order[p]] - values[g.order[p - 1]] > tol) {
            g.spans.emplace_back(begin, p);
            reps.push_back(values[g.order[begin]]);
            begin = p;
        }
        g.group_of[g.order[p]] = static_cast<int>(g.spans.size());
    }
    g.spans.emplace_back(begin, n);
    reps.push_back(values[g.order[begin]]);
    g.group_value = Eigen::Map<Vec>(reps.data(), static_cast<long>(reps.size()));
    return g;
}

// --- file I/O -------------------------------------------------------------

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

double parse_double(const std::string& s, const std::string& path) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw IOError(path + ": bad numeric field '" + s + "'");
    }
}

}  // namespace

DiscreteMeasure read_measure_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IOError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw IOError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = split_csv_line(line);
    bool has_weight = !header.empty() && header.back() == "weight";
    int d = static_cast<int>(header.size()) - (has_weight ? 1 : 0);
    if (d <= 0) throw IOError(path + ": no coordinate columns");

    std::vector<double> coords;
    std::vector<double> ws;
    int n = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) != d + (has_weight ? 1 : 0))
            throw IOError(path + ": row with wrong field count");
        for (int k = 0; k < d; ++k) coords.push_back(parse_double(fields[k], path));
        if (has_weight) ws.push_back(parse_double(fields[d], path));
        ++n;
    }
    if (n == 0) throw IOError(path + ": no data rows");

    Mat pts(n, d);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < d; ++k) pts(i, k) = coords[static_cast<size_t>(i) * d + k];
    try {
        if (has_weight)
            return DiscreteMeasure::weighted(std::move(pts),
                                             Eigen::Map<Vec>(ws.data(), n));
        return DiscreteMeasure::uniform(std::move(pts));
    } catch (const std::invalid_argument& e) {
        throw IOError(path + ": " + e.what());
    }
}

void write_measure_csv(const std::string& path, const DiscreteMeasure& mu) {
    std::ofstream out(path);
    if (!out) throw IOError("cannot write " + path);
    out.precision(17);
    for (int k = 0; k < mu.dim(); ++k) out << (k ? "," : "") << "x" << k;
    out << ",weight\n";
    for (int i = 0; i < mu.size(); ++i) {
        for (int k = 0; k < mu.dim(); ++k) out << (k ? "," : "") << mu.points(i, k);
        out << "," << mu.weights[i] << "\n";
    }
    if (!out) throw IOError("write failed: " + path);
}

void write_plan_csv(const std::string& path, const SparsePlan& plan) {
    std::ofstream out(path);
    if (!out) throw IOError("cannot write " + path);
    out.precision(17);
    out << "i,j,mass\n";
    for (const auto& e : plan.entries) out << e.i << "," << e.j << "," << e.mass << "\n";
    if (!out) throw IOError("write failed: " + path);
}

SparsePlan read_plan_csv(const std::string& path, int rows, int cols) {
    std::ifstream in(path);
    if (!in) throw IOError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw IOError(path + ": empty file");
    SparsePlan plan;
    plan.rows = rows;
    plan.cols = cols;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 3) throw IOError(path + ": bad plan row");
        PlanEntry e;
        e.i = static_cast<int>(parse_double(fields[0], path));
        e.j = static_cast<int>(parse_double(fields[1], path));
        e.mass = parse_double(fields[2], path);
        plan.entries.push_back(e);
    }
    return plan;
}

int num_threads() {
    if (const char* env = std::getenv("PSOT_THREADS")) {
        int t = std::atoi(env);
        if (t > 0) return t;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace psot
