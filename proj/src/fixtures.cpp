#include "psot/fixtures.hpp"

#include <cmath>
#include <random>

namespace psot {
namespace fixtures {

Tri tri() {
    Tri f;
    Mat x(2, 2), y(2, 2), z(2, 2);
    x << -1, 0, 1, 5;
    y << -1, 5, 1, 0;
    z << 0, 0, 0, 5;
    f.mu1 = DiscreteMeasure::uniform(x);
    f.mu2 = DiscreteMeasure::uniform(y);
    f.mu3 = DiscreteMeasure::uniform(z);
    f.theta = Vec::Zero(2);
    f.theta[0] = 1.0;
    return f;
}

namespace {

WnuInstance wnu_base(double x1_second) {
    WnuInstance f;
    Mat zn(2, 2), x(2, 2), y(2, 2);
    zn << 0, 1, 0, -1;
    x << -1, x1_second, 1, 0;
    y << -2, -1, 2, 1;
    f.nu = DiscreteMeasure::uniform(zn);
    f.mu1 = DiscreteMeasure::uniform(x);
    f.mu2 = DiscreteMeasure::uniform(y);
    return f;
}

}  // namespace

WnuInstance wnu_limit() { return wnu_base(0.0); }

WnuInstance wnu_at(int n) { return wnu_base(std::pow(2.0, -n)); }

VSeg vseg() {
    VSeg f;
    Mat p(2, 2);
    p << 0, 0, 0, 1;
    f.mu = DiscreteMeasure::uniform(p);
    f.theta = Vec::Zero(2);
    f.theta[0] = 1.0;
    return f;
}

Ambiguity swgg_ambiguity() {
    Ambiguity f;
    Mat x(2, 2), y(2, 2);
    x << 0, 1, 0, 0;
    y << 0, 0, 0, 1;
    f.mu1 = DiscreteMeasure::uniform(x);
    f.mu2 = DiscreteMeasure::uniform(y);
    f.theta = Vec::Zero(2);
    f.theta[0] = 1.0;
    return f;
}

Rot5 rot5() {
    Tri base = tri();
    auto build = [](const Mat& pts) {
        Mat out(10, 2);
        for (int k = 0; k < 5; ++k) {
            double a = k * M_PI / 5.0;
            Mat R(2, 2);
            R << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
            out.block(2 * k, 0, 2, 2) = pts * R.transpose();
        }
        return out;
    };
    Rot5 f;
    f.mu1 = DiscreteMeasure::uniform(build(base.mu1.points));
    f.mu2 = DiscreteMeasure::uniform(build(base.mu2.points));
    f.mu3 = DiscreteMeasure::uniform(build(base.mu3.points));
    return f;
}

DiscreteMeasure disk(int m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Mat pts(m, 2);
    for (int i = 0; i < m; ++i) {
        double r = std::sqrt(u(rng));
        double phi = 2.0 * M_PI * u(rng);
        pts(i, 0) = r * std::cos(phi);
        pts(i, 1) = r * std::sin(phi);
    }
    return DiscreteMeasure::uniform(std::move(pts));
}

double disk_within_slice_variance_quadrature(int panels) {
    // integrand: marginal density 2*sqrt(1-u^2)/pi times twice the variance
    // of a uniform variable on a slice of half-width sqrt(1-u^2)
    auto f = [](double u) {
        double h2 = std::max(0.0, 1.0 - u * u);
        return (2.0 * std::sqrt(h2) / M_PI) * (2.0 * h2 / 3.0);
    };
    if (panels % 2 != 0) ++panels;
    double a = -1.0, b = 1.0, h = (b - a) / panels;
    double s = f(a) + f(b);
    for (int k = 1; k < panels; ++k) s += f(a + k * h) * (k % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

}  // namespace fixtures
}  // namespace psot
