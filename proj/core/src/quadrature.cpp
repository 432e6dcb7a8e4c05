#include "qkpz/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <utility>
#include <vector>

namespace qkpz {

namespace {

double simpson(const std::function<double(double)>& f, double a, double fa, double b,
               double fb, double m, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive(const std::function<double(double)>& f, double a, double fa, double b,
                double fb, double m, double fm, double whole, double tol, int depth) {
    if (depth > 60) throw QuadratureFailure("adaptive quadrature recursion limit");
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(f, a, fa, m, fm, lm, flm);
    const double right = simpson(f, m, fm, b, fb, rm, frm);
    const double delta = left + right - whole;
    if (std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth + 1) +
           adaptive(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth + 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    if (!(a < b)) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(m);
    return adaptive(f, a, fa, b, fb, m, fm, simpson(f, a, fa, b, fb, m, fm), tol, 0);
}

Mollifier Mollifier::poly_bump() {
    Mollifier m;
    m.support = 1.0;
    m.rho = [](double x) {
        if (std::fabs(x) >= 1.0) return 0.0;
        const double w = 1.0 - x * x;
        return 15.0 / 16.0 * w * w;
    };
    return m;
}

Mollifier Mollifier::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw QuadratureFailure("cannot open mollifier table: " + path);
    std::vector<std::pair<double, double>> pts;
    double x, y;
    while (in >> x >> y) pts.emplace_back(x, y);
    if (pts.size() < 2) throw QuadratureFailure("mollifier table needs >= 2 points");
    std::sort(pts.begin(), pts.end());
    for (size_t i = 1; i < pts.size(); ++i)
        if (pts[i].first == pts[i - 1].first)
            throw QuadratureFailure("duplicate abscissa in mollifier table");

    Mollifier m;
    m.support = std::max(std::fabs(pts.front().first), std::fabs(pts.back().first));
    m.rho = [pts = std::move(pts)](double v) {
        if (v <= pts.front().first || v >= pts.back().first) return 0.0;
        auto it = std::upper_bound(pts.begin(), pts.end(), std::make_pair(v, 0.0),
                                   [](const auto& a, const auto& b) { return a.first < b.first; });
        const auto& [x1, y1] = *it;
        const auto& [x0, y0] = *(it - 1);
        return y0 + (y1 - y0) * (v - x0) / (x1 - x0);
    };
    return m;
}

double ito_constant(const Mollifier& rho, double eps) {
    if (!(eps > 0.0)) throw QuadratureFailure("ito_constant needs eps > 0");
    const double r = rho.support * eps;
    auto f = [&](double x) {
        const double v = rho.rho(x / eps) / eps;
        return v * v;
    };
    return integrate(f, -r, r, 1e-12);
}

}  // namespace qkpz
