#include "sfh/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "sfh/errors.hpp"

namespace sfh {
namespace {

// 15-point Kronrod nodes/weights with embedded 7-point Gauss rule.
const double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
const double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
const double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fv1[7], fv2[7];
    const double fc = f(c);
    double resk = kWgk[7] * fc;
    double resg = kWg[3] * fc;
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        fv1[j] = f(c - dx);
        fv2[j] = f(c + dx);
        resk += kWgk[j] * (fv1[j] + fv2[j]);
        if (j % 2 == 1) resg += kWg[j / 2] * (fv1[j] + fv2[j]);
    }
    // QUADPACK-style scaled error estimate
    const double reskh = resk * 0.5;
    double resasc = kWgk[7] * std::abs(fc - reskh);
    for (int j = 0; j < 7; ++j)
        resasc += kWgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));
    resasc *= std::abs(h);
    double err = std::abs((resk - resg) * h);
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    return {a, b, resk * h, err};
}

} // namespace

void QuadratureConfig::validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
        throw precondition_error("quadrature tolerances must be positive");
    if (max_subdivisions < 1)
        throw precondition_error("quadrature subdivision budget must be positive");
}

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureConfig& cfg,
                           const std::vector<double>& breakpoints) {
    cfg.validate();
    if (a == b) return {0.0, 0.0, 0};
    if (a > b) {
        QuadratureResult r = integrate(f, b, a, cfg, breakpoints);
        r.value = -r.value;
        return r;
    }

    std::vector<double> cuts{a, b};
    for (double x : breakpoints)
        if (x > a && x < b) cuts.push_back(x);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::priority_queue<Panel> heap;
    double total = 0.0, err = 0.0;
    int panels = 0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        Panel p = gk15(f, cuts[i], cuts[i + 1]);
        total += p.value;
        err += p.error;
        ++panels;
        heap.push(p);
    }

    while (true) {
        const double target = std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total));
        if (err <= target) break;
        if (panels >= cfg.max_subdivisions) {
            if (err <= 10.0 * target) break; // near miss: accept rather than abort
            throw convergence_error("adaptive quadrature exhausted its subdivision budget", err);
        }
        Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        Panel left = gk15(f, worst.a, mid);
        Panel right = gk15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        err = std::max(err, 0.0);
        heap.push(left);
        heap.push(right);
        ++panels;
    }
    return {total, err, panels};
}

QuadratureResult integrate_power_weighted(const std::function<double(double)>& f,
                                          double X, double p,
                                          const QuadratureConfig& cfg,
                                          const std::vector<double>& breakpoints) {
    if (!(p > 0.0 && p < 1.0))
        throw precondition_error("integrate_power_weighted requires exponent in (0,1)");
    if (X <= 0.0) return {0.0, 0.0, 0};
    const double inv_p = 1.0 / p;
    auto g = [&](double w) { return f(std::pow(w, inv_p)); };
    std::vector<double> cuts;
    cuts.reserve(breakpoints.size());
    for (double x : breakpoints)
        if (x > 0.0 && x < X) cuts.push_back(std::pow(x, p));
    QuadratureResult r = integrate(g, 0.0, std::pow(X, p), cfg, cuts);
    r.value *= inv_p;
    r.error *= inv_p;
    return r;
}

} // namespace sfh
