#include "sfh/fbm_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sfh/errors.hpp"

namespace sfh::fbm {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
} // namespace

FbmConvention::FbmConvention(double h) : hurst(h) {
    if (!(h > 0.5 && h < 1.0))
        throw std::domain_error("FbmConvention requires 1/2 < H < 1");
    alpha_h_ = h * (2.0 * h - 1.0);
    // c_H = [2^{2(1-H)} sqrt(pi)]^{-1} Gamma(H - 1/2) / Gamma(1 - H)
    c_h_ = std::tgamma(h - 0.5) / (std::pow(2.0, 2.0 * (1.0 - h)) * std::sqrt(kPi) * std::tgamma(1.0 - h));
    if (!(alpha_h_ > 0.0) || !std::isfinite(c_h_) || !(c_h_ > 0.0))
        throw std::domain_error("FbmConvention constants are not finite/positive");
}

ExpKernelSpec::ExpKernelSpec(double decay, double t) : decay_rate(decay), upper_time(t) {
    if (!(decay >= 0.0)) throw std::domain_error("ExpKernelSpec: decay rate must be >= 0");
    if (!(t > 0.0)) throw std::domain_error("ExpKernelSpec: upper time must be positive");
}

double r_cov(double t, double s, const FbmConvention& conv) {
    if (!(t >= 0.0 && s >= 0.0)) throw std::domain_error("r_cov: negative time");
    const double twoH = 2.0 * conv.hurst;
    return 0.5 * (std::pow(t, twoH) + std::pow(s, twoH) - std::pow(std::abs(t - s), twoH));
}

namespace {

// E(u) = \int e^{-da (ta - x)} e^{-db (tb - x + u)} dx over
// x in [max(0,u), min(ta, tb + u)]; the inner profile of the u-substituted
// double integral.  All exponents are <= 0 by construction.
struct PairProfile {
    double da, ta, db, tb;

    double operator()(double u) const {
        const double lo = std::max(0.0, u);
        const double hi = std::min(ta, tb + u);
        if (hi <= lo) return 0.0;
        const double s = da + db;
        if (s == 0.0) return hi - lo;
        // p >= q are both <= 0; e^p (1 - e^{q-p}) never over/underflows
        const double p = -da * (ta - hi) - db * (tb + u - hi);
        const double q = -da * (ta - lo) - db * (tb + u - lo);
        return -std::exp(p) * std::expm1(q - p) / s;
    }
};

} // namespace

double weighted_inner(const ExpKernelSpec& a_in, const ExpKernelSpec& b_in,
                      const FbmConvention& conv, const QuadratureConfig& quad) {
    // canonical argument order makes the bilinear form symmetric bit-for-bit
    const bool swap = (a_in.upper_time < b_in.upper_time) ||
                      (a_in.upper_time == b_in.upper_time && a_in.decay_rate < b_in.decay_rate);
    const ExpKernelSpec& a = swap ? b_in : a_in;
    const ExpKernelSpec& b = swap ? a_in : b_in;
    const double expo = 2.0 * conv.hurst - 1.0; // weight |u|^{expo - 1}
    PairProfile prof{a.decay_rate, a.upper_time, b.decay_rate, b.upper_time};

    // The profile E decays away from the kink at u = ta - tb on the scale of
    // the kernel decay rates; seed panels there so a narrow spike cannot
    // hide at a panel edge.
    auto spike_cuts = [&](double kink, double X) {
        std::vector<double> cuts;
        if (kink > 0.0 && kink < X) cuts.push_back(kink);
        const double s = a.decay_rate + b.decay_rate;
        if (s > 0.0) {
            for (double k : {1.0, 3.0, 10.0, 30.0}) {
                const double w = k / s;
                if (kink - w > 0.0 && kink - w < X) cuts.push_back(kink - w);
                if (kink + w > 0.0 && kink + w < X) cuts.push_back(kink + w);
                if (w < X) cuts.push_back(w); // scale near the u = 0 edge
            }
        }
        return cuts;
    };

    const double kink = a.upper_time - b.upper_time; // >= 0 after ordering
    QuadratureResult pos = integrate_power_weighted(
        [&](double u) { return prof(u); }, a.upper_time, expo, quad, spike_cuts(kink, a.upper_time));
    QuadratureResult neg = integrate_power_weighted(
        [&](double u) { return prof(-u); }, b.upper_time, expo, quad, spike_cuts(-kink, b.upper_time));

    return conv.alpha_h() * (pos.value + neg.value);
}

double sigma_l_sq(int degree, double t, const FbmConvention& conv,
                  const QuadratureConfig& quad) {
    if (degree < 0) throw std::domain_error("sigma_l_sq: negative degree");
    if (!(t > 0.0)) throw std::domain_error("sigma_l_sq: t must be positive");
    const double b = static_cast<double>(degree) * (degree + 1.0);
    const ExpKernelSpec g(b, t);
    return weighted_inner(g, g, conv, quad);
}

double c33_closed(double hurst) { return kPi / std::sin(kPi * hurst); }

double c33(const FbmConvention& conv, const QuadratureConfig& quad) {
    const double h = conv.hurst;
    if (h < 0.5 + 1e-3)
        throw std::domain_error("c33: requires H >= 0.5 + 1e-3");
    // 2 [ \int_0^1 tau^{1-2H}/(1+tau^2) dtau + \int_0^1 v^{2H-1}/(1+v^2) dv ]
    // (second piece is the tail, mapped by tau -> 1/v)
    QuadratureResult head = integrate_power_weighted(
        [](double tau) { return 1.0 / (1.0 + tau * tau); }, 1.0, 2.0 - 2.0 * h, quad);
    QuadratureResult tail = integrate(
        [h](double v) { return std::pow(v, 2.0 * h - 1.0) / (1.0 + v * v); }, 0.0, 1.0, quad);
    return 2.0 * (head.value + tail.value);
}

namespace detail {

namespace {

// Continued fraction for Gamma(a,x) * e^{x} * x^{-a}, valid for x >= a + 1.
double upper_gamma_cf(double a, double x) {
    const double tiny = 1e-300;
    double b0 = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b0;
    double f = d;
    for (int i = 1; i <= 300; ++i) {
        const double an = -static_cast<double>(i) * (i - a);
        b0 += 2.0;
        d = an * d + b0;
        if (std::abs(d) < tiny) d = tiny;
        c = b0 + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return f;
}

} // namespace

double gamma_lower(double a, double x) {
    if (x <= 0.0) return 0.0;
    if (x < a + 1.0) {
        double term = 1.0 / a;
        double sum = term;
        for (int n = 1; n <= 500; ++n) {
            term *= x / (a + n);
            sum += term;
            if (term < 1e-17 * sum) break;
        }
        return std::pow(x, a) * std::exp(-x) * sum;
    }
    const double log_tail = -x + a * std::log(x);
    const double tail = (log_tail < -700.0) ? 0.0 : std::exp(log_tail) * upper_gamma_cf(a, x);
    return std::tgamma(a) - tail;
}

double etilde(double a, double x) {
    if (x <= 0.0) return std::tgamma(a);
    if (x < a + 1.0) return std::exp(x) * (std::tgamma(a) - gamma_lower(a, x));
    return std::pow(x, a) * upper_gamma_cf(a, x);
}

double btilde(double a, double x) {
    if (x <= 0.0) return 0.0;
    if (x <= 40.0) {
        double term = std::pow(x, a) / a;
        double sum = term;
        for (int k = 1; k <= 500; ++k) {
            term *= x * (a + k - 1.0) / (static_cast<double>(k) * (a + k));
            sum += term;
            if (term < 1e-17 * sum) break;
        }
        return std::exp(-x) * sum;
    }
    // asymptotic: x^{a-1} (1 + (1-a)/x + (1-a)(2-a)/x^2 + ...)
    double term = 1.0, sum = 1.0;
    for (int j = 1; j <= 40; ++j) {
        term *= (static_cast<double>(j) - a) / x;
        if (term < 1e-17 * sum) break;
        sum += term;
    }
    return std::pow(x, a - 1.0) * sum;
}

} // namespace detail

double mode_noise_cov(double decay, double t, double s, const FbmConvention& conv,
                      const QuadratureConfig& quad) {
    if (!(t >= 0.0 && s >= 0.0)) throw std::domain_error("mode_noise_cov: negative time");
    if (t < s) std::swap(t, s);
    if (s == 0.0) return 0.0;
    if (decay == 0.0) return r_cov(t, s, conv);

    const double xt = decay * t;
    if (xt < 0.5) {
        // closed form cancels catastrophically here; quadrature is cheap
        return weighted_inner(ExpKernelSpec(decay, t), ExpKernelSpec(decay, s), conv, quad);
    }
    const double a = 2.0 * conv.hurst - 1.0;
    const double xd = decay * (t - s);
    const double xs = decay * s;
    using detail::btilde;
    using detail::etilde;
    using detail::gamma_lower;
    const double braces = std::exp(-xd) * gamma_lower(a, xs) + btilde(a, xd) + etilde(a, xd) -
                          std::exp(-xt) * btilde(a, xs) - std::exp(-xs) * btilde(a, xt) -
                          std::exp(-xs) * etilde(a, xt);
    return 0.5 * conv.alpha_h() * std::pow(decay, -2.0 * conv.hurst) * braces;
}

double stationary_mode_cov(double decay, double lag, const FbmConvention& conv) {
    if (!(decay > 0.0)) throw std::domain_error("stationary_mode_cov: decay must be positive");
    const double a = 2.0 * conv.hurst - 1.0;
    const double x = decay * std::abs(lag);
    const double braces = std::exp(-x) * std::tgamma(a) + detail::btilde(a, x) + detail::etilde(a, x);
    return 0.5 * conv.alpha_h() * std::pow(decay, -2.0 * conv.hurst) * braces;
}

double u_cov(int degree, double t, double s, double c_l, double d_l,
             const FbmConvention& conv, const QuadratureConfig& quad) {
    if (degree < 0) throw std::domain_error("u_cov: negative degree");
    if (!(t >= 0.0 && s >= 0.0)) throw std::domain_error("u_cov: negative time");
    if (!(c_l >= 0.0 && d_l >= 0.0)) throw std::domain_error("u_cov: negative spectrum");
    const double b = static_cast<double>(degree) * (degree + 1.0);
    double value = d_l * std::exp(-b * (t + s));
    if (c_l > 0.0 && t > 0.0 && s > 0.0)
        value += c_l * weighted_inner(ExpKernelSpec(b, t), ExpKernelSpec(b, s), conv, quad);
    return value;
}

double u_cov_fast(int degree, double t, double s, double c_l, double d_l,
                  const FbmConvention& conv, const QuadratureConfig& quad) {
    if (degree < 0) throw std::domain_error("u_cov_fast: negative degree");
    const double b = static_cast<double>(degree) * (degree + 1.0);
    double value = d_l * std::exp(-b * (t + s));
    if (c_l > 0.0 && t > 0.0 && s > 0.0)
        value += c_l * mode_noise_cov(b, t, s, conv, quad);
    return value;
}

namespace {

// J(t, b) = \int_0^infty cos(t tau) tau^{1-2H} / (b^2 + tau^2) dtau,
// adaptive on [0, X] plus a two-term integration-by-parts tail.
double oscillatory_tail_integral(double t, double b, double hurst,
                                 const QuadratureConfig& quad, double err_budget) {
    const double nu = 1.0 - 2.0 * hurst;
    const double x_from_tail =
        std::pow(80.0 / ((3.0 - nu) * t * t * std::max(err_budget, 1e-300)), 1.0 / (3.0 - nu));
    const double X = std::max({3.0 * b, 20.0 / t, 2.0, x_from_tail});

    auto phi = [&](double tau) { return std::pow(tau, nu) / (b * b + tau * tau); };

    QuadratureConfig local = quad;
    local.abs_tol = std::max(0.25 * err_budget, 1e-300);
    local.rel_tol = 1e-12;
    local.max_subdivisions = 60000;

    QuadratureResult head = integrate_power_weighted(
        [&](double tau) { return std::cos(t * tau) / (b * b + tau * tau); },
        std::min(1.0, X), nu + 1.0, local);

    double mid_value = 0.0;
    if (X > 1.0) {
        // seed panels so no oscillation is wider than ~one panel
        std::vector<double> cuts;
        if (b > 1.0 && b < X) cuts.push_back(b);
        const double osc = kPi / t;
        if (osc < X - 1.0) {
            const int n = static_cast<int>((X - 1.0) / osc);
            const int stride = std::max(1, n / 512);
            for (int i = 1; i <= n; i += stride) cuts.push_back(1.0 + i * osc);
        }
        mid_value = integrate([&](double tau) { return std::cos(t * tau) * phi(tau); },
                              1.0, X, local, cuts)
                        .value;
    }

    const double phiX = phi(X);
    const double dphiX = nu * std::pow(X, nu - 1.0) / (b * b + X * X) -
                         2.0 * std::pow(X, nu + 1.0) / ((b * b + X * X) * (b * b + X * X));
    const double tail = -std::sin(t * X) * phiX / t - std::cos(t * X) * dphiX / (t * t);
    return head.value + mid_value + tail;
}

} // namespace

double sigma_l_sq_fourier(int degree, double t, const FbmConvention& conv,
                          const QuadratureConfig& quad) {
    if (degree == 0)
        throw std::domain_error("sigma_l_sq_fourier: l = 0 degenerates; use the time-domain engine");
    if (degree < 0) throw std::domain_error("sigma_l_sq_fourier: negative degree");
    if (!(t > 0.0)) throw std::domain_error("sigma_l_sq_fourier: t must be positive");

    const double h = conv.hurst;
    if (h < 0.5 + 1e-3)
        throw std::domain_error("sigma_l_sq_fourier: requires H >= 0.5 + 1e-3");
    const double b = static_cast<double>(degree) * (degree + 1.0);
    const double x = b * t;
    const double ac = conv.alpha_h() * conv.c_h();
    const double plateau_scale = std::pow(b, -2.0 * h);

    // |ghat|^2 = [1 + e^{-2x} - 2 e^{-x} cos(t tau)] / (b^2 + tau^2); the
    // non-oscillatory part integrates in closed form through c33
    double value = ac * (1.0 + std::exp(-2.0 * x)) * c33_closed(h) * plateau_scale;
    if (x < 40.0) {
        const double sigma_floor =
            0.05 * h * std::tgamma(2.0 * h) * std::min(std::pow(t, 2.0 * h), plateau_scale);
        const double prefactor = 4.0 * ac * std::exp(-x);
        const double err_budget =
            std::max(quad.abs_tol, quad.rel_tol * sigma_floor) / std::max(prefactor, 1e-30);
        const double j = oscillatory_tail_integral(t, b, h, quad, 0.5 * err_budget);
        value -= prefactor * j;
    }
    return value;
}

} // namespace sfh::fbm
