#include "sfh/harmonics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "sfh/quadrature.hpp"

namespace sfh::harmonics {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kTwoPi = 2.0 * kPi;
constexpr double kInvSqrt4Pi = 0.28209479177387814347403972578039; // 1/sqrt(4*pi)
} // namespace

SphericalPoint::SphericalPoint(double colat, double lon) {
    if (!std::isfinite(colat) || !std::isfinite(lon))
        throw std::domain_error("spherical point coordinates must be finite");
    colat = std::fmod(colat, kTwoPi);
    if (colat < 0.0) colat += kTwoPi;
    if (colat > kPi) { // fold through the pole
        colat = kTwoPi - colat;
        lon += kPi;
    }
    lon = std::fmod(lon, kTwoPi);
    if (lon < 0.0) lon += kTwoPi;
    colatitude = colat;
    longitude = lon;
}

std::array<double, 3> SphericalPoint::unit_vector() const {
    const double st = std::sin(colatitude);
    return {st * std::cos(longitude), st * std::sin(longitude), std::cos(colatitude)};
}

SphericalPoint SphericalPoint::from_unit_vector(const std::array<double, 3>& v) {
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (!(n > 0.0)) throw std::domain_error("cannot normalize a zero vector");
    const double z = std::min(1.0, std::max(-1.0, v[2] / n));
    return SphericalPoint(std::acos(z), std::atan2(v[1], v[0]));
}

HarmonicIndex::HarmonicIndex(int l, int m) : degree(l), order(m) {
    if (l < 0 || std::abs(m) > l)
        throw std::domain_error("harmonic index requires l >= 0 and |m| <= l");
}

double legendre_p(int degree, double x) {
    if (degree < 0) throw std::domain_error("legendre_p: negative degree");
    if (!(x >= -1.0 && x <= 1.0)) throw std::domain_error("legendre_p: x outside [-1,1]");
    double p0 = 1.0;
    if (degree == 0) return p0;
    double p1 = x;
    for (int k = 1; k < degree; ++k) {
        const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

std::vector<double> legendre_p_all(int max_degree, double x) {
    if (max_degree < 0) throw std::domain_error("legendre_p_all: negative degree");
    if (!(x >= -1.0 && x <= 1.0)) throw std::domain_error("legendre_p_all: x outside [-1,1]");
    std::vector<double> p(static_cast<std::size_t>(max_degree) + 1);
    p[0] = 1.0;
    if (max_degree >= 1) p[1] = x;
    for (int k = 1; k < max_degree; ++k)
        p[k + 1] = ((2.0 * k + 1.0) * x * p[k] - k * p[k - 1]) / (k + 1.0);
    return p;
}

namespace {

// Fully normalized associated Legendre P~_l^m(cos theta) with the
// Condon-Shortley phase folded in, so Y_lm = P~_l^m * exp(i m phi).
// The normalization keeps every intermediate O(1); no overflow up to the
// degrees this library supports.
double normalized_plm(int l, int m, double ct, double st) {
    double pmm = kInvSqrt4Pi; // m = 0 seed: sqrt(1/(4*pi))
    for (int i = 1; i <= m; ++i)
        pmm *= -st * std::sqrt((2.0 * i + 1.0) / (2.0 * i));
    if (l == m) return pmm;
    double pm1 = ct * std::sqrt(2.0 * m + 3.0) * pmm;
    if (l == m + 1) return pm1;
    double pll = 0.0;
    for (int ll = m + 2; ll <= l; ++ll) {
        const double f = std::sqrt((4.0 * ll * ll - 1.0) / (static_cast<double>(ll) * ll - static_cast<double>(m) * m));
        const double g = std::sqrt(((ll - 1.0) * (ll - 1.0) - static_cast<double>(m) * m) / (4.0 * (ll - 1.0) * (ll - 1.0) - 1.0));
        pll = f * (ct * pm1 - g * pmm);
        pmm = pm1;
        pm1 = pll;
    }
    return pll;
}

} // namespace

std::complex<double> spherical_harmonic(const HarmonicIndex& idx, const SphericalPoint& p) {
    const int l = idx.degree;
    const int m = std::abs(idx.order);
    const double ct = std::cos(p.colatitude);
    const double st = std::sin(p.colatitude);
    const double plm = normalized_plm(l, m, ct, st);
    const std::complex<double> y(plm * std::cos(m * p.longitude), plm * std::sin(m * p.longitude));
    if (idx.order >= 0) return y;
    const std::complex<double> conj_y = std::conj(y);
    return (m % 2 == 0) ? conj_y : -conj_y;
}

std::vector<std::complex<double>> spherical_harmonic_table(int max_degree,
                                                           const SphericalPoint& p) {
    if (max_degree < 0) throw std::domain_error("spherical_harmonic_table: negative degree");
    const int L = max_degree;
    std::vector<std::complex<double>> out(table_index(L, L) + 1);
    const double ct = std::cos(p.colatitude);
    const double st = std::sin(p.colatitude);
    std::vector<double> cm(static_cast<std::size_t>(L) + 1), sm(cm.size());
    for (int m = 0; m <= L; ++m) {
        cm[m] = std::cos(m * p.longitude);
        sm[m] = std::sin(m * p.longitude);
    }
    for (int m = 0; m <= L; ++m) {
        double pmm = kInvSqrt4Pi;
        for (int i = 1; i <= m; ++i)
            pmm *= -st * std::sqrt((2.0 * i + 1.0) / (2.0 * i));
        double prev = 0.0, cur = pmm;
        for (int l = m; l <= L; ++l) {
            out[table_index(l, m)] = std::complex<double>(cur * cm[m], cur * sm[m]);
            double next;
            if (l == m) {
                next = ct * std::sqrt(2.0 * m + 3.0) * cur;
            } else {
                const int ll = l + 1;
                const double f = std::sqrt((4.0 * ll * ll - 1.0) / (static_cast<double>(ll) * ll - static_cast<double>(m) * m));
                const double g = std::sqrt((static_cast<double>(l) * l - static_cast<double>(m) * m) / (4.0 * static_cast<double>(l) * l - 1.0));
                next = f * (ct * cur - g * prev);
            }
            prev = cur;
            cur = next;
        }
    }
    return out;
}

double geodesic_distance(const SphericalPoint& x, const SphericalPoint& y) {
    const auto u = x.unit_vector();
    const auto v = y.unit_vector();
    double dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    dot = std::min(1.0, std::max(-1.0, dot));
    return std::acos(dot);
}

double bessel_j0(double x) {
    x = std::abs(x); // J_0 is even
    if (x <= 12.0) {
        const double q = 0.25 * x * x;
        double term = 1.0, sum = 1.0;
        for (int k = 1; k < 200; ++k) {
            term *= -q / (static_cast<double>(k) * k);
            sum += term;
            if (std::abs(term) < 1e-18 * (std::abs(sum) + 1e-300)) break;
        }
        return sum;
    }
    // J_0(x) = (1/pi) \int_0^pi cos(x sin(phi)) dphi
    QuadratureConfig cfg;
    cfg.abs_tol = 1e-14;
    cfg.rel_tol = 1e-12;
    cfg.max_subdivisions = 20000;
    std::vector<double> cuts;
    const int n = static_cast<int>(x) + 8;
    cuts.reserve(static_cast<std::size_t>(n));
    for (int i = 1; i < n; ++i) cuts.push_back(kPi * i / n);
    auto f = [x](double phi) { return std::cos(x * std::sin(phi)); };
    return integrate(f, 0.0, kPi, cfg, cuts).value / kPi;
}

double hilb_approx(int degree, double theta) {
    if (degree < 0) throw std::domain_error("hilb_approx: negative degree");
    if (!(theta > 0.0 && theta < kPi))
        throw std::domain_error("hilb_approx: theta must lie strictly inside (0, pi)");
    return std::sqrt(theta / std::sin(theta)) * bessel_j0((degree + 0.5) * theta);
}

} // namespace sfh::harmonics
