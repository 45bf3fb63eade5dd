#include "sfh/field.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include "sfh/errors.hpp"

namespace sfh::field {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kImagResidueThreshold = 1e-8;
} // namespace

FieldGrid FieldGrid::of_points(std::vector<SphericalPoint> pts) {
    if (pts.empty()) throw precondition_error("FieldGrid: empty point set");
    FieldGrid g;
    g.points = std::move(pts);
    return g;
}

FieldGrid FieldGrid::structured(std::vector<double> colatitudes, std::vector<double> longitudes) {
    if (colatitudes.empty() || longitudes.empty())
        throw precondition_error("FieldGrid: empty structured grid");
    FieldGrid g;
    g.points.reserve(colatitudes.size() * longitudes.size());
    for (double th : colatitudes)
        for (double ph : longitudes) g.points.emplace_back(th, ph);
    g.ring_colatitudes = std::move(colatitudes);
    g.ring_longitudes = std::move(longitudes);
    return g;
}

FieldSample evaluate_field(const CoefficientPathSet& coeffs, const FieldGrid& grid) {
    const int L = coeffs.truncation;
    const std::size_t nt = coeffs.times.size();
    const std::size_t np = grid.points.size();

    FieldSample out;
    out.times = coeffs.times;
    out.grid = grid;
    out.values.assign(nt * np, 0.0);
    out.seed = coeffs.seed;
    out.replicate = coeffs.replicate;
    out.truncation = L;

    for (std::size_t p = 0; p < np; ++p) {
        const auto table = harmonics::spherical_harmonic_table(L, grid.points[p]);
        for (std::size_t ti = 0; ti < nt; ++ti) {
            // fixed summation order over l then m keeps reruns bit-identical
            std::complex<double> acc{0.0, 0.0};
            for (int l = 0; l <= L; ++l) {
                const std::complex<double> y0 = table[harmonics::table_index(l, 0)];
                std::complex<double> row = coeffs.at(l, 0, ti) * y0;
                for (int m = 1; m <= l; ++m) {
                    const std::complex<double> y = table[harmonics::table_index(l, m)];
                    const std::complex<double> ym =
                        (m % 2 == 0) ? std::conj(y) : -std::conj(y);
                    row += coeffs.at(l, m, ti) * y + coeffs.at(l, -m, ti) * ym;
                }
                acc += row;
            }
            if (std::abs(acc.imag()) > kImagResidueThreshold)
                throw symmetry_error("field value has imaginary residue " +
                                         std::to_string(acc.imag()) +
                                         "; coefficient conjugation symmetry is broken",
                                     acc.imag());
            out.values[ti * np + p] = acc.real();
        }
    }
    return out;
}

CoefficientPathSet laplace_beltrami(const CoefficientPathSet& coeffs) {
    CoefficientPathSet out = coeffs;
    const std::size_t nt = out.times.size();
    for (int l = 0; l <= out.truncation; ++l) {
        const double mult = -static_cast<double>(l) * (l + 1.0);
        for (int m = 0; m <= l; ++m)
            for (std::size_t ti = 0; ti < nt; ++ti) out.ref(l, m, ti) *= mult;
    }
    return out;
}

CoefficientPathSet fractional_smoothing(const CoefficientPathSet& coeffs, double k) {
    CoefficientPathSet out = coeffs;
    if (k == 0.0) return out;
    const std::size_t nt = out.times.size();
    for (int l = 0; l <= out.truncation; ++l) {
        const double mult = std::pow(1.0 + static_cast<double>(l) * (l + 1.0), 0.5 * k);
        for (int m = 0; m <= l; ++m)
            for (std::size_t ti = 0; ti < nt; ++ti) out.ref(l, m, ti) *= mult;
    }
    return out;
}

std::vector<double> mode_covariances(const ModelParams& params, double t, double s,
                                     const QuadratureConfig& quad) {
    params.validate();
    const auto conv = params.convention();
    std::vector<double> u(static_cast<std::size_t>(params.truncation) + 1);
    for (int l = 0; l <= params.truncation; ++l)
        u[l] = fbm::u_cov_fast(l, t, s, power_coefficient(params, l),
                               initial_spectrum(params, l), conv, quad);
    return u;
}

double field_covariance_from_modes(const std::vector<double>& u_modes, double cos_angle) {
    const int L = static_cast<int>(u_modes.size()) - 1;
    const auto p = harmonics::legendre_p_all(L, cos_angle);
    double acc = 0.0;
    for (int l = 0; l <= L; ++l) acc += (2.0 * l + 1.0) / (4.0 * kPi) * u_modes[l] * p[l];
    return acc;
}

double field_covariance(const ModelParams& params, double t, double s,
                        const SphericalPoint& x, const SphericalPoint& y,
                        const QuadratureConfig& quad) {
    if (!(t >= 0.0 && s >= 0.0 && t <= params.horizon && s <= params.horizon))
        throw precondition_error("field_covariance: times outside [0, horizon]");
    const double angle = harmonics::geodesic_distance(x, y);
    return field_covariance_from_modes(mode_covariances(params, t, s, quad), std::cos(angle));
}

double noise_covariance(const ModelParams& params, double t, double s,
                        const SphericalPoint& x, const SphericalPoint& y) {
    params.validate();
    if (!(params.alpha > 2.0))
        throw std::domain_error(
            "noise_covariance: pointwise Lambda series requires alpha > 2");
    if (!(t >= 0.0 && s >= 0.0))
        throw precondition_error("noise_covariance: negative time");
    const auto conv = params.convention();
    const double cosa = std::cos(harmonics::geodesic_distance(x, y));
    const auto p = harmonics::legendre_p_all(params.truncation, cosa);
    double lambda = 0.0;
    for (int l = 0; l <= params.truncation; ++l)
        lambda += (2.0 * l + 1.0) / (4.0 * kPi) * power_coefficient(params, l) * p[l];
    return fbm::r_cov(t, s, conv) * lambda;
}

} // namespace sfh::field
