#pragma once

#include <array>
#include <complex>
#include <vector>

namespace sfh::harmonics {

// Point on the unit sphere in (colatitude, longitude) coordinates.
// The constructor normalizes: colatitude is folded into [0, pi] and
// longitude wrapped into [0, 2*pi).
struct SphericalPoint {
    double colatitude = 0.0;
    double longitude = 0.0;

    SphericalPoint() = default;
    SphericalPoint(double colat, double lon);

    std::array<double, 3> unit_vector() const;
    static SphericalPoint from_unit_vector(const std::array<double, 3>& v);
};

struct HarmonicIndex {
    int degree = 0; // l >= 0
    int order = 0;  // |m| <= l

    HarmonicIndex(int l, int m);
};

// Legendre polynomial P_l(x) by the Bonnet three-term recurrence.
// P_l(1) == 1 exactly.  Throws std::domain_error for |x| > 1 or l < 0.
double legendre_p(int degree, double x);

// All of P_0(x) .. P_L(x) in one recurrence pass.
std::vector<double> legendre_p_all(int max_degree, double x);

// Orthonormal complex spherical harmonic with Condon-Shortley phase.
// Satisfies Y_{l,-m} = (-1)^m * conj(Y_{lm}).
std::complex<double> spherical_harmonic(const HarmonicIndex& idx, const SphericalPoint& p);

// Table of Y_{lm}(p) for all 0 <= l <= L, 0 <= m <= l, packed so that
// entry (l, m) sits at l*(l+1)/2 + m.  Negative orders follow from
// conjugation.
std::vector<std::complex<double>> spherical_harmonic_table(int max_degree,
                                                           const SphericalPoint& p);

inline std::size_t table_index(int l, int m) {
    return static_cast<std::size_t>(l) * (l + 1) / 2 + static_cast<std::size_t>(m);
}

// Geodesic (great-circle) distance in radians; inner product is clamped to
// [-1, 1] before acos, so antipodal round-off cannot escape the domain.
double geodesic_distance(const SphericalPoint& x, const SphericalPoint& y);

// Bessel function of the first kind, order zero.  Power series for small
// arguments, integral representation for large ones.
double bessel_j0(double x);

// Hilb main-term approximation to P_l(cos theta):
//   sqrt(theta/sin(theta)) * J_0((l + 1/2) theta),  0 < theta < pi.
// Test oracle only; throws std::domain_error at the endpoints.
double hilb_approx(int degree, double theta);

} // namespace sfh::harmonics
